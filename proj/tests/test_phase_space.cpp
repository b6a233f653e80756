#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <opfield/symbol.hpp>

using namespace opfield;

namespace {

PolySymbol random_symbol(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::uniform_int_distribution<int> expo(0, 2);
    PolySymbol out(n);
    for (int t = 0; t < 4; ++t) {
        MultiIndex idx(2 * n, 0);
        int total = 0;
        for (int i = 0; i < 2 * n; ++i) {
            int e = expo(rng);
            if (total + e > 4) e = 0;
            idx[i] = e;
            total += e;
        }
        int c = coeff(rng);
        if (c == 0) c = 1;
        out.add_term(idx, static_cast<double>(c));
    }
    return out;
}

} // namespace

TEST_CASE("canonical bracket relations") {
    const int n = 2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            PolySymbol qi = PolySymbol::coordinate_q(n, i);
            PolySymbol pj = PolySymbol::coordinate_p(n, j);
            PolySymbol want = PolySymbol::constant(n, i == j ? 1.0 : 0.0);
            REQUIRE(poisson_bracket(pj, qi).max_coeff_difference(want) == 0.0);
            REQUIRE(poisson_bracket(qi, PolySymbol::coordinate_q(n, j))
                        .max_coeff_difference(PolySymbol(n)) == 0.0);
            REQUIRE(poisson_bracket(pj, PolySymbol::coordinate_p(n, i))
                        .max_coeff_difference(PolySymbol(n)) == 0.0);
        }
}

TEST_CASE("bracket axioms on random symbols") {
    std::mt19937_64 rng(7);
    const int n = 2;
    for (int rep = 0; rep < 10; ++rep) {
        PolySymbol u = random_symbol(n, rng);
        PolySymbol v = random_symbol(n, rng);
        PolySymbol w = random_symbol(n, rng);
        REQUIRE((poisson_bracket(u, v) + poisson_bracket(v, u))
                    .max_coeff_difference(PolySymbol(n)) < 1e-12);
        PolySymbol lhs = poisson_bracket(u, v * w);
        PolySymbol rhs =
            poisson_bracket(u, v) * w + v * poisson_bracket(u, w);
        REQUIRE(lhs.max_coeff_difference(rhs) < 1e-12);
        PolySymbol cyc = poisson_bracket(u, poisson_bracket(v, w)) +
                         poisson_bracket(v, poisson_bracket(w, u)) +
                         poisson_bracket(w, poisson_bracket(u, v));
        REQUIRE(cyc.max_coeff_difference(PolySymbol(n)) < 1e-12);
    }
}

TEST_CASE("angular momentum is a constant of motion") {
    const int n = 2;
    PolySymbol l = angular_momentum(1, 2, n);
    REQUIRE(is_constant_of_motion(l, PolySymbol::q_norm_squared(n)));
    REQUIRE(is_constant_of_motion(l * l, PolySymbol::q_norm_squared(n)));
    REQUIRE(is_constant_of_motion(l, PolySymbol::qdotp(n)));
    // q_1 is not invariant under rotations generated by ||q||^2's flow pair
    REQUIRE_FALSE(is_constant_of_motion(PolySymbol::coordinate_q(n, 0),
                                        PolySymbol::qdotp(n)));
}

TEST_CASE("dilation pullback of the radius squared") {
    const int n = 2;
    const double t = std::log(2.0);
    LinearSymplecticMap S = LinearSymplecticMap::dilation(n, t);
    PolySymbol q2 = PolySymbol::q_norm_squared(n);
    PolySymbol pulled = flow_pullback(q2, S);
    REQUIRE(pulled.max_coeff_difference(4.0 * q2) < 1e-12);
}

TEST_CASE("fourier rotation swaps position and momentum") {
    const int n = 2;
    LinearSymplecticMap F = LinearSymplecticMap::fourier_rotation(n);
    PolySymbol q2 = PolySymbol::q_norm_squared(n);
    PolySymbol p2(n);
    for (int i = 0; i < n; ++i) {
        PolySymbol pi = PolySymbol::coordinate_p(n, i);
        p2 = p2 + pi * pi;
    }
    REQUIRE(flow_pullback(q2, F).max_coeff_difference(p2) < 1e-12);
}

TEST_CASE("bracket with the dilation generator scales homogeneously") {
    const int n = 2;
    PolySymbol h0 = PolySymbol::qdotp(n);
    PolySymbol q2 = PolySymbol::q_norm_squared(n);
    // {q.p, ||q||^2} = 2 ||q||^2 with this sign convention
    REQUIRE(poisson_bracket(h0, q2).max_coeff_difference(2.0 * q2) < 1e-12);
}

TEST_CASE("symbol text round trip") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        PolySymbol u = random_symbol(2, rng);
        PolySymbol back = PolySymbol::deserialize(u.serialize(), 2);
        REQUIRE(u.max_coeff_difference(back) == 0.0);
    }
    // complex coefficients survive too
    PolySymbol c(2);
    MultiIndex idx(4, 0);
    idx[0] = 2;
    idx[3] = 1;
    c.add_term(idx, Complex(0.5, -1.25));
    REQUIRE(c.max_coeff_difference(
                PolySymbol::deserialize(c.serialize(), 2)) == 0.0);
    REQUIRE_THROWS(PolySymbol::deserialize("beta=(0,0) alpha=(1,0) 1 0", 2));
}

TEST_CASE("poisson connection identities on monomial fields") {
    const int n = 2;
    PolySymbol q2 = PolySymbol::q_norm_squared(n);
    PolySymbol l = angular_momentum(1, 2, n);
    for (auto [j, k] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{1, 3}}) {
        RadialVectorField X = RadialVectorField::monomial_family(j);
        RadialVectorField Y = RadialVectorField::monomial_family(k);
        PoissonConnectionReport rep =
            poisson_connection_identity_check(X, Y, q2, l);
        REQUIRE(rep.leibniz_defect < 1e-12);
        REQUIRE(rep.curvature_defect < 1e-12);
    }
}
