#include <catch2/catch_amalgamated.hpp>

#include <opfield/operator_field.hpp>

using namespace opfield;

namespace {
const PolarGrid kGrid{};

PolySymbol sym_q2() { return PolySymbol::q_norm_squared(2); }
PolySymbol sym_l() { return angular_momentum(1, 2, 2); }
} // namespace

TEST_CASE("constant-of-motion operators are decomposable, -i d/ds is not") {
    for (const PolySymbol& u : {sym_q2(), sym_l(), sym_q2() * sym_l()}) {
        PolarDiffOperator O = quantize_diffop(u, kGrid);
        REQUIRE(decomposability_defect(as_section_map(O), kGrid) < 1e-12);
    }
    // control: the log-radial derivative mixes fibers
    SectionMap dsm = [](const PolarSection& phi) {
        PolarSection out(phi.grid);
        out.values = Complex(0, -1) * section_ds(phi.grid, phi.values);
        return out;
    };
    REQUIRE(decomposability_defect(dsm, kGrid) > 0.05);
}

TEST_CASE("fiber extraction is exact for multiplication and angular momentum") {
    ExtractionResult rq = extract_fibers(quantize_diffop(sym_q2(), kGrid));
    REQUIRE(rq.leakage < 1e-12);
    for (int i = 0; i < kGrid.S; ++i)
        REQUIRE((rq.field.fibers[i] -
                 kGrid.lambda(i) * Eigen::MatrixXcd::Identity(kGrid.M, kGrid.M))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
    ExtractionResult rl = extract_fibers(quantize_diffop(sym_l(), kGrid));
    Eigen::MatrixXcd want = angular_derivative_matrix(kGrid.M, 1);
    for (int i = 0; i < kGrid.S; ++i)
        REQUIRE((rl.field.fibers[i] - Complex(0, -1) * want)
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
}

TEST_CASE("probed extraction agrees with the exact one") {
    PolarDiffOperator O = quantize_diffop(sym_q2() * sym_l(), kGrid);
    OperatorField exact = extract_fibers(O).field;
    OperatorField probed = extract_fibers_probed(as_section_map(O), kGrid);
    for (int i = probed.interior_lo; i < probed.interior_hi; ++i)
        REQUIRE(fiber_operator_norm(exact.fibers[i] - probed.fibers[i]) <
                1e-10);
}

TEST_CASE("the two derivative routes agree on the battery") {
    RadialVectorField X0 = RadialVectorField::euler_generator();
    OperatorField A = extract_fibers(quantize_diffop(sym_q2(), kGrid)).field;
    OperatorField d1 = nabla_hat_trivialized(X0, A);
    ExtractionResult d2 = nabla_hat_commutator(X0, as_section_map(A), kGrid);
    double worst = 0.0;
    for (int i = d1.interior_lo; i < d1.interior_hi; ++i)
        worst = std::max(worst, fiber_operator_norm(d1.fibers[i] -
                                                    d2.field.fibers[i]));
    REQUIRE(worst < 1e-6);
    // closed form: nabla-hat of multiplication by lambda along X0 is 2 lambda
    for (int i = d1.interior_lo; i < d1.interior_hi; ++i)
        REQUIRE((d1.fibers[i] - 2.0 * kGrid.lambda(i) *
                                    Eigen::MatrixXcd::Identity(kGrid.M, kGrid.M))
                    .cwiseAbs()
                    .maxCoeff() < 1e-6);
}

TEST_CASE("horizontality report flags the right fields") {
    OperatorField lfield = extract_fibers(quantize_diffop(sym_l(), kGrid)).field;
    HorizontalityReport hr = horizontality_report(lfield);
    REQUIRE(hr.a);
    REQUIRE(hr.b);
    REQUIRE(hr.c);
    REQUIRE(hr.d);
    OperatorField q2field =
        extract_fibers(quantize_diffop(sym_q2(), kGrid)).field;
    HorizontalityReport hq = horizontality_report(q2field);
    REQUIRE_FALSE(hq.a);
    REQUIRE_FALSE(hq.c);
}

TEST_CASE("transport estimate: closed form and random draws") {
    RadialVectorField X0 = RadialVectorField::euler_generator();
    OperatorField A = extract_fibers(quantize_diffop(sym_q2(), kGrid)).field;
    const double t = 0.5;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kGrid.M);
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(kGrid.M);
    v(0) = 1.0;
    w(0) = 1.0;
    TransportEstimate e = transport_estimate_check(A, X0, t, v, w);
    // multiplication by lambda transported by e^{2t}: lhs (e^{2t}-1) pair,
    // rhs 2 t e^{2t} pair
    REQUIRE(e.holds);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 20; ++rep) {
        for (int k = 0; k < kGrid.M; ++k) {
            v(k) = Complex(gauss(rng), gauss(rng));
            w(k) = Complex(gauss(rng), gauss(rng));
        }
        TransportEstimate er =
            transport_estimate_check(A, X0, 0.25, v, w);
        REQUIRE(er.holds);
    }
}

TEST_CASE("rank-one field norm and derivative identity") {
    RadialVectorField X0 = RadialVectorField::euler_generator();
    // A gentle radial profile keeps the stencil residual of the product
    // rule below the tolerance; sharper bumps leave ~1e-5 of truncation.
    auto pair_mode = [](int mode) {
        PolarSection phi(kGrid);
        for (int i = 0; i < kGrid.S; ++i) {
            const double b = pair_bump(kGrid.s(i), 0.0,
                                       0.5 * (kGrid.s_max - kGrid.s_min));
            for (int k = 0; k < kGrid.M; ++k)
                phi.values(i, k) =
                    b * std::exp(Complex(0.0, mode * kGrid.theta(k)));
        }
        return phi;
    };
    PolarSection phi = pair_mode(1);
    PolarSection psi = pair_mode(2);
    OperatorField R = rank_one_field(phi, psi);
    for (int i = 4; i < kGrid.S - 4; ++i)
        REQUIRE(std::abs(fiber_operator_norm(R.fibers[i]) -
                         fiber_norm(phi, i) * fiber_norm(psi, i)) < 1e-10);
    REQUIRE(rank_one_derivative_defect(X0, phi, psi) < 1e-6);
}

TEST_CASE("operator field save/load round trip") {
    OperatorField A = extract_fibers(quantize_diffop(sym_l(), kGrid)).field;
    A.interior_lo = 3;
    A.interior_hi = kGrid.S - 3;
    const std::string path = "opfield_test_field.bin";
    save_operator_field(A, path);
    OperatorField B = load_operator_field(path);
    REQUIRE(B.interior_lo == A.interior_lo);
    REQUIRE(B.interior_hi == A.interior_hi);
    for (int i = 0; i < kGrid.S; ++i)
        REQUIRE((A.fibers[i] - B.fibers[i]).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}
