#include <catch2/catch_amalgamated.hpp>

#include <opfield/cartesian.hpp>
#include <opfield/connection.hpp>

using namespace opfield;

namespace {
const PolarGrid kGrid{};

CartesianGrid box_2d() {
    CartesianGrid g;
    g.n = 2;
    g.N = 64;
    g.L = 3.0;
    return g;
}
} // namespace

TEST_CASE("trivialization is fiberwise unitary and invertible") {
    PolarSection phi = bump_mode_section(kGrid, 0.3, 1.4, 2);
    TrivializedSection f = trivialize(phi);
    for (int i = 0; i < kGrid.S; ++i)
        REQUIRE(std::abs(v_norm(kGrid, f.values.row(i).transpose()) -
                         fiber_norm(phi, i)) < 1e-12);
    PolarSection back = untrivialize(f);
    REQUIRE((back.values - phi.values).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("direct integral matches the plane inner product") {
    CartesianGrid g2 = box_2d();
    PolarSection phi = bump_mode_section(kGrid, 0.7, 1.2, 1);
    PolarSection psi = bump_mode_section(kGrid, 0.7, 1.2, 1);
    CartesianGridFunction cphi = resample_cartesian(phi, g2);
    CartesianGridFunction cpsi = resample_cartesian(psi, g2);
    const double lhs = direct_integral_norm(phi);
    REQUIRE(std::abs(lhs - cphi.norm()) / lhs < 1e-3);
    REQUIRE(std::abs(direct_integral_inner(phi, psi) - cphi.inner(cpsi)) /
                (lhs * lhs) < 1e-3);
}

TEST_CASE("polar-cartesian roundtrip stays within the quintic budget") {
    CartesianGrid g2 = box_2d();
    for (int m : {0, 2}) {
        PolarSection phi = bump_mode_section(kGrid, 0.7, 1.2, m);
        PolarSection back = resample_polar(resample_cartesian(phi, g2), kGrid);
        REQUIRE(direct_integral_norm(back - phi) / direct_integral_norm(phi) <
                1e-3);
    }
}

TEST_CASE("connection formulas agree and satisfy the closed form") {
    RadialVectorField X0 = RadialVectorField::euler_generator();
    PolarSection phi = bump_mode_section(kGrid, 0.0, 1.6875, 2);
    PolarSection a = connection_apply(X0, phi, ConnectionFormula::A);
    PolarSection b = connection_apply(X0, phi, ConnectionFormula::B);
    REQUIRE((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
    // for X0 = 2 lambda d/dlambda the derivative is 2 d_s of the profile
    PolarSection want(kGrid);
    for (int i = 0; i < kGrid.S; ++i) {
        const double df = 2.0 * bump_derivative(kGrid.s(i), 0.0, 1.6875);
        for (int j = 0; j < kGrid.M; ++j)
            want.values(i, j) =
                df * std::exp(Complex(0, 2.0 * kGrid.theta(j)));
    }
    REQUIRE((a.values - want.values).cwiseAbs().maxCoeff() /
                want.values.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("connection satisfies the metric Leibniz rule") {
    RadialVectorField X0 = RadialVectorField::euler_generator();
    RadialVectorField X2 = RadialVectorField::monomial_family(2);
    PolarSection phi(kGrid);
    const double mid = 0.5 * (kGrid.s_min + kGrid.s_max);
    const double half = 0.5 * (kGrid.s_max - kGrid.s_min);
    for (int i = 0; i < kGrid.S; ++i) {
        const double b = pair_bump(kGrid.s(i), mid, half);
        for (int j = 0; j < kGrid.M; ++j)
            phi.values(i, j) = b * std::exp(Complex(0, kGrid.theta(j)));
    }
    REQUIRE(leibniz_defect(X0, phi, phi) < 1e-6);
    REQUIRE(leibniz_defect(X2, phi, phi) < 1e-6);
}

TEST_CASE("angular modes are horizontal, radial bumps are not") {
    PolarSection flat(kGrid);
    for (int i = 0; i < kGrid.S; ++i)
        for (int j = 0; j < kGrid.M; ++j)
            flat.values(i, j) = std::exp(Complex(0, 2.0 * kGrid.theta(j)));
    HorizontalResult h = horizontal_test(flat);
    REQUIRE(h.horizontal);
    REQUIRE(horizontal_test(bump_mode_section(kGrid, 0.0, 1.5, 0)).horizontal ==
            false);
}

TEST_CASE("hx operator is symmetric") {
    RadialVectorField X2 = RadialVectorField::monomial_family(2);
    const double mid = 0.5 * (kGrid.s_min + kGrid.s_max);
    const double half = 0.5 * (kGrid.s_max - kGrid.s_min);
    PolarSection phi(kGrid), psi(kGrid);
    for (int i = 0; i < kGrid.S; ++i) {
        const double b = pair_bump(kGrid.s(i), mid, half);
        for (int j = 0; j < kGrid.M; ++j) {
            phi.values(i, j) = b * std::exp(Complex(0, kGrid.theta(j)));
            psi.values(i, j) = b;
        }
    }
    REQUIRE(hx_symmetry_defect(X2, phi, psi) < 1e-6);
}

TEST_CASE("first seminorm reproduces the closed form on an interval") {
    const double lo = 1.0, hi = std::exp(1.0);
    RadialVectorField X0 = RadialVectorField::euler_generator();
    PolarSection phi = bump_mode_section(kGrid, 0.0, 1.6875, 2);
    const double got = seminorm(phi, lo, hi, {X0});
    double want = 0.0;
    for (int i = 0; i < kGrid.S; ++i) {
        const double lam = kGrid.lambda(i);
        if (lam < lo || lam > hi) continue;
        const double df = 2.0 * bump_derivative(kGrid.s(i), 0.0, 1.6875);
        want = std::max(want, std::abs(df) * std::sqrt(kPi));
    }
    REQUIRE(std::abs(got - want) / want < 1e-6);
}
