#include <catch2/catch_amalgamated.hpp>

#include <opfield/connection.hpp>
#include <opfield/polar_op.hpp>

using namespace opfield;

namespace {
const PolarGrid kGrid{};
} // namespace

TEST_CASE("polar quantizer: radius squared acts by multiplication") {
    PolarDiffOperator O = quantize_diffop(PolySymbol::q_norm_squared(2), kGrid);
    PolarSection phi = bump_mode_section(kGrid, 0.0, 1.5, 2);
    PolarSection got = O.apply(phi);
    for (int i = 0; i < kGrid.S; ++i) {
        Eigen::RowVectorXcd want = kGrid.lambda(i) * phi.values.row(i);
        REQUIRE((got.values.row(i) - want).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("polar quantizer: angular momentum acts as -i d/dtheta") {
    PolarDiffOperator O = quantize_diffop(angular_momentum(1, 2, 2), kGrid);
    for (int m : {-3, 0, 1, 4}) {
        PolarSection phi = bump_mode_section(kGrid, 0.2, 1.4, m);
        PolarSection got = O.apply(phi);
        REQUIRE((got.values - static_cast<double>(m) * phi.values)
                    .cwiseAbs()
                    .maxCoeff() < 1e-9);
    }
}

TEST_CASE("polar quantizer: squared angular momentum gains the Weyl constant") {
    // Op(l^2) = L^2 + 1/2 from symmetric ordering, so a pure mode picks up
    // m^2 + 1/2.
    PolySymbol l = angular_momentum(1, 2, 2);
    PolarDiffOperator O = quantize_diffop(l * l, kGrid);
    for (int m : {0, 1, 3}) {
        PolarSection phi = bump_mode_section(kGrid, 0.2, 1.4, m);
        PolarSection got = O.apply(phi);
        const double want = m * m + 0.5;
        REQUIRE((got.values - want * phi.values).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("polar quantizer adjoint identity on the invariant battery") {
    auto sections = test_battery(kGrid);
    PolySymbol q2 = PolySymbol::q_norm_squared(2);
    PolySymbol l = angular_momentum(1, 2, 2);
    for (const PolySymbol& u : {q2, l, q2 * l, l * l}) {
        PolarDiffOperator O = quantize_diffop(u, kGrid);
        PolarDiffOperator Oc = quantize_diffop(u.conjugate(), kGrid);
        const PolarSection& phi = sections[0].section;
        const PolarSection& psi = sections[2].section;
        const Complex lhs = direct_integral_inner(O.apply(phi), psi);
        const Complex rhs = direct_integral_inner(phi, Oc.apply(psi));
        REQUIRE(std::abs(lhs - rhs) < 1e-8);
    }
}

TEST_CASE("dilation covariance on shift-compatible t") {
    const double t = 2.0 * kGrid.ds();
    REQUIRE(shift_compatible(kGrid, t));
    PolySymbol u = PolySymbol::q_norm_squared(2);
    PolySymbol ut = flow_pullback(u, LinearSymplecticMap::dilation(2, t));
    PolarDiffOperator O = quantize_diffop(u, kGrid);
    PolarDiffOperator Ot = quantize_diffop(ut, kGrid);
    for (const auto& e : test_battery(kGrid)) {
        PolarSection inner = dilation_group(-t, e.section).section;
        PolarSection lhs = dilation_group(t, O.apply(inner)).section;
        PolarSection want = Ot.apply(e.section);
        REQUIRE(direct_integral_norm(lhs - want) /
                    direct_integral_norm(e.section) < 1e-8);
    }
}

TEST_CASE("dilation operators form a unitary group on sections") {
    const double t = 2.0 * kGrid.ds();
    PolarSection phi = bump_mode_section(kGrid, 0.0, 1.2, 1);
    ShiftResult once = dilation_group(t, phi);
    ShiftResult twice = dilation_group(t, once.section);
    ShiftResult direct = dilation_group(2.0 * t, phi);
    REQUIRE((twice.section.values - direct.section.values)
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    REQUIRE(std::abs(direct_integral_norm(once.section) -
                     direct_integral_norm(phi)) < 1e-10);
}
