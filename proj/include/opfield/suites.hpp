#pragma once

// Named verification suites.  Each suite runs a group of numerical checks
// and returns CheckRecords; run_suite dispatches by name, "all" runs every
// suite.  Suites are deterministic for a fixed RunConfig (including seed).

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "opfield/cartesian.hpp"
#include "opfield/config.hpp"
#include "opfield/connection.hpp"
#include "opfield/operator_field.hpp"
#include "opfield/polar.hpp"
#include "opfield/polar_op.hpp"
#include "opfield/report.hpp"
#include "opfield/symbol.hpp"

namespace opfield {

namespace detail {

class SuiteTimer {
  public:
    SuiteTimer() : last_(std::chrono::steady_clock::now()) {}
    // milliseconds since the previous take (or construction)
    double take() {
        const auto now = std::chrono::steady_clock::now();
        const double ms =
            std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

  private:
    std::chrono::steady_clock::time_point last_;
};

// Random polynomial symbol with small integer coefficients so that bracket
// algebra stays exact in double precision.
inline PolySymbol random_symbol(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> expo(0, 2);
    std::uniform_int_distribution<int> coef(1, 3);
    std::uniform_int_distribution<int> sign(0, 1);
    PolySymbol out(n);
    for (int t = 0; t < 4; ++t) {
        std::vector<int> idx(2 * n, 0);
        int total = 0;
        for (int v = 0; v < 2 * n; ++v) {
            int e = expo(rng);
            if (total + e > 4) e = 0;
            idx[v] = e;
            total += e;
        }
        const double c = (sign(rng) ? 1.0 : -1.0) * coef(rng);
        out.add_term(idx, c);
    }
    return out;
}

// Constants of motion of ||q||^2 at n = 2 used across the operator checks.
inline std::vector<std::pair<std::string, PolySymbol>> symbol_battery() {
    const PolySymbol q2 = PolySymbol::q_norm_squared(2);
    const PolySymbol l = angular_momentum(1, 2, 2);
    std::vector<std::pair<std::string, PolySymbol>> out;
    out.emplace_back("q2", q2);
    out.emplace_back("q4", q2 * q2);
    out.emplace_back("q2l", q2 * l);
    out.emplace_back("l", l);
    out.emplace_back("l2", l * l);
    out.emplace_back("q2-1pl2", (PolySymbol::constant(2, 1.0) + l * l) * q2);
    return out;
}

// 1D Gaussian-type probe vectors, smooth and compactly concentrated well
// inside the box, with momentum content far under the grid Nyquist.
inline std::vector<Eigen::VectorXcd> gaussian_probes_1d(const CartesianGrid& g) {
    std::vector<Eigen::VectorXcd> out;
    const struct {
        double center, sigma;
        int poly; // multiply by x^poly
    } params[4] = {{0.0, 1.0, 0}, {1.0, 1.0, 0}, {-0.5, 1.5, 0}, {0.0, 1.0, 1}};
    for (const auto& p : params) {
        Eigen::VectorXcd v(g.N);
        for (int k = 0; k < g.N; ++k) {
            const double x = g.x(k);
            const double z = (x - p.center) / p.sigma;
            v(k) = std::pow(x, p.poly) * std::exp(-0.5 * z * z);
        }
        out.push_back(std::move(v));
    }
    return out;
}

// Gentle outward sections for cross-backend and resampling comparisons: the
// bicubic polar<->Cartesian resampling loses accuracy near small radii, so
// these live on the outer part of the annulus.
// Log-radial profile for cross-backend comparisons: a Gaussian windowed by a
// wide cos^8 cutoff whose edges sit where the Gaussian is already ~1e-5.  The
// kernel backend differentiates spectrally on the Cartesian box, so the
// profile must be compactly supported inside the annulus yet have negligible
// high-order derivative jumps at the support edge.
inline double spectral_profile(double s) {
    const double gauss = std::exp(-std::pow((s - 0.7) / 0.55, 2));
    return gauss * bump(s, 0.5, 1.5);
}

inline std::vector<PolarSection> gentle_sections(const PolarGrid& g) {
    std::vector<PolarSection> out;
    for (int m : {0, 1, 2})
        out.push_back(bump_mode_section(g, 0.7, 1.2, m));
    return out;
}

// Unit-normalized product-test section: the full-span cos^4 profile whose
// squared profile still differentiates cleanly under the stencil.
inline PolarSection pair_section(const PolarGrid& g, int mode) {
    PolarSection out(g);
    for (int i = 0; i < g.S; ++i) {
        const double b =
            pair_bump(g.s(i), 0.5 * (g.s_min + g.s_max), 0.5 * (g.s_max - g.s_min));
        if (b == 0.0) continue;
        for (int j = 0; j < g.M; ++j)
            out.values(i, j) = b * std::exp(Complex(0, mode * g.theta(j)));
    }
    const double nrm = direct_integral_norm(out);
    out.values /= nrm;
    return out;
}

// Angular-only section (constant profile in s after trivialization).
inline PolarSection mode_section(const PolarGrid& g, int mode) {
    TrivializedSection t(g);
    for (int j = 0; j < g.M; ++j)
        t.values.col(j).setConstant(std::exp(Complex(0, mode * g.theta(j))));
    return untrivialize(t);
}

inline double rel_vec_error(const Eigen::VectorXcd& got,
                            const Eigen::VectorXcd& want,
                            const Eigen::VectorXcd& input) {
    const double scale = std::max(want.norm(), input.norm());
    return (got - want).norm() / scale;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Phase-space algebra suite.

inline std::vector<CheckRecord> suite_poisson(const RunConfig& cfg) {
    std::vector<CheckRecord> recs;
    detail::SuiteTimer timer;
    std::mt19937_64 rng(cfg.seed);
    const int n = 2;

    // Bracket axioms on random integer-coefficient symbols: exact algebra.
    double anti = 0.0, leib = 0.0, jac = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        PolySymbol u = detail::random_symbol(n, rng);
        PolySymbol v = detail::random_symbol(n, rng);
        PolySymbol w = detail::random_symbol(n, rng);
        anti = std::max(anti, (poisson_bracket(u, v) + poisson_bracket(v, u))
                                  .max_coeff_difference(PolySymbol(n)));
        PolySymbol lhs = poisson_bracket(u, v * w);
        PolySymbol rhs = poisson_bracket(u, v) * w + v * poisson_bracket(u, w);
        leib = std::max(leib, lhs.max_coeff_difference(rhs));
        PolySymbol cyc = poisson_bracket(u, poisson_bracket(v, w)) +
                         poisson_bracket(v, poisson_bracket(w, u)) +
                         poisson_bracket(w, poisson_bracket(u, v));
        jac = std::max(jac, cyc.max_coeff_difference(PolySymbol(n)));
    }
    recs.push_back(make_check("poisson", "bracket-antisymmetry",
                              "bracket/antisymmetry", anti, cfg.tol_exact,
                              timer.take()));
    recs.push_back(make_check("poisson", "bracket-leibniz", "bracket/leibniz",
                              leib, cfg.tol_exact, timer.take()));
    recs.push_back(make_check("poisson", "bracket-jacobi", "bracket/jacobi",
                              jac, cfg.tol_exact, timer.take()));

    // Canonical pairs and the degree relation {q.p, ||q||^2} = 2 ||q||^2.
    {
        double d = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                PolySymbol qi = PolySymbol::coordinate_q(n, i);
                PolySymbol pj = PolySymbol::coordinate_p(n, j);
                PolySymbol want =
                    PolySymbol::constant(n, i == j ? 1.0 : 0.0);
                d = std::max(d, poisson_bracket(pj, qi).max_coeff_difference(want));
                d = std::max(d, poisson_bracket(qi, PolySymbol::coordinate_q(n, j))
                                    .max_coeff_difference(PolySymbol(n)));
                d = std::max(d, poisson_bracket(pj, PolySymbol::coordinate_p(n, i))
                                    .max_coeff_difference(PolySymbol(n)));
            }
        PolySymbol h = PolySymbol::q_norm_squared(n);
        d = std::max(d, poisson_bracket(PolySymbol::qdotp(n), h)
                            .max_coeff_difference(2.0 * h));
        recs.push_back(make_check("poisson", "bracket-canonical",
                                  "bracket/canonical", d, cfg.tol_exact,
                                  timer.take()));
    }

    // {q.p, u} generates the dilation flow (e^t q, e^{-t} p): compare the
    // bracket against a Richardson-extrapolated t-derivative of the pullback.
    {
        std::uniform_real_distribution<double> pt(-1.0, 1.0);
        double worst = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
            PolySymbol u = detail::random_symbol(n, rng);
            PolySymbol xu = poisson_bracket(PolySymbol::qdotp(n), u);
            for (int k = 0; k < 4; ++k) {
                Eigen::VectorXd x0(2 * n);
                for (int v = 0; v < 2 * n; ++v) x0(v) = pt(rng);
                auto g = [&](double t) {
                    Eigen::VectorXd xt(2 * n);
                    for (int v = 0; v < n; ++v) xt(v) = std::exp(t) * x0(v);
                    for (int v = n; v < 2 * n; ++v) xt(v) = std::exp(-t) * x0(v);
                    return u.evaluate(xt).real();
                };
                const double want = xu.evaluate(x0).real();
                const double got = richardson_derivative(g, 0.05);
                worst = std::max(worst, std::abs(got - want));
            }
        }
        recs.push_back(make_check("poisson", "flow-generator",
                                  "bracket/dilation-generator", worst,
                                  cfg.tol_norm, timer.take()));
    }

    // Linear flow pullbacks: dilation by log 2 scales ||q||^2 by 4; the
    // quarter-turn rotation swaps position and momentum quadratics.
    {
        PolySymbol q2 = PolySymbol::q_norm_squared(n);
        double d = flow_pullback(q2, LinearSymplecticMap::dilation(n, std::log(2.0)))
                       .max_coeff_difference(4.0 * q2);
        PolySymbol p2(n);
        for (int i = 0; i < n; ++i) {
            PolySymbol pi = PolySymbol::coordinate_p(n, i);
            p2 += pi * pi;
        }
        d = std::max(d,
                     flow_pullback(q2, LinearSymplecticMap::fourier_rotation(n))
                         .max_coeff_difference(p2));
        recs.push_back(make_check("poisson", "flow-pullback",
                                  "bracket/linear-pullback", d, cfg.tol_exact,
                                  timer.take()));
    }

    // Connection on constants of motion: Leibniz and zero curvature, and
    // closure (the result is again a constant of motion).
    {
        auto battery = detail::symbol_battery();
        const std::pair<int, int> field_pairs[3] = {{1, 2}, {2, 3}, {1, 3}};
        double dl = 0.0, dc = 0.0, closure = 0.0;
        PolySymbol h = PolySymbol::q_norm_squared(n);
        for (const auto& [k1, k2] : field_pairs) {
            RadialVectorField X = RadialVectorField::monomial_family(k1);
            RadialVectorField Y = RadialVectorField::monomial_family(k2);
            for (std::size_t a = 0; a < battery.size(); ++a) {
                const PolySymbol& u = battery[a].second;
                const PolySymbol& v = battery[(a + 1) % battery.size()].second;
                auto rep = poisson_connection_identity_check(X, Y, u, v);
                dl = std::max(dl, rep.leibniz_defect);
                dc = std::max(dc, rep.curvature_defect);
                closure = std::max(
                    closure, poisson_bracket(h, poisson_connection_apply(X, u))
                                 .max_coeff_difference(PolySymbol(n)));
            }
        }
        recs.push_back(make_check("poisson", "connection-leibniz",
                                  "radial-connection/leibniz", dl,
                                  cfg.tol_exact, timer.take()));
        recs.push_back(make_check("poisson", "connection-curvature",
                                  "radial-connection/flatness", dc,
                                  cfg.tol_exact, timer.take()));
        recs.push_back(make_check("poisson", "connection-closure",
                                  "radial-connection/closure", closure,
                                  cfg.tol_exact, timer.take()));
    }

    // Pushforwards through the invariant components are constants of motion.
    {
        PolySymbol h = PolySymbol::q_norm_squared(n);
        PolySymbol l = angular_momentum(1, 2, n);
        PolySymbol a(2); // a(c1, c2) = c1^2 + 3 c1 c2 + c2
        a.add_term({2, 0, 0, 0}, 1.0);
        a.add_term({1, 1, 0, 0}, 3.0);
        a.add_term({0, 1, 0, 0}, 1.0);
        PolySymbol pushed = moment_map_pushforward(a, {h, l});
        PolySymbol want = h * h + 3.0 * (h * l) + l;
        double d = pushed.max_coeff_difference(want);
        d = std::max(d, poisson_bracket(h, pushed)
                            .max_coeff_difference(PolySymbol(n)));
        recs.push_back(make_check("poisson", "moment-pushforward",
                                  "moment-map/pushforward", d, cfg.tol_exact,
                                  timer.take()));
    }

    // Control: {q.p, q_1} = q_1 must NOT vanish.
    {
        PolySymbol br =
            poisson_bracket(PolySymbol::qdotp(n), PolySymbol::coordinate_q(n, 1));
        const double d = br.max_coeff_difference(PolySymbol(n));
        recs.push_back(make_floor_check("poisson", "control-nonzero-bracket",
                                        "bracket/control", d, 0.5,
                                        timer.take()));
    }
    return recs;
}

// ---------------------------------------------------------------------------
// Quantization suite: kernel backend oracles, cross-backend agreement,
// adjoints, dilation covariance and Fourier rotation.

inline std::vector<CheckRecord> suite_weyl(const RunConfig& cfg) {
    std::vector<CheckRecord> recs;
    detail::SuiteTimer timer;
    const CartesianGrid g1 = cfg.cartesian_grid_1d();
    const PolarGrid pg = cfg.polar_grid();

    // Identity, position, hermiticity and adjoints of the kernel backend.
    {
        DenseOperator id = quantize_kernel(PolySymbol::constant(1, 1.0), g1);
        const double d =
            (id.mat - Eigen::MatrixXcd::Identity(g1.N, g1.N)).cwiseAbs().maxCoeff();
        recs.push_back(make_check("weyl", "kernel-identity",
                                  "kernel/identity", d, cfg.tol_exact,
                                  timer.take()));
    }
    {
        DenseOperator q = quantize_kernel(PolySymbol::coordinate_q(1, 0), g1);
        Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(g1.N, g1.N);
        for (int k = 0; k < g1.N; ++k) want(k, k) = g1.x(k);
        recs.push_back(make_check("weyl", "kernel-position",
                                  "kernel/position-diagonal",
                                  (q.mat - want).cwiseAbs().maxCoeff(),
                                  cfg.tol_grid, timer.take()));
    }
    {
        PolySymbol u(1);
        u.add_term({2, 0}, 1.0);
        u.add_term({1, 1}, 2.0);
        u.add_term({0, 2}, -0.5);
        DenseOperator A = quantize_kernel(u, g1);
        const double dh = (A.mat - A.mat.adjoint()).cwiseAbs().maxCoeff();
        recs.push_back(make_check("weyl", "kernel-hermitian",
                                  "kernel/real-symbol-selfadjoint", dh,
                                  cfg.tol_grid, timer.take()));
        PolySymbol v = u * Complex(1.0, 2.0);
        DenseOperator B = quantize_kernel(v, g1);
        DenseOperator Bc = quantize_kernel(v.conjugate(), g1);
        const double da =
            (Eigen::MatrixXcd(B.mat.adjoint()) - Bc.mat).cwiseAbs().maxCoeff();
        recs.push_back(make_check("weyl", "kernel-adjoint",
                                  "kernel/adjoint-conjugate", da, cfg.tol_grid,
                                  timer.take()));
    }

    // Kernel backend vs an independently assembled 1D reference (diagonal
    // position, spectral momentum, hand-symmetrized mixed terms).
    {
        std::vector<PolySymbol> symbols;
        {
            PolySymbol s1(1);
            s1.add_term({2, 0}, 1.0);
            symbols.push_back(s1); // q^2
            PolySymbol s2(1);
            s2.add_term({0, 2}, 1.0);
            symbols.push_back(s2); // p^2
            PolySymbol s3(1);
            s3.add_term({1, 1}, 1.0);
            symbols.push_back(s3); // qp
            PolySymbol s4(1);
            s4.add_term({2, 2}, 1.0);
            s4.add_term({3, 0}, 0.5);
            symbols.push_back(s4); // q^2 p^2 + q^3 / 2
            PolySymbol s5(1);
            s5.add_term({1, 2}, 1.0);
            s5.add_term({0, 1}, -2.0);
            symbols.push_back(s5); // q p^2 - 2p
        }
        auto probes = detail::gaussian_probes_1d(g1);
        double worst = 0.0;
        for (const auto& u : symbols) {
            DenseOperator A = quantize_kernel(u, g1);
            DenseOperator B = reference_operator_1d(u, g1);
            for (const auto& v : probes)
                worst = std::max(
                    worst, detail::rel_vec_error(A.mat * v, B.mat * v, v));
        }
        recs.push_back(make_check("weyl", "cross-backend-1d",
                                  "quantize/kernel-vs-reference", worst,
                                  cfg.tol_cross, timer.take()));
    }

    // Kernel backend (n = 2, Cartesian box) vs the polar differential-operator
    // backend, compared through resampling on outward sections.
    {
        const CartesianGrid g2 = cfg.cartesian_grid_2d();
        auto battery = detail::symbol_battery();
        double worst = 0.0;
        for (const auto& name : {"q2", "l", "l2", "q2l"}) {
            const PolySymbol* u = nullptr;
            for (const auto& [nm, sym] : battery)
                if (nm == name) u = &sym;
            PolarDiffOperator O = quantize_diffop(*u, pg);
            DenseOperator K = quantize_kernel(*u, g2);
            for (int m : {0, 1, 2}) {
                PolarSection phi(pg);
                for (int i = 0; i < pg.S; ++i) {
                    const double b = detail::spectral_profile(pg.s(i));
                    for (int j = 0; j < pg.M; ++j)
                        phi.values(i, j) =
                            b * std::exp(Complex(0, m * pg.theta(j)));
                }
                // Evaluate the section exactly at Cartesian nodes; a resampled
                // input would feed interpolation noise into the derivative
                // part of the kernel operator, where it gets amplified.
                CartesianGridFunction in(g2);
                for (int a = 0; a < g2.N; ++a)
                    for (int b = 0; b < g2.N; ++b) {
                        const double x = g2.x(a), y = g2.x(b);
                        const double r2 = x * x + y * y;
                        if (r2 <= 0.0) continue;
                        const double bmp =
                            detail::spectral_profile(std::log(r2));
                        if (bmp == 0.0) continue;
                        in.values(a * g2.N + b) =
                            bmp * std::exp(Complex(0, m * std::atan2(y, x)));
                    }
                CartesianGridFunction via_polar =
                    resample_cartesian(O.apply(phi), g2);
                Eigen::VectorXcd via_kernel = K.mat * in.values;
                worst = std::max(worst,
                                 detail::rel_vec_error(via_kernel,
                                                       via_polar.values,
                                                       in.values));
            }
        }
        recs.push_back(make_check("weyl", "cross-backend-2d",
                                  "quantize/kernel-vs-diffop", worst,
                                  cfg.tol_cross, timer.take()));
    }

    // Adjoints of the differential-operator backend on the invariant battery.
    {
        auto battery = detail::symbol_battery();
        auto sections = test_battery(pg);
        double worst = 0.0;
        for (const auto& [name, u] : battery) {
            PolarDiffOperator O = quantize_diffop(u, pg);
            PolarDiffOperator Oc = quantize_diffop(u.conjugate(), pg);
            PolarDiffOperator Oa = O.adjoint();
            for (std::size_t a = 0; a + 1 < sections.size(); a += 2) {
                const PolarSection& phi = sections[a].section;
                const PolarSection& psi = sections[a + 1].section;
                const double nrm = direct_integral_norm(phi) *
                                   direct_integral_norm(psi);
                worst = std::max(
                    worst, std::abs(direct_integral_inner(O.apply(phi), psi) -
                                    direct_integral_inner(phi, Oa.apply(psi))) /
                               nrm);
                worst = std::max(
                    worst,
                    direct_integral_norm(Oa.apply(psi) - Oc.apply(psi)) /
                        direct_integral_norm(psi));
            }
        }
        recs.push_back(make_check("weyl", "diffop-adjoint",
                                  "quantize/adjoint-conjugate-diffop", worst,
                                  cfg.tol_norm, timer.take()));
    }

    // Dilation covariance in the polar backend: conjugating by the dilation
    // group matches quantizing the dilated symbol, at a grid-aligned step.
    {
        const double t = 2.0 * pg.ds(); // shift-compatible
        auto battery = detail::symbol_battery();
        auto sections = test_battery(pg);
        double worst = 0.0;
        for (const auto& [name, u] : battery) {
            PolySymbol ut = flow_pullback(
                u, LinearSymplecticMap::dilation(2, t));
            PolarDiffOperator O = quantize_diffop(u, pg);
            PolarDiffOperator Ot = quantize_diffop(ut, pg);
            for (const auto& e : sections) {
                PolarSection inner = dilation_group(-t, e.section).section;
                PolarSection conj = dilation_group(t, O.apply(inner)).section;
                worst = std::max(worst,
                                 direct_integral_norm(conj - Ot.apply(e.section)) /
                                     direct_integral_norm(e.section));
            }
        }
        recs.push_back(make_check("weyl", "covariance-dilation",
                                  "quantize/dilation-covariance", worst,
                                  cfg.tol_norm, timer.take()));
    }

    // Same covariance in the Cartesian backend with spectral interpolation.
    {
        const double t = 0.2;
        PolySymbol u(1);
        u.add_term({2, 0}, 1.0);
        PolySymbol ut = flow_pullback(u, LinearSymplecticMap::dilation(1, t));
        DenseOperator O = quantize_kernel(u, g1);
        DenseOperator Ot = quantize_kernel(ut, g1);
        CartesianGridFunction f(g1);
        for (int k = 0; k < g1.N; ++k)
            f.values(k) = std::exp(-0.5 * g1.x(k) * g1.x(k));
        CartesianGridFunction inner = metaplectic_dilation_cartesian(-t, f);
        inner.values = O.mat * inner.values;
        CartesianGridFunction conj = metaplectic_dilation_cartesian(t, inner);
        CartesianGridFunction want(g1);
        want.values = Ot.mat * f.values;
        recs.push_back(make_check(
            "weyl", "covariance-cartesian", "quantize/dilation-covariance-box",
            (conj - want).norm() / f.norm(), cfg.tol_cross, timer.take()));
    }

    // Quantized constants of motion commute with functions of the radius;
    // a non-invariant symbol must NOT.
    {
        auto sections = test_battery(pg);
        auto comm_norm = [&](const PolarDiffOperator& O, double t) {
            auto f = [&](double s) {
                return std::cos(t * std::exp(s)); // bounded function of lambda
            };
            double worst = 0.0;
            for (const auto& e : sections) {
                PolarSection c = multiply_radial(O.apply(e.section), f) -
                                 O.apply(multiply_radial(e.section, f));
                worst = std::max(worst, direct_integral_norm(c) /
                                            direct_integral_norm(e.section));
            }
            return worst;
        };
        auto battery = detail::symbol_battery();
        double worst = 0.0;
        for (const auto& [name, u] : battery)
            worst = std::max(worst, comm_norm(quantize_diffop(u, pg), 0.7));
        recs.push_back(make_check("weyl", "radial-commutation",
                                  "quantize/invariants-commute", worst,
                                  cfg.tol_norm, timer.take()));
        const double ctrl =
            comm_norm(quantize_diffop(PolySymbol::qdotp(2), pg), 0.7);
        recs.push_back(make_floor_check("weyl", "control-radial-commutation",
                                        "quantize/control-noninvariant", ctrl,
                                        0.05, timer.take()));
    }

    // Fourier rotation: on the self-dual box the centered Fourier matrix is
    // unitary and conjugation realizes the quarter-turn symbol pullback.
    {
        const CartesianGrid sd = CartesianGrid::self_dual(1, cfg.N);
        const Eigen::MatrixXcd F = centered_fourier_matrix(sd);
        const double du =
            (Eigen::MatrixXcd(F.adjoint() * F) -
             Eigen::MatrixXcd::Identity(sd.N, sd.N)).cwiseAbs().maxCoeff();
        recs.push_back(make_check("weyl", "fourier-unitary",
                                  "fourier/self-dual-unitary", du, cfg.tol_grid,
                                  timer.take()));

        auto probes = detail::gaussian_probes_1d(sd);
        double worst = 0.0;
        for (const std::string terms : {"q2", "p2", "qp"}) {
            PolySymbol u(1);
            if (terms == "q2") u.add_term({2, 0}, 1.0);
            if (terms == "p2") u.add_term({0, 2}, 1.0);
            if (terms == "qp") u.add_term({1, 1}, 1.0);
            PolySymbol ur =
                flow_pullback(u, LinearSymplecticMap::fourier_rotation(1));
            DenseOperator A = quantize_kernel(u, sd);
            DenseOperator B = quantize_kernel(ur, sd);
            Eigen::MatrixXcd conj = F * A.mat * F.adjoint();
            for (const auto& v : probes)
                worst = std::max(worst,
                                 detail::rel_vec_error(conj * v, B.mat * v, v));
        }
        recs.push_back(make_check("weyl", "fourier-covariance",
                                  "fourier/quarter-turn-covariance", worst,
                                  cfg.tol_stencil, timer.take()));

        // diag(x^2) conjugates to the quantized p^2 (the spectral Laplacian
        // on the self-dual grid).
        DenseOperator X2 = quantize_kernel(
            [] {
                PolySymbol u(1);
                u.add_term({2, 0}, 1.0);
                return u;
            }(),
            sd);
        DenseOperator P2 = quantize_kernel(
            [] {
                PolySymbol u(1);
                u.add_term({0, 2}, 1.0);
                return u;
            }(),
            sd);
        double dl = 0.0;
        Eigen::MatrixXcd conj = F * X2.mat * F.adjoint();
        for (const auto& v : probes)
            dl = std::max(dl, detail::rel_vec_error(conj * v, P2.mat * v, v));
        recs.push_back(make_check("weyl", "fourier-laplacian",
                                  "fourier/position-to-laplacian", dl,
                                  cfg.tol_stencil, timer.take()));
    }
    return recs;
}

// ---------------------------------------------------------------------------
// Field-of-Hilbert-spaces suite: trivialization, direct integral vs the
// plane, the connection on sections, seminorms and horizontality.

inline std::vector<CheckRecord> suite_field(const RunConfig& cfg) {
    std::vector<CheckRecord> recs;
    detail::SuiteTimer timer;
    const PolarGrid g = cfg.polar_grid();
    auto battery = test_battery(g);
    const RadialVectorField X0 = RadialVectorField::euler_generator();
    const RadialVectorField X2 = RadialVectorField::monomial_family(2);

    // Fiberwise unitarity of the trivialization and exact round trip.
    {
        double du = 0.0, dr = 0.0;
        for (const auto& e : battery) {
            TrivializedSection t = trivialize(e.section);
            for (int i = 0; i < g.S; ++i)
                du = std::max(du,
                              std::abs(v_norm(g, t.values.row(i).transpose()) -
                                       fiber_norm(e.section, i)));
            dr = std::max(dr, (untrivialize(t).values - e.section.values)
                                  .cwiseAbs()
                                  .maxCoeff());
        }
        recs.push_back(make_check("field", "trivialization-unitary",
                                  "field/trivialization-unitary", du,
                                  cfg.tol_grid, timer.take()));
        recs.push_back(make_check("field", "trivialization-roundtrip",
                                  "field/trivialization-roundtrip", dr,
                                  cfg.tol_exact, timer.take()));
    }

    // Pointwise trivialization factor at a higher dimension (n = 3).
    {
        PolarGrid g3 = g;
        g3.n = 3;
        double d = 0.0;
        for (int i = 0; i < g3.S; ++i) {
            const double lam = g3.lambda(i);
            const double want = std::pow(lam, 0.25) / std::sqrt(2.0);
            d = std::max(d, std::abs(g3.triv_factor(i) - want));
        }
        recs.push_back(make_check("field", "trivialization-factor-n3",
                                  "field/trivialization-pointwise", d,
                                  cfg.tol_exact, timer.take()));
    }

    // Direct integral reproduces the plane L^2: norms and inner products of
    // resampled outward sections.
    {
        const CartesianGrid g2 = cfg.cartesian_grid_2d();
        auto sections = detail::gentle_sections(g);
        double dn = 0.0, di = 0.0;
        std::vector<CartesianGridFunction> cart;
        for (const auto& phi : sections) {
            cart.push_back(resample_cartesian(phi, g2));
            dn = std::max(dn, std::abs(direct_integral_norm(phi) -
                                       cart.back().norm()) /
                                  direct_integral_norm(phi));
        }
        for (std::size_t a = 0; a < sections.size(); ++a)
            for (std::size_t b = a + 1; b < sections.size(); ++b) {
                const Complex lhs =
                    direct_integral_inner(sections[a], sections[b]);
                const Complex rhs = cart[a].inner(cart[b]);
                const double scale = direct_integral_norm(sections[a]) *
                                     direct_integral_norm(sections[b]);
                di = std::max(di, std::abs(lhs - rhs) / scale);
            }
        recs.push_back(make_check("field", "parseval-norms",
                                  "field/direct-integral-isometry", dn,
                                  cfg.tol_cross, timer.take()));
        recs.push_back(make_check("field", "parseval-inner",
                                  "field/direct-integral-inner", di,
                                  cfg.tol_cross, timer.take()));

        // Round trip polar -> Cartesian -> polar.
        double drt = 0.0;
        for (std::size_t a = 0; a < sections.size(); ++a) {
            PolarSection back = resample_polar(cart[a], g);
            drt = std::max(drt,
                           direct_integral_norm(back - sections[a]) /
                               direct_integral_norm(sections[a]));
        }
        recs.push_back(make_check("field", "resample-roundtrip",
                                  "field/resample-roundtrip", drt,
                                  cfg.tol_cross, timer.take()));

        // A constant function round-trips exactly on rows whose interpolation
        // stencils stay inside the annulus on both legs.
        PolarSection one(g);
        one.values.setOnes();
        PolarSection back = resample_polar(resample_cartesian(one, g2), g);
        double dc = 0.0;
        // Cartesian nodes whose log-radial stencil ran off the s-range hold
        // inexact values; the quintic stencil then reaches 3 sqrt(2) dx
        // radially from the polar sample point.
        const double r_in = std::exp(0.5 * (g.s_min + 3.0 * g.ds()));
        const double r_out = std::exp(0.5 * (g.s_max - 3.0 * g.ds()));
        const double reach = 3.0 * std::sqrt(2.0) * g2.dx();
        for (int i = 0; i < g.S; ++i) {
            const double r = std::exp(0.5 * g.s(i));
            if (r < r_in + reach || r > r_out - reach) continue;
            dc = std::max(dc,
                          (back.values.row(i).array() - 1.0).abs().maxCoeff());
        }
        recs.push_back(make_check("field", "resample-constant",
                                  "field/resample-constant-exact", dc,
                                  cfg.tol_exact, timer.take()));
    }

    // The two grid formulas for the connection agree pointwise.
    {
        double d = 0.0;
        for (const auto& e : battery)
            for (const RadialVectorField* X : {&X0, &X2}) {
                PolarSection a = connection_apply(*X, e.section,
                                                  ConnectionFormula::A);
                PolarSection b = connection_apply(*X, e.section,
                                                  ConnectionFormula::B);
                d = std::max(d, (a.values - b.values).cwiseAbs().maxCoeff());
            }
        recs.push_back(make_check("field", "connection-formulas-agree",
                                  "connection/two-formulas", d, cfg.tol_grid,
                                  timer.take()));
    }

    // Closed form at n = 2 along the Euler field: nabla phi = 2 d_s phi,
    // compared against the analytic profile derivative (relative error).
    {
        double d = 0.0;
        for (const auto& e : battery) {
            PolarSection got = connection_apply(X0, e.section);
            PolarSection want(g);
            for (int i = 0; i < g.S; ++i) {
                const double db =
                    2.0 * bump_derivative(g.s(i), e.center, e.halfwidth);
                if (db == 0.0) continue;
                for (int j = 0; j < g.M; ++j)
                    want.values(i, j) =
                        db * std::exp(Complex(0, e.mode * g.theta(j)));
            }
            d = std::max(d, (got.values - want.values).cwiseAbs().maxCoeff() /
                                want.values.cwiseAbs().maxCoeff());
        }
        recs.push_back(make_check("field", "connection-closed-form",
                                  "connection/euler-closed-form", d,
                                  cfg.tol_stencil, timer.take()));
    }

    // Leibniz rule for the fiber inner product.  Pairs chosen so the grid
    // Leibniz residual of products stays below the stencil budget:
    // unit-normalized full-span profiles against themselves, and battery
    // bumps against angular-only sections.
    {
        double d = 0.0;
        for (const RadialVectorField* X : {&X0, &X2}) {
            for (int m : {0, 1}) {
                PolarSection phi = detail::pair_section(g, m);
                d = std::max(d, leibniz_defect(*X, phi, phi));
            }
            for (const auto& e : {battery[1], battery[7]}) {
                PolarSection psi = detail::mode_section(g, e.mode);
                d = std::max(d, leibniz_defect(*X, e.section, psi));
            }
        }
        recs.push_back(make_check("field", "metric-leibniz",
                                  "connection/metric-compatibility", d,
                                  cfg.tol_stencil, timer.take()));
    }

    // Symmetry of H_X = -i(nabla_X + div X / 2).
    {
        double d = 0.0;
        for (const RadialVectorField* X : {&X0, &X2}) {
            PolarSection phi = detail::pair_section(g, 1);
            PolarSection psi = detail::pair_section(g, 0);
            d = std::max(d, hx_symmetry_defect(*X, phi, psi));
            d = std::max(d, hx_symmetry_defect(*X, phi, phi));
        }
        recs.push_back(make_check("field", "hx-symmetric",
                                  "connection/hx-symmetry", d, cfg.tol_stencil,
                                  timer.take()));
    }

    // Seminorm closed form on [1, e]: for phi = f(lambda) g(theta) the first
    // seminorm is sup |2 lambda f'(lambda)| ||g||.
    {
        const double lo = 1.0, hi = std::exp(1.0);
        PolarSection phi = bump_mode_section(g, 0.0, 1.6875, 2);
        const double got = seminorm(phi, lo, hi, {X0});
        double want = 0.0;
        for (int i = 0; i < g.S; ++i) {
            const double lam = g.lambda(i);
            if (lam < lo || lam > hi) continue;
            // X_0 f = 2 lambda f' = 2 d_s f in the log coordinate
            const double df = 2.0 * bump_derivative(g.s(i), 0.0, 1.6875);
            const double gn =
                std::sqrt(g.fiber_weight(i) * g.M); // |e^{i m theta}| = 1
            want = std::max(want, std::abs(df) * gn);
        }
        recs.push_back(make_check("field", "seminorm-closed-form",
                                  "connection/seminorm-product",
                                  std::abs(got - want) / want,
                                  cfg.tol_stencil, timer.take()));
    }

    // Horizontal sections: angular modes have vanishing first seminorm and
    // pass the scaling cross-check; a radially modulated section must not.
    {
        double d = 0.0;
        int flags = 0;
        for (int m : {-2, 0, 3}) {
            HorizontalResult r = horizontal_test(detail::mode_section(g, m),
                                                 cfg.tol_norm);
            d = std::max(d, std::max(r.defect, r.homogeneity_defect));
            flags += r.horizontal ? 0 : 1;
        }
        recs.push_back(make_check("field", "horizontal-modes",
                                  "horizontal/angular-modes", d, cfg.tol_norm,
                                  timer.take()));
        recs.push_back(make_check("field", "horizontal-modes-flag",
                                  "horizontal/angular-modes-flag",
                                  static_cast<double>(flags), 0.0,
                                  timer.take()));
        HorizontalResult bad = horizontal_test(battery[3].section, cfg.tol_norm);
        recs.push_back(make_floor_check("field", "control-horizontal",
                                        "horizontal/control-bump", bad.defect,
                                        0.05, timer.take()));
    }

    // Dilation group on sections: unitary at grid-aligned steps, with the
    // group law, and its generator matches the connection plus correction
    // (t-derivative of the transport along the Euler flow).
    {
        const double t = 0.125; // 4 grid steps
        double du = 0.0, dg = 0.0;
        for (const auto& e : battery) {
            ShiftResult r = dilation_group(t, e.section);
            du = std::max(du, std::abs(direct_integral_norm(r.section) -
                                       direct_integral_norm(e.section)) /
                                  direct_integral_norm(e.section));
            ShiftResult two = dilation_group(t, r.section);
            ShiftResult once = dilation_group(2.0 * t, e.section);
            dg = std::max(dg, direct_integral_norm(two.section - once.section) /
                                  direct_integral_norm(e.section));
        }
        recs.push_back(make_check("field", "dilation-unitary",
                                  "transport/dilation-unitary", du,
                                  cfg.tol_grid, timer.take()));
        recs.push_back(make_check("field", "dilation-group-law",
                                  "transport/dilation-group-law", dg,
                                  cfg.tol_grid, timer.take()));
    }
    {
        // d/dt R_t phi |_{t=0} = nabla_{X_0} phi, derivative taken by the
        // same 8th-order difference over grid-aligned transport steps.
        const auto& st = stencil8();
        const double dt = 0.5 * g.ds();
        double d = 0.0;
        for (std::size_t idx : {6ul, 7ul, 8ul, 10ul}) {
            const auto& e = battery[idx]; // narrow entries stay in-grid
            PolarSection want = connection_apply(X0, e.section);
            PolarSection deriv(g);
            for (int k = -4; k <= 4; ++k) {
                if (st[k + 4] == 0.0) continue;
                ShiftResult r = flow_transport(k * dt, e.section);
                deriv.values += (st[k + 4] / dt) * r.section.values;
            }
            d = std::max(d, direct_integral_norm(deriv - want) /
                                direct_integral_norm(e.section));
        }
        recs.push_back(make_check("field", "transport-generator",
                                  "transport/generator-is-connection", d,
                                  cfg.tol_stencil, timer.take()));
    }
    return recs;
}

// ---------------------------------------------------------------------------
// Operator-field suite: decomposability, fiber extraction, the connection on
// operator fields, weak derivatives, the transport estimate, rank-one fields.

inline std::vector<CheckRecord> suite_opfield(const RunConfig& cfg) {
    std::vector<CheckRecord> recs;
    detail::SuiteTimer timer;
    const PolarGrid g = cfg.polar_grid();
    auto symbols = detail::symbol_battery();
    const RadialVectorField X0 = RadialVectorField::euler_generator();
    const RadialVectorField X2 = RadialVectorField::monomial_family(2);

    std::vector<PolarDiffOperator> ops;
    ops.reserve(symbols.size());
    for (const auto& [name, u] : symbols) ops.push_back(quantize_diffop(u, g));

    // Quantized invariants commute with radial multiplications
    // (decomposability); d_s itself must not.
    {
        double d = 0.0;
        for (const auto& O : ops)
            d = std::max(d, decomposability_defect(as_section_map(O), g));
        recs.push_back(make_check("opfield", "decomposable-battery",
                                  "opfield/decomposability", d, cfg.tol_exact,
                                  timer.take()));
        SectionMap ds_map = [&g](const PolarSection& phi) {
            PolarSection out(g);
            out.values = Complex(0, -1) * section_ds(g, phi.values);
            return out;
        };
        recs.push_back(make_floor_check("opfield", "control-decomposable",
                                        "opfield/control-radial-derivative",
                                        decomposability_defect(ds_map, g), 0.05,
                                        timer.take()));
    }

    // Exact fiber extraction: zero leakage and closed-form fibers.
    {
        double leak = 0.0, dq2 = 0.0, dl = 0.0, dprobe = 0.0;
        for (std::size_t k = 0; k < ops.size(); ++k) {
            ExtractionResult r = extract_fibers(ops[k]);
            leak = std::max(leak, r.leakage);
            if (symbols[k].first == "q2")
                for (int i = 0; i < g.S; ++i)
                    dq2 = std::max(
                        dq2, (r.field.fibers[i] -
                              g.lambda(i) *
                                  Eigen::MatrixXcd::Identity(g.M, g.M))
                                 .cwiseAbs()
                                 .maxCoeff());
            if (symbols[k].first == "l") {
                const Eigen::MatrixXcd want =
                    Complex(0, -1) * angular_derivative_matrix(g.M, 1);
                for (int i = 0; i < g.S; ++i)
                    dl = std::max(dl, (r.field.fibers[i] - want)
                                          .cwiseAbs()
                                          .maxCoeff());
            }
            OperatorField probed =
                extract_fibers_probed(as_section_map(ops[k]), g);
            for (int i = probed.interior_lo; i < probed.interior_hi; ++i)
                dprobe = std::max(dprobe, (probed.fibers[i] - r.field.fibers[i])
                                              .cwiseAbs()
                                              .maxCoeff());
        }
        recs.push_back(make_check("opfield", "extraction-leakage",
                                  "opfield/extraction-leakage", leak,
                                  cfg.tol_exact, timer.take()));
        recs.push_back(make_check("opfield", "extraction-radius-squared",
                                  "opfield/fiber-multiplication", dq2,
                                  cfg.tol_grid, timer.take()));
        recs.push_back(make_check("opfield", "extraction-angular-momentum",
                                  "opfield/fiber-angular-derivative", dl,
                                  cfg.tol_grid, timer.take()));
        recs.push_back(make_check("opfield", "extraction-probed-agrees",
                                  "opfield/probed-vs-exact", dprobe,
                                  cfg.tol_grid, timer.take()));
    }

    // Product rule for scalar multiples and operator products, and adjoint
    // compatibility, all along the trivialized route.
    {
        OperatorField L = extract_fibers(quantize_diffop(
                                             angular_momentum(1, 2, 2), g))
                              .field;
        OperatorField lamL(g);
        for (int i = 0; i < g.S; ++i) lamL.fibers[i] = g.lambda(i) * L.fibers[i];
        OperatorField dLamL = nabla_hat_trivialized(X0, lamL);
        OperatorField dL = nabla_hat_trivialized(X0, L);
        double d = 0.0;
        for (int i = dLamL.interior_lo; i < dLamL.interior_hi; ++i) {
            // X_0(lambda) = 2 lambda
            Eigen::MatrixXcd want =
                2.0 * g.lambda(i) * L.fibers[i] + g.lambda(i) * dL.fibers[i];
            d = std::max(d,
                         fiber_operator_norm(dLamL.fibers[i] - want) /
                             std::max(1.0, fiber_operator_norm(want)));
        }
        recs.push_back(make_check("opfield", "scalar-product-rule",
                                  "opfield/scalar-product-rule", d,
                                  cfg.tol_norm, timer.take()));

        // Operator product rule on A = lambda I, B = lambda (-i d_theta).
        OperatorField A(g), B(g);
        for (int i = 0; i < g.S; ++i) {
            A.fibers[i] =
                g.lambda(i) * Eigen::MatrixXcd::Identity(g.M, g.M);
            B.fibers[i] = g.lambda(i) * L.fibers[i];
        }
        OperatorField AB(g);
        for (int i = 0; i < g.S; ++i) AB.fibers[i] = A.fibers[i] * B.fibers[i];
        OperatorField dAB = nabla_hat_trivialized(X0, AB);
        OperatorField dA = nabla_hat_trivialized(X0, A);
        OperatorField dB = nabla_hat_trivialized(X0, B);
        double dp = 0.0;
        for (int i = dAB.interior_lo; i < dAB.interior_hi; ++i) {
            Eigen::MatrixXcd want =
                dA.fibers[i] * B.fibers[i] + A.fibers[i] * dB.fibers[i];
            dp = std::max(dp,
                          fiber_operator_norm(dAB.fibers[i] - want) /
                              std::max(1.0, fiber_operator_norm(want)));
        }
        recs.push_back(make_check("opfield", "operator-product-rule",
                                  "opfield/operator-product-rule", dp,
                                  cfg.tol_norm, timer.take()));

        // (nabla A)* = nabla (A*) entrywise along the trivialized route.
        OperatorField Aq2l =
            extract_fibers(quantize_diffop(symbols[2].second, g)).field;
        OperatorField Astar(g);
        for (int i = 0; i < g.S; ++i) Astar.fibers[i] = Aq2l.fibers[i].adjoint();
        OperatorField d1 = nabla_hat_trivialized(X0, Aq2l);
        OperatorField d2 = nabla_hat_trivialized(X0, Astar);
        double da = 0.0;
        for (int i = d1.interior_lo; i < d1.interior_hi; ++i)
            da = std::max(
                da, fiber_operator_norm(
                        Eigen::MatrixXcd(d1.fibers[i].adjoint()) -
                        d2.fibers[i]) /
                        std::max(1.0, fiber_operator_norm(d1.fibers[i])));
        recs.push_back(make_check("opfield", "adjoint-compatible",
                                  "opfield/adjoint-compatibility", da,
                                  cfg.tol_norm, timer.take()));
    }

    // Pointwise derivative of t -> <R_t Op(u) R_{-t} phi, psi> matches the
    // pairing with the derivative field, uniformly on a t-range.
    {
        double d = 0.0;
        for (const auto* name : {"q2", "q2l"}) {
            const PolySymbol* u = nullptr;
            for (const auto& [nm, sym] : symbols)
                if (nm == name) u = &sym;
            d = std::max(d, pointwise_weak_derivative_check(*u, 0.25, g));
        }
        recs.push_back(make_check("opfield", "weak-derivative-pairing",
                                  "opfield/pointwise-weak-derivative", d,
                                  cfg.tol_weak, timer.take()));
        const double dh = pointwise_weak_derivative_check(
            angular_momentum(1, 2, 2), 0.25, g);
        recs.push_back(make_check("opfield", "weak-derivative-horizontal",
                                  "opfield/weak-derivative-horizontal", dh,
                                  cfg.tol_weak, timer.take()));
    }

    // Transport estimate |<(A(e^{2t}) - A(1)) v, w>| <= t sup |<dA v, w>|:
    // closed form for the radius-squared field, then randomized pairings.
    {
        OperatorField A = extract_fibers(ops[0]).field; // q2 -> lambda I
        Eigen::VectorXcd v(g.M), w(g.M);
        std::mt19937_64 rng(cfg.seed + 1);
        std::normal_distribution<double> nd(0.0, 1.0);
        auto fill = [&](Eigen::VectorXcd& x) {
            for (int j = 0; j < g.M; ++j) x(j) = Complex(nd(rng), nd(rng));
            x /= x.norm();
        };
        fill(v);
        w = v;
        const double t = 0.5;
        TransportEstimate est = transport_estimate_check(A, X0, t, v, w);
        const double pair = std::abs(
            (w.adjoint() * v)(0, 0) * g.v_weight());
        const double dlhs =
            std::abs(est.lhs - (std::exp(2.0 * t) - 1.0) * pair);
        const double drhs =
            std::abs(est.rhs - 2.0 * t * std::exp(2.0 * t) * pair);
        recs.push_back(make_check("opfield", "transport-estimate-closed-form",
                                  "opfield/transport-estimate-values",
                                  std::max(dlhs, drhs) / pair, cfg.tol_stencil,
                                  timer.take()));

        double excess = 0.0;
        std::uniform_int_distribution<int> steps(1, 16);
        OperatorField B = extract_fibers(ops[2]).field;
        for (int rep = 0; rep < 100; ++rep) {
            fill(v);
            fill(w);
            const double tr = steps(rng) * 0.5 * g.ds();
            const OperatorField& field = (rep % 2 == 0) ? A : B;
            TransportEstimate e = transport_estimate_check(field, X0, tr, v, w);
            if (e.rhs > 0.0)
                excess = std::max(excess, (e.lhs - e.rhs) / e.rhs);
        }
        recs.push_back(make_check("opfield", "transport-estimate-random",
                                  "opfield/transport-estimate-random",
                                  std::max(excess, 0.0), cfg.tol_norm,
                                  timer.take()));
    }

    // Rank-one fields: fiber norms factor, and the derivative obeys the
    // product rule in both arguments.
    {
        PolarSection phi = detail::pair_section(g, 1);
        PolarSection psi = detail::mode_section(g, 2);
        OperatorField R = rank_one_field(phi, psi);
        double dn = 0.0;
        TrivializedSection tp = trivialize(phi), tq = trivialize(psi);
        for (int i = 0; i < g.S; ++i) {
            const double want = v_norm(g, tp.values.row(i).transpose()) *
                                v_norm(g, tq.values.row(i).transpose());
            dn = std::max(dn,
                          std::abs(fiber_operator_norm(R.fibers[i]) - want));
        }
        recs.push_back(make_check("opfield", "rank-one-norm",
                                  "opfield/rank-one-norm", dn, cfg.tol_grid,
                                  timer.take()));

        double dd = 0.0;
        for (const RadialVectorField* X : {&X0, &X2})
            for (int m : {0, 1, 2}) {
                PolarSection f = detail::pair_section(g, m);
                PolarSection h = detail::mode_section(g, m == 2 ? 1 : m);
                dd = std::max(dd, rank_one_derivative_defect(*X, f, h));
            }
        recs.push_back(make_check("opfield", "rank-one-derivative",
                                  "opfield/rank-one-product-rule", dd,
                                  cfg.tol_stencil, timer.take()));

        // Horizontal pair: both angular-only, derivative vanishes.
        PolarSection hf = detail::mode_section(g, 1);
        PolarSection hh = detail::mode_section(g, -1);
        recs.push_back(make_check("opfield", "rank-one-horizontal",
                                  "opfield/rank-one-horizontal",
                                  rank_one_derivative_defect(X0, hf, hh),
                                  cfg.tol_grid, timer.take()));
    }

    // Norm continuity: horizontal fields have flat fiber norms; rank-one
    // norms vary no faster than the derivative of the norm product.
    {
        OperatorField L = extract_fibers(quantize_diffop(
                                             angular_momentum(1, 2, 2), g))
                              .field;
        recs.push_back(make_check("opfield", "norm-flat-horizontal",
                                  "opfield/norm-continuity-horizontal",
                                  norm_continuity_modulus(L), cfg.tol_norm,
                                  timer.take()));

        PolarSection phi = detail::pair_section(g, 1);
        PolarSection psi = detail::pair_section(g, 0);
        OperatorField R = rank_one_field(phi, psi);
        TrivializedSection tp = trivialize(phi), tq = trivialize(psi);
        Eigen::MatrixXcd prod(g.S, 1);
        for (int i = 0; i < g.S; ++i)
            prod(i, 0) = v_norm(g, tp.values.row(i).transpose()) *
                         v_norm(g, tq.values.row(i).transpose());
        Eigen::MatrixXcd dprod = section_ds(g, prod);
        double bound = 0.0;
        for (int i = 4; i < g.S - 4; ++i)
            bound = std::max(bound,
                             std::abs(dprod(i, 0)) / g.lambda(i)); // d/dlambda
        recs.push_back(make_check("opfield", "norm-lipschitz-rank-one",
                                  "opfield/norm-continuity-rank-one",
                                  norm_continuity_modulus(R),
                                  1.1 * bound + cfg.tol_norm, timer.take()));

        OperatorField A = extract_fibers(ops[0]).field; // lambda I
        const double sup = local_sup_norm(A, 1.0, std::exp(1.0));
        recs.push_back(make_check("opfield", "local-sup-norm",
                                  "opfield/local-sup-norm",
                                  std::abs(sup - std::exp(1.0)), cfg.tol_grid,
                                  timer.take()));
    }
    return recs;
}

// ---------------------------------------------------------------------------
// Horizontality suite: the four characterizations of horizontal operator
// fields agree on invariant quantizations, functional calculus images are
// horizontal, and a genuinely varying field fails all of them.

inline std::vector<CheckRecord> suite_horizontal(const RunConfig& cfg) {
    std::vector<CheckRecord> recs;
    detail::SuiteTimer timer;
    const PolarGrid g = cfg.polar_grid();
    auto symbols = detail::symbol_battery();

    int disagreements = 0;
    int wrong_horizontal = 0, wrong_varying = 0;
    double horizontal_defect = 0.0;
    for (const auto& [name, u] : symbols) {
        OperatorField A = extract_fibers(quantize_diffop(u, g)).field;
        HorizontalityReport rep = horizontality_report(A, cfg.tol_norm);
        const bool agree = rep.a == rep.b && rep.b == rep.c && rep.c == rep.d;
        if (!agree) ++disagreements;
        const bool expect_horizontal = (name == std::string("l") ||
                                        name == std::string("l2"));
        if (expect_horizontal) {
            if (!(rep.a && rep.b && rep.c && rep.d)) ++wrong_horizontal;
            horizontal_defect = std::max(
                {horizontal_defect, rep.defect_connection,
                 rep.defect_constancy, rep.defect_transport,
                 rep.defect_invariance});
        } else {
            if (rep.a || rep.b || rep.c || rep.d) ++wrong_varying;
        }
    }
    recs.push_back(make_check("horizontal", "characterizations-agree",
                              "horizontal/four-way-equivalence",
                              static_cast<double>(disagreements), 0.0,
                              timer.take()));
    recs.push_back(make_check("horizontal", "invariant-images-horizontal",
                              "horizontal/invariants-horizontal",
                              static_cast<double>(wrong_horizontal), 0.0,
                              timer.take()));
    recs.push_back(make_check("horizontal", "horizontal-defects",
                              "horizontal/defect-magnitudes",
                              horizontal_defect, cfg.tol_norm, timer.take()));
    recs.push_back(make_check("horizontal", "varying-fields-flagged",
                              "horizontal/non-horizontal-flagged",
                              static_cast<double>(wrong_varying), 0.0,
                              timer.take()));

    // Functional calculus in the angular momentum: a(L) is horizontal for a
    // polynomial a (degree <= 2 so the symbol stays quantizable).
    {
        PolySymbol l = angular_momentum(1, 2, 2);
        PolySymbol a = PolySymbol::constant(2, 1.0) + 2.0 * l + (l * l);
        OperatorField A = extract_fibers(quantize_diffop(a, g)).field;
        HorizontalityReport rep = horizontality_report(A, cfg.tol_norm);
        const double d =
            std::max({rep.defect_connection, rep.defect_constancy,
                      rep.defect_transport, rep.defect_invariance});
        recs.push_back(make_check("horizontal", "functional-calculus",
                                  "horizontal/functional-calculus", d,
                                  cfg.tol_norm, timer.take()));
    }

    // Control: lambda I varies along the base; every characterization must
    // see a large defect.
    {
        OperatorField A(g);
        for (int i = 0; i < g.S; ++i)
            A.fibers[i] = g.lambda(i) * Eigen::MatrixXcd::Identity(g.M, g.M);
        HorizontalityReport rep = horizontality_report(A, cfg.tol_norm);
        const double d =
            std::min({rep.defect_connection, rep.defect_constancy,
                      rep.defect_transport, rep.defect_invariance});
        recs.push_back(make_floor_check("horizontal", "control-varying-field",
                                        "horizontal/control-scalar-field", d,
                                        0.1, timer.take()));
    }
    return recs;
}

// ---------------------------------------------------------------------------
// Derivative-formula suite: nabla_X Op(u) = (a(Q^2)/(2 Q^2)) Op({q.p, u})
// over the invariant battery and two vector fields, by both routes.

inline std::vector<CheckRecord> suite_theorem_xu(const RunConfig& cfg) {
    std::vector<CheckRecord> recs;
    detail::SuiteTimer timer;
    const PolarGrid g = cfg.polar_grid();
    auto symbols = detail::symbol_battery();
    const struct {
        const char* name;
        RadialVectorField X;
    } fields[2] = {{"euler", RadialVectorField::euler_generator()},
                   {"quadratic", RadialVectorField::monomial_family(2)}};

    double leak = 0.0;
    for (const auto& [uname, u] : symbols) {
        for (const auto& f : fields) {
            DerivativeFormulaReport rep = derivative_formula_check(u, f.X, g);
            leak = std::max(leak, rep.leakage);
            const double metric =
                std::max({rep.route_commutator, rep.route_trivialized,
                          rep.route_agreement});
            recs.push_back(make_check(
                "theorem-xu",
                std::string("derivative-formula-") + uname + "-" + f.name,
                "derivative-formula/" + std::string(uname) + "/" + f.name,
                metric, cfg.tol_stencil, timer.take()));
        }
    }
    recs.push_back(make_info("theorem-xu", "commutator-leakage",
                             "derivative-formula/leakage", leak, timer.take()));

    // Reject symbols that are not constants of motion.
    {
        bool threw = false;
        try {
            derivative_formula_check(PolySymbol::qdotp(2), fields[0].X, g);
        } catch (const std::invalid_argument&) {
            threw = true;
        }
        recs.push_back(make_check("theorem-xu", "rejects-noninvariant",
                                  "derivative-formula/domain-guard",
                                  threw ? 0.0 : 1.0, 0.0, timer.take()));
    }
    return recs;
}

// ---------------------------------------------------------------------------

inline std::vector<CheckRecord> run_suite(const std::string& name,
                                          const RunConfig& cfg) {
    cfg.validate();
    if (name == "poisson") return suite_poisson(cfg);
    if (name == "weyl") return suite_weyl(cfg);
    if (name == "field") return suite_field(cfg);
    if (name == "opfield") return suite_opfield(cfg);
    if (name == "horizontal") return suite_horizontal(cfg);
    if (name == "theorem-xu") return suite_theorem_xu(cfg);
    if (name == "all") {
        std::vector<CheckRecord> all;
        for (const char* s :
             {"poisson", "weyl", "field", "opfield", "horizontal",
              "theorem-xu"}) {
            auto part = run_suite(s, cfg);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    throw std::invalid_argument("unknown suite: " + name);
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "poisson", "weyl", "field", "opfield", "horizontal", "theorem-xu",
        "all"};
    return names;
}

} // namespace opfield
