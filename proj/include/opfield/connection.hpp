#pragma once

// The connection on sections of the field: the two equivalent grid formulas,
// Leibniz and symmetry defects, seminorms, and the horizontality test.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "opfield/numerics.hpp"
#include "opfield/polar.hpp"
#include "opfield/symbol.hpp"

namespace opfield {

// d/ds along the log-radial axis, 8th-order centered stencil, zero beyond
// the grid ends (sections used with it vanish on a boundary collar).
inline Eigen::MatrixXcd section_ds(const PolarGrid& g,
                                   const Eigen::MatrixXcd& v) {
    const auto& st = stencil8();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(v.rows(), v.cols());
    const double inv = 1.0 / g.ds();
    for (int k = -4; k <= 4; ++k) {
        if (st[k + 4] == 0.0) continue;
        const int lo = std::max(0, -k);
        const int hi = std::min<int>(static_cast<int>(v.rows()),
                                     static_cast<int>(v.rows()) - k);
        if (hi <= lo) continue;
        out.middleRows(lo, hi - lo) +=
            (st[k + 4] * inv) * v.middleRows(lo + k, hi - lo);
    }
    return out;
}

enum class ConnectionFormula { A, B };

// nabla_X phi.  Formula A:  Xt(phi) + ((n-2)/4) phi_rad^{-1} Xt(phi_rad) phi
// with phi_rad = ||q||^2, so the correction is ((n-2)/2) b(lambda) phi.
// Formula B:  Xt(phi) + (1/2)(div Xt - div X o phi_rad) phi, assembled from
// b, b' and a' independently.  Xt(phi) = b(lambda) * 2 d_s phi.
inline PolarSection connection_apply(const RadialVectorField& X,
                                     const PolarSection& phi,
                                     ConnectionFormula formula) {
    const PolarGrid& g = phi.grid;
    PolarSection out(g);
    Eigen::MatrixXcd dphi = section_ds(g, phi.values);
    for (int i = 0; i < g.S; ++i) {
        const double lam = g.lambda(i);
        const double a = X.coefficient(lam);
        const double b = a / (2.0 * lam);
        double corr;
        if (formula == ConnectionFormula::A) {
            // phi_rad^{-1} Xt(phi_rad) = 2 b(lambda)
            corr = 0.25 * (g.n - 2) * 2.0 * b;
        } else {
            const double ap = X.coefficient_derivative(lam);
            const double bp = ap / (2.0 * lam) - a / (2.0 * lam * lam);
            const double div_lift = g.n * b + 2.0 * lam * bp;
            corr = 0.5 * (div_lift - ap);
        }
        out.values.row(i) = b * 2.0 * dphi.row(i) + corr * phi.values.row(i);
    }
    return out;
}

inline PolarSection connection_apply(const RadialVectorField& X,
                                     const PolarSection& phi) {
    return connection_apply(X, phi, ConnectionFormula::A);
}

// max_i | X h(phi,psi)(lambda_i) - h(nabla phi, psi) - h(phi, nabla psi) |,
// with X applied to the scalar lambda-function by the same stencil.
inline double leibniz_defect(const RadialVectorField& X,
                             const PolarSection& phi, const PolarSection& psi) {
    const PolarGrid& g = phi.grid;
    Eigen::MatrixXcd h(g.S, 1);
    for (int i = 0; i < g.S; ++i) h(i, 0) = fiber_inner(phi, psi, i);
    // Same stencil for the scalar derivative as for the connection, so that
    // the linear part of the product rule cancels exactly on the grid.
    Eigen::MatrixXcd dh = section_ds(g, h);
    PolarSection np = connection_apply(X, phi);
    PolarSection nq = connection_apply(X, psi);
    double defect = 0.0;
    // Skip the stencil-reach collar where the zero extension corrupts the
    // derivative of sections that do not vanish at the grid ends.
    for (int i = 5; i < g.S - 5; ++i) {
        const double lam = g.lambda(i);
        // X = a(lambda) d/dlambda = (a / lambda) d/ds
        const Complex xh = X.coefficient(lam) / lam * dh(i, 0);
        const Complex rhs = fiber_inner(np, psi, i) + fiber_inner(phi, nq, i);
        defect = std::max(defect, std::abs(xh - rhs));
    }
    return defect;
}

// sup over lambda_i in [lo, hi] of the fiber norm of nabla_{X_m}...nabla_{X_1} phi.
inline double seminorm(const PolarSection& phi, double lambda_lo,
                       double lambda_hi,
                       const std::vector<RadialVectorField>& Xs) {
    if (Xs.size() > 3)
        throw std::invalid_argument("seminorm: at most 3 derivatives");
    PolarSection work = phi;
    for (const auto& X : Xs) work = connection_apply(X, work);
    const PolarGrid& g = phi.grid;
    if (lambda_hi < g.lambda(0) || lambda_lo > g.lambda(g.S - 1))
        throw std::invalid_argument("seminorm: interval outside the grid");
    double sup = 0.0;
    for (int i = 0; i < g.S; ++i) {
        const double lam = g.lambda(i);
        if (lam < lambda_lo || lam > lambda_hi) continue;
        sup = std::max(sup, fiber_norm(work, i));
    }
    return sup;
}

// H_X = -i(nabla_X + (1/2) div X); defect |<H_X phi, psi> - <phi, H_X psi>|.
inline PolarSection hx_apply(const RadialVectorField& X,
                             const PolarSection& phi) {
    const PolarGrid& g = phi.grid;
    PolarSection out = connection_apply(X, phi);
    for (int i = 0; i < g.S; ++i) {
        const double div = X.coefficient_derivative(g.lambda(i));
        out.values.row(i) += 0.5 * div * phi.values.row(i);
    }
    out.values *= Complex(0, -1);
    return out;
}

inline double hx_symmetry_defect(const RadialVectorField& X,
                                 const PolarSection& phi,
                                 const PolarSection& psi) {
    PolarSection hp = hx_apply(X, phi);
    PolarSection hq = hx_apply(X, psi);
    return std::abs(direct_integral_inner(hp, psi) -
                    direct_integral_inner(phi, hq));
}

struct HorizontalResult {
    bool horizontal = false;
    double defect = 0.0;             // sup fiber norm of nabla_{X_0} phi
    double homogeneity_defect = 0.0; // phi(4 lambda, theta) vs lambda^{-(n-2)/2} scaling
};

inline HorizontalResult horizontal_test(const PolarSection& phi,
                                        double tol = 1e-8) {
    const PolarGrid& g = phi.grid;
    HorizontalResult res;
    // The first and last four rows see the zero-extension of the stencil,
    // which is wrong for sections that do not vanish near the ends, so the
    // seminorm is taken over the interior rows.
    res.defect = seminorm(phi, g.lambda(4), g.lambda(g.S - 5),
                          {RadialVectorField::euler_generator()});
    res.horizontal = res.defect <= tol;
    // Cross-check: sample phi at (lambda, 4 lambda) pairs; a horizontal
    // section satisfies phi(4 lambda, .) = 4^{-(n-2)/2} phi(lambda, .)
    // (cubic interpolation in s for the off-grid point s + log 4).
    const double shift = std::log(4.0);
    const double scale = std::pow(4.0, -0.5 * (g.n - 2));
    for (int i = 0; i < g.S; ++i) {
        const double s1 = g.s(i) + shift;
        if (s1 > g.s_max - 2.0 * g.ds()) continue;
        for (int j = 0; j < g.M; ++j) {
            const double si = (s1 - g.s_min) / g.ds();
            const int i0 = static_cast<int>(std::floor(si));
            const double u = si - i0;
            auto val = [&](int idx) -> Complex {
                if (idx < 0 || idx >= g.S) return Complex(0, 0);
                return phi.values(idx, j);
            };
            const Complex interp =
                0.5 * ((2.0 * val(i0)) + (-val(i0 - 1) + val(i0 + 1)) * u +
                       (2.0 * val(i0 - 1) - 5.0 * val(i0) + 4.0 * val(i0 + 1) -
                        val(i0 + 2)) * (u * u) +
                       (-val(i0 - 1) + 3.0 * val(i0) - 3.0 * val(i0 + 1) +
                        val(i0 + 2)) * (u * u * u));
            res.homogeneity_defect =
                std::max(res.homogeneity_defect,
                         std::abs(interp - scale * phi.values(i, j)));
        }
    }
    return res;
}

} // namespace opfield
