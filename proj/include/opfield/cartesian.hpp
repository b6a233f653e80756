#pragma once

// Uniform box grids in R^n (n = 1, 2), the dense Weyl kernel quantizer,
// spectral reference operators, the Cartesian dilation group, the centered
// unitary Fourier transform, and polar <-> Cartesian resampling.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "opfield/numerics.hpp"
#include "opfield/polar.hpp"
#include "opfield/symbol.hpp"

namespace opfield {

struct CartesianGrid {
    int n = 1;
    int N = 64;
    double L = 8.0;

    double dx() const { return 2.0 * L / N; }
    double x(int k) const { return -L + (k + 0.5) * dx(); }
    int size() const {
        int s = 1;
        for (int i = 0; i < n; ++i) s *= N;
        return s;
    }
    // Momentum grid dual to the spatial grid: p_j = (j - N/2) dp.
    double dp() const { return 2.0 * kPi / (N * dx()); }
    double p(int j) const { return (j - N / 2) * dp(); }

    // dx = sqrt(2 pi / N), so the momentum grid coincides with the spatial
    // grid and the centered discrete Fourier transform is exactly unitary.
    static CartesianGrid self_dual(int n, int N) {
        CartesianGrid g;
        g.n = n;
        g.N = N;
        g.L = 0.5 * N * std::sqrt(2.0 * kPi / N);
        return g;
    }

    bool operator==(const CartesianGrid& o) const {
        return n == o.n && N == o.N && L == o.L;
    }
};

struct CartesianGridFunction {
    CartesianGrid grid;
    Eigen::VectorXcd values; // n=2: index kx * N + ky

    CartesianGridFunction() = default;
    explicit CartesianGridFunction(const CartesianGrid& g)
        : grid(g), values(Eigen::VectorXcd::Zero(g.size())) {}

    double norm() const {
        return std::pow(grid.dx(), 0.5 * grid.n) * values.norm();
    }
    Complex inner(const CartesianGridFunction& o) const {
        return std::pow(grid.dx(), grid.n) * values.dot(o.values);
    }

    friend CartesianGridFunction operator-(CartesianGridFunction a,
                                           const CartesianGridFunction& b) {
        a.values -= b.values;
        return a;
    }
};

struct DenseOperator {
    CartesianGrid grid;
    Eigen::MatrixXcd mat;

    CartesianGridFunction apply(const CartesianGridFunction& f) const {
        CartesianGridFunction out(f.grid);
        out.values = mat * f.values;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Weyl kernel quantizer.  Matrix entries
//   A_{kl} = (1/N^n) sum_j u((x_k+x_l)/2, p_j) e^{2 pi i (j - N/2)(k - l)/N}
// which is the midpoint Fourier transform of the symbol in p; the
// normalization makes the quantization of 1 the exact identity.

namespace detail {

// Per-axis momentum factor g_b(d) = (1/N) sum_j p_j^b e^{2 pi i (j-N/2) d / N}
// for offsets d in [-(N-1), N-1]; g_0(d) = delta_{d,0}.
inline Eigen::VectorXcd momentum_factor(const CartesianGrid& g, int b) {
    const int N = g.N;
    Eigen::VectorXcd out(2 * N - 1);
    for (int d = -(N - 1); d <= N - 1; ++d) {
        Complex acc(0, 0);
        for (int j = 0; j < N; ++j) {
            const double pj = g.p(j);
            double pw = 1.0;
            for (int e = 0; e < b; ++e) pw *= pj;
            acc += pw * std::exp(Complex(0, 2.0 * kPi * (j - N / 2) * d / N));
        }
        out(d + N - 1) = acc / static_cast<double>(N);
    }
    return out;
}

} // namespace detail

inline DenseOperator quantize_kernel(const PolySymbol& u,
                                     const CartesianGrid& g) {
    if (u.dimension() != g.n)
        throw std::invalid_argument("quantize_kernel: dimension mismatch");
    const int N = g.N;
    const std::size_t total =
        static_cast<std::size_t>(g.size()) * static_cast<std::size_t>(g.size());
    if (total > (1u << 25))
        throw std::invalid_argument("quantize_kernel: grid too large");

    int max_b = 0;
    for (const auto& [idx, c] : u.terms())
        for (int i = g.n; i < 2 * g.n; ++i) max_b = std::max(max_b, idx[i]);
    std::vector<Eigen::VectorXcd> gfac;
    for (int b = 0; b <= max_b; ++b) gfac.push_back(detail::momentum_factor(g, b));

    DenseOperator op;
    op.grid = g;
    op.mat = Eigen::MatrixXcd::Zero(g.size(), g.size());

    if (g.n == 1) {
        for (const auto& [idx, c] : u.terms()) {
            const int a = idx[0], b = idx[1];
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) {
                    const double m = 0.5 * (g.x(k) + g.x(l));
                    double mp = 1.0;
                    for (int e = 0; e < a; ++e) mp *= m;
                    op.mat(k, l) += c * mp * gfac[b](k - l + N - 1);
                }
        }
    } else if (g.n == 2) {
        for (const auto& [idx, c] : u.terms()) {
            const int a1 = idx[0], a2 = idx[1], b1 = idx[2], b2 = idx[3];
            for (int k1 = 0; k1 < N; ++k1)
                for (int l1 = 0; l1 < N; ++l1) {
                    const double m1 = 0.5 * (g.x(k1) + g.x(l1));
                    double m1p = 1.0;
                    for (int e = 0; e < a1; ++e) m1p *= m1;
                    const Complex f1 = c * m1p * gfac[b1](k1 - l1 + N - 1);
                    if (std::abs(f1) == 0.0) continue;
                    for (int k2 = 0; k2 < N; ++k2)
                        for (int l2 = 0; l2 < N; ++l2) {
                            const double m2 = 0.5 * (g.x(k2) + g.x(l2));
                            double m2p = 1.0;
                            for (int e = 0; e < a2; ++e) m2p *= m2;
                            op.mat(k1 * N + k2, l1 * N + l2) +=
                                f1 * m2p * gfac[b2](k2 - l2 + N - 1);
                        }
                }
        }
    } else {
        throw std::invalid_argument("quantize_kernel: n must be 1 or 2");
    }
    return op;
}

// General callable symbols, n = 1 only: direct midpoint discrete Fourier sum.
inline DenseOperator quantize_kernel_callable(
    const std::function<Complex(double, double)>& u, const CartesianGrid& g) {
    if (g.n != 1)
        throw std::invalid_argument("quantize_kernel_callable: n must be 1");
    const int N = g.N;
    DenseOperator op;
    op.grid = g;
    op.mat.resize(N, N);
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
            const double m = 0.5 * (g.x(k) + g.x(l));
            Complex acc(0, 0);
            for (int j = 0; j < N; ++j)
                acc += u(m, g.p(j)) *
                       std::exp(Complex(0, 2.0 * kPi * (j - N / 2) * (k - l) / N));
            op.mat(k, l) = acc / static_cast<double>(N);
        }
    return op;
}

// Periodic spectral d^power/dx^power on the box (period 2L).
inline Eigen::MatrixXcd spectral_derivative_matrix(const CartesianGrid& g,
                                                   int power) {
    return std::pow(kPi / g.L, power) * angular_derivative_matrix(g.N, power);
}

// Reference 1D Weyl operators built independently of the kernel quantizer:
// position is diagonal, momentum is the periodic spectral derivative, and
// mixed terms are symmetrized by hand.
inline DenseOperator reference_operator_1d(const PolySymbol& u,
                                           const CartesianGrid& g) {
    if (g.n != 1 || u.dimension() != 1)
        throw std::invalid_argument("reference_operator_1d: n must be 1");
    const int N = g.N;
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(N, N);
    for (int k = 0; k < N; ++k) Q(k, k) = g.x(k);
    const Complex mi(0, -1);
    Eigen::MatrixXcd D = mi * spectral_derivative_matrix(g, 1);
    DenseOperator op;
    op.grid = g;
    op.mat = Eigen::MatrixXcd::Zero(N, N);
    for (const auto& [idx, c] : u.terms()) {
        const int a = idx[0], b = idx[1];
        Eigen::MatrixXcd Qa = Eigen::MatrixXcd::Identity(N, N);
        for (int e = 0; e < a; ++e) Qa = Qa * Q;
        Eigen::MatrixXcd Db = Eigen::MatrixXcd::Identity(N, N);
        for (int e = 0; e < b; ++e) Db = Db * D;
        if (a == 0 || b == 0) {
            op.mat += c * Qa * Db;
        } else if (b == 1) {
            op.mat += c * 0.5 * (Qa * D + D * Qa);
        } else if (b == 2) {
            op.mat += c * 0.25 * (Qa * D * D + 2.0 * D * Qa * D + D * D * Qa);
        } else {
            throw std::invalid_argument(
                "reference_operator_1d: momentum degree > 2");
        }
    }
    return op;
}

// ---------------------------------------------------------------------------
// Dilation group on the box grid (n = 1): f(x) -> e^{nt/2} f(e^t x) with
// trigonometric (spectral) interpolation of the periodic extension.
inline CartesianGridFunction metaplectic_dilation_cartesian(
    double t, const CartesianGridFunction& f) {
    const CartesianGrid& g = f.grid;
    if (g.n != 1)
        throw std::invalid_argument("metaplectic_dilation_cartesian: n must be 1");
    const int N = g.N;
    std::vector<Complex> coef(f.values.data(), f.values.data() + N);
    fft(coef, -1);
    CartesianGridFunction out(g);
    const double scale = std::exp(0.5 * t);
    for (int k = 0; k < N; ++k) {
        const double xt = std::exp(t) * g.x(k);
        if (std::abs(xt) > g.L) continue; // outside the box: periodic ghost
        // grid phase: x = x(0) + m dx -> mode frequency 2 pi q / (2L)
        const double u = (xt - g.x(0)) / g.dx();
        Complex acc(0, 0);
        for (int q = 0; q < N; ++q) {
            const int fq = dft_frequency(q, N);
            acc += coef[q] * std::exp(Complex(0, 2.0 * kPi * fq * u / N));
        }
        out.values(k) = scale * acc / static_cast<double>(N);
    }
    return out;
}

// Centered unitary Fourier matrix on the self-dual grid (per axis).
inline Eigen::MatrixXcd centered_fourier_matrix(const CartesianGrid& g) {
    const int N = g.N;
    Eigen::MatrixXcd F(N, N);
    const double scale = g.dx() / std::sqrt(2.0 * kPi);
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
            F(j, k) = scale * std::exp(Complex(0, -g.x(j) * g.x(k)));
    return F;
}

inline DenseOperator fourier_conjugate(const DenseOperator& O,
                                       const CartesianGrid& g) {
    if (g.n != 1)
        throw std::invalid_argument("fourier_conjugate: dense form is n=1");
    const Eigen::MatrixXcd F = centered_fourier_matrix(g);
    DenseOperator out;
    out.grid = g;
    out.mat = F * O.mat * F.adjoint();
    return out;
}

// ---------------------------------------------------------------------------
// Polar <-> Cartesian resampling (n = 2), 6-point quintic Lagrange per axis;
// the polar direction is periodic in theta and zero outside the s-range.
// The quintic's O(h^6) error keeps the inner-radius angular oscillation
// (wavenumber m/r in Cartesian coordinates) from dominating the roundtrip.

namespace detail {

// Lagrange weights on the nodes {-2,-1,0,1,2,3} for a point at offset
// u in [0,1) from node 0.
inline void quintic_weights(double u, double w[6]) {
    for (int k = -2; k <= 3; ++k) {
        double acc = 1.0;
        for (int j = -2; j <= 3; ++j) {
            if (j == k) continue;
            acc *= (u - j) / static_cast<double>(k - j);
        }
        w[k + 2] = acc;
    }
}

inline Complex sample_polar(const PolarSection& phi, double s, double theta) {
    const PolarGrid& g = phi.grid;
    const double si = (s - g.s_min) / g.ds();
    const int i0 = static_cast<int>(std::floor(si));
    const double tj = theta / g.dtheta();
    const int j0 = static_cast<int>(std::floor(tj));
    double ws[6], wt[6];
    quintic_weights(si - i0, ws);
    quintic_weights(tj - j0, wt);
    Complex acc(0, 0);
    for (int a = 0; a < 6; ++a) {
        const int i = i0 - 2 + a;
        if (i < 0 || i >= g.S) continue;
        Complex row(0, 0);
        for (int b = 0; b < 6; ++b) {
            const int jj = (((j0 - 2 + b) % g.M) + g.M) % g.M;
            row += wt[b] * phi.values(i, jj);
        }
        acc += ws[a] * row;
    }
    return acc;
}

inline Complex sample_cartesian(const CartesianGridFunction& f, double x,
                                double y) {
    const CartesianGrid& g = f.grid;
    const double xi = (x - g.x(0)) / g.dx();
    const double yi = (y - g.x(0)) / g.dx();
    const int i0 = static_cast<int>(std::floor(xi));
    const int j0 = static_cast<int>(std::floor(yi));
    double wx[6], wy[6];
    quintic_weights(xi - i0, wx);
    quintic_weights(yi - j0, wy);
    Complex acc(0, 0);
    for (int a = 0; a < 6; ++a) {
        const int i = i0 - 2 + a;
        if (i < 0 || i >= g.N) continue;
        Complex row(0, 0);
        for (int b = 0; b < 6; ++b) {
            const int j = j0 - 2 + b;
            if (j < 0 || j >= g.N) continue;
            row += wy[b] * f.values(i * g.N + j);
        }
        acc += wx[a] * row;
    }
    return acc;
}

} // namespace detail

inline void check_coverage(const PolarGrid& pg, const CartesianGrid& cg) {
    if (cg.n != 2) throw std::invalid_argument("resample: Cartesian n must be 2");
    const double r_max = std::exp(0.5 * pg.s_max);
    if (cg.L < r_max)
        throw std::invalid_argument("resample: box does not cover the annulus");
}

inline CartesianGridFunction resample_cartesian(const PolarSection& phi,
                                                const CartesianGrid& cg) {
    check_coverage(phi.grid, cg);
    CartesianGridFunction out(cg);
    for (int i = 0; i < cg.N; ++i)
        for (int j = 0; j < cg.N; ++j) {
            const double x = cg.x(i), y = cg.x(j);
            const double r2 = x * x + y * y;
            if (r2 <= 0.0) continue;
            const double s = std::log(r2);
            if (s < phi.grid.s_min || s > phi.grid.s_max) continue;
            const double theta = std::atan2(y, x) >= 0
                                     ? std::atan2(y, x)
                                     : std::atan2(y, x) + 2.0 * kPi;
            out.values(i * cg.N + j) = detail::sample_polar(phi, s, theta);
        }
    return out;
}

inline PolarSection resample_polar(const CartesianGridFunction& f,
                                   const PolarGrid& pg) {
    check_coverage(pg, f.grid);
    PolarSection out(pg);
    for (int i = 0; i < pg.S; ++i) {
        const double r = std::exp(0.5 * pg.s(i));
        for (int j = 0; j < pg.M; ++j)
            out.values(i, j) = detail::sample_cartesian(
                f, r * std::cos(pg.theta(j)), r * std::sin(pg.theta(j)));
    }
    return out;
}

} // namespace opfield
