#pragma once

// Small numeric kernels shared across the library: complex FFT (radix-2 with
// a Bluestein fallback for arbitrary sizes), spectral angular derivatives and
// the fixed 8th-order centered stencil used for log-radial differentiation.

#include <cassert>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace opfield {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse
// (no normalization).
inline void fft_pow2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    assert(is_pow2(n));
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                Complex u = a[i + k];
                Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace detail

// Forward DFT: X_k = sum_j x_j exp(-2*pi*i*j*k/n). Arbitrary n (Bluestein
// when n is not a power of two).
inline void fft(std::vector<Complex>& a, int sign = -1) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (detail::is_pow2(n)) {
        detail::fft_pow2(a, sign);
        return;
    }
    // Bluestein: x_j e^{-i pi j^2/n} convolved with chirp.
    std::size_t m = 1;
    while (m < 2 * n + 1) m <<= 1;
    std::vector<Complex> u(m, Complex(0, 0)), v(m, Complex(0, 0));
    std::vector<Complex> chirp(n);
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the phase argument bounded.
        const double ang = sign * kPi * static_cast<double>((j * j) % (2 * n)) /
                           static_cast<double>(n);
        chirp[j] = Complex(std::cos(ang), std::sin(ang));
    }
    for (std::size_t j = 0; j < n; ++j) u[j] = a[j] * chirp[j];
    v[0] = std::conj(chirp[0]);
    for (std::size_t j = 1; j < n; ++j)
        v[j] = v[m - j] = std::conj(chirp[j]);
    detail::fft_pow2(u, -1);
    detail::fft_pow2(v, -1);
    for (std::size_t j = 0; j < m; ++j) u[j] *= v[j];
    detail::fft_pow2(u, +1);
    for (std::size_t j = 0; j < n; ++j)
        a[j] = u[j] * chirp[j] / static_cast<double>(m);
}

inline void ifft_unnormalized(std::vector<Complex>& a) { fft(a, +1); }

// Signed DFT frequency of bin k on an n-point grid.
inline int dft_frequency(std::size_t k, std::size_t n) {
    return k < n / 2 + (n % 2) ? static_cast<int>(k)
                               : static_cast<int>(k) - static_cast<int>(n);
}

// Spectral derivative matrix (-d/dtheta would be Dtheta with a sign) on the
// periodic grid theta_j = 2*pi*j/M. The Nyquist mode is zeroed for odd
// powers, the standard symmetric choice.
inline MatrixXcd angular_derivative_matrix(int M, int power = 1) {
    MatrixXcd F(M, M), D = MatrixXcd::Zero(M, M);
    for (int k = 0; k < M; ++k)
        for (int j = 0; j < M; ++j) {
            const double ang = -2.0 * kPi * k * j / M;
            F(k, j) = Complex(std::cos(ang), std::sin(ang));
        }
    for (int k = 0; k < M; ++k) {
        const int m = dft_frequency(static_cast<std::size_t>(k),
                                    static_cast<std::size_t>(M));
        Complex im(0.0, static_cast<double>(m));
        Complex f = std::pow(im, power);
        if (power % 2 != 0 && M % 2 == 0 && k == M / 2) f = 0.0;
        D(k, k) = f;
    }
    return F.adjoint() * D * F / static_cast<double>(M);
}

// 8th-order centered first-derivative stencil coefficients c_{-4..4}/h.
inline const std::array<double, 9>& stencil8() {
    static const std::array<double, 9> c = {
        1.0 / 280.0, -4.0 / 105.0, 1.0 / 5.0, -4.0 / 5.0, 0.0,
        4.0 / 5.0,   -1.0 / 5.0,   4.0 / 105.0, -1.0 / 280.0};
    return c;
}

// 10th-order centered first-derivative stencil coefficients c_{-5..5}/h.
inline const std::array<double, 11>& stencil10() {
    static const std::array<double, 11> c = {
        -1.0 / 1260.0, 5.0 / 504.0, -5.0 / 84.0, 5.0 / 21.0, -5.0 / 6.0, 0.0,
        5.0 / 6.0,     -5.0 / 21.0, 5.0 / 84.0,  -5.0 / 504.0, 1.0 / 1260.0};
    return c;
}

// Applies the 8th-order stencil along a sampled vector, zero beyond the ends.
inline VectorXcd stencil8_derivative(const VectorXcd& f, double h) {
    const int n = static_cast<int>(f.size());
    VectorXcd out = VectorXcd::Zero(n);
    const auto& c = stencil8();
    for (int i = 0; i < n; ++i) {
        Complex acc(0, 0);
        for (int k = -4; k <= 4; ++k) {
            const int j = i + k;
            if (j < 0 || j >= n) continue;
            acc += c[static_cast<std::size_t>(k + 4)] * f[j];
        }
        out[i] = acc / h;
    }
    return out;
}

// Richardson extrapolation of a centered difference of callable g at 0:
// returns d/dt g(t)|_{t=0} using steps h, h/2, h/4.
template <typename F>
double richardson_derivative(F&& g, double h) {
    auto d = [&](double step) { return (g(step) - g(-step)) / (2.0 * step); };
    const double d1 = d(h), d2 = d(h / 2), d3 = d(h / 4);
    const double r1 = (4.0 * d2 - d1) / 3.0;
    const double r2 = (4.0 * d3 - d2) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
}

} // namespace opfield
