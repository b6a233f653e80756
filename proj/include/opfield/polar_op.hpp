#pragma once

// Differential-operator backend of the Weyl quantizer on the log-polar grid
// (n = 2).  Operators are kept symbolically as normal-ordered sums
//   f(s,theta) d_s^a d_theta^b
// where f is a trigonometric-exponential polynomial; composition uses the
// exact Leibniz rule, so algebraic cancellations (e.g. the absence of d_s in
// the quantization of constants of motion) happen exactly, not numerically.

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "opfield/numerics.hpp"
#include "opfield/polar.hpp"
#include "opfield/symbol.hpp"

namespace opfield {

// Sum of c * e^{(half_r) s / 2} e^{i mode theta}; half_r counts powers of
// r = e^{s/2}, so lambda = r^2 has half_r = 2.
class PolarFunc {
  public:
    using Key = std::pair<int, int>; // (half_r, mode)

    const std::map<Key, Complex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add(int half_r, int mode, Complex c) {
        Key k{half_r, mode};
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            if (std::abs(c) > kCoeffZeroTol) terms_.emplace(k, c);
        } else {
            it->second += c;
            if (std::abs(it->second) <= kCoeffZeroTol) terms_.erase(it);
        }
    }

    friend PolarFunc operator+(PolarFunc a, const PolarFunc& b) {
        for (const auto& [k, c] : b.terms_) a.add(k.first, k.second, c);
        return a;
    }
    friend PolarFunc operator*(Complex s, PolarFunc a) {
        for (auto& [k, c] : a.terms_) c *= s;
        return a;
    }
    friend PolarFunc operator*(const PolarFunc& a, const PolarFunc& b) {
        PolarFunc out;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_)
                out.add(ka.first + kb.first, ka.second + kb.second, ca * cb);
        return out;
    }

    PolarFunc d_s() const {
        PolarFunc out;
        for (const auto& [k, c] : terms_)
            out.add(k.first, k.second, 0.5 * static_cast<double>(k.first) * c);
        return out;
    }
    PolarFunc d_theta() const {
        PolarFunc out;
        for (const auto& [k, c] : terms_)
            out.add(k.first, k.second, Complex(0, k.second) * c);
        return out;
    }
    PolarFunc conjugate() const {
        PolarFunc out;
        for (const auto& [k, c] : terms_)
            out.add(k.first, -k.second, std::conj(c));
        return out;
    }

    Complex eval(double s, double theta) const {
        Complex acc(0, 0);
        for (const auto& [k, c] : terms_)
            acc += c * std::exp(Complex(0.5 * k.first * s, k.second * theta));
        return acc;
    }

    static PolarFunc one() {
        PolarFunc f;
        f.add(0, 0, 1.0);
        return f;
    }
    static PolarFunc q1() { // r cos(theta)
        PolarFunc f;
        f.add(1, 1, 0.5);
        f.add(1, -1, 0.5);
        return f;
    }
    static PolarFunc q2() { // r sin(theta)
        PolarFunc f;
        f.add(1, 1, Complex(0, -0.5));
        f.add(1, -1, Complex(0, 0.5));
        return f;
    }

  private:
    std::map<Key, Complex> terms_;
};

// Normal-ordered operator: map (a, b) -> coefficient of d_s^a d_theta^b.
class PolarOp {
  public:
    using Key = std::pair<int, int>; // (d_s power, d_theta power)

    const std::map<Key, PolarFunc>& terms() const { return terms_; }

    void add(int a, int b, const PolarFunc& f) {
        if (f.is_zero()) return;
        auto it = terms_.find({a, b});
        if (it == terms_.end()) {
            terms_.emplace(Key{a, b}, f);
        } else {
            it->second = it->second + f;
            if (it->second.is_zero()) terms_.erase({a, b});
        }
    }

    friend PolarOp operator+(PolarOp x, const PolarOp& y) {
        for (const auto& [k, f] : y.terms_) x.add(k.first, k.second, f);
        return x;
    }
    friend PolarOp operator*(Complex s, PolarOp x) {
        PolarOp out;
        for (const auto& [k, f] : x.terms_) out.add(k.first, k.second, s * f);
        return out;
    }

    // Operator composition via the Leibniz rule:
    // d_s^a d_theta^b (g h) = sum C(a,i) C(b,j) (d_s^i d_theta^j g) d_s^{a-i} d_theta^{b-j} h.
    friend PolarOp operator*(const PolarOp& x, const PolarOp& y) {
        PolarOp out;
        for (const auto& [kx, f] : x.terms_) {
            const int a = kx.first, b = kx.second;
            for (const auto& [ky, g] : y.terms_) {
                PolarFunc gd = g; // d_s^i d_theta^j g, built incrementally
                for (int i = 0; i <= a; ++i) {
                    PolarFunc gdj = gd;
                    for (int j = 0; j <= b; ++j) {
                        const double coef = binom(a, i) * binom(b, j);
                        out.add(a - i + ky.first, b - j + ky.second,
                                coef * (f * gdj));
                        gdj = gdj.d_theta();
                    }
                    gd = gd.d_s();
                }
            }
        }
        return out;
    }

    static PolarOp multiplication(const PolarFunc& f) {
        PolarOp out;
        out.add(0, 0, f);
        return out;
    }
    static PolarOp derivative(int a, int b) {
        PolarOp out;
        out.add(a, b, PolarFunc::one());
        return out;
    }
    // D_1 = -i(cos(theta)(2/r) d_s - (sin(theta)/r) d_theta)
    static PolarOp d1() {
        PolarFunc fs, ft;
        fs.add(-1, 1, Complex(0, -1));
        fs.add(-1, -1, Complex(0, -1));
        ft.add(-1, 1, 0.5);
        ft.add(-1, -1, -0.5);
        PolarOp out;
        out.add(1, 0, fs);
        out.add(0, 1, ft);
        return out;
    }
    // D_2 = -i(sin(theta)(2/r) d_s + (cos(theta)/r) d_theta)
    static PolarOp d2() {
        PolarFunc fs, ft;
        fs.add(-1, 1, -1.0);
        fs.add(-1, -1, 1.0);
        ft.add(-1, 1, Complex(0, -0.5));
        ft.add(-1, -1, Complex(0, -0.5));
        PolarOp out;
        out.add(1, 0, fs);
        out.add(0, 1, ft);
        return out;
    }

    // Formal adjoint w.r.t. the direct-integral measure e^s ds dtheta:
    // d_theta* = -d_theta, d_s* = -1 - d_s, (f T)* = T* conj(f).
    PolarOp adjoint() const {
        PolarOp out;
        for (const auto& [k, f] : terms_) {
            PolarOp term = PolarOp::multiplication(f.conjugate());
            PolarOp ds_star;
            ds_star.add(0, 0, Complex(-1.0, 0) * PolarFunc::one());
            ds_star.add(1, 0, Complex(-1.0, 0) * PolarFunc::one());
            for (int i = 0; i < k.first; ++i) term = ds_star * term;
            for (int j = 0; j < k.second; ++j)
                term = (Complex(-1.0, 0) * PolarOp::derivative(0, 1)) * term;
            out = out + term;
        }
        return out;
    }

    int max_ds_power() const {
        int m = 0;
        for (const auto& [k, f] : terms_) m = std::max(m, k.first);
        return m;
    }

  private:
    static double binom(int n, int k) {
        double r = 1.0;
        for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
        return r;
    }
    std::map<Key, PolarFunc> terms_;
};

// Convert a polynomial in q alone (the p-degree-zero part of a symbol) to a
// trigonometric-exponential function on the polar grid.
inline PolarFunc polar_func_from_q_poly(const PolySymbol& c) {
    if (c.dimension() != 2 || c.degree_p() > 0)
        throw std::invalid_argument("polar_func_from_q_poly: need q-only, n=2");
    PolarFunc out;
    for (const auto& [idx, coef] : c.terms()) {
        PolarFunc mono = PolarFunc::one();
        for (int e = 0; e < idx[0]; ++e) mono = mono * PolarFunc::q1();
        for (int e = 0; e < idx[1]; ++e) mono = mono * PolarFunc::q2();
        out = out + coef * mono;
    }
    return out;
}

// Grid realization: sampled coefficients, stencil d_s, spectral d_theta.
class PolarDiffOperator {
  public:
    PolarDiffOperator(PolarGrid grid, PolarOp op)
        : grid_(std::move(grid)), op_(std::move(op)) {
        for (const auto& [k, f] : op_.terms()) {
            Eigen::MatrixXcd coef(grid_.S, grid_.M);
            for (int i = 0; i < grid_.S; ++i)
                for (int j = 0; j < grid_.M; ++j)
                    coef(i, j) = f.eval(grid_.s(i), grid_.theta(j));
            terms_.push_back({k.first, k.second, std::move(coef)});
            max_b_ = std::max(max_b_, k.second);
        }
        for (int b = 0; b <= max_b_; ++b)
            dtheta_.push_back(b == 0 ? Eigen::MatrixXcd::Identity(grid_.M, grid_.M).eval()
                                     : angular_derivative_matrix(grid_.M, b));
    }

    const PolarGrid& grid() const { return grid_; }
    const PolarOp& symbolic() const { return op_; }

    PolarSection apply(const PolarSection& phi) const {
        check_same_grid(phi.grid, grid_);
        PolarSection out(grid_);
        for (const auto& t : terms_) {
            Eigen::MatrixXcd work = phi.values;
            for (int a = 0; a < t.ds_power; ++a) work = apply_ds(work);
            if (t.dtheta_power > 0)
                work = work * dtheta_[t.dtheta_power].transpose();
            out.values += t.coef.cwiseProduct(work);
        }
        return out;
    }

    PolarDiffOperator adjoint() const {
        return PolarDiffOperator(grid_, op_.adjoint());
    }

    struct Term {
        int ds_power;
        int dtheta_power;
        Eigen::MatrixXcd coef; // S x M samples
    };
    const std::vector<Term>& grid_terms() const { return terms_; }
    const Eigen::MatrixXcd& dtheta_matrix(int b) const { return dtheta_[b]; }

  private:
    Eigen::MatrixXcd apply_ds(const Eigen::MatrixXcd& v) const {
        const auto& st = stencil8();
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(v.rows(), v.cols());
        const double inv = 1.0 / grid_.ds();
        for (int k = -4; k <= 4; ++k) {
            if (st[k + 4] == 0.0) continue;
            const int lo = std::max(0, -k);
            const int hi = std::min<int>(v.rows(), v.rows() - k);
            if (hi <= lo) continue;
            out.middleRows(lo, hi - lo) +=
                (st[k + 4] * inv) * v.middleRows(lo + k, hi - lo);
        }
        return out;
    }

    PolarGrid grid_;
    PolarOp op_;
    std::vector<Term> terms_;
    std::vector<Eigen::MatrixXcd> dtheta_;
    int max_b_ = 0;
};

// Weyl quantization of a symbol with momentum degree <= 2 (n = 2).
inline PolarDiffOperator quantize_diffop(const PolySymbol& u,
                                         const PolarGrid& grid) {
    if (u.dimension() != 2)
        throw std::invalid_argument("quantize_diffop: n must be 2");
    if (u.degree_p() > 2)
        throw std::invalid_argument("quantize_diffop: momentum degree > 2");

    // Split u = sum_beta c_beta(q) p^beta.
    std::map<std::pair<int, int>, PolySymbol> parts;
    for (const auto& [idx, c] : u.terms()) {
        std::pair<int, int> beta{idx[2], idx[3]};
        auto it = parts.find(beta);
        if (it == parts.end())
            it = parts.emplace(beta, PolySymbol(2)).first;
        it->second.add_term({idx[0], idx[1]}, {0, 0}, c);
    }

    const PolarOp D[2] = {PolarOp::d1(), PolarOp::d2()};
    PolarOp total;
    for (const auto& [beta, cq] : parts) {
        const PolarOp A = PolarOp::multiplication(polar_func_from_q_poly(cq));
        const int deg = beta.first + beta.second;
        if (deg == 0) {
            total = total + A;
        } else if (deg == 1) {
            const PolarOp& Dj = D[beta.first == 1 ? 0 : 1];
            total = total + Complex(0.5, 0) * (A * Dj + Dj * A);
        } else {
            int j, k;
            if (beta.first == 2) { j = 0; k = 0; }
            else if (beta.second == 2) { j = 1; k = 1; }
            else { j = 0; k = 1; }
            total = total +
                    Complex(0.25, 0) * (A * D[j] * D[k] + D[j] * A * D[k] +
                                        D[k] * A * D[j] + D[j] * D[k] * A);
        }
    }
    return PolarDiffOperator(grid, total);
}

} // namespace opfield
