#pragma once

// Exact sparse polynomial symbols on phase space R^{2n} and the classical
// side of the construction: Poisson brackets, linear Hamiltonian flows,
// radial vector fields on (0,inf) with their lifts, the Poisson connection
// on constants of motion, and the SO(n) moment-map components.

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace opfield {

using Complex = std::complex<double>;

// Exponent vector (alpha over q, beta over p), length 2n.
using MultiIndex = std::vector<int>;

inline constexpr double kCoeffZeroTol = 1e-12;

class PolySymbol {
  public:
    explicit PolySymbol(int n = 1) : n_(n) {
        if (n < 1) throw std::invalid_argument("PolySymbol: n must be >= 1");
    }

    int dimension() const { return n_; }
    const std::map<MultiIndex, Complex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const MultiIndex& idx, Complex c) {
        if (static_cast<int>(idx.size()) != 2 * n_)
            throw std::invalid_argument("PolySymbol: bad multi-index length");
        auto it = terms_.find(idx);
        if (it == terms_.end()) {
            if (std::abs(c) > kCoeffZeroTol) terms_.emplace(idx, c);
        } else {
            it->second += c;
            if (std::abs(it->second) <= kCoeffZeroTol) terms_.erase(it);
        }
    }

    // Convenience: term c * q^alpha * p^beta.
    void add_term(const std::vector<int>& alpha, const std::vector<int>& beta,
                  Complex c) {
        MultiIndex idx(alpha);
        idx.insert(idx.end(), beta.begin(), beta.end());
        add_term(idx, c);
    }

    PolySymbol& operator+=(const PolySymbol& o) {
        check_dim(o);
        for (const auto& [idx, c] : o.terms_) add_term(idx, c);
        return *this;
    }
    PolySymbol& operator-=(const PolySymbol& o) {
        check_dim(o);
        for (const auto& [idx, c] : o.terms_) add_term(idx, -c);
        return *this;
    }
    PolySymbol& operator*=(Complex s) {
        if (std::abs(s) <= kCoeffZeroTol) {
            terms_.clear();
            return *this;
        }
        for (auto& [idx, c] : terms_) c *= s;
        return *this;
    }

    friend PolySymbol operator+(PolySymbol a, const PolySymbol& b) { return a += b; }
    friend PolySymbol operator-(PolySymbol a, const PolySymbol& b) { return a -= b; }
    friend PolySymbol operator*(PolySymbol a, Complex s) { return a *= s; }
    friend PolySymbol operator*(Complex s, PolySymbol a) { return a *= s; }

    friend PolySymbol operator*(const PolySymbol& a, const PolySymbol& b) {
        a.check_dim(b);
        PolySymbol out(a.n_);
        for (const auto& [ia, ca] : a.terms_)
            for (const auto& [ib, cb] : b.terms_) {
                MultiIndex idx(ia.size());
                for (std::size_t k = 0; k < ia.size(); ++k) idx[k] = ia[k] + ib[k];
                out.add_term(idx, ca * cb);
            }
        return out;
    }

    PolySymbol conjugate() const {
        PolySymbol out(n_);
        for (const auto& [idx, c] : terms_) out.add_term(idx, std::conj(c));
        return out;
    }

    PolySymbol pow(int k) const {
        if (k < 0) throw std::invalid_argument("PolySymbol::pow: negative power");
        PolySymbol out = constant(n_, 1.0);
        for (int i = 0; i < k; ++i) out = out * (*this);
        return out;
    }

    // Partial derivative; var in [0, 2n): 0..n-1 are q, n..2n-1 are p.
    PolySymbol derivative(int var) const {
        PolySymbol out(n_);
        for (const auto& [idx, c] : terms_) {
            if (idx[var] == 0) continue;
            MultiIndex d(idx);
            d[var] -= 1;
            out.add_term(d, c * static_cast<double>(idx[var]));
        }
        return out;
    }

    Complex evaluate(const Eigen::VectorXd& qp) const {
        if (qp.size() != 2 * n_)
            throw std::invalid_argument("PolySymbol::evaluate: bad point size");
        Complex acc(0, 0);
        for (const auto& [idx, c] : terms_) {
            double mono = 1.0;
            for (int v = 0; v < 2 * n_; ++v)
                for (int k = 0; k < idx[v]; ++k) mono *= qp[v];
            acc += c * mono;
        }
        return acc;
    }

    int degree() const {
        int d = 0;
        for (const auto& [idx, c] : terms_) {
            int t = 0;
            for (int e : idx) t += e;
            d = std::max(d, t);
        }
        return d;
    }
    int degree_q() const { return part_degree(0, n_); }
    int degree_p() const { return part_degree(n_, 2 * n_); }

    bool near_zero(double tol = kCoeffZeroTol) const {
        for (const auto& [idx, c] : terms_)
            if (std::abs(c) > tol) return false;
        return true;
    }

    double max_coeff_difference(const PolySymbol& o) const {
        PolySymbol d = *this;
        // Bypass the normalization threshold so tiny residuals are visible.
        double m = 0.0;
        std::map<MultiIndex, Complex> merged(terms_);
        for (const auto& [idx, c] : o.terms_) merged[idx] -= c;
        for (const auto& [idx, c] : merged) {
            auto it = terms_.find(idx);
            Complex mine = it == terms_.end() ? Complex(0) : it->second;
            auto io = o.terms_.find(idx);
            Complex theirs = io == o.terms_.end() ? Complex(0) : io->second;
            m = std::max(m, std::abs(mine - theirs));
        }
        (void)d;
        return m;
    }

    static PolySymbol constant(int n, Complex c) {
        PolySymbol out(n);
        out.add_term(MultiIndex(2 * n, 0), c);
        return out;
    }
    // q_i (1-based would invite bugs; use 0-based throughout the code).
    static PolySymbol coordinate_q(int n, int i) {
        PolySymbol out(n);
        MultiIndex idx(2 * n, 0);
        idx[i] = 1;
        out.add_term(idx, 1.0);
        return out;
    }
    static PolySymbol coordinate_p(int n, int i) {
        PolySymbol out(n);
        MultiIndex idx(2 * n, 0);
        idx[n + i] = 1;
        out.add_term(idx, 1.0);
        return out;
    }
    // h(q,p) = ||q||^2
    static PolySymbol q_norm_squared(int n) {
        PolySymbol out(n);
        for (int i = 0; i < n; ++i) {
            MultiIndex idx(2 * n, 0);
            idx[i] = 2;
            out.add_term(idx, 1.0);
        }
        return out;
    }
    // h0(q,p) = sum q_j p_j
    static PolySymbol qdotp(int n) {
        PolySymbol out(n);
        for (int i = 0; i < n; ++i) {
            MultiIndex idx(2 * n, 0);
            idx[i] = 1;
            idx[n + i] = 1;
            out.add_term(idx, 1.0);
        }
        return out;
    }

    // One term per line: "alpha=(a1,..,an) beta=(b1,..,bn) re im".
    std::string serialize() const {
        std::ostringstream os;
        os.precision(17);
        for (const auto& [idx, c] : terms_) {
            os << "alpha=(";
            for (int i = 0; i < n_; ++i) os << idx[i] << (i + 1 < n_ ? "," : "");
            os << ") beta=(";
            for (int i = 0; i < n_; ++i)
                os << idx[n_ + i] << (i + 1 < n_ ? "," : "");
            os << ") " << c.real() << " " << c.imag() << "\n";
        }
        return os.str();
    }

    static PolySymbol deserialize(const std::string& text, int n) {
        PolySymbol out(n);
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            MultiIndex idx(2 * n, 0);
            double re = 0, im = 0;
            std::string work = line;
            for (char& ch : work)
                if (ch == '(' || ch == ')' || ch == ',' || ch == '=') ch = ' ';
            std::istringstream ls(work);
            std::string tag;
            ls >> tag; // alpha
            if (tag != "alpha") throw std::runtime_error("symbol parse: " + line);
            for (int i = 0; i < n; ++i) ls >> idx[i];
            ls >> tag; // beta
            if (tag != "beta") throw std::runtime_error("symbol parse: " + line);
            for (int i = 0; i < n; ++i) ls >> idx[n + i];
            ls >> re >> im;
            if (!ls) throw std::runtime_error("symbol parse: " + line);
            out.add_term(idx, Complex(re, im));
        }
        return out;
    }

  private:
    void check_dim(const PolySymbol& o) const {
        if (o.n_ != n_)
            throw std::invalid_argument("PolySymbol: dimension mismatch");
    }
    int part_degree(int lo, int hi) const {
        int d = 0;
        for (const auto& [idx, c] : terms_) {
            int t = 0;
            for (int v = lo; v < hi; ++v) t += idx[v];
            d = std::max(d, t);
        }
        return d;
    }

    int n_;
    std::map<MultiIndex, Complex> terms_;
};

// {f,g} = sum_i df/dp_i dg/dq_i - df/dq_i dg/dp_i. The sign is fixed so that
// {h0,u} generates d/dt u(rhat_t^0) at t=0; with it {h0, ||q||^2} = 2||q||^2.
inline PolySymbol poisson_bracket(const PolySymbol& u, const PolySymbol& v) {
    if (u.dimension() != v.dimension())
        throw std::invalid_argument("poisson_bracket: dimension mismatch");
    const int n = u.dimension();
    PolySymbol out(n);
    for (int i = 0; i < n; ++i) {
        out += u.derivative(n + i) * v.derivative(i);
        out -= u.derivative(i) * v.derivative(n + i);
    }
    return out;
}

inline bool is_constant_of_motion(const PolySymbol& u, const PolySymbol& h) {
    return poisson_bracket(h, u).is_zero();
}

// A linear map on (q,p) given by a 2n x 2n block matrix.
class LinearSymplecticMap {
  public:
    LinearSymplecticMap(int n, Eigen::MatrixXd S) : n_(n), S_(std::move(S)) {
        if (S_.rows() != 2 * n || S_.cols() != 2 * n)
            throw std::invalid_argument("LinearSymplecticMap: bad matrix size");
        if (symplectic_defect() > 1e-12)
            throw std::invalid_argument(
                "LinearSymplecticMap: S does not preserve the symplectic form");
    }

    int dimension() const { return n_; }
    const Eigen::MatrixXd& matrix() const { return S_; }

    double symplectic_defect() const {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n_, 2 * n_);
        J.topRightCorner(n_, n_) = Eigen::MatrixXd::Identity(n_, n_);
        J.bottomLeftCorner(n_, n_) = -Eigen::MatrixXd::Identity(n_, n_);
        return (S_.transpose() * J * S_ - J).cwiseAbs().maxCoeff();
    }

    static LinearSymplecticMap identity(int n) {
        return LinearSymplecticMap(n, Eigen::MatrixXd::Identity(2 * n, 2 * n));
    }
    // rhat_t^0 (q,p) = (e^t q, e^{-t} p)
    static LinearSymplecticMap dilation(int n, double t) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2 * n, 2 * n);
        for (int i = 0; i < n; ++i) {
            S(i, i) = std::exp(t);
            S(n + i, n + i) = std::exp(-t);
        }
        return LinearSymplecticMap(n, S);
    }
    // alpha_t (q,p) = (q, p + 2 t q), the Hamiltonian flow of ||q||^2.
    static LinearSymplecticMap shear(int n, double t) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Identity(2 * n, 2 * n);
        for (int i = 0; i < n; ++i) S(n + i, i) = 2.0 * t;
        return LinearSymplecticMap(n, S);
    }
    // The Fourier rotation J(q,p) = (-p, q).
    static LinearSymplecticMap fourier_rotation(int n) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (int i = 0; i < n; ++i) {
            S(i, n + i) = -1.0;
            S(n + i, i) = 1.0;
        }
        return LinearSymplecticMap(n, S);
    }

  private:
    int n_ = 1;
    Eigen::MatrixXd S_;
};

// u \circ S as an exact polynomial.
inline PolySymbol flow_pullback(const PolySymbol& u, const LinearSymplecticMap& S) {
    if (u.dimension() != S.dimension())
        throw std::invalid_argument("flow_pullback: dimension mismatch");
    const int n = u.dimension();
    const Eigen::MatrixXd& M = S.matrix();
    // Linear forms replacing each variable.
    std::vector<PolySymbol> subst;
    subst.reserve(2 * n);
    for (int v = 0; v < 2 * n; ++v) {
        PolySymbol form(n);
        for (int w = 0; w < 2 * n; ++w) {
            if (M(v, w) == 0.0) continue;
            MultiIndex idx(2 * n, 0);
            idx[w] = 1;
            form.add_term(idx, M(v, w));
        }
        subst.push_back(form);
    }
    PolySymbol out(n);
    for (const auto& [idx, c] : u.terms()) {
        PolySymbol mono = PolySymbol::constant(n, c);
        for (int v = 0; v < 2 * n; ++v)
            for (int k = 0; k < idx[v]; ++k) mono = mono * subst[v];
        out += mono;
    }
    return out;
}

// l_{ij}(q,p) = q_i p_j - q_j p_i with 1-based indices as in the usual
// notation; requires 1 <= i < j <= n.
inline PolySymbol angular_momentum(int i, int j, int n) {
    if (!(1 <= i && i < j && j <= n))
        throw std::out_of_range("angular_momentum: need 1 <= i < j <= n");
    PolySymbol out(n);
    MultiIndex a(2 * n, 0), b(2 * n, 0);
    a[i - 1] = 1;
    a[n + j - 1] = 1;
    out.add_term(a, 1.0);
    b[j - 1] = 1;
    b[n + i - 1] = 1;
    out.add_term(b, -1.0);
    return out;
}

// Real polynomial in one variable (lambda), dense coefficients.
class Poly1 {
  public:
    Poly1() = default;
    explicit Poly1(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Poly1 monomial(double coeff, int power) {
        std::vector<double> c(static_cast<std::size_t>(power) + 1, 0.0);
        c.back() = coeff;
        return Poly1(std::move(c));
    }

    const std::vector<double>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    double operator()(double x) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    Poly1 derivative() const {
        if (c_.size() <= 1) return Poly1();
        std::vector<double> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k)
            d[k - 1] = c_[k] * static_cast<double>(k);
        return Poly1(std::move(d));
    }

    friend Poly1 operator+(const Poly1& a, const Poly1& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
        for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
        return Poly1(std::move(c));
    }
    friend Poly1 operator-(const Poly1& a, const Poly1& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
        for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] -= b.c_[k];
        return Poly1(std::move(c));
    }
    friend Poly1 operator*(const Poly1& a, const Poly1& b) {
        if (a.is_zero() || b.is_zero()) return Poly1();
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                c[i + j] += a.c_[i] * b.c_[j];
        return Poly1(std::move(c));
    }
    friend Poly1 operator*(double s, const Poly1& a) {
        std::vector<double> c(a.c_);
        for (double& x : c) x *= s;
        return Poly1(std::move(c));
    }

  private:
    void trim() {
        while (!c_.empty() && std::abs(c_.back()) <= kCoeffZeroTol) c_.pop_back();
    }
    std::vector<double> c_;
};

// X = a(lambda) d/dlambda on (0,inf); a polynomial or an arbitrary callable.
class RadialVectorField {
  public:
    explicit RadialVectorField(Poly1 a) : poly_(std::move(a)), is_poly_(true) {}
    explicit RadialVectorField(std::function<double(double)> a)
        : fn_(std::move(a)), is_poly_(false) {}

    bool is_polynomial() const { return is_poly_; }
    const Poly1& poly() const {
        if (!is_poly_)
            throw std::logic_error("RadialVectorField: not polynomial");
        return poly_;
    }
    double coefficient(double lambda) const {
        return is_poly_ ? poly_(lambda) : fn_(lambda);
    }
    double coefficient_derivative(double lambda) const {
        if (is_poly_) return poly_.derivative()(lambda);
        const double h = 1e-5 * std::max(1.0, std::abs(lambda));
        return (fn_(lambda + h) - fn_(lambda - h)) / (2 * h);
    }

    // X0: a(lambda) = 2 lambda.
    static RadialVectorField euler_generator() {
        return RadialVectorField(Poly1::monomial(2.0, 1));
    }
    // Monomial family a(lambda) = 2 lambda^k, k >= 1.
    static RadialVectorField monomial_family(int k) {
        if (k < 1) throw std::invalid_argument("monomial_family: k >= 1");
        return RadialVectorField(Poly1::monomial(2.0, k));
    }

    // Commutator [X,Y] of polynomial fields: coefficient a_X a_Y' - a_Y a_X'.
    static RadialVectorField commutator(const RadialVectorField& X,
                                        const RadialVectorField& Y) {
        return RadialVectorField(X.poly() * Y.poly().derivative() -
                                 Y.poly() * X.poly().derivative());
    }

  private:
    Poly1 poly_;
    std::function<double(double)> fn_;
    bool is_poly_;
};

// The normal lift Xtilde(q) = b(||q||^2) sum q_j d/dq_j with
// b(lambda) = a(lambda)/(2 lambda), plus its divergence.
struct RadialLift {
    Poly1 b;        // radial coefficient of the Euler field
    Poly1 div;      // div Xtilde as a function of lambda
    int n = 0;
};

inline Poly1 divide_by_2lambda(const Poly1& a) {
    const auto& c = a.coeffs();
    if (c.empty()) return Poly1();
    if (std::abs(c[0]) > kCoeffZeroTol)
        throw std::invalid_argument("radial lift: a(0) != 0, b is not polynomial");
    std::vector<double> b(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) b[k - 1] = c[k] / 2.0;
    return Poly1(std::move(b));
}

inline RadialLift radial_lift(const RadialVectorField& X, int n) {
    if (!X.is_polynomial())
        throw std::invalid_argument("radial_lift: symbolic lift needs polynomial a");
    RadialLift out;
    out.n = n;
    out.b = divide_by_2lambda(X.poly());
    // div Xtilde = n b(lambda) + 2 lambda b'(lambda).
    out.div = static_cast<double>(n) * out.b +
              Poly1::monomial(2.0, 1) * out.b.derivative();
    return out;
}

// h_Xtilde(q,p) = b(||q||^2) (q . p).
inline PolySymbol hamiltonian_lift_symbol(const RadialVectorField& X, int n) {
    const Poly1 b = divide_by_2lambda(X.poly());
    PolySymbol h2 = PolySymbol::q_norm_squared(n);
    PolySymbol out(n);
    const auto& c = b.coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] == 0.0) continue;
        out += c[k] * (h2.pow(static_cast<int>(k)) * PolySymbol::qdotp(n));
    }
    return out;
}

// Poisson connection on constants of motion: nabla~_X(u) = {h_Xtilde, u}.
inline PolySymbol poisson_connection_apply(const RadialVectorField& X,
                                           const PolySymbol& u) {
    const int n = u.dimension();
    if (!is_constant_of_motion(u, PolySymbol::q_norm_squared(n)))
        throw std::invalid_argument(
            "poisson_connection_apply: u is not a constant of motion of ||q||^2");
    return poisson_bracket(hamiltonian_lift_symbol(X, n), u);
}

struct PoissonConnectionReport {
    double leibniz_defect = 0.0;    // property a)
    double curvature_defect = 0.0;  // property b)
};

inline PoissonConnectionReport poisson_connection_identity_check(
    const RadialVectorField& X, const RadialVectorField& Y,
    const PolySymbol& u, const PolySymbol& v) {
    PoissonConnectionReport rep;
    // a) nabla~_X {u,v} = {nabla~_X u, v} + {u, nabla~_X v}
    PolySymbol lhs_a = poisson_connection_apply(X, poisson_bracket(u, v));
    PolySymbol rhs_a = poisson_bracket(poisson_connection_apply(X, u), v) +
                       poisson_bracket(u, poisson_connection_apply(X, v));
    rep.leibniz_defect = lhs_a.max_coeff_difference(rhs_a);
    // b) [nabla~_X, nabla~_Y] u = nabla~_{[X,Y]} u
    PolySymbol lhs_b =
        poisson_connection_apply(X, poisson_connection_apply(Y, u)) -
        poisson_connection_apply(Y, poisson_connection_apply(X, u));
    PolySymbol rhs_b =
        poisson_connection_apply(RadialVectorField::commutator(X, Y), u);
    rep.curvature_defect = lhs_b.max_coeff_difference(rhs_b);
    return rep;
}

// a(c_1,...,c_k) by polynomial substitution; a is a PolySymbol in k
// variables encoded with n = k and only q-exponents used.
inline PolySymbol moment_map_pushforward(const PolySymbol& a,
                                         const std::vector<PolySymbol>& components) {
    const int k = a.dimension();
    if (static_cast<int>(components.size()) != k)
        throw std::invalid_argument("moment_map_pushforward: arity mismatch");
    if (a.degree_p() > 0)
        throw std::invalid_argument(
            "moment_map_pushforward: a must use only the first k variables");
    const int n = components.front().dimension();
    PolySymbol out(n);
    for (const auto& [idx, c] : a.terms()) {
        PolySymbol mono = PolySymbol::constant(n, c);
        for (int v = 0; v < k; ++v)
            for (int e = 0; e < idx[v]; ++e) mono = mono * components[v];
        out += mono;
    }
    return out;
}

} // namespace opfield
