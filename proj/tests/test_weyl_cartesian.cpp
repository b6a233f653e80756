#include <catch2/catch_amalgamated.hpp>

#include <opfield/cartesian.hpp>

using namespace opfield;

namespace {

CartesianGrid grid_1d() {
    CartesianGrid g;
    g.n = 1;
    g.N = 64;
    g.L = 8.0;
    return g;
}

Eigen::VectorXcd gaussian_probe(const CartesianGrid& g, double center,
                                double width) {
    Eigen::VectorXcd v(g.N);
    for (int k = 0; k < g.N; ++k)
        v(k) = std::exp(-std::pow((g.x(k) - center) / width, 2));
    return v;
}

} // namespace

TEST_CASE("kernel quantizer reproduces identity and position") {
    CartesianGrid g = grid_1d();
    DenseOperator id = quantize_kernel(PolySymbol::constant(1, 1.0), g);
    REQUIRE((id.mat - Eigen::MatrixXcd::Identity(g.N, g.N))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    DenseOperator q = quantize_kernel(PolySymbol::coordinate_q(1, 0), g);
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(g.N, g.N);
    for (int k = 0; k < g.N; ++k) want(k, k) = g.x(k);
    REQUIRE((q.mat - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kernel quantizer adjoint identity") {
    CartesianGrid g = grid_1d();
    PolySymbol q = PolySymbol::coordinate_q(1, 0);
    PolySymbol p = PolySymbol::coordinate_p(1, 0);
    PolySymbol u = q * p + Complex(0, 1) * (p * p);
    DenseOperator A = quantize_kernel(u, g);
    DenseOperator B = quantize_kernel(u.conjugate(), g);
    REQUIRE((A.mat.adjoint() - B.mat).cwiseAbs().maxCoeff() < 1e-10);
    // real symbols quantize to hermitian operators
    DenseOperator H = quantize_kernel(q * p, g);
    REQUIRE((H.mat - H.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kernel backend matches the reference operator in 1d") {
    CartesianGrid g = grid_1d();
    PolySymbol q = PolySymbol::coordinate_q(1, 0);
    PolySymbol p = PolySymbol::coordinate_p(1, 0);
    for (const PolySymbol& u :
         {q * q, p * p, q * p, q * q * p * p, q * q + p * p}) {
        DenseOperator A = quantize_kernel(u, g);
        DenseOperator B = reference_operator_1d(u, g);
        for (double c : {-1.0, 0.0, 2.0}) {
            Eigen::VectorXcd v = gaussian_probe(g, c, 1.3);
            REQUIRE((A.mat * v - B.mat * v).norm() / v.norm() < 1e-3);
        }
    }
}

TEST_CASE("centered fourier matrix is unitary and diagonalizes p^2") {
    CartesianGrid g = CartesianGrid::self_dual(1, 64);
    Eigen::MatrixXcd F = centered_fourier_matrix(g);
    REQUIRE((F * F.adjoint() - Eigen::MatrixXcd::Identity(g.N, g.N))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    // F diag(x^2) F^* = Op(p^2) on the self-dual grid
    Eigen::MatrixXcd x2 = Eigen::MatrixXcd::Zero(g.N, g.N);
    for (int k = 0; k < g.N; ++k) x2(k, k) = g.x(k) * g.x(k);
    PolySymbol p = PolySymbol::coordinate_p(1, 0);
    DenseOperator P2 = quantize_kernel(p * p, g);
    Eigen::MatrixXcd conj = F * x2 * F.adjoint();
    Eigen::VectorXcd v = gaussian_probe(g, 0.3, 1.1);
    REQUIRE((conj * v - P2.mat * v).norm() / (P2.mat * v).norm() < 1e-6);
}

TEST_CASE("metaplectic dilation covariance for a gaussian") {
    CartesianGrid g = grid_1d();
    const double t = 0.2;
    // Op(u o S^*) phi = m(S)^{-1} Op(u) m(S) phi with S the dilation
    PolySymbol q = PolySymbol::coordinate_q(1, 0);
    PolySymbol u = q * q;
    LinearSymplecticMap S = LinearSymplecticMap::dilation(1, t);
    DenseOperator A = quantize_kernel(flow_pullback(u, S), g);
    DenseOperator B = quantize_kernel(u, g);
    CartesianGridFunction phi(g);
    phi.values = gaussian_probe(g, 0.0, 1.4142);
    CartesianGridFunction inner = metaplectic_dilation_cartesian(-t, phi);
    inner.values = B.mat * inner.values;
    CartesianGridFunction lhs = metaplectic_dilation_cartesian(t, inner);
    Eigen::VectorXcd rhs = A.mat * phi.values;
    REQUIRE((lhs.values - rhs).norm() / rhs.norm() < 1e-3);
}
