#include "distgeo/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace distgeo {

Matrix center(const Matrix& x) {
    require(x.rows() >= 1, "center: need at least one row");
    require_finite(x, "center");
    return x.rowwise() - x.colwise().mean();
}

Matrix gram(const Matrix& y) {
    require_finite(y, "gram");
    return y * y.transpose();
}

Matrix canonical_factor(const Matrix& g, int d) {
    const Eigen::Index n = g.rows();
    require(g.cols() == n, "canonical_factor: G must be square");
    require(d >= 1 && d <= n, "canonical_factor: need 1 <= d <= n");
    require_finite(g, "canonical_factor");
    const double sym_tol = 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > sym_tol)
        throw std::invalid_argument("canonical_factor: G is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (g + g.transpose()));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("canonical_factor: eigendecomposition failed");

    // Solver returns ascending eigenvalues; take the top d in reverse.
    Matrix v = Matrix::Zero(n, d);
    for (int k = 0; k < d; ++k) {
        const Eigen::Index src = n - 1 - k;
        const double lambda = std::max(0.0, solver.eigenvalues()(src));
        if (lambda == 0.0) continue;
        Vector u = solver.eigenvectors().col(src);
        for (Eigen::Index r = 0; r < n; ++r) {
            if (u(r) != 0.0) {
                if (u(r) < 0.0) u = -u;
                break;
            }
        }
        v.col(k) = u * std::sqrt(lambda);
    }
    return v;
}

ProcrustesResult procrustes_align(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            "procrustes_align: shape mismatch");
    require(a.rows() >= 1, "procrustes_align: empty input");
    require_finite(a, "procrustes_align A");
    require_finite(b, "procrustes_align B");

    const Matrix ac = center(a);
    const Matrix bc = center(b);
    const Matrix m = ac.transpose() * bc;
    const Eigen::Index d = a.cols();

    if (m.cwiseAbs().maxCoeff() == 0.0) {
        // Any Q is optimal; fix Q = I for determinism.
        return {Matrix::Identity(d, d), ac};
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix q = svd.matrixU() * svd.matrixV().transpose();
    return {q, ac * q};
}

Matrix pairwise_distances(const Matrix& v) {
    require_finite(v, "pairwise_distances");
    const Eigen::Index n = v.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dij = (v.row(i) - v.row(j)).norm();
            d(i, j) = dij;
            d(j, i) = dij;
        }
    }
    return d;
}

}  // namespace distgeo
