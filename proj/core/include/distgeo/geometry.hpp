#pragma once

#include "distgeo/types.hpp"

namespace distgeo {

/// Subtracts the column means. The output has zero column means; the
/// difference to the input is a row-constant shift.
Matrix center(const Matrix& x);

/// G = Y * Y^T for a (centered) factor Y. Symmetric with
/// trace equal to the squared Frobenius norm of Y.
Matrix gram(const Matrix& y);

/// Factors a symmetric PSD matrix G into V (n x d) with V * V^T = G when
/// rank(G) <= d. Columns are ordered by non-increasing eigenvalue; negative
/// eigenvalues are clamped to zero before the square root; each eigenvector's
/// sign is fixed so its first nonzero component is positive.
///
/// Throws std::invalid_argument for d > n or a non-symmetric G.
Matrix canonical_factor(const Matrix& g, int d);

struct ProcrustesResult {
    Matrix rotation;  // d x d element of O(d)
    Matrix aligned;   // centered(A) * rotation
};

/// Orthogonal Procrustes: the Q in O(d) minimizing ||A*Q - B||_F (rotations
/// and reflections, no scaling). Both inputs are centered defensively.
/// Degenerate inputs (A^T B = 0) resolve to Q = I for determinism.
ProcrustesResult procrustes_align(const Matrix& a, const Matrix& b);

/// All-pairs Euclidean distances between the rows of V. Symmetric with a
/// zero diagonal.
Matrix pairwise_distances(const Matrix& v);

/// Eigenvalues below this fraction of trace(G) are treated as zero rank.
inline constexpr double kRankEigenvalueCutoff = 1e-10;

}  // namespace distgeo
