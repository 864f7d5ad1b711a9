#include "distgeo/geometry.hpp"
#include "distgeo/synthetic.hpp"

#include "support/oracles.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace distgeo;
using testutil::rand_matrix;
using testutil::rand_points;

TEST_CASE("center subtracts column means") {
    Matrix p(2, 2);
    p << 0, 0, 2, 0;
    const Matrix c = center(p);
    CHECK(c(0, 0) == doctest::Approx(-1.0));
    CHECK(c(1, 0) == doctest::Approx(1.0));
    CHECK(c(0, 1) == 0.0);

    Matrix single(1, 2);
    single << 3, 4;
    CHECK(center(single).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(7);
    const Matrix already = center(rand_matrix(rng, 6, 3));
    CHECK(testutil::max_abs_diff(center(already), already) < 1e-12);

    // output - input is a row-constant shift
    const Matrix shift = center(p) - p;
    CHECK(shift.row(0) == shift.row(1));

    Matrix bad(1, 2);
    bad << std::nan(""), 0.0;
    CHECK_THROWS_AS(center(bad), std::invalid_argument);
}

TEST_CASE("gram is Y*Y^T") {
    Matrix y(2, 2);
    y << -1, 0, 1, 0;
    const Matrix g = gram(y);
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(0, 1) == doctest::Approx(-1.0));
    CHECK(g(1, 0) == doctest::Approx(-1.0));
    CHECK(g(1, 1) == doctest::Approx(1.0));

    CHECK(gram(Matrix::Zero(3, 2)).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(11);
    const Matrix y5 = rand_matrix(rng, 5, 2);
    const Matrix g5 = gram(y5);
    CHECK(testutil::max_abs_diff(g5, oracle::gram_naive(y5)) < 1e-12);
    CHECK(g5.trace() == doctest::Approx(y5.squaredNorm()).epsilon(1e-12));
    CHECK(testutil::max_abs_diff(g5, g5.transpose()) < 1e-12);
}

TEST_CASE("canonical_factor reconstructs and orders") {
    Matrix g(2, 2);
    g << 1, -1, -1, 1;
    const Matrix v = canonical_factor(g, 2);
    CHECK(testutil::max_abs_diff(v * v.transpose(), g) < 1e-10);
    CHECK(v.col(1).cwiseAbs().maxCoeff() < 1e-12);  // eigenvalues {2, 0}

    const Matrix id3 = Matrix::Identity(3, 3);
    const Matrix v3 = canonical_factor(id3, 3);
    CHECK(testutil::max_abs_diff(v3 * v3.transpose(), id3) < 1e-10);

    Rng rng(3);
    const Matrix coords = center(rand_points(rng, 40));
    const Matrix gp = gram(coords);
    const Matrix vp = canonical_factor(gp, 32);
    CHECK(testutil::max_abs_diff(vp * vp.transpose(), gp) < 1e-8 * gp.norm());
    int nonzero_cols = 0;
    for (int c = 0; c < vp.cols(); ++c)
        if (vp.col(c).squaredNorm() > 1e-10 * gp.trace()) ++nonzero_cols;
    CHECK(nonzero_cols == 2);  // planar sections are rank 2

    CHECK_THROWS_AS(canonical_factor(g, 3), std::invalid_argument);
    Matrix asym(2, 2);
    asym << 1, 2, 3, 4;
    CHECK_THROWS_AS(canonical_factor(asym, 2), std::invalid_argument);
}

TEST_CASE("canonical_factor sign and order conventions are deterministic") {
    Rng rng(5);
    const Matrix coords = center(rand_points(rng, 12));
    const Matrix g = gram(coords);
    const Matrix v1 = canonical_factor(g, 4);
    const Matrix v2 = canonical_factor(g, 4);
    CHECK(testutil::max_abs_diff(v1, v2) == 0.0);
    // columns ordered by non-increasing eigenvalue = non-increasing norm
    for (int c = 1; c < v1.cols(); ++c)
        CHECK(v1.col(c - 1).squaredNorm() >= v1.col(c).squaredNorm() - 1e-12);
    // sign convention: first nonzero entry of each active column positive
    for (int c = 0; c < 2; ++c) {
        for (int r = 0; r < v1.rows(); ++r) {
            if (v1(r, c) != 0.0) {
                CHECK(v1(r, c) > 0.0);
                break;
            }
        }
    }
}

TEST_CASE("procrustes_align recovers orthogonal maps") {
    Rng rng(13);
    const Matrix a = center(rand_matrix(rng, 10, 3));
    const Matrix q0 = random_orthogonal(3, rng);
    const Matrix b = a * q0;
    const auto res = procrustes_align(a, b);
    CHECK((res.aligned - b).norm() < 1e-9);
    CHECK(testutil::max_abs_diff(res.rotation.transpose() * res.rotation,
                                 Matrix::Identity(3, 3)) < 1e-10);

    const auto self = procrustes_align(a, a);
    CHECK((self.aligned - a).norm() < 1e-9);

    Matrix mismatched(3, 2);
    CHECK_THROWS_AS(procrustes_align(a, mismatched), std::invalid_argument);
}

TEST_CASE("procrustes_align handles reflections, matching a dense O(2) grid") {
    Rng rng(17);
    const Matrix a = center(rand_matrix(rng, 8, 2));
    Matrix reflect(2, 2);
    reflect << 1, 0, 0, -1;
    const Matrix b = a * reflect;

    const auto res = procrustes_align(a, b);
    CHECK((res.aligned - b).norm() < 1e-9);
    CHECK(res.rotation.determinant() == doctest::Approx(-1.0).epsilon(1e-9));

    // exhaustive search over rotations and reflections at 1e-3 angular steps
    double grid_best = std::numeric_limits<double>::infinity();
    for (double theta = 0.0; theta < 6.2832; theta += 1e-3) {
        Matrix rot(2, 2);
        rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        grid_best = std::min(grid_best, (a * rot - b).norm());
        const Matrix refl = rot * reflect;
        grid_best = std::min(grid_best, (a * refl - b).norm());
    }
    CHECK((res.aligned - b).norm() <= grid_best + 1e-9);
    CHECK(grid_best < 1e-2 * a.norm());  // the grid finds the reflection too
}

TEST_CASE("pairwise_distances basics and oracle match") {
    Matrix p(2, 2);
    p << 0, 0, 3, 4;
    CHECK(pairwise_distances(p)(0, 1) == doctest::Approx(5.0));

    Matrix same(3, 2);
    same << 1, 2, 1, 2, 1, 2;
    CHECK(pairwise_distances(same).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(23);
    const Matrix v = rand_matrix(rng, 6, 2);
    const Matrix d = pairwise_distances(v);
    CHECK(testutil::max_abs_diff(d, oracle::pairwise_naive(v)) < 1e-12);
    CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
    // triangle inequality
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            for (int k = 0; k < 6; ++k)
                CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-9);
}

TEST_CASE("pose-invariance properties of the geometric core") {
    Rng rng(29);
    const Matrix p = rand_points(rng, 15);

    // gram(center(.)) is translation invariant
    Matrix shifted = p;
    shifted.col(0).array() += 12.5;
    shifted.col(1).array() -= 3.75;
    CHECK(testutil::max_abs_diff(gram(center(p)), gram(center(shifted))) < 1e-9);

    // gram is invariant to right-multiplication by Q in O(k)
    const Matrix y = center(p);
    const Matrix q = random_orthogonal(2, rng);
    CHECK(testutil::max_abs_diff(gram(y * q), gram(y)) < 1e-9);

    // retraction: gram(canonical_factor(G, d)) == G for rank(G) <= d
    const Matrix g = gram(y);
    const Matrix v = canonical_factor(g, 8);
    CHECK((v * v.transpose() - g).norm() < 1e-8 * g.norm());

    // procrustes residual zero iff O(d)-related
    const auto related = procrustes_align(y * q, y);
    CHECK((related.aligned - y).norm() < 1e-9);
    Matrix stretched = y;
    stretched.col(0) *= 3.0;
    const auto unrelated = procrustes_align(stretched, y);
    CHECK((unrelated.aligned - y).norm() > 1e-3);

    // pairwise distances invariant under rigid motion
    Matrix moved = y * q;
    moved.col(0).array() += 4.0;
    CHECK(testutil::max_abs_diff(pairwise_distances(moved), pairwise_distances(y)) < 1e-9);
}
