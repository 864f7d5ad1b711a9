#include "distgeo/stitching.hpp"

#include "distgeo/geometry.hpp"
#include "distgeo/synthetic.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace distgeo;
using testutil::rand_matrix;
using testutil::rand_points;

namespace {

// All-pairs sort reference for within-patch kNN edge extraction.
std::set<std::pair<int, int>> knn_edges_naive(const Matrix& v, int k) {
    const int n = static_cast<int>(v.rows());
    std::set<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a) {
        std::vector<std::pair<double, int>> cand;
        for (int b = 0; b < n; ++b)
            if (b != a) cand.emplace_back((v.row(a) - v.row(b)).norm(), b);
        std::sort(cand.begin(), cand.end());
        for (int t = 0; t < k; ++t)
            edges.insert({std::min(a, cand[t].second), std::max(a, cand[t].second)});
    }
    return edges;
}

std::vector<std::pair<int, int>> identity_shared(int m) {
    std::vector<std::pair<int, int>> s;
    for (int i = 0; i < m; ++i) s.emplace_back(i, i);
    return s;
}

}  // namespace

TEST_CASE("extract_patch_edges complete graph, GT distances, kNN oracle") {
    Matrix tri(3, 2);
    tri << 0, 0, 1, 0, 0, 1;
    const auto all = extract_patch_edges(tri, {10, 11, 12}, 2, 0);
    CHECK(all.records.size() == 3);  // k = n-1: complete graph

    for (const auto& r : all.records) {
        CHECK(r.i < r.j);
        CHECK(r.patch == 0);
        CHECK(r.d > 0);
    }

    // oracle geometry = GT coordinates: measured distance equals GT distance
    Rng rng(401);
    const Matrix pts = rand_points(rng, 50);
    std::vector<int> ids(50);
    for (int i = 0; i < 50; ++i) ids[i] = i;
    const auto meas = extract_patch_edges(pts, ids, 10, 3);
    const Matrix gt = pairwise_distances(pts);
    std::set<std::pair<int, int>> got;
    for (const auto& r : meas.records) {
        CHECK(r.d == doctest::Approx(gt(r.i, r.j)).epsilon(1e-12));
        got.insert({r.i, r.j});
    }
    CHECK(got == knn_edges_naive(pts, 10));

    CHECK_THROWS_AS(extract_patch_edges(tri, {1, 2, 3}, 3, 0), std::invalid_argument);

    // coincident points: zero-distance records dropped with a count
    Matrix dup(3, 2);
    dup << 0, 0, 0, 0, 1, 0;
    const auto dropped = extract_patch_edges(dup, {0, 1, 2}, 2, 0);
    CHECK(dropped.dropped_nonpositive > 0);
    for (const auto& r : dropped.records) CHECK(r.d > 0);
}

TEST_CASE("overlap_disagreement") {
    Rng rng(409);
    const Matrix vp = rand_matrix(rng, 12, 3);

    // rigid motion: zero disagreement
    const Matrix q = random_orthogonal(3, rng);
    Matrix vq = vp * q;
    vq.col(0).array() += 2.0;
    const auto zero = overlap_disagreement(vp, vq, identity_shared(12));
    REQUIRE(zero.has_value());
    CHECK(*zero == doctest::Approx(0.0).epsilon(1e-10));

    // doubled scale: every pair contributes log 2
    const auto half = overlap_disagreement(vp, 2.0 * vp, identity_shared(12));
    REQUIRE(half.has_value());
    CHECK(*half == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(*half == doctest::Approx(0.693147).epsilon(1e-5));

    // fewer than 5 shared cells: skip signal, not an error
    CHECK_FALSE(overlap_disagreement(vp, vq, identity_shared(4)).has_value());
}

TEST_CASE("patch_reliabilities") {
    // all patches agree: every a_p = 1
    {
        std::vector<PairDisagreement> d = {{0, 1, 0.0}, {1, 2, 0.0}};
        const auto rel = patch_reliabilities(3, d);
        for (double a : rel.a) CHECK(a == doctest::Approx(1.0));
    }
    // single patch, no partners
    {
        const auto rel = patch_reliabilities(1, {});
        CHECK(rel.a == std::vector<double>{1.0});
    }
    // one outlier patch at 10x the median disagreement
    {
        // patches 0..3 cleanly agree pairwise at 0.1; patch 4 disagrees at 1.0
        std::vector<PairDisagreement> d;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) d.push_back({p, q, 0.1});
        for (int p = 0; p < 4; ++p) d.push_back({p, 4, 1.0});
        const auto rel = patch_reliabilities(5, d);
        // median over all pair values {0.1 x6, 1.0 x4} = 0.1
        CHECK(rel.a[4] == doctest::Approx(std::exp(-10.0)).epsilon(1e-9));
        for (int p = 0; p < 4; ++p) {
            const double m_p = (0.1 * 3 + 1.0) / 4.0;
            CHECK(rel.a[p] == doctest::Approx(std::exp(-m_p / 0.1)).epsilon(1e-9));
        }
        CHECK(rel.a[4] < 0.05);
        for (double a : rel.a) {
            CHECK(a > 0.0);
            CHECK(a <= 1.0);
        }
    }
}

TEST_CASE("weighted_median and IQR conventions") {
    // equal weights: lower median; outlier does not shift the aggregate
    CHECK(weighted_median({{1.0, 1}, {1.1, 1}, {5.0, 1}}) == doctest::Approx(1.1));
    // heavy weight on the outlier: cumulative weight crosses half there
    CHECK(weighted_median({{1.0, 0.01}, {1.1, 0.01}, {5.0, 1.0}}) == doctest::Approx(5.0));
    // even count, equal weights: lower middle
    CHECK(weighted_median({{2.0, 1}, {4.0, 1}}) == doctest::Approx(2.0));

    CHECK(interquartile_range({1.0, 1.1, 5.0}) ==
          doctest::Approx((1.1 + 5.0) / 2 - (1.0 + 1.1) / 2));
    CHECK(interquartile_range({3.0}) == doctest::Approx(0.0));
}

TEST_CASE("aggregate_edges filtering, weighting, confidence") {
    StitchConfig cfg;  // M_min = 2, tau_spread = 0.5
    PatchReliability rel;
    rel.a = {1.0, 1.0, 1.0};

    // single measurement with M_min = 2: dropped
    {
        DistanceMeasurementSet m;
        m.records = {{0, 1, 1.0, 0}};
        const auto g = aggregate_edges(m, rel, cfg, 4);
        CHECK(g.edges.empty());
    }
    // consistent pair kept, aggregate = weighted median, omega formula
    {
        DistanceMeasurementSet m;
        m.records = {{0, 1, 1.0, 0}, {0, 1, 1.1, 1}, {1, 0, 1.05, 2}};
        const auto g = aggregate_edges(m, rel, cfg, 4);
        REQUIRE(g.edges.size() == 1);
        const auto& e = g.edges[0];
        CHECK(e.count == 3);
        CHECK(e.d == doctest::Approx(1.05));  // lower weighted median of sorted {1,1.05,1.1}
        const double spread = interquartile_range({1.0, 1.05, 1.1}) / 1.05;
        CHECK(e.spread == doctest::Approx(spread));
        CHECK(e.omega == doctest::Approx(std::sqrt(3.0) / (1.0 + spread)));
        CHECK(e.i == 0);
        CHECK(e.j == 1);
    }
    // dispersed pair dropped by the spread threshold
    {
        DistanceMeasurementSet m;
        m.records = {{0, 1, 1.0, 0}, {0, 1, 10.0, 1}};
        CHECK(aggregate_edges(m, rel, cfg, 4).edges.empty());
    }
    // reliability weighting pulls the median to the trusted patch
    {
        DistanceMeasurementSet m;
        m.records = {{0, 1, 1.0, 0}, {0, 1, 1.12, 1}, {0, 1, 1.12, 2}};
        PatchReliability skew;
        skew.a = {1.0, 0.01, 0.01};
        const auto g = aggregate_edges(m, skew, cfg, 4);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0].d == doctest::Approx(1.0));
        PatchReliability uniform;
        uniform.a = {1.0, 1.0, 1.0};
        CHECK(aggregate_edges(m, uniform, cfg, 4).edges[0].d == doctest::Approx(1.12));
    }
}

TEST_CASE("aggregate_edges invariances") {
    Rng rng(419);
    StitchConfig cfg;
    const int n_patches = 4;
    PatchReliability rel;
    for (int p = 0; p < n_patches; ++p) rel.a.push_back(rng.uniform(0.5, 1.0));

    DistanceMeasurementSet m;
    for (int p = 0; p < n_patches; ++p)
        for (int e = 0; e < 10; ++e) {
            const int i = int(rng.uniform_index(8));
            int j = int(rng.uniform_index(8));
            if (i == j) j = (j + 1) % 8;
            m.records.push_back({std::min(i, j), std::max(i, j),
                                 std::exp(rng.normal() * 0.05), p});
        }

    const auto base = aggregate_edges(m, rel, cfg, 8);

    // permutation invariance in measurement order
    DistanceMeasurementSet shuffled = m;
    std::reverse(shuffled.records.begin(), shuffled.records.end());
    const auto perm = aggregate_edges(shuffled, rel, cfg, 8);
    REQUIRE(base.edges.size() == perm.edges.size());
    for (size_t t = 0; t < base.edges.size(); ++t) {
        CHECK(base.edges[t].i == perm.edges[t].i);
        CHECK(base.edges[t].d == doctest::Approx(perm.edges[t].d).epsilon(1e-15));
        CHECK(base.edges[t].omega == doctest::Approx(perm.edges[t].omega).epsilon(1e-15));
    }

    // scaling all measurements of a pair scales d, leaves spread unchanged
    DistanceMeasurementSet scaled = m;
    for (auto& r : scaled.records) r.d *= 7.5;
    const auto sg = aggregate_edges(scaled, rel, cfg, 8);
    REQUIRE(sg.edges.size() == base.edges.size());
    for (size_t t = 0; t < base.edges.size(); ++t) {
        CHECK(sg.edges[t].d == doctest::Approx(7.5 * base.edges[t].d).epsilon(1e-12));
        CHECK(sg.edges[t].spread == doctest::Approx(base.edges[t].spread).epsilon(1e-12));
    }

    // retained edges satisfy the StitchedGraph invariants
    for (const auto& e : base.edges) {
        CHECK(e.d > 0);
        CHECK(e.omega > 0);
        CHECK(e.count >= cfg.min_support);
        CHECK(e.spread <= cfg.tau_spread);
        CHECK(e.i < e.j);
    }
}
