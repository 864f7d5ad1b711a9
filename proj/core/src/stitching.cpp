#include "distgeo/stitching.hpp"

#include "distgeo/log.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace distgeo {

void StitchConfig::validate() const {
    require(knn_extract >= 1, "StitchConfig: knn_extract must be >= 1");
    require(min_support >= 1, "StitchConfig: min_support must be >= 1");
    require(tau_spread > 0, "StitchConfig: tau_spread must be > 0");
    require(min_overlap_cells >= 1, "StitchConfig: min_overlap_cells must be >= 1");
}

DistanceMeasurementSet extract_patch_edges(const Matrix& v_patch,
                                           const std::vector<int>& patch_ids, int k,
                                           int patch) {
    const int n = static_cast<int>(v_patch.rows());
    require(static_cast<int>(patch_ids.size()) == n,
            "extract_patch_edges: id list does not match geometry rows");
    require(k >= 1 && k < n, "extract_patch_edges: need 1 <= k < patch size");
    require_finite(v_patch, "extract_patch_edges");

    DistanceMeasurementSet out;
    std::vector<std::pair<int, int>> seen;  // local (lo, hi) pairs
    std::vector<std::pair<double, int>> cand;
    for (int a = 0; a < n; ++a) {
        cand.clear();
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            cand.emplace_back((v_patch.row(a) - v_patch.row(b)).squaredNorm(), b);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int t = 0; t < k; ++t) {
            const int b = cand[t].second;
            seen.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

    out.records.reserve(seen.size());
    for (const auto& [a, b] : seen) {
        const double d = (v_patch.row(a) - v_patch.row(b)).norm();
        if (d <= 0.0) {
            ++out.dropped_nonpositive;
            continue;
        }
        const int gi = patch_ids[a];
        const int gj = patch_ids[b];
        out.records.push_back({std::min(gi, gj), std::max(gi, gj), d, patch});
    }
    if (out.dropped_nonpositive > 0)
        LOG_WARN("extract_patch_edges: dropped %ld zero-distance records (patch %d)",
                 out.dropped_nonpositive, patch);
    return out;
}

std::optional<double> overlap_disagreement(const Matrix& v_p, const Matrix& v_q,
                                           const std::vector<std::pair<int, int>>& shared_local,
                                           int min_overlap_cells) {
    if (static_cast<int>(shared_local.size()) < min_overlap_cells) return std::nullopt;
    double sum = 0.0;
    long count = 0;
    const size_t m = shared_local.size();
    for (size_t a = 0; a < m; ++a) {
        for (size_t b = a + 1; b < m; ++b) {
            const double dp =
                (v_p.row(shared_local[a].first) - v_p.row(shared_local[b].first)).norm();
            const double dq =
                (v_q.row(shared_local[a].second) - v_q.row(shared_local[b].second)).norm();
            if (dp <= 0.0 || dq <= 0.0) continue;  // degenerate pair, skip
            sum += std::abs(std::log(dp) - std::log(dq));
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / double(count);
}

PatchReliability patch_reliabilities(int n_patches,
                                     const std::vector<PairDisagreement>& disagreements) {
    require(n_patches >= 1, "patch_reliabilities: need at least one patch");
    PatchReliability rel;
    rel.a.assign(n_patches, 1.0);
    if (disagreements.empty()) return rel;

    std::vector<double> all;
    all.reserve(disagreements.size());
    std::vector<double> sum(n_patches, 0.0);
    std::vector<int> cnt(n_patches, 0);
    for (const auto& d : disagreements) {
        require(d.p >= 0 && d.p < n_patches && d.q >= 0 && d.q < n_patches,
                "patch_reliabilities: patch index out of range");
        all.push_back(d.value);
        sum[d.p] += d.value;
        sum[d.q] += d.value;
        ++cnt[d.p];
        ++cnt[d.q];
    }
    std::sort(all.begin(), all.end());
    const size_t n = all.size();
    const double median =
        (n % 2 == 1) ? all[n / 2] : 0.5 * (all[n / 2 - 1] + all[n / 2]);

    for (int p = 0; p < n_patches; ++p) {
        if (cnt[p] == 0) continue;  // no overlap partner, keep a_p = 1
        const double m_p = sum[p] / double(cnt[p]);
        if (m_p <= 0.0) continue;   // perfect agreement
        const double denom = std::max(median, 1e-300);
        rel.a[p] = std::clamp(std::exp(-m_p / denom), 1e-15, 1.0);
    }
    return rel;
}

double weighted_median(std::vector<std::pair<double, double>> vw) {
    require(!vw.empty(), "weighted_median: empty input");
    std::sort(vw.begin(), vw.end());
    double total = 0.0;
    for (const auto& [v, w] : vw) {
        require(w >= 0, "weighted_median: negative weight");
        total += w;
    }
    require(total > 0, "weighted_median: zero total weight");
    double acc = 0.0;
    for (const auto& [v, w] : vw) {
        acc += w;
        if (acc >= 0.5 * total) return v;
    }
    return vw.back().first;
}

double interquartile_range(std::vector<double> values) {
    require(!values.empty(), "interquartile_range: empty input");
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double p) {
        const double pos = p * double(values.size() - 1);
        const size_t lo = static_cast<size_t>(std::floor(pos));
        const size_t hi = static_cast<size_t>(std::ceil(pos));
        const double frac = pos - double(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    return quantile(0.75) - quantile(0.25);
}

StitchedGraph aggregate_edges(const DistanceMeasurementSet& measurements,
                              const PatchReliability& rel, const StitchConfig& cfg,
                              int num_nodes) {
    cfg.validate();
    require(num_nodes >= 1, "aggregate_edges: num_nodes must be >= 1");

    std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> groups;
    long dropped = measurements.dropped_nonpositive;
    for (const auto& m : measurements.records) {
        require(m.i >= 0 && m.i < num_nodes && m.j >= 0 && m.j < num_nodes,
                "aggregate_edges: node index out of range");
        require(m.i != m.j, "aggregate_edges: self edge");
        require(m.patch >= 0 && m.patch < static_cast<int>(rel.a.size()),
                "aggregate_edges: patch index out of reliability range");
        if (!(m.d > 0.0) || !std::isfinite(m.d)) {
            ++dropped;
            continue;
        }
        const auto key = std::make_pair(std::min(m.i, m.j), std::max(m.i, m.j));
        groups[key].emplace_back(m.d, rel.a[m.patch]);
    }
    if (dropped > 0)
        LOG_WARN("aggregate_edges: ignored %ld non-positive distance records", dropped);

    StitchedGraph graph;
    graph.num_nodes = num_nodes;
    for (auto& [key, vw] : groups) {
        const int count = static_cast<int>(vw.size());
        if (count < cfg.min_support) continue;
        std::vector<double> values;
        values.reserve(vw.size());
        for (const auto& [v, w] : vw) values.push_back(v);
        std::sort(values.begin(), values.end());
        // Lower median, matching the weighted-median convention on ties.
        const double plain_median = values[(values.size() - 1) / 2];
        const double spread = interquartile_range(values) / plain_median;
        if (spread > cfg.tau_spread) continue;
        const double d = weighted_median(std::move(vw));
        const double omega = std::sqrt(double(count)) / (1.0 + spread);
        graph.edges.push_back({key.first, key.second, d, omega, count, spread});
    }
    return graph;
}

}  // namespace distgeo
