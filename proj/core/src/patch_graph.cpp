#include "distgeo/patch_graph.hpp"

#include "distgeo/log.hpp"
#include "distgeo/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

namespace distgeo {

void GraphConfig::validate() const {
    require(k_z >= 1, "GraphConfig: k_z must be >= 1");
    require(tau_j >= 0 && tau_j <= 1, "GraphConfig: tau_j must be in [0,1]");
}

void PatchConfig::validate() const {
    require(min_shared >= 1, "PatchConfig: min_shared must be >= 1");
    require(n_patch >= min_shared, "PatchConfig: n_patch must be >= min_shared");
    require(walks_per_cell >= 1, "PatchConfig: walks_per_cell must be >= 1");
    require(overlap_fraction > 0 && overlap_fraction < 1,
            "PatchConfig: overlap_fraction must be in (0,1)");
    require(restart_prob >= 0 && restart_prob < 1,
            "PatchConfig: restart_prob must be in [0,1)");
    require(min_coverage >= 1, "PatchConfig: min_coverage must be >= 1");
}

Matrix pca_embed(const Matrix& expression, int h) {
    const Eigen::Index n = expression.rows();
    const Eigen::Index g = expression.cols();
    require(n >= 2, "pca_embed: need at least 2 rows");
    require(h >= 1 && h <= std::min(n, g), "pca_embed: h must be in [1, min(N,G)]");
    require_finite(expression, "pca_embed");

    const Matrix centered = expression.rowwise() - expression.colwise().mean();
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix scores = svd.matrixU().leftCols(h) * svd.singularValues().head(h).asDiagonal();

    // Sign gauge: largest-magnitude loading of each component positive.
    for (int k = 0; k < h; ++k) {
        Eigen::Index arg = 0;
        svd.matrixV().col(k).cwiseAbs().maxCoeff(&arg);
        if (svd.matrixV()(arg, k) < 0.0) scores.col(k) = -scores.col(k);
    }
    return scores;
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
    require(!(a.empty() && b.empty()), "jaccard: both sets empty");
    size_t ia = 0, ib = 0, inter = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] == b[ib]) {
            ++inter;
            ++ia;
            ++ib;
        } else if (a[ia] < b[ib]) {
            ++ia;
        } else {
            ++ib;
        }
    }
    const size_t uni = a.size() + b.size() - inter;
    return double(inter) / double(uni);
}

long LocalityGraph::num_edges() const {
    long deg_sum = 0;
    for (const auto& nbrs : adjacency) deg_sum += static_cast<long>(nbrs.size());
    return deg_sum / 2;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

void add_edge(LocalityGraph& g, int i, int j, double score) {
    g.adjacency[i].push_back({j, score});
    g.adjacency[j].push_back({i, score});
}

}  // namespace

LocalityGraph mutual_knn_graph(const Matrix& z, const GraphConfig& cfg, int threads) {
    cfg.validate();
    require_finite(z, "mutual_knn_graph");
    const int n = static_cast<int>(z.rows());
    require(n > cfg.k_z, "mutual_knn_graph: need more points than k_z");

    // k nearest neighbors per row, ties broken by index.
    std::vector<std::vector<int>> knn(n);
    parallel_for(0, n, threads, [&](int i) {
        std::vector<std::pair<double, int>> cand;
        cand.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back((z.row(i) - z.row(j)).squaredNorm(), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + cfg.k_z, cand.end());
        knn[i].resize(cfg.k_z);
        for (int k = 0; k < cfg.k_z; ++k) knn[i][k] = cand[k].second;
        std::sort(knn[i].begin(), knn[i].end());
    });

    LocalityGraph g;
    g.adjacency.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j : knn[i]) {
            if (j <= i) continue;
            if (!std::binary_search(knn[j].begin(), knn[j].end(), i)) continue;
            const double score = jaccard(knn[i], knn[j]);
            if (score >= cfg.tau_j) add_edge(g, i, j, score);
        }
    }

    if (cfg.repair_connectivity) {
        // Isolated nodes rejoin through their nearest embedding neighbor.
        int reattached = 0;
        for (int i = 0; i < n; ++i) {
            if (!g.adjacency[i].empty()) continue;
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double d = (z.row(i) - z.row(j)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            add_edge(g, i, best, jaccard(knn[i], knn[best]));
            ++reattached;
        }
        if (reattached > 0)
            LOG_INFO("locality graph: reattached %d isolated nodes", reattached);

        // Bridge remaining components through their closest embedding pair.
        UnionFind uf(n);
        for (int i = 0; i < n; ++i)
            for (const auto& nb : g.adjacency[i])
                if (nb.node > i) uf.unite(i, nb.node);
        int bridges = 0;
        for (;;) {
            int bi = -1, bj = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    if (uf.find(i) == uf.find(j)) continue;
                    const double d = (z.row(i) - z.row(j)).squaredNorm();
                    if (d < best_d) {
                        best_d = d;
                        bi = i;
                        bj = j;
                    }
                }
            if (bi < 0) break;
            add_edge(g, bi, bj, jaccard(knn[bi], knn[bj]));
            uf.unite(bi, bj);
            ++bridges;
        }
        if (bridges > 0) LOG_INFO("locality graph: bridged %d components", bridges);
    }

    for (auto& nbrs : g.adjacency)
        std::sort(nbrs.begin(), nbrs.end(),
                  [](const auto& a, const auto& b) { return a.node < b.node; });
    return g;
}

namespace {

// Breadth-first order from `seed`, restricted to nodes passing `admit`,
// skipping nodes already in `in_patch`. Deterministic: adjacency lists are
// index-sorted.
std::vector<int> bfs_collect(const LocalityGraph& g, int seed, int want,
                             const std::vector<char>& in_patch,
                             const std::function<bool(int)>& admit) {
    std::vector<int> out;
    if (want <= 0) return out;
    std::vector<char> seen(g.num_nodes(), 0);
    std::deque<int> queue{seed};
    seen[seed] = 1;
    while (!queue.empty() && static_cast<int>(out.size()) < want) {
        const int cur = queue.front();
        queue.pop_front();
        if (!in_patch[cur] && admit(cur)) out.push_back(cur);
        for (const auto& nb : g.adjacency[cur]) {
            if (!seen[nb.node] && admit(nb.node)) {
                seen[nb.node] = 1;
                queue.push_back(nb.node);
            }
        }
    }
    return out;
}

}  // namespace

PatchCover sample_patches(const LocalityGraph& graph, const PatchConfig& cfg, Rng& rng) {
    cfg.validate();
    const int n = graph.num_nodes();
    require(n >= 1, "sample_patches: empty graph");
    const int n_patch = std::min(cfg.n_patch, n);
    const long walk_budget = long(cfg.walks_per_cell) * n_patch;

    PatchCover cover;
    std::vector<int> multiplicity(n, 0);
    int covered_count = 0;
    const int preload_target =
        std::min(n_patch - 1,
                 std::max(cfg.min_shared, (int)std::lround(cfg.overlap_fraction * n_patch)));

    // One patch grown from `seed`: preload nearby cells of the parent patch
    // (declared-overlap guarantee), then fill by random walk with restart.
    auto build_patch = [&](int seed, int parent) {
        std::vector<char> in_patch(n, 0);
        std::vector<int> members;
        members.reserve(n_patch);
        auto push = [&](int node) {
            if (!in_patch[node]) {
                in_patch[node] = 1;
                members.push_back(node);
            }
        };
        push(seed);
        if (parent >= 0) {
            std::vector<char> in_parent(n, 0);
            for (int node : cover.patches[parent]) in_parent[node] = 1;
            for (int node : bfs_collect(graph, seed, preload_target - 1, in_patch,
                                        [&](int v) { return bool(in_parent[v]); }))
                push(node);
        }
        int cur = seed;
        for (long step = 0; step < walk_budget && static_cast<int>(members.size()) < n_patch;
             ++step) {
            if (graph.adjacency[cur].empty() || rng.uniform() < cfg.restart_prob) {
                cur = seed;
                continue;
            }
            const auto& nbrs = graph.adjacency[cur];
            cur = nbrs[rng.uniform_index(nbrs.size())].node;
            push(cur);
        }
        if (static_cast<int>(members.size()) < n_patch) {
            for (int node : bfs_collect(graph, seed, n_patch - (int)members.size(), in_patch,
                                        [](int) { return true; }))
                push(node);
        }
        require(static_cast<int>(members.size()) == n_patch,
                "sample_patches: could not assemble a full patch (graph disconnected?)");
        return members;
    };

    auto parent_of = [&](int seed) {
        for (size_t p = 0; p < cover.patches.size(); ++p)
            if (std::binary_search(cover.patches[p].begin(), cover.patches[p].end(), seed))
                return static_cast<int>(p);
        return -1;
    };

    auto commit = [&](std::vector<int> members) {
        for (int node : members) {
            if (multiplicity[node] == 0) ++covered_count;
            ++multiplicity[node];
        }
        std::sort(members.begin(), members.end());
        cover.patches.push_back(std::move(members));
    };

    // Phase 1: cover every cell, each new patch seeded at the cover boundary.
    while (covered_count < n) {
        if (cover.patches.empty()) {
            commit(build_patch(static_cast<int>(rng.uniform_index(n)), -1));
            continue;
        }
        std::vector<int> boundary;
        for (int i = 0; i < n; ++i) {
            if (!multiplicity[i]) continue;
            for (const auto& nb : graph.adjacency[i])
                if (!multiplicity[nb.node]) {
                    boundary.push_back(i);
                    break;
                }
        }
        require(!boundary.empty(), "sample_patches: no boundary cell; graph is disconnected");
        const int seed = boundary[rng.uniform_index(boundary.size())];
        auto members = build_patch(seed, parent_of(seed));

        // Guarantee forward progress: at least one newly covered cell.
        bool progress = false;
        for (int node : members)
            if (!multiplicity[node]) {
                progress = true;
                break;
            }
        if (!progress) {
            std::vector<char> in_patch(n, 0);
            for (int node : members) in_patch[node] = 1;
            const auto reach = bfs_collect(graph, seed, 1, in_patch,
                                           [&](int v) { return multiplicity[v] == 0; });
            require(!reach.empty(), "sample_patches: no reachable uncovered cell");
            for (int m = static_cast<int>(members.size()) - 1; m >= 0; --m) {
                if (members[m] != seed) {
                    members[m] = reach[0];
                    break;
                }
            }
        }
        commit(std::move(members));
    }

    // Phase 2: raise every cell to the minimum coverage multiplicity so its
    // measurements can pass the aggregation support filter.
    for (;;) {
        std::vector<int> low;
        for (int i = 0; i < n; ++i)
            if (multiplicity[i] < cfg.min_coverage) low.push_back(i);
        if (low.empty()) break;
        const int seed = low[rng.uniform_index(low.size())];
        commit(build_patch(seed, parent_of(seed)));
    }

    // Declared neighbors: pairs sharing at least min_shared cells.
    const int p_count = static_cast<int>(cover.patches.size());
    for (int p = 0; p < p_count; ++p)
        for (int q = p + 1; q < p_count; ++q) {
            std::vector<int> inter;
            std::set_intersection(cover.patches[p].begin(), cover.patches[p].end(),
                                  cover.patches[q].begin(), cover.patches[q].end(),
                                  std::back_inserter(inter));
            if (static_cast<int>(inter.size()) >= std::min(cfg.min_shared, n_patch))
                cover.neighbors.emplace_back(p, q);
        }
    LOG_INFO("patch cover: %d patches of size %d", p_count, n_patch);
    return cover;
}

void validate_patch_cover(const PatchCover& cover, int n_nodes, const PatchConfig& cfg) {
    require(!cover.patches.empty(), "patch cover: empty");
    const int n_patch = std::min(cfg.n_patch, n_nodes);
    std::vector<char> covered(n_nodes, 0);
    for (const auto& patch : cover.patches) {
        require(static_cast<int>(patch.size()) == n_patch, "patch cover: wrong patch size");
        require(std::is_sorted(patch.begin(), patch.end()), "patch cover: unsorted patch");
        for (size_t k = 1; k < patch.size(); ++k)
            require(patch[k] != patch[k - 1], "patch cover: duplicate index");
        for (int node : patch) {
            require(node >= 0 && node < n_nodes, "patch cover: index out of range");
            covered[node] = 1;
        }
    }
    for (int i = 0; i < n_nodes; ++i)
        require(covered[i], "patch cover: union does not cover all cells");

    const int needed = std::min(cfg.min_shared, n_patch);
    UnionFind uf(static_cast<int>(cover.patches.size()));
    for (const auto& [p, q] : cover.neighbors) {
        std::vector<int> inter;
        std::set_intersection(cover.patches[p].begin(), cover.patches[p].end(),
                              cover.patches[q].begin(), cover.patches[q].end(),
                              std::back_inserter(inter));
        require(static_cast<int>(inter.size()) >= needed,
                "patch cover: declared neighbors share too few cells");
        uf.unite(p, q);
    }
    const int root = uf.find(0);
    for (size_t p = 1; p < cover.patches.size(); ++p)
        require(uf.find(static_cast<int>(p)) == root,
                "patch cover: patch-overlap graph is disconnected");
}

}  // namespace distgeo
