#include "distgeo/solver.hpp"

#include "distgeo/geometry.hpp"
#include "distgeo/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace distgeo {

void SolverConfig::validate() const {
    require(n_landmarks >= 3, "SolverConfig: n_landmarks must be >= 3");
    require(iterations >= 1, "SolverConfig: iterations must be >= 1");
    require(huber_delta > 0, "SolverConfig: huber_delta must be > 0");
    require(anchor_weight >= 0, "SolverConfig: anchor_weight must be >= 0");
    require(step_size > 0, "SolverConfig: step_size must be > 0");
}

namespace {

constexpr int kCheckpointInterval = 50;

struct AdjacencyList {
    std::vector<std::vector<std::pair<int, double>>> nbrs;  // (node, distance)

    explicit AdjacencyList(const StitchedGraph& g) : nbrs(g.num_nodes) {
        for (const auto& e : g.edges) {
            require(e.d > 0, "solver: non-positive edge distance");
            nbrs[e.i].emplace_back(e.j, e.d);
            nbrs[e.j].emplace_back(e.i, e.d);
        }
        for (auto& list : nbrs) std::sort(list.begin(), list.end());
    }
};

// Single-source shortest paths over the stitched edges. Unreachable nodes
// stay at infinity.
std::vector<double> dijkstra(const AdjacencyList& adj, int source) {
    const int n = static_cast<int>(adj.nbrs.size());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : adj.nbrs[u]) {
            const double nd = d + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                queue.emplace(nd, v);
            }
        }
    }
    return dist;
}

std::vector<std::vector<int>> connected_components(const AdjacencyList& adj) {
    const int n = static_cast<int>(adj.nbrs.size());
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        std::vector<int> stack{s}, members;
        comp[s] = id;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            members.push_back(u);
            for (const auto& [v, w] : adj.nbrs[u])
                if (comp[v] < 0) {
                    comp[v] = id;
                    stack.push_back(v);
                }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    // Largest component first; ties by smallest member index.
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    return out;
}

// Classical landmark MDS of one connected component. Returns centered
// component-local coordinates indexed like `members`.
Matrix embed_component(const AdjacencyList& adj, const std::vector<int>& members,
                       const SolverConfig& cfg, Rng& rng) {
    const int m = static_cast<int>(members.size());
    if (m == 1) return Matrix::Zero(1, 2);

    std::vector<int> local(adj.nbrs.size(), -1);
    for (int t = 0; t < m; ++t) local[members[t]] = t;

    const int nl = std::min(cfg.n_landmarks, m);
    std::vector<int> landmarks;
    landmarks.reserve(nl);
    Matrix geo(nl, m);  // geodesics from each landmark to all members

    // Farthest-point sampling on graph distances, first landmark random.
    std::vector<double> min_dist(m, std::numeric_limits<double>::infinity());
    int next = members[rng.uniform_index(m)];
    for (int l = 0; l < nl; ++l) {
        landmarks.push_back(next);
        const auto dist = dijkstra(adj, next);
        for (int t = 0; t < m; ++t) {
            const double d = dist[members[t]];
            require(std::isfinite(d), "landmark_isomap_init: unreachable node in component");
            geo(l, t) = d;
            min_dist[t] = std::min(min_dist[t], d);
        }
        double best = -1.0;
        int best_t = 0;
        for (int t = 0; t < m; ++t)
            if (min_dist[t] > best) {
                best = min_dist[t];
                best_t = t;
            }
        next = members[best_t];
    }

    // Double-centered landmark Gram from squared geodesics.
    Matrix delta(nl, nl);
    for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b) {
            const double d = geo(a, local[landmarks[b]]);
            delta(a, b) = d * d;
        }
    delta = 0.5 * (delta + delta.transpose());
    const Vector mu = delta.rowwise().mean();
    const double grand = mu.mean();
    Matrix b_mat(nl, nl);
    for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b)
            b_mat(a, b) = -0.5 * (delta(a, b) - mu(a) - mu(b) + grand);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(b_mat);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("landmark_isomap_init: eigendecomposition failed");
    double lambda1 = std::max(0.0, eig.eigenvalues()(nl - 1));
    double lambda2 = nl >= 2 ? std::max(0.0, eig.eigenvalues()(nl - 2)) : 0.0;
    // Roundoff can leave tiny positive eigenvalues on rank-deficient data;
    // treating them as signal would blow up the 1/sqrt(lambda) rows.
    if (lambda2 <= kRankEigenvalueCutoff * lambda1) lambda2 = 0.0;
    const Vector u1 = eig.eigenvectors().col(nl - 1);
    const Vector u2 = nl >= 2 ? Vector(eig.eigenvectors().col(nl - 2)) : Vector::Zero(nl);

    Matrix coords = Matrix::Zero(m, 2);
    // Triangulation rows: u_k / sqrt(lambda_k) applied to centered squared
    // distances reproduces landmark positions and places the rest.
    const double inv1 = lambda1 > 0 ? 1.0 / std::sqrt(lambda1) : 0.0;
    const double inv2 = lambda2 > 0 ? 1.0 / std::sqrt(lambda2) : 0.0;
    for (int t = 0; t < m; ++t) {
        Vector delta_t(nl);
        for (int l = 0; l < nl; ++l) delta_t(l) = geo(l, t) * geo(l, t);
        const Vector centered = delta_t - mu;
        coords(t, 0) = -0.5 * inv1 * u1.dot(centered);
        coords(t, 1) = -0.5 * inv2 * u2.dot(centered);
    }
    if (lambda2 <= 0.0 && m >= 2) {
        // Degenerate second axis (e.g. collinear data): tiny jitter, small
        // enough that exact-recovery checks still pass.
        const double amp = 1e-8 * std::max(1.0, std::sqrt(lambda1));
        for (int t = 0; t < m; ++t) coords(t, 1) = amp * (2.0 * rng.uniform() - 1.0);
    }
    return center(coords);
}

double component_diameter(const Matrix& coords) {
    const Vector lo = coords.colwise().minCoeff();
    const Vector hi = coords.colwise().maxCoeff();
    return (hi - lo).norm();
}

double edge_stress1(const Matrix& x, const StitchedGraph& graph) {
    double num = 0.0, den = 0.0;
    for (const auto& e : graph.edges) {
        const double d = (x.row(e.i) - x.row(e.j)).norm();
        num += (d - e.d) * (d - e.d);
        den += e.d * e.d;
    }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

Matrix landmark_isomap_init(const StitchedGraph& graph, const SolverConfig& cfg, Rng& rng,
                            SolveDiagnostics* diag) {
    cfg.validate();
    require(graph.num_nodes >= 1, "landmark_isomap_init: empty graph");
    const AdjacencyList adj(graph);
    const auto components = connected_components(adj);

    int orphans = 0;
    std::vector<Matrix> embeddings;
    embeddings.reserve(components.size());
    double max_diameter = 0.0;
    for (const auto& comp : components) {
        if (comp.size() == 1) ++orphans;
        embeddings.push_back(embed_component(adj, comp, cfg, rng));
        max_diameter = std::max(max_diameter, component_diameter(embeddings.back()));
    }
    if (components.size() > 1)
        LOG_WARN("landmark_isomap_init: %zu components (%d orphan nodes); "
                 "placing on a grid",
                 components.size(), orphans);

    Matrix coords(graph.num_nodes, 2);
    const double cell = 3.0 * std::max(max_diameter, 1e-12);
    const int grid_cols = static_cast<int>(std::ceil(std::sqrt(double(components.size()))));
    for (size_t c = 0; c < components.size(); ++c) {
        const double ox = double(c % grid_cols) * cell;
        const double oy = double(c / grid_cols) * cell;
        for (size_t t = 0; t < components[c].size(); ++t) {
            coords(components[c][t], 0) = embeddings[c](t, 0) + ox;
            coords(components[c][t], 1) = embeddings[c](t, 1) + oy;
        }
    }
    if (diag) {
        diag->n_components = static_cast<int>(components.size());
        diag->orphan_count = orphans;
    }
    return center(coords);
}

HuberResult huber_stress(const Matrix& x, const StitchedGraph& graph, const Matrix& x0,
                         const SolverConfig& cfg) {
    require(x.rows() == x0.rows() && x.cols() == x0.cols(), "huber_stress: shape mismatch");
    require(x.rows() == graph.num_nodes, "huber_stress: coordinate count != graph nodes");
    const double delta = cfg.huber_delta;

    HuberResult out{0.0, Matrix::Zero(x.rows(), x.cols())};
    for (const auto& e : graph.edges) {
        const Eigen::RowVector2d diff = x.row(e.i) - x.row(e.j);
        const double dist = diff.norm();
        const double r = dist - e.d;
        const double ar = std::abs(r);
        double dh;
        if (ar <= delta) {
            out.value += e.omega * 0.5 * r * r;
            dh = r;
        } else {
            out.value += e.omega * delta * (ar - 0.5 * delta);
            dh = delta * (r > 0 ? 1.0 : -1.0);
        }
        if (dist > 0.0) {
            const Eigen::RowVector2d g = (e.omega * dh / dist) * diff;
            out.gradient.row(e.i) += g;
            out.gradient.row(e.j) -= g;
        }
        // dist == 0: zero subgradient for this edge
    }
    if (cfg.anchor_weight > 0) {
        // Per-point normalization keeps the anchor "small" relative to the
        // edge objective regardless of N; an unnormalized sum would pin the
        // solution to the init's geodesic inflation and break exact recovery
        // on realizable graphs.
        const Matrix anchor = x - x0;
        const double inv_n = 1.0 / double(x.rows());
        out.value += cfg.anchor_weight * anchor.squaredNorm() * inv_n;
        out.gradient += (2.0 * cfg.anchor_weight * inv_n) * anchor;
    }
    return out;
}

SolveResult solve(const StitchedGraph& graph, const SolverConfig& cfg, Rng& rng) {
    cfg.validate();
    require(!graph.edges.empty(), "solve: stitched graph has no edges");

    // Normalize to unit median edge length so huber_delta is scale-free.
    std::vector<double> lengths;
    lengths.reserve(graph.edges.size());
    for (const auto& e : graph.edges) lengths.push_back(e.d);
    std::sort(lengths.begin(), lengths.end());
    const double scale = lengths[(lengths.size() - 1) / 2];
    require(scale > 0, "solve: non-positive median edge length");

    StitchedGraph scaled = graph;
    for (auto& e : scaled.edges) e.d /= scale;

    SolveResult res;
    res.diagnostics.scale_factor = scale;
    const Matrix x0 = landmark_isomap_init(scaled, cfg, rng, &res.diagnostics);

    Matrix x = x0;
    Matrix m = Matrix::Zero(x.rows(), x.cols());
    Matrix v = Matrix::Zero(x.rows(), x.cols());
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    auto record = [&](int iter, double value) {
        res.diagnostics.checkpoint_iters.push_back(iter);
        res.diagnostics.huber_trajectory.push_back(value);
        res.diagnostics.stress1_trajectory.push_back(edge_stress1(x, scaled));
    };

    HuberResult cur = huber_stress(x, scaled, x0, cfg);
    res.diagnostics.initial_huber = cur.value;
    record(0, cur.value);

    Matrix best_x = x;
    double best_value = cur.value;
    double window_ref = cur.value;

    for (int it = 1; it <= cfg.iterations; ++it) {
        if (!std::isfinite(cur.value) || !cur.gradient.allFinite()) {
            LOG_ERROR("solve: non-finite stress at iteration %d; keeping last finite iterate",
                      it - 1);
            break;
        }
        m = beta1 * m + (1.0 - beta1) * cur.gradient;
        v = beta2 * v + (1.0 - beta2) * cur.gradient.cwiseProduct(cur.gradient);
        const double bc1 = 1.0 - std::pow(beta1, it);
        const double bc2 = 1.0 - std::pow(beta2, it);
        x -= (cfg.step_size * (m / bc1).array() /
              ((v / bc2).array().sqrt() + eps)).matrix();

        cur = huber_stress(x, scaled, x0, cfg);
        if (std::isfinite(cur.value) && cur.value < best_value) {
            best_value = cur.value;
            best_x = x;
        }
        if (it % kCheckpointInterval == 0 || it == cfg.iterations) record(it, cur.value);
        if (it % 100 == 0) {
            if (cur.value > window_ref)
                LOG_DEBUG("solve: stress rose over iterations %d-%d (%.6g -> %.6g)", it - 100,
                          it, window_ref, cur.value);
            window_ref = cur.value;
        }
    }

    x = best_x;
    res.diagnostics.final_huber = best_value;
    res.diagnostics.final_stress1 = edge_stress1(x, scaled);

    std::vector<double> residuals;
    residuals.reserve(scaled.edges.size());
    double res_sum = 0.0, res_max = 0.0;
    for (const auto& e : scaled.edges) {
        const double r = std::abs((x.row(e.i) - x.row(e.j)).norm() - e.d) * scale;
        residuals.push_back(r);
        res_sum += r;
        res_max = std::max(res_max, r);
    }
    std::sort(residuals.begin(), residuals.end());
    res.diagnostics.edge_residual_mean = res_sum / double(residuals.size());
    res.diagnostics.edge_residual_median = residuals[(residuals.size() - 1) / 2];
    res.diagnostics.edge_residual_max = res_max;

    res.coords = center(x * scale);
    return res;
}

Matrix dense_distances(const Matrix& x) { return pairwise_distances(x); }

}  // namespace distgeo
