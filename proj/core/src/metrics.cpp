#include "distgeo/metrics.hpp"

#include "distgeo/geometry.hpp"
#include "distgeo/io.hpp"
#include "distgeo/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace distgeo {

void MetricsConfig::validate() const {
    require(k >= 1, "MetricsConfig: k must be >= 1");
    require(n_shells >= 1, "MetricsConfig: n_shells must be >= 1");
    require(n_projections >= 1, "MetricsConfig: n_projections must be >= 1");
    for (int kk : lrmse_ks) require(kk >= 1, "MetricsConfig: lrmse k must be >= 1");
}

namespace {

void check_distance_matrix(const Matrix& d, const char* what) {
    require(d.rows() == d.cols(), std::string(what) + ": matrix must be square");
    require(d.rows() >= 2, std::string(what) + ": need at least 2 points");
    require_finite(d, what);
}

std::vector<double> upper_triangle(const Matrix& d) {
    const Eigen::Index n = d.rows();
    std::vector<double> v;
    v.reserve(size_t(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) v.push_back(d(i, j));
    return v;
}

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double mean_rank = 0.5 * (double(i + 1) + double(j + 1));
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson_vec(const std::vector<double>& a, const std::vector<double>& b,
                   bool* degenerate) {
    const size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        if (degenerate) *degenerate = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sab / std::sqrt(saa * sbb);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Neighbor order per row by (distance, index); returns indices, nearest first.
std::vector<std::vector<int>> neighbor_orders(const Matrix& d) {
    const int n = static_cast<int>(d.rows());
    std::vector<std::vector<int>> order(n);
    for (int i = 0; i < n; ++i) {
        auto& oi = order[i];
        oi.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) oi.push_back(j);
        std::stable_sort(oi.begin(), oi.end(),
                         [&](int a, int b) { return d(i, a) < d(i, b); });
    }
    return order;
}

int shell_index(double dist, double radius, int n_shells) {
    if (!(dist > 0.0) || dist > radius * double(n_shells)) return 0;
    const int s = static_cast<int>(std::ceil(dist / radius));
    return std::min(s, n_shells);
}

int shell_index_bounds(double dist, const std::vector<double>& bounds) {
    if (!(dist > 0.0) || dist > bounds.back()) return 0;
    for (size_t s = 0; s < bounds.size(); ++s)
        if (dist <= bounds[s]) return static_cast<int>(s) + 1;
    return 0;
}

}  // namespace

GlobalDistanceMetrics global_distance_metrics(const Matrix& d, const Matrix& d_gt) {
    check_distance_matrix(d, "global_distance_metrics D");
    check_distance_matrix(d_gt, "global_distance_metrics D_GT");
    require(d.rows() == d_gt.rows(), "global_distance_metrics: size mismatch");
    require(d.rows() >= 3, "global_distance_metrics: need N >= 3");

    const auto vd = upper_triangle(d);
    const auto vg = upper_triangle(d_gt);

    GlobalDistanceMetrics out{};
    out.pearson = pearson_vec(vd, vg, &out.degenerate);
    out.spearman = pearson_vec(average_ranks(vd), average_ranks(vg), &out.degenerate);

    double num = 0.0, den = 0.0;
    for (size_t t = 0; t < vd.size(); ++t) {
        num += (vd[t] - vg[t]) * (vd[t] - vg[t]);
        den += vg[t] * vg[t];
    }
    out.stress1 = den > 0 ? std::sqrt(num / den) : std::numeric_limits<double>::quiet_NaN();
    if (den <= 0) out.degenerate = true;
    return out;
}

double neighborhood_radius(const Matrix& d_gt, int k) {
    check_distance_matrix(d_gt, "neighborhood_radius");
    const int n = static_cast<int>(d_gt.rows());
    require(k >= 1 && k < n, "neighborhood_radius: need 1 <= k < N");
    std::vector<double> r(n);
    std::vector<double> row(n - 1);
    for (int i = 0; i < n; ++i) {
        int t = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) row[t++] = d_gt(i, j);
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        r[i] = row[k - 1];
    }
    return median_of(r);
}

EdgeClassification edge_classification_metrics(const Matrix& d, const Matrix& d_gt,
                                               double radius) {
    check_distance_matrix(d, "edge_classification D");
    check_distance_matrix(d_gt, "edge_classification D_GT");
    require(d.rows() == d_gt.rows(), "edge_classification: size mismatch");

    const auto vd = upper_triangle(d);
    const auto vg = upper_triangle(d_gt);
    const size_t m = vd.size();

    size_t pos = 0;
    for (double g : vg)
        if (g <= radius) ++pos;
    const size_t neg = m - pos;

    EdgeClassification out{};
    if (pos == 0 || neg == 0) {
        out.defined = false;
        out.roc_auc = std::numeric_limits<double>::quiet_NaN();
        out.bap = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    // ROC-AUC from average ranks of the scores s = -D (rank ties count 1/2).
    std::vector<double> scores(m);
    for (size_t t = 0; t < m; ++t) scores[t] = -vd[t];
    const auto ranks = average_ranks(scores);
    double rank_sum = 0.0;
    for (size_t t = 0; t < m; ++t)
        if (vg[t] <= radius) rank_sum += ranks[t];
    out.roc_auc =
        (rank_sum - 0.5 * double(pos) * double(pos + 1)) / (double(pos) * double(neg));

    // Balanced AP: sweep by decreasing score, ties in blocks, classes
    // weighted to unit total mass each.
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    const double w_pos = 1.0 / double(pos);
    const double w_neg = 1.0 / double(neg);
    double tp = 0.0, fp = 0.0, recall_prev = 0.0, ap = 0.0;
    size_t t = 0;
    while (t < m) {
        size_t u = t;
        while (u + 1 < m && scores[order[u + 1]] == scores[order[t]]) ++u;
        for (size_t s = t; s <= u; ++s) {
            if (vg[order[s]] <= radius)
                tp += 1.0;
            else
                fp += 1.0;
        }
        const double recall = tp / double(pos);
        const double wp = tp * w_pos;
        const double wn = fp * w_neg;
        const double precision = wp + wn > 0 ? wp / (wp + wn) : 0.0;
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        t = u + 1;
    }
    out.bap = ap;
    return out;
}

double shell_f1(const Matrix& d, const Matrix& d_gt, double radius, int n_shells,
                bool quantile_shells) {
    check_distance_matrix(d, "shell_f1 D");
    check_distance_matrix(d_gt, "shell_f1 D_GT");
    require(d.rows() == d_gt.rows(), "shell_f1: size mismatch");
    require(n_shells >= 1, "shell_f1: n_shells must be >= 1");
    require(radius > 0, "shell_f1: radius must be > 0");

    const auto vd = upper_triangle(d);
    const auto vg = upper_triangle(d_gt);

    std::vector<double> bounds;
    if (quantile_shells) {
        std::vector<double> sorted = vg;
        std::sort(sorted.begin(), sorted.end());
        for (int s = 1; s <= n_shells; ++s) {
            const double p = double(s) / double(n_shells);
            const double pos = p * double(sorted.size() - 1);
            const size_t lo = static_cast<size_t>(std::floor(pos));
            const size_t hi = static_cast<size_t>(std::ceil(pos));
            bounds.push_back(sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]));
        }
    }
    auto shell_of = [&](double dist) {
        return quantile_shells ? shell_index_bounds(dist, bounds)
                               : shell_index(dist, radius, n_shells);
    };

    std::vector<long> tp(n_shells + 1, 0), fp(n_shells + 1, 0), fn(n_shells + 1, 0);
    for (size_t t = 0; t < vd.size(); ++t) {
        const int gt_shell = shell_of(vg[t]);
        const double limit = quantile_shells ? bounds.back() : radius * double(n_shells);
        if (vg[t] > limit) continue;  // beyond the outermost shell: ignored
        const int pred_shell = shell_of(vd[t]);
        if (gt_shell == pred_shell && gt_shell > 0) {
            ++tp[gt_shell];
        } else {
            if (gt_shell > 0) ++fn[gt_shell];
            if (pred_shell > 0) ++fp[pred_shell];
        }
    }

    double macro = 0.0;
    for (int s = 1; s <= n_shells; ++s) {
        const double prec = tp[s] + fp[s] > 0 ? double(tp[s]) / double(tp[s] + fp[s]) : 0.0;
        const double rec = tp[s] + fn[s] > 0 ? double(tp[s]) / double(tp[s] + fn[s]) : 0.0;
        macro += prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    }
    return macro / double(n_shells);
}

RankMetrics rank_metrics(const Matrix& d, const Matrix& d_gt, int k) {
    check_distance_matrix(d, "rank_metrics D");
    check_distance_matrix(d_gt, "rank_metrics D_GT");
    require(d.rows() == d_gt.rows(), "rank_metrics: size mismatch");
    const int n = static_cast<int>(d.rows());
    require(k >= 1 && k < n, "rank_metrics: need 1 <= k < N");
    require(2 * n - 3 * k - 1 > 0, "rank_metrics: requires 2N - 3k - 1 > 0");

    const auto gt_order = neighbor_orders(d_gt);
    const auto pred_order = neighbor_orders(d);

    // rank(i,j): position of j in i's sorted neighbor list, 1-based.
    std::vector<std::vector<int>> gt_rank(n, std::vector<int>(n, 0));
    std::vector<std::vector<int>> pred_rank(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < n - 1; ++t) {
            gt_rank[i][gt_order[i][t]] = t + 1;
            pred_rank[i][pred_order[i][t]] = t + 1;
        }

    double trust_sum = 0.0, cont_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < k; ++t) {
            const int j_pred = pred_order[i][t];
            if (gt_rank[i][j_pred] > k) trust_sum += double(gt_rank[i][j_pred] - k);
            const int j_gt = gt_order[i][t];
            if (pred_rank[i][j_gt] > k) cont_sum += double(pred_rank[i][j_gt] - k);
        }
    }
    const double norm = 2.0 / (double(n) * double(k) * double(2 * n - 3 * k - 1));
    return {1.0 - norm * trust_sum, 1.0 - norm * cont_sum};
}

namespace {

Matrix canonicalize_points(const Matrix& x) {
    Matrix c = x.rowwise() - x.colwise().mean();
    const double rms = std::sqrt(c.squaredNorm() / double(c.rows()));
    if (rms > 0) c /= rms;
    return c;
}

double w1_sorted(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / double(a.size());
}

}  // namespace

DistributionMetrics distribution_metrics(const Matrix& x, const Matrix& x_gt,
                                         const Matrix& d, const Matrix& d_gt,
                                         const MetricsConfig& cfg) {
    cfg.validate();
    require(x.rows() == x_gt.rows(), "distribution_metrics: point count mismatch");
    require(x.cols() == 2 && x_gt.cols() == 2, "distribution_metrics: expected 2D points");
    check_distance_matrix(d, "distribution_metrics D");
    check_distance_matrix(d_gt, "distribution_metrics D_GT");
    const int n = static_cast<int>(x.rows());
    require(cfg.k < n, "distribution_metrics: k must be < N");

    const Matrix cx = canonicalize_points(x);
    const Matrix cg = canonicalize_points(x_gt);

    Rng rng(cfg.seed);
    double swd = 0.0;
    std::vector<double> pa(n), pb(n);
    for (int l = 0; l < cfg.n_projections; ++l) {
        const double theta = cfg.random_directions
                                 ? rng.uniform(0.0, 3.14159265358979323846)
                                 : 3.14159265358979323846 * double(l) /
                                       double(cfg.n_projections);
        const double ux = std::cos(theta), uy = std::sin(theta);
        for (int i = 0; i < n; ++i) {
            pa[i] = ux * cg(i, 0) + uy * cg(i, 1);
            pb[i] = ux * cx(i, 0) + uy * cx(i, 1);
        }
        swd += w1_sorted(pa, pb);
    }
    swd /= double(cfg.n_projections);

    const auto gt_order = neighbor_orders(d_gt);
    const auto pred_order = neighbor_orders(d);
    std::vector<double> s_gt, s_pred;
    s_gt.reserve(size_t(n) * cfg.k);
    s_pred.reserve(size_t(n) * cfg.k);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < cfg.k; ++t) {
            s_gt.push_back(d_gt(i, gt_order[i][t]));
            s_pred.push_back(d(i, pred_order[i][t]));
        }
    return {swd, w1_sorted(std::move(s_gt), std::move(s_pred))};
}

CalibrationMetrics calibration_metrics(const Matrix& d, const Matrix& d_gt,
                                       const MetricsConfig& cfg) {
    cfg.validate();
    check_distance_matrix(d, "calibration_metrics D");
    check_distance_matrix(d_gt, "calibration_metrics D_GT");
    require(d.rows() == d_gt.rows(), "calibration_metrics: size mismatch");
    const int n = static_cast<int>(d.rows());
    int max_k = cfg.k;
    for (int kk : cfg.lrmse_ks) max_k = std::max(max_k, kk);
    require(max_k < n, "calibration_metrics: max k must be < N");

    const auto gt_order = neighbor_orders(d_gt);
    CalibrationMetrics out{};

    double err_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int j = gt_order[i][cfg.k - 1];
        const double r = d_gt(i, j);
        if (r <= 0.0) {
            out.degenerate = true;
            out.cal_err = std::numeric_limits<double>::quiet_NaN();
            break;
        }
        err_sum += std::abs(d(i, j) / r - 1.0);
    }
    if (!out.degenerate) out.cal_err = err_sum / double(n);

    for (int kk : cfg.lrmse_ks) {
        std::vector<double> radii(n);
        for (int i = 0; i < n; ++i) radii[i] = d_gt(i, gt_order[i][kk - 1]);
        const double r_k = median_of(radii);
        if (r_k <= 0.0) {
            out.degenerate = true;
            out.lrmse[kk] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double sq = 0.0;
        long cnt = 0;
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < kk; ++t) {
                const int j = gt_order[i][t];
                const double e = (d(i, j) - d_gt(i, j)) / r_k;
                sq += e * e;
                ++cnt;
            }
        out.lrmse[kk] = std::sqrt(sq / double(cnt));
    }
    return out;
}

double optimal_scale(const Matrix& d_pred, const Matrix& d_gt) {
    check_distance_matrix(d_pred, "optimal_scale D");
    check_distance_matrix(d_gt, "optimal_scale D_GT");
    require(d_pred.rows() == d_gt.rows(), "optimal_scale: size mismatch");
    const double denom = d_pred.squaredNorm();
    if (denom <= 0) return 1.0;
    return (d_pred.cwiseProduct(d_gt)).sum() / denom;
}

uint64_t morton_code(uint32_t x, uint32_t y, int bits) {
    require(bits >= 1 && bits <= 32, "morton_code: bits must be in [1,32]");
    uint64_t code = 0;
    for (int b = 0; b < bits; ++b) {
        code |= (uint64_t(x >> b) & 1ULL) << (2 * b);
        code |= (uint64_t(y >> b) & 1ULL) << (2 * b + 1);
    }
    return code;
}

std::vector<int> morton_order(const Matrix& coords, int bits) {
    require(coords.cols() == 2, "morton_order: expected 2D coordinates");
    require_finite(coords, "morton_order");
    const int n = static_cast<int>(coords.rows());
    const double xmin = coords.col(0).minCoeff(), xmax = coords.col(0).maxCoeff();
    const double ymin = coords.col(1).minCoeff(), ymax = coords.col(1).maxCoeff();
    const double xrange = xmax > xmin ? xmax - xmin : 1.0;
    const double yrange = ymax > ymin ? ymax - ymin : 1.0;
    const double levels = double((1u << bits) - 1);

    std::vector<std::pair<uint64_t, int>> keyed(n);
    for (int i = 0; i < n; ++i) {
        const auto qx = uint32_t(std::lround((coords(i, 0) - xmin) / xrange * levels));
        const auto qy = uint32_t(std::lround((coords(i, 1) - ymin) / yrange * levels));
        keyed[i] = {morton_code(qx, qy, bits), i};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = keyed[i].second;
    return order;
}

DistortionMap distortion_map(const Matrix& x, const Matrix& x_gt, int block,
                             double epsilon) {
    require(x.rows() == x_gt.rows(), "distortion_map: point count mismatch");
    require_finite(x, "distortion_map X");
    require_finite(x_gt, "distortion_map X_GT");
    const int n = static_cast<int>(x.rows());
    require(n >= 2, "distortion_map: need at least 2 points");

    const Matrix d_pred = pairwise_distances(x);
    const Matrix d_gt = pairwise_distances(x_gt);
    DistortionMap map;
    map.scale = optimal_scale(d_pred, d_gt);
    map.block = block >= 1 ? block : (n + 255) / 256;
    map.epsilon = epsilon > 0 ? epsilon : 1e-8 * median_of(upper_triangle(d_gt));
    if (map.epsilon <= 0) map.epsilon = 1e-12;
    map.order = morton_order(x_gt);

    const int nb = (n + map.block - 1) / map.block;
    map.blocks = Matrix::Zero(nb, nb);
    Matrix counts = Matrix::Zero(nb, nb);
    for (int a = 0; a < n; ++a) {
        const int i = map.order[a];
        const int bi = a / map.block;
        for (int b = 0; b < n; ++b) {
            const int j = map.order[b];
            const int bj = b / map.block;
            const double e = std::abs(std::log((map.scale * d_pred(i, j) + map.epsilon) /
                                               (d_gt(i, j) + map.epsilon)));
            map.blocks(bi, bj) += e;
            counts(bi, bj) += 1.0;
        }
    }
    map.blocks = map.blocks.cwiseQuotient(counts);
    return map;
}

void write_distortion_map(const std::string& csv_path, const std::string& json_path,
                          const DistortionMap& map) {
    std::vector<std::string> header;
    header.reserve(map.blocks.cols());
    for (Eigen::Index c = 0; c < map.blocks.cols(); ++c)
        header.push_back("b" + std::to_string(c));
    write_text_atomic(csv_path, matrix_csv(map.blocks, header));

    nlohmann::json side;
    side["block"] = map.block;
    side["epsilon"] = map.epsilon;
    side["scale"] = map.scale;
    side["n_blocks"] = map.blocks.rows();
    write_text_atomic(json_path, side.dump(2) + "\n");
}

namespace {

MetricsReport evaluate_core(const Matrix& d, const Matrix& d_gt, const Matrix* x,
                            const Matrix& x_gt, const MetricsConfig& cfg);

}  // namespace

MetricsReport evaluate_all(const Matrix& x, const Matrix& x_gt, const MetricsConfig& cfg) {
    cfg.validate();
    require(x.rows() == x_gt.rows(), "evaluate_all: point count mismatch");
    const Matrix d = pairwise_distances(x);
    const Matrix d_gt = pairwise_distances(x_gt);
    return evaluate_core(d, d_gt, &x, x_gt, cfg);
}

MetricsReport evaluate_all_from_distances(const Matrix& d, const Matrix& x_gt,
                                          const MetricsConfig& cfg) {
    cfg.validate();
    require(d.rows() == x_gt.rows(), "evaluate_all_from_distances: size mismatch");
    const Matrix d_gt = pairwise_distances(x_gt);
    return evaluate_core(d, d_gt, nullptr, x_gt, cfg);
}

namespace {

MetricsReport evaluate_core(const Matrix& d, const Matrix& d_gt, const Matrix* x,
                            const Matrix& x_gt, const MetricsConfig& cfg) {
    MetricsReport rep{};
    const auto global = global_distance_metrics(d, d_gt);
    rep.spearman = global.spearman;
    rep.pearson = global.pearson;
    rep.stress1 = global.stress1;
    if (global.degenerate) rep.flags.push_back("global_metrics_degenerate");

    const double radius = neighborhood_radius(d_gt, cfg.k);
    const auto edge = edge_classification_metrics(d, d_gt, radius);
    rep.edge_roc_auc = edge.roc_auc;
    rep.bap = edge.bap;
    if (!edge.defined) rep.flags.push_back("edge_classification_undefined");

    rep.shell_f1_macro = shell_f1(d, d_gt, radius, cfg.n_shells, cfg.quantile_shells);

    const auto rank = rank_metrics(d, d_gt, cfg.k);
    rep.trust_at_k = rank.trust;
    rep.cont_at_k = rank.cont;

    if (x) {
        const auto dist = distribution_metrics(*x, x_gt, d, d_gt, cfg);
        rep.swd = dist.swd;
        rep.w1_knn = dist.w1_knn;
    } else {
        // Distance-only prediction: SWD needs a point set. The kNN-distance
        // W1 still applies; reuse the pooled-sample path via a dummy SWD.
        rep.swd = std::numeric_limits<double>::quiet_NaN();
        rep.flags.push_back("swd_requires_coordinates");
        MetricsConfig one = cfg;
        one.n_projections = 1;
        const auto dist = distribution_metrics(x_gt, x_gt, d, d_gt, one);
        rep.w1_knn = dist.w1_knn;
    }

    const auto cal = calibration_metrics(d, d_gt, cfg);
    rep.cal_err = cal.cal_err;
    rep.lrmse = cal.lrmse;
    if (cal.degenerate) rep.flags.push_back("calibration_degenerate");
    return rep;
}

}  // namespace

namespace {

nlohmann::json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double json_number(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

}  // namespace

std::string metrics_report_json(const MetricsReport& report) {
    nlohmann::json j;
    j["spearman"] = number_or_null(report.spearman);
    j["pearson"] = number_or_null(report.pearson);
    j["stress1"] = number_or_null(report.stress1);
    j["edge_roc_auc"] = number_or_null(report.edge_roc_auc);
    j["bap"] = number_or_null(report.bap);
    j["shell_f1_macro"] = number_or_null(report.shell_f1_macro);
    j["trust_at_k"] = number_or_null(report.trust_at_k);
    j["cont_at_k"] = number_or_null(report.cont_at_k);
    j["swd"] = number_or_null(report.swd);
    j["w1_knn"] = number_or_null(report.w1_knn);
    j["cal_err"] = number_or_null(report.cal_err);
    nlohmann::json lr = nlohmann::json::object();
    for (const auto& [k, v] : report.lrmse) lr[std::to_string(k)] = number_or_null(v);
    j["lrmse"] = lr;
    if (!report.flags.empty()) j["flags"] = report.flags;
    return j.dump(2) + "\n";
}

MetricsReport metrics_report_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r{};
    r.spearman = json_number(j.at("spearman"));
    r.pearson = json_number(j.at("pearson"));
    r.stress1 = json_number(j.at("stress1"));
    r.edge_roc_auc = json_number(j.at("edge_roc_auc"));
    r.bap = json_number(j.at("bap"));
    r.shell_f1_macro = json_number(j.at("shell_f1_macro"));
    r.trust_at_k = json_number(j.at("trust_at_k"));
    r.cont_at_k = json_number(j.at("cont_at_k"));
    r.swd = json_number(j.at("swd"));
    r.w1_knn = json_number(j.at("w1_knn"));
    r.cal_err = json_number(j.at("cal_err"));
    for (const auto& [key, val] : j.at("lrmse").items())
        r.lrmse[std::stoi(key)] = json_number(val);
    if (j.contains("flags"))
        for (const auto& f : j.at("flags")) r.flags.push_back(f.get<std::string>());
    return r;
}

}  // namespace distgeo
