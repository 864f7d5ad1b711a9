#pragma once

#include "distgeo/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace distgeo {

struct MetricsConfig {
    int k = 20;                // neighborhood size
    int n_shells = 5;          // S_sh
    int n_projections = 128;   // L_proj
    std::vector<int> lrmse_ks = {10, 20, 50, 100};
    uint64_t seed = 0;
    bool quantile_shells = false;     // shell radii from GT quantiles instead of s*R
    bool random_directions = false;   // seeded-uniform SWD directions instead of
                                      // the deterministic angles pi*l/L

    void validate() const;
};

struct GlobalDistanceMetrics {
    double spearman;
    double pearson;
    double stress1;
    bool degenerate = false;  // constant distance vector, correlations undefined
};

/// Spearman/Pearson on the upper-triangle distance vectors (average-rank
/// ties) and Kruskal Stress-1. Inputs are symmetric with zero diagonals.
GlobalDistanceMetrics global_distance_metrics(const Matrix& d, const Matrix& d_gt);

/// Median over points of the k-th smallest off-diagonal GT distance.
double neighborhood_radius(const Matrix& d_gt, int k);

struct EdgeClassification {
    double roc_auc;
    double bap;
    bool defined = true;  // false when either class is empty
};

/// Near/far pair classification against the GT radius: positives are pairs
/// with D_GT <= radius, scores are -D. ROC-AUC by the rank statistic (ties
/// count one half); balanced AP weights both classes to unit total mass.
EdgeClassification edge_classification_metrics(const Matrix& d, const Matrix& d_gt,
                                               double radius);

/// Macro F1 over distance shells (s-1)R < d <= sR for s = 1..n_shells,
/// with shell membership predicted from D at the same thresholds. Pairs
/// with GT distance beyond n_shells*R are ignored. With quantile_shells,
/// shell boundaries are GT distance quantiles instead of multiples of R.
double shell_f1(const Matrix& d, const Matrix& d_gt, double radius, int n_shells,
                bool quantile_shells = false);

struct RankMetrics {
    double trust;
    double cont;
};

/// Trustworthiness and continuity at k with stable index-order tie breaking.
/// Requires 2N - 3k - 1 > 0.
RankMetrics rank_metrics(const Matrix& d, const Matrix& d_gt, int k);

struct DistributionMetrics {
    double swd;     // sliced Wasserstein-1 between canonicalized point sets
    double w1_knn;  // Wasserstein-1 between pooled kNN distance samples
};

DistributionMetrics distribution_metrics(const Matrix& x, const Matrix& x_gt,
                                         const Matrix& d, const Matrix& d_gt,
                                         const MetricsConfig& cfg);

struct CalibrationMetrics {
    double cal_err;  // at k = cfg.k, same-GT-neighbor distance ratio error
    std::map<int, double> lrmse;  // per k: RMSE over GT-kNN pairs, normalized by R_k
    bool degenerate = false;      // zero GT radius encountered
};

CalibrationMetrics calibration_metrics(const Matrix& d, const Matrix& d_gt,
                                       const MetricsConfig& cfg);

/// argmin_s sum (s*D_pred - D_gt)^2.
double optimal_scale(const Matrix& d_pred, const Matrix& d_gt);

/// Block-averaged multiplicative distance distortion |log((s*Dhat+eps)/(D+eps))|
/// with rows/columns in Morton order of the quantized GT coordinates.
struct DistortionMap {
    Matrix blocks;
    int block = 1;
    double epsilon = 0.0;
    double scale = 1.0;  // optimal global scale applied to the predictions
    std::vector<int> order;  // Morton permutation of the input rows
};

/// block <= 0 or epsilon <= 0 pick the defaults ceil(N/256) and
/// 1e-8 * median(D_GT).
DistortionMap distortion_map(const Matrix& x, const Matrix& x_gt, int block = 0,
                             double epsilon = 0.0);

void write_distortion_map(const std::string& csv_path, const std::string& json_path,
                          const DistortionMap& map);

/// Interleaves the low `bits` of x (even positions) and y (odd positions).
uint64_t morton_code(uint32_t x, uint32_t y, int bits);

/// Row order by Morton code of coordinates quantized to `bits` per axis
/// over the bounding box; ties by row index.
std::vector<int> morton_order(const Matrix& coords, int bits = 16);

/// Everything above in one report, keyed by the Table-1 metric names.
struct MetricsReport {
    double spearman;
    double pearson;
    double stress1;
    double edge_roc_auc;
    double bap;
    double shell_f1_macro;
    double trust_at_k;
    double cont_at_k;
    double swd;
    double w1_knn;
    double cal_err;
    std::map<int, double> lrmse;
    std::vector<std::string> flags;  // degenerate/undefined metric markers
};

MetricsReport evaluate_all(const Matrix& x, const Matrix& x_gt, const MetricsConfig& cfg);

/// Distance-first variant for predictions without coordinates. SWD needs
/// point sets, so it is reported as NaN with a flag.
MetricsReport evaluate_all_from_distances(const Matrix& d, const Matrix& x_gt,
                                          const MetricsConfig& cfg);

std::string metrics_report_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const std::string& text);

}  // namespace distgeo
