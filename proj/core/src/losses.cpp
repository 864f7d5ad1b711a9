#include "distgeo/losses.hpp"

#include "distgeo/geometry.hpp"
#include "distgeo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace distgeo {

void VICRegConfig::validate() const {
    require(lambda_inv >= 0 && lambda_var >= 0 && lambda_cov >= 0,
            "VICRegConfig: weights must be >= 0");
    require(gamma > 0, "VICRegConfig: gamma must be > 0");
}

void AugmentConfig::validate() const {
    require(dropout_rate >= 0 && dropout_rate < 1,
            "AugmentConfig: dropout_rate must be in [0,1)");
    require(noise_std >= 0, "AugmentConfig: noise_std must be >= 0");
    require(jitter_range >= 0 && jitter_range < 1,
            "AugmentConfig: jitter_range must be in [0,1)");
}

void LossConfig::validate() const {
    require(k_nca >= 1, "LossConfig: k_nca must be >= 1");
    require(tau_nca > 0, "LossConfig: tau_nca must be > 0");
}

namespace {

// Per-view variance hinge and off-diagonal covariance penalty, both with
// the unbiased (B-1) normalization.
void vicreg_view_terms(const Matrix& z, double gamma, double& var_out, double& cov_out) {
    const Eigen::Index b = z.rows();
    const Eigen::Index h = z.cols();
    const Matrix zc = z.rowwise() - z.colwise().mean();
    for (Eigen::Index j = 0; j < h; ++j) {
        const double sd = std::sqrt(zc.col(j).squaredNorm() / double(b - 1));
        var_out += std::max(0.0, gamma - sd);
    }
    const Matrix cov = (zc.transpose() * zc) / double(b - 1);
    for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index j = 0; j < h; ++j)
            if (i != j) cov_out += cov(i, j) * cov(i, j);
}

}  // namespace

VICRegTerms vicreg_loss(const Matrix& z1, const Matrix& z2, const VICRegConfig& cfg) {
    cfg.validate();
    require(z1.rows() == z2.rows() && z1.cols() == z2.cols(), "vicreg_loss: shape mismatch");
    require(z1.rows() >= 2, "vicreg_loss: batch size must be >= 2");
    require(z1.cols() >= 1, "vicreg_loss: need at least one dimension");
    require_finite(z1, "vicreg_loss z1");
    require_finite(z2, "vicreg_loss z2");

    VICRegTerms t{};
    t.invariance = (z1 - z2).squaredNorm();
    t.variance = 0.0;
    t.covariance = 0.0;
    vicreg_view_terms(z1, cfg.gamma, t.variance, t.covariance);
    vicreg_view_terms(z2, cfg.gamma, t.variance, t.covariance);
    t.total = cfg.lambda_inv * t.invariance + cfg.lambda_var * t.variance +
              cfg.lambda_cov * t.covariance;
    return t;
}

Vector augment(const Vector& x, const AugmentConfig& cfg, uint64_t seed) {
    cfg.validate();
    require(x.allFinite(), "augment: non-finite input");
    Rng rng(seed);
    Vector out = x;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (rng.uniform() < cfg.dropout_rate) out(i) = 0.0;
    if (cfg.noise_std > 0)
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out(i) += cfg.noise_std * rng.normal();
    if (cfg.jitter_range > 0)
        out *= rng.uniform(1.0 - cfg.jitter_range, 1.0 + cfg.jitter_range);
    return out;
}

double gram_loss(const Matrix& v_pred, const Matrix& g_target) {
    require(v_pred.rows() == g_target.rows() && g_target.rows() == g_target.cols(),
            "gram_loss: shape mismatch");
    const double denom = g_target.squaredNorm();
    if (denom <= 0.0) throw std::domain_error("gram_loss: zero-norm target Gram");
    // mean-center before the Gram so translation cannot affect supervision
    const Matrix v = center(v_pred);
    return (v * v.transpose() - g_target).squaredNorm() / denom;
}

double gram_scale_loss(const Matrix& v_pred, const Matrix& g_target) {
    require(v_pred.rows() == g_target.rows() && g_target.rows() == g_target.cols(),
            "gram_scale_loss: shape mismatch");
    const double tr_pred = center(v_pred).squaredNorm();  // tr(V V^T) after centering
    const double tr_target = g_target.trace();
    if (tr_pred <= 0.0 || tr_target <= 0.0)
        throw std::domain_error("gram_scale_loss: non-positive trace");
    const double diff = std::log(tr_pred) - std::log(tr_target);
    return diff * diff;
}

double nca_loss(const Matrix& v, const std::vector<std::vector<int>>& target_neighbors,
                double tau) {
    const Eigen::Index n = v.rows();
    require(n >= 3, "nca_loss: need at least 3 points");
    require(static_cast<Eigen::Index>(target_neighbors.size()) == n,
            "nca_loss: one neighbor set per row required");
    require(tau > 0, "nca_loss: tau must be > 0");

    double loss = 0.0;
    std::vector<double> logits(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = target_neighbors[i];
        require(!nbrs.empty(), "nca_loss: empty neighbor set");
        double max_logit = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            logits[j] = -(v.row(i) - v.row(j)).squaredNorm() / tau;
            max_logit = std::max(max_logit, logits[j]);
        }
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) denom += std::exp(logits[j] - max_logit);
        double num = 0.0;
        for (int j : nbrs) {
            require(j >= 0 && j < n && j != i, "nca_loss: neighbor index out of range or self");
            num += std::exp(logits[j] - max_logit);
        }
        loss += std::log(denom) - std::log(num);
    }
    return loss;
}

double edge_log_scale_loss(const Matrix& v_pred, const Matrix& v_target_aligned,
                           const std::vector<std::pair<int, int>>& knn_edges) {
    require(!knn_edges.empty(), "edge_log_scale_loss: empty edge set");
    require(v_pred.rows() == v_target_aligned.rows(), "edge_log_scale_loss: row mismatch");
    double sum = 0.0;
    for (const auto& [i, j] : knn_edges) {
        const double dp = (v_pred.row(i) - v_pred.row(j)).norm();
        const double dt = (v_target_aligned.row(i) - v_target_aligned.row(j)).norm();
        if (dt <= 0.0 || dp <= 0.0)
            throw std::domain_error("edge_log_scale_loss: zero-length edge");
        const double diff = std::log(dp) - std::log(dt);
        sum += diff * diff;
    }
    return sum / double(knn_edges.size());
}

GeneratorLosses generator_losses(const Matrix& v_base, const Matrix& v_target_aligned) {
    require(v_base.rows() == v_target_aligned.rows() && v_base.cols() == v_target_aligned.cols(),
            "generator_losses: shape mismatch");
    GeneratorLosses out{};
    const auto proc = procrustes_align(v_base, v_target_aligned);
    const Matrix vt = center(v_target_aligned);
    out.align = (proc.aligned - vt).squaredNorm();
    const Matrix vb = center(v_base);
    out.gram = (vb * vb.transpose() - vt * vt.transpose()).squaredNorm();
    return out;
}

double log_rms_scale_loss(const Matrix& v_base, const Matrix& v_target) {
    const double rb = v_base.norm() / std::sqrt(double(v_base.rows()));
    const double rt = v_target.norm() / std::sqrt(double(v_target.rows()));
    if (rb <= 0.0 || rt <= 0.0)
        throw std::domain_error("log_rms_scale_loss: zero RMS");
    const double diff = std::log(rb) - std::log(rt);
    return diff * diff;
}

OverlapConsistency overlap_consistency(const Matrix& v1_overlap, const Matrix& v2_overlap) {
    require(v1_overlap.rows() == v2_overlap.rows(), "overlap_consistency: row mismatch");
    require(v1_overlap.rows() >= 2, "overlap_consistency: need |I| >= 2");
    const Matrix g1 = gram(center(v1_overlap));
    const Matrix g2 = gram(center(v2_overlap));
    const double t1 = g1.trace();
    const double t2 = g2.trace();
    if (t1 <= 0.0 || t2 <= 0.0)
        throw std::domain_error("overlap_consistency: zero trace on overlap");
    OverlapConsistency out{};
    out.shape = (g1 / t1 - g2 / t2).squaredNorm();
    const double diff = std::log(t1) - std::log(t2);
    out.scale = diff * diff;
    return out;
}

double symmetric_kl_neighborhood(const Matrix& v1_overlap, const Matrix& v2_overlap,
                                 double tau) {
    require(v1_overlap.rows() == v2_overlap.rows(), "symmetric_kl: row mismatch");
    require(tau > 0, "symmetric_kl: tau must be > 0");
    const Eigen::Index n = v1_overlap.rows();
    require(n >= 2, "symmetric_kl: need |I| >= 2");

    auto row_log_softmax = [n, tau](const Matrix& v, Eigen::Index i, std::vector<double>& out) {
        double max_logit = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            out[j] = -(v.row(i) - v.row(j)).squaredNorm() / tau;
            max_logit = std::max(max_logit, out[j]);
        }
        double z = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) z += std::exp(out[j] - max_logit);
        const double log_z = max_logit + std::log(z);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) out[j] -= log_z;
    };

    double loss = 0.0;
    std::vector<double> lp(n), lq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        row_log_softmax(v1_overlap, i, lp);
        row_log_softmax(v2_overlap, i, lq);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            loss += (std::exp(lp[j]) - std::exp(lq[j])) * (lp[j] - lq[j]);
        }
    }
    return loss;
}

}  // namespace distgeo
