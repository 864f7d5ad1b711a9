#pragma once

#include "distgeo/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace distgeo {

struct VICRegConfig {
    double lambda_inv = 25.0;
    double lambda_var = 25.0;
    double lambda_cov = 1.0;
    double gamma = 1.0;  // target per-dimension std

    void validate() const;
};

struct VICRegTerms {
    double invariance;
    double variance;
    double covariance;
    double total;
};

/// Invariance / variance-hinge / covariance penalty over two embedding views
/// (B x h each). Batch statistics use the unbiased (B-1) normalization for
/// both the per-dimension std and the covariance matrix.
/// total = lambda_inv * inv + lambda_var * var + lambda_cov * cov.
VICRegTerms vicreg_loss(const Matrix& z1, const Matrix& z2, const VICRegConfig& cfg);

struct AugmentConfig {
    double dropout_rate = 0.3;
    double noise_std = 0.015;
    double jitter_range = 0.25;  // multiplicative half-range

    void validate() const;
};

/// Stochastic view of an expression profile: per-coordinate dropout, then
/// additive Gaussian noise, then a single multiplicative scale jitter drawn
/// uniformly from [1-jitter, 1+jitter]. Byte-identical for a fixed seed.
Vector augment(const Vector& x, const AugmentConfig& cfg, uint64_t seed);

/// || V V^T - G_target ||_F^2 / || G_target ||_F^2.
double gram_loss(const Matrix& v_pred, const Matrix& g_target);

/// ( log tr(V V^T) - log tr(G_target) )^2.
double gram_scale_loss(const Matrix& v_pred, const Matrix& g_target);

/// Softmax neighborhood retrieval loss on the predicted geometry. For each
/// row, the log-ratio of neighbor-set mass to total mass of
/// exp(-||v_i - v_j||^2 / tau), computed with max-shifted exponentials.
/// The denominator runs over all j != i.
double nca_loss(const Matrix& v, const std::vector<std::vector<int>>& target_neighbors,
                double tau);

/// Mean over edges of (log d_pred - log d_target)^2. Throws
/// std::domain_error on a zero-length edge in either geometry.
double edge_log_scale_loss(const Matrix& v_pred, const Matrix& v_target_aligned,
                           const std::vector<std::pair<int, int>>& knn_edges);

struct GeneratorLosses {
    double align;  // min over Q in O(d) of ||V_base Q - V_target_aligned||_F^2
    double gram;   // || V_base V_base^T - G_target ||_F^2 (unnormalized)
};

GeneratorLosses generator_losses(const Matrix& v_base, const Matrix& v_target_aligned);

/// Optional generator scale term: (log rms(V_base) - log rms(V_target))^2
/// with rms(V) = ||V||_F / sqrt(n), the per-point RMS radius.
double log_rms_scale_loss(const Matrix& v_base, const Matrix& v_target);

struct OverlapConsistency {
    double shape;  // || G1/tr(G1) - G2/tr(G2) ||_F^2
    double scale;  // ( log tr(G1) - log tr(G2) )^2
};

/// Consistency of two predicted geometries restricted to a shared index set.
/// Both restrictions are mean-centered here before forming Gram matrices.
OverlapConsistency overlap_consistency(const Matrix& v1_overlap, const Matrix& v2_overlap);

/// Symmetric KL divergence between the row-softmax distributions of
/// -D^2/tau for the two restricted geometries, summed over rows.
double symmetric_kl_neighborhood(const Matrix& v1_overlap, const Matrix& v2_overlap,
                                 double tau);

/// Gram, neighborhood and overlap losses only apply at low noise where
/// structure is observable.
inline bool geometry_loss_gate(double sigma, double sigma_gate = 1.0) {
    return sigma < sigma_gate;
}

struct LossConfig {
    int k_nca = 10;
    double tau_nca = 0.5;
    double w_gram = 1.0;
    double w_gram_scale = 0.5;
    double w_nca = 1.0;
    double w_overlap = 1.0;
    double sigma_gate = 1.0;

    void validate() const;
};

}  // namespace distgeo
