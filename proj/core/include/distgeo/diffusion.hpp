#pragma once

#include "distgeo/rng.hpp"
#include "distgeo/types.hpp"

#include <memory>
#include <vector>

namespace distgeo {

struct DiffusionConfig {
    double sigma_data = 1.0;  // empirical scale of the clean (residual) targets
    double sigma_min = 0.01;  // default 0.01 * sigma_data
    double sigma_max = 3.0;   // default 3 * sigma_data
    int n_stages = 3;
    int steps = 600;  // sampler steps L
    int strata = 8;   // strata for stratified noise-level sampling

    static DiffusionConfig for_scale(double sigma_data) {
        DiffusionConfig cfg;
        cfg.sigma_data = sigma_data;
        cfg.sigma_min = 0.01 * sigma_data;
        cfg.sigma_max = 3.0 * sigma_data;
        return cfg;
    }

    void validate() const;
};

struct EdmCoefficients {
    double c_skip;   // sigma_data^2 / (sigma^2 + sigma_data^2)
    double c_out;    // sigma * sigma_data / sqrt(sigma^2 + sigma_data^2)
    double c_in;     // 1 / sqrt(sigma^2 + sigma_data^2)
    double c_noise;  // log(sigma) / 4
};

EdmCoefficients edm_coefficients(double sigma, double sigma_data);

/// (sigma^2 + sigma_data^2) / (sigma * sigma_data)^2 == 1 / c_out^2.
double edm_loss_weight(double sigma, double sigma_data);

/// Clean estimate of an n x d geometry (or residual) at noise level sigma.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Matrix denoise(const Matrix& noisy, double sigma) const = 0;
};

/// Exact posterior mean under an isotropic Gaussian prior N(mean, std^2 I):
/// D(x, sigma) = (std^2 x + sigma^2 mean) / (std^2 + sigma^2).
class AnalyticGaussianDenoiser : public Denoiser {
public:
    AnalyticGaussianDenoiser(Matrix mean, double prior_std);
    Matrix denoise(const Matrix& noisy, double sigma) const override;

private:
    Matrix mean_;
    double var_;
};

struct ResidualTarget {
    Matrix target_aligned;  // V_target rotated into the proposal's frame
    Matrix residual;        // target_aligned - V_base
};

/// Aligns the target factor to the proposal with an O(d) Procrustes
/// transform and returns the residual correction the refiner must learn.
ResidualTarget residual_target(const Matrix& v_target, const Matrix& v_base);

/// EDM-weighted denoising objective:
/// w(sigma) * || (denoiser(R + sigma*noise, sigma) - R) .* mask ||_F^2.
/// `mask` is a per-row validity vector broadcast across columns; pass
/// nullptr for all-valid.
double score_loss(const Matrix& r_target, double sigma, const Matrix& noise,
                  const Denoiser& denoiser, double sigma_data,
                  const Vector* mask = nullptr);

struct NoiseSchedule {
    std::vector<double> sigmas;  // strictly decreasing, sigma_max .. sigma_min
};

/// Log-linear schedule of cfg.steps levels from sigma_max down to sigma_min.
NoiseSchedule make_schedule(const DiffusionConfig& cfg);

/// Curriculum noise-level sampler: stage caps interpolate log-linearly from
/// sqrt(sigma_min*sigma_max) at stage 1 up to sigma_max at the final stage,
/// and draws are stratified log-uniform on [sigma_min, cap(stage)]. The
/// stratum index advances by one per draw.
class CurriculumSigmaSampler {
public:
    explicit CurriculumSigmaSampler(const DiffusionConfig& cfg);
    double cap(int stage) const;
    double sample(int stage, Rng& rng);

private:
    DiffusionConfig cfg_;
    long counter_ = 0;
};

/// Deterministic probability-flow Euler sampler in residual space, starting
/// from the supplied initial residual state (typically N(0, sigma_1^2 I)).
/// Returns V_base + denoiser(R, sigma_L) at the final level.
Matrix sample_residual_from(const Matrix& v_base, const Denoiser& denoiser,
                            const NoiseSchedule& schedule, Matrix initial_residual);

/// As above with the initial residual drawn as sigma_1 * N(0, I) from `rng`.
Matrix sample_residual(const Matrix& v_base, const Denoiser& denoiser,
                       const NoiseSchedule& schedule, Rng& rng);

}  // namespace distgeo
