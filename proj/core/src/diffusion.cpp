#include "distgeo/diffusion.hpp"

#include "distgeo/geometry.hpp"

#include <cmath>

namespace distgeo {

void DiffusionConfig::validate() const {
    require(sigma_data > 0, "DiffusionConfig: sigma_data must be > 0");
    require(sigma_min > 0 && sigma_min < sigma_max,
            "DiffusionConfig: need 0 < sigma_min < sigma_max");
    require(steps >= 1, "DiffusionConfig: steps must be >= 1");
    require(n_stages >= 1, "DiffusionConfig: n_stages must be >= 1");
    require(strata >= 1, "DiffusionConfig: strata must be >= 1");
}

EdmCoefficients edm_coefficients(double sigma, double sigma_data) {
    require(sigma > 0 && sigma_data > 0, "edm_coefficients: inputs must be > 0");
    const double s2 = sigma * sigma + sigma_data * sigma_data;
    EdmCoefficients c{};
    c.c_skip = sigma_data * sigma_data / s2;
    c.c_out = sigma * sigma_data / std::sqrt(s2);
    c.c_in = 1.0 / std::sqrt(s2);
    c.c_noise = 0.25 * std::log(sigma);
    return c;
}

double edm_loss_weight(double sigma, double sigma_data) {
    require(sigma > 0 && sigma_data > 0, "edm_loss_weight: inputs must be > 0");
    const double prod = sigma * sigma_data;
    return (sigma * sigma + sigma_data * sigma_data) / (prod * prod);
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(Matrix mean, double prior_std)
    : mean_(std::move(mean)), var_(prior_std * prior_std) {
    require(prior_std > 0, "AnalyticGaussianDenoiser: prior_std must be > 0");
}

Matrix AnalyticGaussianDenoiser::denoise(const Matrix& noisy, double sigma) const {
    require(noisy.rows() == mean_.rows() && noisy.cols() == mean_.cols(),
            "AnalyticGaussianDenoiser: shape mismatch");
    const double s2 = sigma * sigma;
    return (var_ * noisy + s2 * mean_) / (var_ + s2);
}

ResidualTarget residual_target(const Matrix& v_target, const Matrix& v_base) {
    require(v_target.rows() == v_base.rows() && v_target.cols() == v_base.cols(),
            "residual_target: shape mismatch");
    ResidualTarget out;
    out.target_aligned = procrustes_align(v_target, v_base).aligned;
    out.residual = out.target_aligned - v_base;
    return out;
}

double score_loss(const Matrix& r_target, double sigma, const Matrix& noise,
                  const Denoiser& denoiser, double sigma_data, const Vector* mask) {
    require(noise.rows() == r_target.rows() && noise.cols() == r_target.cols(),
            "score_loss: noise shape mismatch");
    const Matrix r_hat = denoiser.denoise(r_target + sigma * noise, sigma);
    Matrix err = r_hat - r_target;
    if (mask) {
        require(mask->size() == r_target.rows(), "score_loss: mask length mismatch");
        for (Eigen::Index i = 0; i < err.rows(); ++i) {
            const double m = (*mask)(i);
            require(m == 0.0 || m == 1.0, "score_loss: mask entries must be 0 or 1");
            err.row(i) *= m;
        }
    }
    return edm_loss_weight(sigma, sigma_data) * err.squaredNorm();
}

NoiseSchedule make_schedule(const DiffusionConfig& cfg) {
    cfg.validate();
    NoiseSchedule s;
    s.sigmas.resize(cfg.steps);
    if (cfg.steps == 1) {
        s.sigmas[0] = cfg.sigma_max;
        return s;
    }
    const double log_max = std::log(cfg.sigma_max);
    const double log_min = std::log(cfg.sigma_min);
    for (int i = 0; i < cfg.steps; ++i)
        s.sigmas[i] = std::exp(log_max + (log_min - log_max) * double(i) / double(cfg.steps - 1));
    s.sigmas.front() = cfg.sigma_max;
    s.sigmas.back() = cfg.sigma_min;
    return s;
}

CurriculumSigmaSampler::CurriculumSigmaSampler(const DiffusionConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
}

double CurriculumSigmaSampler::cap(int stage) const {
    require(stage >= 1 && stage <= cfg_.n_stages, "CurriculumSigmaSampler: invalid stage");
    // Early cap defaults to the geometric mean of the noise range.
    const double log_first = 0.5 * (std::log(cfg_.sigma_min) + std::log(cfg_.sigma_max));
    const double log_last = std::log(cfg_.sigma_max);
    if (cfg_.n_stages == 1) return cfg_.sigma_max;
    const double t = double(stage - 1) / double(cfg_.n_stages - 1);
    return std::exp(log_first + t * (log_last - log_first));
}

double CurriculumSigmaSampler::sample(int stage, Rng& rng) {
    const double hi = cap(stage);
    const double log_lo = std::log(cfg_.sigma_min);
    const double log_hi = std::log(hi);
    const int stratum = static_cast<int>(counter_++ % cfg_.strata);
    const double u = (double(stratum) + rng.uniform()) / double(cfg_.strata);
    return std::exp(log_lo + u * (log_hi - log_lo));
}

Matrix sample_residual_from(const Matrix& v_base, const Denoiser& denoiser,
                            const NoiseSchedule& schedule, Matrix r) {
    require(!schedule.sigmas.empty(), "sample_residual: empty schedule");
    require(r.rows() == v_base.rows() && r.cols() == v_base.cols(),
            "sample_residual: initial residual shape mismatch");
    const size_t levels = schedule.sigmas.size();
    for (size_t l = 0; l + 1 < levels; ++l) {
        const double sigma = schedule.sigmas[l];
        const double sigma_next = schedule.sigmas[l + 1];
        require(sigma_next < sigma, "sample_residual: schedule must be strictly decreasing");
        const Matrix clean = denoiser.denoise(r, sigma);
        if (!clean.allFinite())
            throw std::runtime_error("sample_residual: denoiser produced non-finite output");
        r += (sigma_next - sigma) / sigma * (r - clean);
    }
    const Matrix final_clean = denoiser.denoise(r, schedule.sigmas.back());
    if (!final_clean.allFinite())
        throw std::runtime_error("sample_residual: denoiser produced non-finite output");
    return v_base + final_clean;
}

Matrix sample_residual(const Matrix& v_base, const Denoiser& denoiser,
                       const NoiseSchedule& schedule, Rng& rng) {
    require(!schedule.sigmas.empty(), "sample_residual: empty schedule");
    Matrix r(v_base.rows(), v_base.cols());
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = rng.normal();
    r *= schedule.sigmas.front();
    return sample_residual_from(v_base, denoiser, schedule, std::move(r));
}

}  // namespace distgeo
