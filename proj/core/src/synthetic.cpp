#include "distgeo/synthetic.hpp"

#include "distgeo/geometry.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>

namespace distgeo {

void SyntheticConfig::validate() const {
    require(n_domains >= 1, "SyntheticConfig: n_domains must be >= 1");
    require(n_cells >= n_domains, "SyntheticConfig: n_cells must be >= n_domains");
    require(n_genes >= 2, "SyntheticConfig: n_genes must be >= 2");
    require(expression_noise_std >= 0, "SyntheticConfig: noise std must be >= 0");
    require(domain_sharpness > 0, "SyntheticConfig: domain_sharpness must be > 0");
}

SyntheticSlide generate_slide(const SyntheticConfig& cfg, Rng& rng) {
    cfg.validate();
    const int n = cfg.n_cells;
    const int g = cfg.n_genes;
    const int m = cfg.n_domains;

    // Domain centers on a jittered grid inside the unit square.
    const int grid = static_cast<int>(std::ceil(std::sqrt(double(m))));
    Matrix centers(m, 2);
    for (int d = 0; d < m; ++d) {
        const int gx = d % grid;
        const int gy = d / grid;
        const double cell = grid > 1 ? 0.6 / double(grid - 1) : 0.0;
        centers(d, 0) = 0.2 + cell * gx + rng.uniform(-0.04, 0.04);
        centers(d, 1) = 0.2 + cell * gy + rng.uniform(-0.04, 0.04);
    }
    const double sigma = 0.16;  // component std; blobs overlap mildly

    SyntheticSlide slide;
    slide.coords.coords.resize(n, 2);
    slide.coords.ids.resize(n);
    slide.domain_labels.resize(n);
    char id[16];
    for (int i = 0; i < n; ++i) {
        const int comp = static_cast<int>(rng.uniform_index(m));
        // Truncate the mixture to the unit square by rejection; clamping
        // would pile duplicate coordinates onto the boundary.
        double x, y;
        int tries = 0;
        do {
            x = centers(comp, 0) + sigma * rng.normal();
            y = centers(comp, 1) + sigma * rng.normal();
        } while ((x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) && ++tries < 200);
        x = std::clamp(x, 0.0, 1.0);
        y = std::clamp(y, 0.0, 1.0);
        slide.coords.coords(i, 0) = x;
        slide.coords.coords(i, 1) = y;
        // Label = maximum-posterior component (equal weights, equal sigma:
        // the nearest center), so domains tile the square coherently.
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int d = 0; d < m; ++d) {
            const double dx = x - centers(d, 0);
            const double dy = y - centers(d, 1);
            const double dist2 = dx * dx + dy * dy;
            if (dist2 < best_d) {
                best_d = dist2;
                best = d;
            }
        }
        slide.domain_labels[i] = best;
        std::snprintf(id, sizeof(id), "c%06d", i);
        slide.coords.ids[i] = id;
    }

    // One bump per gene, scattered around its domain's center; gene group =
    // gene index mod n_domains. Amplitude 2 keeps the position signal well
    // above the additive noise floor.
    const double width = 0.4 / cfg.domain_sharpness;
    const double amplitude = 2.0;
    Matrix bump_centers(g, 2);
    slide.gene_names.resize(g);
    for (int j = 0; j < g; ++j) {
        const int dom = j % m;
        bump_centers(j, 0) = centers(dom, 0) + 0.6 * sigma * rng.normal();
        bump_centers(j, 1) = centers(dom, 1) + 0.6 * sigma * rng.normal();
        std::snprintf(id, sizeof(id), "g%04d", j);
        slide.gene_names[j] = id;
    }

    slide.expression.resize(n, g);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < g; ++j) {
            const double dx = slide.coords.coords(i, 0) - bump_centers(j, 0);
            const double dy = slide.coords.coords(i, 1) - bump_centers(j, 1);
            double e = amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
            if (cfg.expression_noise_std > 0)
                e += cfg.expression_noise_std * rng.normal();
            slide.expression(i, j) = std::max(0.0, e);
        }
    return slide;
}

SpotSlide pseudo_spot_aggregate(const CoordinateTable& coords, const Matrix& expression,
                                double pitch, int min_cells) {
    coords.validate();
    require(pitch > 0, "pseudo_spot_aggregate: pitch must be > 0");
    require(min_cells >= 1, "pseudo_spot_aggregate: min_cells must be >= 1");
    require(expression.rows() == coords.size(),
            "pseudo_spot_aggregate: expression rows != cell count");

    const double xmin = coords.coords.col(0).minCoeff();
    const double ymin = coords.coords.col(1).minCoeff();

    std::map<std::pair<long, long>, std::vector<int>> bins;
    for (int i = 0; i < coords.size(); ++i) {
        const long bx = static_cast<long>(std::floor((coords.coords(i, 0) - xmin) / pitch));
        const long by = static_cast<long>(std::floor((coords.coords(i, 1) - ymin) / pitch));
        bins[{bx, by}].push_back(i);
    }

    SpotSlide out;
    int kept = 0;
    char id[16];
    for (const auto& [key, cells] : bins)
        if (static_cast<int>(cells.size()) >= min_cells) ++kept;
    out.coords.coords.resize(kept, 2);
    out.coords.ids.resize(kept);
    out.expression = Matrix::Zero(kept, expression.cols());
    int s = 0;
    for (const auto& [key, cells] : bins) {
        if (static_cast<int>(cells.size()) < min_cells) continue;
        out.coords.coords(s, 0) = xmin + (double(key.first) + 0.5) * pitch;
        out.coords.coords(s, 1) = ymin + (double(key.second) + 0.5) * pitch;
        for (int c : cells) out.expression.row(s) += expression.row(c);
        out.members.push_back(cells);
        std::snprintf(id, sizeof(id), "s%06d", s);
        out.coords.ids[s] = id;
        ++s;
    }
    return out;
}

Matrix random_orthogonal(int d, Rng& rng) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

OraclePredictor::OraclePredictor(CoordinateTable gt_coords, OraclePredictorConfig cfg)
    : gt_(std::move(gt_coords)), cfg_(std::move(cfg)) {
    gt_.validate();
    require(cfg_.distance_noise >= 0, "OraclePredictor: distance_noise must be >= 0");
    require(cfg_.latent_dim >= 2, "OraclePredictor: latent_dim must be >= 2");
    require(cfg_.calibration_knn >= 1, "OraclePredictor: calibration_knn must be >= 1");
}

Matrix OraclePredictor::predict(const std::vector<int>& patch, int patch_index) const {
    const int n = static_cast<int>(patch.size());
    require(n >= 2, "OraclePredictor: patch must have >= 2 cells");
    Matrix pos(n, 2);
    for (int t = 0; t < n; ++t) {
        require(patch[t] >= 0 && patch[t] < gt_.size(),
                "OraclePredictor: unknown cell index");
        pos.row(t) = gt_.coords.row(patch[t]);
    }
    pos = center(pos);

    Rng rng(derive_seed(cfg_.seed, static_cast<uint64_t>(patch_index)));

    if (cfg_.distance_noise > 0) {
        // Calibrate the in-plane point jitter against the kNN edge
        // population downstream extraction will measure: with displacement
        // std rho per axis, a pair at distance d picks up log-distance noise
        // of roughly std sqrt(2)*rho/d, so matching the pooled second moment
        // needs rho^2 = noise^2 / (2 * mean(1/d^2)) over those edges.
        const int k = std::min(cfg_.calibration_knn, n - 1);
        double inv_d2_sum = 0.0;
        long count = 0;
        std::vector<double> row(n - 1);
        for (int a = 0; a < n; ++a) {
            int t = 0;
            for (int b = 0; b < n; ++b)
                if (b != a) row[t++] = (pos.row(a) - pos.row(b)).squaredNorm();
            std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
            std::partial_sort(row.begin(), row.begin() + k, row.end());
            for (int e = 0; e < k; ++e)
                if (row[e] > 0) {
                    inv_d2_sum += 1.0 / row[e];
                    ++count;
                }
        }
        if (count > 0 && inv_d2_sum > 0) {
            const double rho =
                cfg_.distance_noise / std::sqrt(2.0 * inv_d2_sum / double(count));
            for (int t = 0; t < n; ++t) {
                pos(t, 0) += rho * rng.normal();
                pos(t, 1) += rho * rng.normal();
            }
            pos = center(pos);
        }
    }

    Matrix v = Matrix::Zero(n, cfg_.latent_dim);
    v.leftCols(2) = pos;
    if (cfg_.apply_random_rotation)
        v = v * random_orthogonal(cfg_.latent_dim, rng);
    return v;
}

}  // namespace distgeo
