#include "distgeo/miniset.hpp"

#include "distgeo/geometry.hpp"
#include "distgeo/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace distgeo {

void MinisetConfig::validate(int slide_size) const {
    require(n_min >= 2, "MinisetConfig: n_min must be >= 2");
    require(n_min <= n_max, "MinisetConfig: n_min must be <= n_max");
    require(n_max <= slide_size, "MinisetConfig: n_max exceeds slide size");
    require(tau_spatial > 0, "MinisetConfig: tau_spatial must be > 0");
    require(alpha > 0 && alpha <= 1, "MinisetConfig: alpha must be in (0,1]");
    require(min_overlap >= 2, "MinisetConfig: min_overlap must be >= 2");
    require(min_overlap <= n_min, "MinisetConfig: min_overlap must be <= n_min");
    require(d >= 1, "MinisetConfig: d must be >= 1");
}

namespace {

// Sequential weighted draws without replacement. Weights are Boltzmann in
// the distance to the center; the shift by the running minimum distance
// cancels in the renormalization and avoids underflow at small tau.
void draw_weighted(const Vector& dist_to_center, double tau, int count,
                   std::vector<char>& taken, std::vector<int>& out, Rng& rng) {
    const int n = static_cast<int>(dist_to_center.size());
    std::vector<double> weight(n);
    for (int k = 0; k < count; ++k) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            if (!taken[i]) min_dist = std::min(min_dist, dist_to_center(i));
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            weight[i] = taken[i] ? 0.0 : std::exp(-(dist_to_center(i) - min_dist) / tau);
            total += weight[i];
        }
        require(total > 0, "sample_miniset: no candidates left");
        const double u = rng.uniform() * total;
        double acc = 0.0;
        int pick = -1;
        for (int i = 0; i < n; ++i) {
            acc += weight[i];
            if (acc >= u && weight[i] > 0.0) {
                pick = i;
                break;
            }
        }
        if (pick < 0) {  // float round-off at the tail
            for (int i = n - 1; i >= 0; --i)
                if (!taken[i]) {
                    pick = i;
                    break;
                }
        }
        taken[pick] = 1;
        out.push_back(pick);
    }
}

Matrix target_factor(const Matrix& coords, int d) {
    const int n = static_cast<int>(coords.rows());
    const Matrix g = gram(center(coords));
    const int d_eff = std::min(d, n);
    Matrix v = canonical_factor(g, d_eff);
    if (d_eff == d) return v;
    Matrix padded = Matrix::Zero(n, d);
    padded.leftCols(d_eff) = v;
    return padded;
}

Miniset assemble(const CoordinateTable& slide, std::vector<int> indices, int center, int d) {
    Miniset m;
    m.indices = std::move(indices);
    m.coords = slide.subset(m.indices);
    m.target = target_factor(m.coords.coords, d);
    m.center = center;
    return m;
}

}  // namespace

Miniset sample_miniset(const CoordinateTable& slide, const MinisetConfig& cfg, Rng& rng) {
    const int n_slide = slide.size();
    cfg.validate(n_slide);

    const int n = cfg.n_min + static_cast<int>(rng.uniform_index(cfg.n_max - cfg.n_min + 1));
    const int c = static_cast<int>(rng.uniform_index(n_slide));
    const Vector dist = (slide.coords.rowwise() - slide.coords.row(c)).rowwise().norm();

    std::vector<char> taken(n_slide, 0);
    taken[c] = 1;
    std::vector<int> indices{c};
    draw_weighted(dist, cfg.tau_spatial, n - 1, taken, indices, rng);
    return assemble(slide, std::move(indices), c, cfg.d);
}

MinisetPair sample_paired_minisets(const CoordinateTable& slide, const MinisetConfig& cfg,
                                   Rng& rng) {
    const int n_slide = slide.size();
    cfg.validate(n_slide);

    const int n = cfg.n_min + static_cast<int>(rng.uniform_index(cfg.n_max - cfg.n_min + 1));
    const int c = static_cast<int>(rng.uniform_index(n_slide));
    const int n_shared = std::min(n, std::max(cfg.min_overlap, (int)std::floor(cfg.alpha * n)));
    const Vector dist = (slide.coords.rowwise() - slide.coords.row(c)).rowwise().norm();

    std::vector<char> taken(n_slide, 0);
    taken[c] = 1;
    std::vector<int> shared{c};
    draw_weighted(dist, cfg.tau_spatial, n_shared - 1, taken, shared, rng);

    MinisetPair pair;
    pair.shared = shared;

    // Non-shared spots of each view are drawn independently from the same
    // center; the two draws must not collide with the shared set but may
    // collide with each other.
    std::vector<int> idx_a = shared;
    std::vector<char> taken_a = taken;
    draw_weighted(dist, cfg.tau_spatial, n - n_shared, taken_a, idx_a, rng);
    std::vector<int> idx_b = shared;
    std::vector<char> taken_b = taken;
    draw_weighted(dist, cfg.tau_spatial, n - n_shared, taken_b, idx_b, rng);

    pair.a = assemble(slide, std::move(idx_a), c, cfg.d);
    pair.b = assemble(slide, std::move(idx_b), c, cfg.d);
    return pair;
}

void save_miniset_batch(const std::string& dir, const std::vector<MinisetPair>& pairs,
                        const MinisetConfig& cfg, uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json manifest;
    manifest["seed"] = seed;
    manifest["config"] = {{"n_min", cfg.n_min},       {"n_max", cfg.n_max},
                          {"tau_spatial", cfg.tau_spatial}, {"alpha", cfg.alpha},
                          {"min_overlap", cfg.min_overlap}, {"d", cfg.d},
                          {"pairs_per_epoch", cfg.pairs_per_epoch}};
    manifest["pairs"] = nlohmann::json::array();

    char name[64];
    for (size_t p = 0; p < pairs.size(); ++p) {
        std::snprintf(name, sizeof(name), "pair_%04zu_a.csv", p);
        write_coordinate_table((fs::path(dir) / name).string(), pairs[p].a.coords);
        std::snprintf(name, sizeof(name), "pair_%04zu_b.csv", p);
        write_coordinate_table((fs::path(dir) / name).string(), pairs[p].b.coords);
        manifest["pairs"].push_back({{"a_indices", pairs[p].a.indices},
                                     {"b_indices", pairs[p].b.indices},
                                     {"shared", pairs[p].shared},
                                     {"center", pairs[p].a.center}});
    }
    write_text_atomic((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace distgeo
