#pragma once

// Brute-force reference implementations, independent of the library's
// computation paths. Everything here is deliberately naive: full sorts,
// double loops, explicit threshold sweeps.

#include "distgeo/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using distgeo::Matrix;

inline Matrix gram_naive(const Matrix& y) {
    Matrix g(y.rows(), y.rows());
    for (int i = 0; i < y.rows(); ++i)
        for (int j = 0; j < y.rows(); ++j) {
            double s = 0.0;
            for (int k = 0; k < y.cols(); ++k) s += y(i, k) * y(j, k);
            g(i, j) = s;
        }
    return g;
}

inline Matrix pairwise_naive(const Matrix& v) {
    Matrix d(v.rows(), v.rows());
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.rows(); ++j) {
            double s = 0.0;
            for (int k = 0; k < v.cols(); ++k) {
                const double diff = v(i, k) - v(j, k);
                s += diff * diff;
            }
            d(i, j) = std::sqrt(s);
        }
    return d;
}

inline std::vector<double> upper(const Matrix& d) {
    std::vector<double> v;
    for (int i = 0; i < d.rows(); ++i)
        for (int j = i + 1; j < d.cols(); ++j) v.push_back(d(i, j));
    return v;
}

// Average rank of each element: 1 + (#smaller) + (#ties-1)/2.
inline std::vector<double> ranks_naive(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        size_t smaller = 0, ties = 0;
        for (size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++smaller;
            if (v[j] == v[i]) ++ties;
        }
        r[i] = double(smaller) + 0.5 * double(ties - 1) + 1.0;
    }
    return r;
}

inline double pearson_naive(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double num = 0, da = 0, db = 0;
    for (size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

inline double spearman_naive(const Matrix& d, const Matrix& d_gt) {
    return pearson_naive(ranks_naive(upper(d)), ranks_naive(upper(d_gt)));
}

inline double stress1_naive(const Matrix& d, const Matrix& d_gt) {
    double num = 0, den = 0;
    for (int i = 0; i < d.rows(); ++i)
        for (int j = i + 1; j < d.cols(); ++j) {
            num += (d(i, j) - d_gt(i, j)) * (d(i, j) - d_gt(i, j));
            den += d_gt(i, j) * d_gt(i, j);
        }
    return std::sqrt(num / den);
}

inline double median_naive(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double radius_naive(const Matrix& d_gt, int k) {
    std::vector<double> per_point;
    for (int i = 0; i < d_gt.rows(); ++i) {
        std::vector<double> row;
        for (int j = 0; j < d_gt.cols(); ++j)
            if (j != i) row.push_back(d_gt(i, j));
        std::sort(row.begin(), row.end());
        per_point.push_back(row[k - 1]);
    }
    return median_naive(per_point);
}

// ROC-AUC by comparing every (positive, negative) pair; ties count 1/2.
inline double roc_auc_naive(const Matrix& d, const Matrix& d_gt, double radius) {
    const auto vd = upper(d);
    const auto vg = upper(d_gt);
    double wins = 0;
    long pairs = 0;
    for (size_t p = 0; p < vd.size(); ++p) {
        if (vg[p] > radius) continue;
        for (size_t q = 0; q < vd.size(); ++q) {
            if (vg[q] <= radius) continue;
            // score = -distance: positive wins when its distance is smaller
            if (vd[p] < vd[q])
                wins += 1.0;
            else if (vd[p] == vd[q])
                wins += 0.5;
            ++pairs;
        }
    }
    return wins / double(pairs);
}

// Balanced AP by explicit threshold enumeration over distinct scores.
inline double bap_naive(const Matrix& d, const Matrix& d_gt, double radius) {
    const auto vd = upper(d);
    const auto vg = upper(d_gt);
    long n_pos = 0, n_neg = 0;
    for (double g : vg) (g <= radius ? n_pos : n_neg)++;
    const double w_pos = 1.0 / double(n_pos);
    const double w_neg = 1.0 / double(n_neg);

    std::set<double> thresholds(vd.begin(), vd.end());  // ascending distance
    double ap = 0.0, recall_prev = 0.0;
    for (double t : thresholds) {
        long tp = 0, fp = 0;
        for (size_t p = 0; p < vd.size(); ++p) {
            if (vd[p] <= t) {
                if (vg[p] <= radius)
                    ++tp;
                else
                    ++fp;
            }
        }
        const double recall = double(tp) / double(n_pos);
        const double wp = double(tp) * w_pos;
        const double wn = double(fp) * w_neg;
        const double precision = wp + wn > 0 ? wp / (wp + wn) : 0.0;
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
    }
    return ap;
}

inline double shell_f1_naive(const Matrix& d, const Matrix& d_gt, double radius,
                             int n_shells) {
    double macro = 0.0;
    for (int s = 1; s <= n_shells; ++s) {
        const double lo = radius * double(s - 1);
        const double hi = radius * double(s);
        long tp = 0, fp = 0, fn = 0;
        for (int i = 0; i < d.rows(); ++i)
            for (int j = i + 1; j < d.cols(); ++j) {
                if (d_gt(i, j) > radius * double(n_shells)) continue;  // ignored
                const bool in_gt = d_gt(i, j) > lo && d_gt(i, j) <= hi;
                const bool in_pred = d(i, j) > lo && d(i, j) <= hi;
                if (in_gt && in_pred) ++tp;
                if (!in_gt && in_pred) ++fp;
                if (in_gt && !in_pred) ++fn;
            }
        const double prec = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
        const double rec = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
        macro += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return macro / double(n_shells);
}

// Stable neighbor order by (distance, index), nearest first.
inline std::vector<int> order_naive(const Matrix& d, int i) {
    std::vector<int> idx;
    for (int j = 0; j < d.cols(); ++j)
        if (j != i) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return d(i, a) < d(i, b); });
    return idx;
}

inline std::pair<double, double> trust_cont_naive(const Matrix& d, const Matrix& d_gt,
                                                  int k) {
    const int n = static_cast<int>(d.rows());
    double t_sum = 0, c_sum = 0;
    for (int i = 0; i < n; ++i) {
        const auto go = order_naive(d_gt, i);
        const auto po = order_naive(d, i);
        std::set<int> gt_knn(go.begin(), go.begin() + k);
        std::set<int> pred_knn(po.begin(), po.begin() + k);
        for (int t = 0; t < k; ++t) {
            if (!gt_knn.count(po[t])) {
                const int rank =
                    int(std::find(go.begin(), go.end(), po[t]) - go.begin()) + 1;
                t_sum += rank - k;
            }
            if (!pred_knn.count(go[t])) {
                const int rank =
                    int(std::find(po.begin(), po.end(), go[t]) - po.begin()) + 1;
                c_sum += rank - k;
            }
        }
    }
    const double norm = 2.0 / (double(n) * k * double(2 * n - 3 * k - 1));
    return {1.0 - norm * t_sum, 1.0 - norm * c_sum};
}

inline double w1_naive(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / double(a.size());
}

// SWD with the library's deterministic angles, recomputed longhand.
inline double swd_naive(const Matrix& x, const Matrix& x_gt, int n_proj) {
    auto canon = [](const Matrix& m) {
        Matrix c = m.rowwise() - m.colwise().mean();
        double rms = std::sqrt(c.squaredNorm() / double(c.rows()));
        if (rms > 0) c /= rms;
        return c;
    };
    const Matrix a = canon(x_gt);
    const Matrix b = canon(x);
    double total = 0;
    for (int l = 0; l < n_proj; ++l) {
        const double theta = 3.14159265358979323846 * double(l) / double(n_proj);
        std::vector<double> pa, pb;
        for (int i = 0; i < a.rows(); ++i) {
            pa.push_back(std::cos(theta) * a(i, 0) + std::sin(theta) * a(i, 1));
            pb.push_back(std::cos(theta) * b(i, 0) + std::sin(theta) * b(i, 1));
        }
        total += w1_naive(pa, pb);
    }
    return total / double(n_proj);
}

inline double w1_knn_naive(const Matrix& d, const Matrix& d_gt, int k) {
    std::vector<double> s_gt, s_pred;
    for (int i = 0; i < d.rows(); ++i) {
        const auto go = order_naive(d_gt, i);
        const auto po = order_naive(d, i);
        for (int t = 0; t < k; ++t) {
            s_gt.push_back(d_gt(i, go[t]));
            s_pred.push_back(d(i, po[t]));
        }
    }
    return w1_naive(s_gt, s_pred);
}

inline double cal_err_naive(const Matrix& d, const Matrix& d_gt, int k) {
    double sum = 0;
    for (int i = 0; i < d.rows(); ++i) {
        const auto go = order_naive(d_gt, i);
        const int j = go[k - 1];
        sum += std::abs(d(i, j) / d_gt(i, j) - 1.0);
    }
    return sum / double(d.rows());
}

inline double lrmse_naive(const Matrix& d, const Matrix& d_gt, int k) {
    std::vector<double> radii;
    for (int i = 0; i < d_gt.rows(); ++i) {
        const auto go = order_naive(d_gt, i);
        radii.push_back(d_gt(i, go[k - 1]));
    }
    const double r_k = median_naive(radii);
    double sq = 0;
    long cnt = 0;
    for (int i = 0; i < d.rows(); ++i) {
        const auto go = order_naive(d_gt, i);
        for (int t = 0; t < k; ++t) {
            const double e = (d(i, go[t]) - d_gt(i, go[t])) / r_k;
            sq += e * e;
            ++cnt;
        }
    }
    return std::sqrt(sq / double(cnt));
}

// Morton code via string interleaving.
inline uint64_t morton_naive(uint32_t x, uint32_t y, int bits) {
    uint64_t code = 0;
    for (int b = bits - 1; b >= 0; --b) {
        code = (code << 1) | ((y >> b) & 1u);
        code = (code << 1) | ((x >> b) & 1u);
    }
    return code;
}

}  // namespace oracle
