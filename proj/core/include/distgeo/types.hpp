#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace distgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// 2D point positions keyed by item id. One length unit per pipeline run.
struct CoordinateTable {
    std::vector<std::string> ids;
    Matrix coords;  // n x 2

    int size() const { return static_cast<int>(coords.rows()); }

    /// Throws std::invalid_argument on duplicate ids, empty table,
    /// non-finite coordinates, or an ids/coords length mismatch.
    void validate() const;

    /// Row subset, preserving order of `indices`.
    CoordinateTable subset(const std::vector<int>& indices) const;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace distgeo
