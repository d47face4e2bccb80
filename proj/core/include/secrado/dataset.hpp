#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace secrado {

/// Labeled numeric dataset: rows of X are observations, y entries are
/// strictly -1 or +1.
struct Dataset {
    Eigen::MatrixXd X;  // m x d
    Eigen::VectorXd y;  // m

    int m() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }

    void validate() const;
    Dataset subset(const std::vector<int>& row_indices) const;
};

/// Min-max scales every feature column into [0, 1] (constant columns
/// map to 0).
Dataset minmax_scaled(const Dataset& ds);

}  // namespace secrado
