#include "secrado/dataset.hpp"

#include <cmath>
#include <vector>

namespace secrado {

void Dataset::validate() const {
    if (X.rows() != y.size()) throw std::invalid_argument("dataset: X/y row count mismatch");
    if (X.rows() < 1) throw std::invalid_argument("dataset: empty");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 1.0 && y[i] != -1.0)
            throw std::invalid_argument("dataset: labels must be -1 or +1");
    if (!X.allFinite()) throw std::invalid_argument("dataset: non-finite feature");
}

Dataset Dataset::subset(const std::vector<int>& row_indices) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(row_indices.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(row_indices.size()));
    for (size_t i = 0; i < row_indices.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(row_indices[i]);
        out.y[static_cast<Eigen::Index>(i)] = y[row_indices[i]];
    }
    return out;
}

Dataset minmax_scaled(const Dataset& ds) {
    Dataset out = ds;
    for (Eigen::Index c = 0; c < out.X.cols(); ++c) {
        double lo = out.X.col(c).minCoeff();
        double hi = out.X.col(c).maxCoeff();
        if (hi > lo)
            out.X.col(c) = (out.X.col(c).array() - lo) / (hi - lo);
        else
            out.X.col(c).setZero();
    }
    return out;
}

}  // namespace secrado
