#pragma once

#include <filesystem>
#include <vector>

#include "secrado/dataset.hpp"
#include "secrado/rng.hpp"

namespace secrado {

/// A +-1 selection vector over the examples of a dataset.
struct Signature {
    std::vector<int> entries;  // each -1 or +1

    int size() const { return static_cast<int>(entries.size()); }
    void validate() const;
};

/// Rademacher observation: pi = 1/2 sum_i (sigma_i + y_i) x_i.  The
/// per-example coefficient (sigma_i + y_i)/2 is -1, 0 or +1, so a rado
/// is an irreversible signed subset-sum of the observations.
struct Rado {
    Eigen::VectorXd pi;
    int peer_id = -1;
    int signature_id = -1;
};

/// Injective placement of local coordinates into a global feature
/// space; lifting zero-pads the remaining positions.
struct LiftMap {
    int local_dim = 0;
    int global_dim = 0;
    std::vector<int> positions;  // local index -> global index

    static LiftMap identity(int dim);
    void validate() const;
};

Rado make_rado(const Dataset& ds, const Signature& sigma);

/// k signatures drawn uniformly i.i.d. from {-1,+1}^m (duplicates
/// permitted).
std::vector<Signature> sample_signatures(int m, int k, SecureRng& rng);

/// All 2^m signatures in lexicographic order (-1 before +1); m <= 16.
std::vector<Signature> all_signatures(int m);

Eigen::VectorXd lift(const Eigen::VectorXd& z, const LiftMap& map);
Eigen::VectorXd restrict_to_local(const Eigen::VectorXd& global, const LiftMap& map);

/// Basic-block rado: alpha * lift(y * s) + sum_j lift(pi_j).
Rado bb_rado(double alpha, const Eigen::VectorXd& s, int y,
             const std::vector<std::pair<Rado, LiftMap>>& block_rados, const LiftMap& map_s);

/// Column-stacks rados into the d x k matrix B.
Eigen::MatrixXd rado_matrix(const std::vector<Rado>& rados);

/// Plaintext rado file: header "peer_id,signature_id,pi_0,...", one rado
/// per row.
void write_rados_csv(const std::filesystem::path& path, const std::vector<Rado>& rados);
std::vector<Rado> read_rados_csv(const std::filesystem::path& path);

}  // namespace secrado
