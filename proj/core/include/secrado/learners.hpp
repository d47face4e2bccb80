#pragma once

#include <span>

#include "secrado/rado.hpp"
#include "secrado/secure_ops.hpp"

namespace secrado {

/// Linear classifier over the global feature space, with the lift map
/// that relates it to a peer's local coordinates.
struct Classifier {
    Eigen::VectorXd theta;
    LiftMap map;
};

/// sign(theta . x); exact zero maps to +1.
int predict(const Eigen::VectorXd& theta, const Eigen::VectorXd& x);

/// Diagonal positive definite confidence matrix: 1 on confident
/// coordinates, epsilon elsewhere.
struct Regularizer {
    double epsilon = 1e-3;
    std::vector<bool> confident;  // size d

    Eigen::VectorXd diagonal() const;
    static Regularizer identity(int d);

    /// Confident where at least half the peers hold the coordinate.
    static Regularizer from_feature_presence(const std::vector<std::vector<bool>>& presence,
                                             double epsilon);
};

/// Per-peer sufficient statistics for the de-risked solve:
/// e = sum of the peer's rados, v = sum of centred outer products.
struct PeerStats {
    Eigen::VectorXd e;
    Eigen::MatrixXd v;
    int count = 0;
};

/// log[(1/k) sum_sigma exp(-theta . pi_sigma)] (+ theta.theta when
/// regularized); log-sum-exp guarded.
double exp_rado_loss(const Eigen::VectorXd& theta, const std::vector<Rado>& rados,
                     bool regularized = true);

/// Gradient of the regularized exponential rado loss.
Eigen::VectorXd grad_exp_rado_loss(const Eigen::VectorXd& theta, const std::vector<Rado>& rados);

struct GdConfig {
    double step = 0.1;
    int max_iters = 10000;
    double tol = 1e-6;        // on the gradient 2-norm
    int max_backtrack = 30;   // step halvings before reporting divergence
};

struct FitResult {
    Classifier classifier;
    std::vector<double> loss_trace;
    bool converged = false;
};

/// Gradient descent with backtracking on the exponential rado loss.
FitResult fit_gradient_descent(const std::vector<Rado>& rados, const GdConfig& config = {});

/// sum_i log(1 + exp(-y_i theta . x_i)), overflow-guarded.
double logistic_loss(const Eigen::VectorXd& theta, const Dataset& ds);

/// Baseline: gradient descent on the logistic loss over raw examples.
FitResult fit_logistic(const Dataset& ds, const GdConfig& config = {});

/// M-loss: -(E[theta.pi] - Var[theta.pi]/2) + (m/4) theta' Gamma theta,
/// expectation/variance uniform over the given rado multiset.
double m_loss(const Eigen::VectorXd& theta, const std::vector<Rado>& rados, int m,
              const Eigen::VectorXd& gamma_diag);

/// theta* = (B B' + dim_c(B) Gamma)^-1 B 1.
Eigen::VectorXd closed_form_theta(const Eigen::MatrixXd& b, const Eigen::VectorXd& gamma_diag);

PeerStats peer_stats(const std::vector<Rado>& peer_rados, const Eigen::VectorXd& b);

/// Solves theta = [Gamma + 1/2 sum_p v_p]^-1 b with b = sum_p e_p.
/// `b_mean` switches b (and the centring used upstream) to the mean of
/// the rados instead of their sum.
Eigen::VectorXd derisked_theta(std::span<const PeerStats> stats, const Eigen::VectorXd& gamma_diag);

/// Encrypted-domain counterpart of closed_form_theta:
/// T = B B' + dim_c(B) Gamma, V = inv(T), theta = (V B) 1, all through
/// the secure operators.  Returns ct(theta) at the codec scale.
CipherVector secure_rado_solver(SecureChannel& ch, const CipherMatrix& enc_b,
                                const CipherMatrix& enc_gamma, int ns_iterations);

}  // namespace secrado
