#include "secrado/learners.hpp"

#include <cmath>

namespace secrado {

int predict(const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
    if (theta.size() != x.size()) throw std::invalid_argument("predict: dimension mismatch");
    return theta.dot(x) >= 0.0 ? 1 : -1;
}

Eigen::VectorXd Regularizer::diagonal() const {
    Eigen::VectorXd d(static_cast<Eigen::Index>(confident.size()));
    for (size_t i = 0; i < confident.size(); ++i)
        d[static_cast<Eigen::Index>(i)] = confident[i] ? 1.0 : epsilon;
    return d;
}

Regularizer Regularizer::identity(int d) {
    Regularizer g;
    g.confident.assign(static_cast<size_t>(d), true);
    return g;
}

Regularizer Regularizer::from_feature_presence(const std::vector<std::vector<bool>>& presence,
                                               double epsilon) {
    if (presence.empty()) throw std::invalid_argument("regularizer: no presence vectors");
    size_t d = presence.front().size();
    Regularizer g;
    g.epsilon = epsilon;
    g.confident.assign(d, false);
    for (size_t j = 0; j < d; ++j) {
        int holders = 0;
        for (const auto& f : presence) {
            if (f.size() != d) throw std::invalid_argument("regularizer: presence length mismatch");
            if (f[j]) ++holders;
        }
        g.confident[j] = 2 * holders >= static_cast<int>(presence.size());
    }
    return g;
}

double exp_rado_loss(const Eigen::VectorXd& theta, const std::vector<Rado>& rados,
                     bool regularized) {
    if (rados.empty()) throw std::invalid_argument("exp_rado_loss: no rados");
    // log-sum-exp with max subtraction
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(rados.size());
    for (const Rado& r : rados) {
        double t = -theta.dot(r.pi);
        terms.push_back(t);
        max_term = std::max(max_term, t);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    double loss = max_term + std::log(acc / static_cast<double>(rados.size()));
    if (regularized) loss += theta.squaredNorm();
    return loss;
}

Eigen::VectorXd grad_exp_rado_loss(const Eigen::VectorXd& theta, const std::vector<Rado>& rados) {
    if (rados.empty()) throw std::invalid_argument("grad_exp_rado_loss: no rados");
    double max_term = -std::numeric_limits<double>::infinity();
    for (const Rado& r : rados) max_term = std::max(max_term, -theta.dot(r.pi));
    Eigen::VectorXd numerator = Eigen::VectorXd::Zero(theta.size());
    double denominator = 0.0;
    for (const Rado& r : rados) {
        double w = std::exp(-theta.dot(r.pi) - max_term);
        numerator -= w * r.pi;
        denominator += w;
    }
    return numerator / denominator + 2.0 * theta;
}

FitResult fit_gradient_descent(const std::vector<Rado>& rados, const GdConfig& config) {
    if (rados.empty()) throw std::invalid_argument("fit_gradient_descent: no rados");
    Eigen::Index d = rados.front().pi.size();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);

    FitResult out;
    out.loss_trace.push_back(exp_rado_loss(theta, rados));
    for (int it = 0; it < config.max_iters; ++it) {
        Eigen::VectorXd g = grad_exp_rado_loss(theta, rados);
        if (g.norm() <= config.tol) {
            out.converged = true;
            break;
        }
        double current = out.loss_trace.back();
        double step = config.step;
        bool advanced = false;
        for (int bt = 0; bt <= config.max_backtrack; ++bt) {
            Eigen::VectorXd trial = theta - step * g;
            double loss = exp_rado_loss(trial, rados);
            if (loss <= current) {
                theta = std::move(trial);
                out.loss_trace.push_back(loss);
                advanced = true;
                break;
            }
            step /= 2.0;
        }
        if (!advanced)
            throw std::runtime_error("fit_gradient_descent: loss not decreasing at max backtrack");
    }
    out.classifier.theta = std::move(theta);
    out.classifier.map = LiftMap::identity(static_cast<int>(d));
    return out;
}

double logistic_loss(const Eigen::VectorXd& theta, const Dataset& ds) {
    double loss = 0.0;
    for (int i = 0; i < ds.m(); ++i) {
        double z = -ds.y[i] * theta.dot(ds.X.row(i));
        // log(1 + e^z) without overflow
        loss += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    return loss;
}

FitResult fit_logistic(const Dataset& ds, const GdConfig& config) {
    ds.validate();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(ds.d());
    FitResult out;
    out.loss_trace.push_back(logistic_loss(theta, ds));
    for (int it = 0; it < config.max_iters; ++it) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(ds.d());
        for (int i = 0; i < ds.m(); ++i) {
            double z = ds.y[i] * theta.dot(ds.X.row(i));
            double s = z > 0 ? std::exp(-z) / (1 + std::exp(-z)) : 1.0 / (1 + std::exp(z));
            g -= s * ds.y[i] * ds.X.row(i).transpose();
        }
        g /= static_cast<double>(ds.m());
        if (g.norm() <= config.tol) {
            out.converged = true;
            break;
        }
        double current = out.loss_trace.back();
        double step = config.step;
        bool advanced = false;
        for (int bt = 0; bt <= config.max_backtrack; ++bt) {
            Eigen::VectorXd trial = theta - step * g;
            double loss = logistic_loss(trial, ds);
            if (loss <= current) {
                theta = std::move(trial);
                out.loss_trace.push_back(loss);
                advanced = true;
                break;
            }
            step /= 2.0;
        }
        if (!advanced) break;  // flat to machine precision
    }
    out.classifier.theta = std::move(theta);
    out.classifier.map = LiftMap::identity(ds.d());
    return out;
}

double m_loss(const Eigen::VectorXd& theta, const std::vector<Rado>& rados, int m,
              const Eigen::VectorXd& gamma_diag) {
    if (rados.empty()) throw std::invalid_argument("m_loss: no rados");
    double mean = 0.0, mean_sq = 0.0;
    for (const Rado& r : rados) {
        double z = theta.dot(r.pi);
        mean += z;
        mean_sq += z * z;
    }
    mean /= static_cast<double>(rados.size());
    mean_sq /= static_cast<double>(rados.size());
    double variance = mean_sq - mean * mean;
    double reg = theta.dot(gamma_diag.asDiagonal() * theta);
    return -(mean - 0.5 * variance) + 0.25 * static_cast<double>(m) * reg;
}

Eigen::VectorXd closed_form_theta(const Eigen::MatrixXd& b, const Eigen::VectorXd& gamma_diag) {
    if (b.rows() != gamma_diag.size())
        throw std::invalid_argument("closed_form_theta: Gamma dimension mismatch");
    double k = static_cast<double>(b.cols());
    Eigen::MatrixXd system = b * b.transpose();
    system += k * gamma_diag.asDiagonal().toDenseMatrix();
    Eigen::VectorXd rhs = b * Eigen::VectorXd::Ones(b.cols());
    return system.ldlt().solve(rhs);
}

PeerStats peer_stats(const std::vector<Rado>& peer_rados, const Eigen::VectorXd& b) {
    PeerStats stats;
    stats.count = static_cast<int>(peer_rados.size());
    stats.e = Eigen::VectorXd::Zero(b.size());
    stats.v = Eigen::MatrixXd::Zero(b.size(), b.size());
    for (const Rado& r : peer_rados) {
        if (r.pi.size() != b.size()) throw std::invalid_argument("peer_stats: dimension mismatch");
        stats.e += r.pi;
        Eigen::VectorXd centred = r.pi - b;
        stats.v += centred * centred.transpose();
    }
    return stats;
}

Eigen::VectorXd derisked_theta(std::span<const PeerStats> stats,
                               const Eigen::VectorXd& gamma_diag) {
    if (stats.empty()) throw std::invalid_argument("derisked_theta: no peer statistics");
    Eigen::Index d = gamma_diag.size();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d);
    for (const PeerStats& s : stats) {
        if (s.e.size() != d || s.v.rows() != d)
            throw std::invalid_argument("derisked_theta: dimension mismatch");
        b += s.e;
        v += s.v;
    }
    Eigen::MatrixXd system = 0.5 * v;
    system += gamma_diag.asDiagonal().toDenseMatrix();
    return system.ldlt().solve(b);
}

CipherVector secure_rado_solver(SecureChannel& ch, const CipherMatrix& enc_b,
                                const CipherMatrix& enc_gamma, int ns_iterations) {
    unsigned f = ch.codec->fraction_bits();
    if (enc_gamma.rows != enc_b.rows || enc_gamma.cols != enc_b.rows)
        throw std::invalid_argument("secure_rado_solver: Gamma shape mismatch");

    CipherMatrix t = rescale(ch, sec_mat_prod(ch, enc_b, enc_b.transposed()), f);
    CipherMatrix gamma_scaled = enc_gamma;
    if (gamma_scaled.scale != f) throw ScaleMismatchError("secure_rado_solver: Gamma scale");
    for (Bigint& v : gamma_scaled.values)
        v = powmod(v, Bigint(enc_b.cols), ch.pk.n_squared);  // dim_c(B) (x) Gamma
    t = hom_add(ch.pk, t, gamma_scaled);

    CipherMatrix inv = sec_inv(ch, t, ns_iterations);
    CipherMatrix w = rescale(ch, sec_mat_prod(ch, inv, enc_b), f);

    // theta = (V B) 1: homomorphic row sums
    CipherVector theta;
    theta.scale = f;
    theta.values.reserve(static_cast<size_t>(w.rows));
    for (int i = 0; i < w.rows; ++i) theta.values.push_back(hom_sum(ch.pk, w.row(i)).value);
    return theta;
}

}  // namespace secrado
