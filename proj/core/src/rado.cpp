#include "secrado/rado.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace secrado {

void Signature::validate() const {
    for (int e : entries)
        if (e != -1 && e != 1) throw std::invalid_argument("signature entries must be -1 or +1");
}

LiftMap LiftMap::identity(int dim) {
    LiftMap map;
    map.local_dim = dim;
    map.global_dim = dim;
    map.positions.resize(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) map.positions[static_cast<size_t>(i)] = i;
    return map;
}

void LiftMap::validate() const {
    if (global_dim < local_dim) throw std::invalid_argument("lift map: global_dim < local_dim");
    if (static_cast<int>(positions.size()) != local_dim)
        throw std::invalid_argument("lift map: position count != local_dim");
    std::vector<bool> seen(static_cast<size_t>(global_dim), false);
    for (int p : positions) {
        if (p < 0 || p >= global_dim) throw std::invalid_argument("lift map: position out of range");
        if (seen[static_cast<size_t>(p)]) throw std::invalid_argument("lift map: not injective");
        seen[static_cast<size_t>(p)] = true;
    }
}

Rado make_rado(const Dataset& ds, const Signature& sigma) {
    if (sigma.size() != ds.m())
        throw std::invalid_argument("make_rado: signature length != example count");
    sigma.validate();
    Rado out;
    out.pi = Eigen::VectorXd::Zero(ds.d());
    for (int i = 0; i < ds.m(); ++i) {
        double coef = (sigma.entries[static_cast<size_t>(i)] + ds.y[i]) / 2.0;
        if (coef != -1.0 && coef != 0.0 && coef != 1.0)
            throw std::logic_error("make_rado: coefficient outside {-1,0,1}");
        if (coef != 0.0) out.pi += coef * ds.X.row(i).transpose();
    }
    return out;
}

std::vector<Signature> sample_signatures(int m, int k, SecureRng& rng) {
    if (m < 1) throw std::invalid_argument("sample_signatures: m must be positive");
    if (k < 1) throw std::invalid_argument("sample_signatures: k must be positive");
    std::vector<Signature> out(static_cast<size_t>(k));
    for (auto& sig : out) {
        sig.entries.resize(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) sig.entries[static_cast<size_t>(i)] = rng.sign();
    }
    return out;
}

std::vector<Signature> all_signatures(int m) {
    if (m < 1) throw std::invalid_argument("all_signatures: m must be positive");
    if (m > 16) throw std::invalid_argument("all_signatures: m > 16 would enumerate 2^m > 65536");
    std::vector<Signature> out;
    out.reserve(1u << m);
    for (uint32_t code = 0; code < (1u << m); ++code) {
        Signature sig;
        sig.entries.resize(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            // lexicographic with -1 < +1: high bit first
            bool plus = (code >> (m - 1 - i)) & 1u;
            sig.entries[static_cast<size_t>(i)] = plus ? 1 : -1;
        }
        out.push_back(std::move(sig));
    }
    return out;
}

Eigen::VectorXd lift(const Eigen::VectorXd& z, const LiftMap& map) {
    map.validate();
    if (z.size() != map.local_dim) throw std::invalid_argument("lift: vector/map size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(map.global_dim);
    for (int i = 0; i < map.local_dim; ++i) out[map.positions[static_cast<size_t>(i)]] = z[i];
    return out;
}

Eigen::VectorXd restrict_to_local(const Eigen::VectorXd& global, const LiftMap& map) {
    map.validate();
    if (global.size() != map.global_dim)
        throw std::invalid_argument("restrict: vector/map size mismatch");
    Eigen::VectorXd out(map.local_dim);
    for (int i = 0; i < map.local_dim; ++i) out[i] = global[map.positions[static_cast<size_t>(i)]];
    return out;
}

Rado bb_rado(double alpha, const Eigen::VectorXd& s, int y,
             const std::vector<std::pair<Rado, LiftMap>>& block_rados, const LiftMap& map_s) {
    if (y != -1 && y != 1) throw std::invalid_argument("bb_rado: label must be -1 or +1");
    Rado out;
    out.pi = alpha * lift(static_cast<double>(y) * s, map_s);
    for (const auto& [block, map] : block_rados) {
        if (map.global_dim != map_s.global_dim)
            throw std::invalid_argument("bb_rado: lift targets disagree on global dimension");
        out.pi += lift(block.pi, map);
    }
    return out;
}

Eigen::MatrixXd rado_matrix(const std::vector<Rado>& rados) {
    if (rados.empty()) throw std::invalid_argument("rado_matrix: empty rado list");
    Eigen::Index d = rados.front().pi.size();
    Eigen::MatrixXd B(d, static_cast<Eigen::Index>(rados.size()));
    for (size_t j = 0; j < rados.size(); ++j) {
        if (rados[j].pi.size() != d) throw std::invalid_argument("rado_matrix: dimension mismatch");
        B.col(static_cast<Eigen::Index>(j)) = rados[j].pi;
    }
    return B;
}

void write_rados_csv(const std::filesystem::path& path, const std::vector<Rado>& rados) {
    if (rados.empty()) throw std::invalid_argument("write_rados_csv: empty rado list");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    Eigen::Index d = rados.front().pi.size();
    out << "peer_id,signature_id";
    for (Eigen::Index j = 0; j < d; ++j) out << ",pi_" << j;
    out << '\n';
    out.precision(17);
    for (const Rado& r : rados) {
        if (r.pi.size() != d) throw std::invalid_argument("write_rados_csv: dimension mismatch");
        out << r.peer_id << ',' << r.signature_id;
        for (Eigen::Index j = 0; j < d; ++j) out << ',' << r.pi[j];
        out << '\n';
    }
}

std::vector<Rado> read_rados_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string header;
    if (!std::getline(in, header) || header.rfind("peer_id,signature_id", 0) != 0)
        throw std::runtime_error("rado csv: bad header in " + path.string());
    Eigen::Index d = static_cast<Eigen::Index>(std::count(header.begin(), header.end(), ',')) - 1;
    if (d < 1) throw std::runtime_error("rado csv: no coordinates in header");
    std::vector<Rado> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        Rado r;
        r.pi.resize(d);
        std::getline(row, field, ',');
        r.peer_id = std::stoi(field);
        std::getline(row, field, ',');
        r.signature_id = std::stoi(field);
        for (Eigen::Index j = 0; j < d; ++j) {
            if (!std::getline(row, field, ','))
                throw std::runtime_error("rado csv: short row in " + path.string());
            r.pi[j] = std::stod(field);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace secrado
