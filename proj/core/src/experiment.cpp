#include "secrado/experiment.hpp"

#include <nlohmann/json.hpp>
#include <sodium.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "secrado/serialize.hpp"

namespace secrado {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

json config_to_json(const ExperimentConfig& c) {
    return json{{"mode", to_string(c.mode)},
                {"peers", c.peers},
                {"rados_per_peer", c.rados_per_peer},
                {"key_bits", c.key_bits},
                {"fraction_bits", c.fraction_bits},
                {"magnitude_bits", c.magnitude_bits},
                {"epsilon", c.epsilon},
                {"ns_iterations", c.ns_iterations},
                {"seed", c.seed},
                {"split_ratio", c.split_ratio},
                {"minmax_scale", c.minmax_scale},
                {"b_mean", c.b_mean}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.mode = experiment_mode_from_string(j.at("mode").get<std::string>());
    c.peers = j.at("peers").get<int>();
    c.rados_per_peer = j.at("rados_per_peer").get<int>();
    c.key_bits = j.at("key_bits").get<unsigned>();
    c.fraction_bits = j.at("fraction_bits").get<unsigned>();
    c.magnitude_bits = j.at("magnitude_bits").get<unsigned>();
    c.epsilon = j.at("epsilon").get<double>();
    c.ns_iterations = j.at("ns_iterations").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.split_ratio = j.at("split_ratio").get<double>();
    c.minmax_scale = j.at("minmax_scale").get<bool>();
    c.b_mean = j.at("b_mean").get<bool>();
    return c;
}

}  // namespace

ExperimentMode experiment_mode_from_string(const std::string& name) {
    if (name == "baseline_logistic") return ExperimentMode::baseline_logistic;
    if (name == "rado_plain") return ExperimentMode::rado_plain;
    if (name == "rado_enc_rados") return ExperimentMode::rado_enc_rados;
    if (name == "rado_enc_full") return ExperimentMode::rado_enc_full;
    throw std::invalid_argument("unknown experiment mode: " + name);
}

const char* to_string(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::baseline_logistic: return "baseline_logistic";
        case ExperimentMode::rado_plain: return "rado_plain";
        case ExperimentMode::rado_enc_rados: return "rado_enc_rados";
        case ExperimentMode::rado_enc_full: return "rado_enc_full";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (peers < 1) throw std::invalid_argument("config: peers must be positive");
    if (rados_per_peer < 1) throw std::invalid_argument("config: rados_per_peer must be positive");
    if (key_bits < 128) throw std::invalid_argument("config: key_bits below 128");
    if (fraction_bits < 1) throw std::invalid_argument("config: fraction_bits must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("config: epsilon in (0,1)");
    if (ns_iterations < 1) throw std::invalid_argument("config: ns_iterations must be positive");
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw std::invalid_argument("config: split_ratio in (0,1)");
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig t;
    t.key_bits = key_bits;
    t.fraction_bits = fraction_bits;
    t.magnitude_bits = magnitude_bits;
    t.epsilon = epsilon;
    t.ns_iterations = ns_iterations;
    t.rados_per_peer = rados_per_peer;
    t.seed = seed;
    t.b_mean = b_mean;
    return t;
}

ExperimentConfig apply_config_line(ExperimentConfig config, const std::string& raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') return config;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line missing '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "mode")
        config.mode = experiment_mode_from_string(value);
    else if (key == "peers")
        config.peers = std::stoi(value);
    else if (key == "rados_per_peer" || key == "rados")
        config.rados_per_peer = std::stoi(value);
    else if (key == "key_bits")
        config.key_bits = static_cast<unsigned>(std::stoul(value));
    else if (key == "fraction_bits")
        config.fraction_bits = static_cast<unsigned>(std::stoul(value));
    else if (key == "magnitude_bits")
        config.magnitude_bits = static_cast<unsigned>(std::stoul(value));
    else if (key == "epsilon")
        config.epsilon = std::stod(value);
    else if (key == "ns_iterations")
        config.ns_iterations = std::stoi(value);
    else if (key == "seed")
        config.seed = std::stoull(value);
    else if (key == "split_ratio")
        config.split_ratio = std::stod(value);
    else if (key == "minmax_scale")
        config.minmax_scale = value == "true" || value == "1";
    else if (key == "b_mean")
        config.b_mean = value == "true" || value == "1";
    else
        throw std::invalid_argument("unknown config key: " + key);
    return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    ExperimentConfig config;
    std::string line;
    while (std::getline(in, line)) config = apply_config_line(std::move(config), line);
    config.validate();
    return config;
}

std::string library_digest() {
    std::ostringstream out;
    out << "secrado 0.1.0; gmp " << __GNU_MP_VERSION << '.' << __GNU_MP_VERSION_MINOR << '.'
        << __GNU_MP_VERSION_PATCHLEVEL << "; eigen " << EIGEN_WORLD_VERSION << '.'
        << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << "; sodium "
        << sodium_version_string();
    return out.str();
}

std::string metrics_to_json(const MetricsReport& report) {
    json j{{"misclassification", report.misclassification},
           {"phase_seconds", report.phase_seconds},
           {"config", config_to_json(report.config)},
           {"library_digest", report.library_digest}};
    return j.dump(2);
}

MetricsReport metrics_from_json(const std::string& text) {
    json j = json::parse(text);
    MetricsReport report;
    report.misclassification = j.at("misclassification").get<double>();
    report.phase_seconds = j.at("phase_seconds").get<std::map<std::string, double>>();
    report.config = config_from_json(j.at("config"));
    report.library_digest = j.at("library_digest").get<std::string>();
    if (report.misclassification < 0.0 || report.misclassification > 1.0)
        throw std::invalid_argument("metrics: misclassification outside [0,1]");
    return report;
}

Dataset load_ionosphere(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_fields(line, ',');
        if (fields.size() != 35)
            throw std::runtime_error("ionosphere line " + std::to_string(line_no) + ": expected " +
                                     "35 fields, got " + std::to_string(fields.size()));
        std::vector<double> row(34);
        for (int j = 0; j < 34; ++j) {
            try {
                row[static_cast<size_t>(j)] = std::stod(fields[static_cast<size_t>(j)]);
            } catch (const std::exception&) {
                throw std::runtime_error("ionosphere line " + std::to_string(line_no) +
                                         ": bad numeric field " + std::to_string(j + 1));
            }
        }
        std::string cls = trim(fields[34]);
        if (cls != "g" && cls != "b")
            throw std::runtime_error("ionosphere line " + std::to_string(line_no) +
                                     ": class must be g or b");
        rows.push_back(std::move(row));
        labels.push_back(cls == "g" ? 1.0 : -1.0);
    }
    if (rows.empty()) throw std::runtime_error("ionosphere: empty file " + path.string());
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), 34);
    ds.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < 34; ++j) ds.X(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<size_t>(j)];
        ds.y[static_cast<Eigen::Index>(i)] = labels[i];
    }
    ds.validate();
    return ds;
}

Dataset load_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_fields(line, ',');
        if (width == 0) width = fields.size();
        if (fields.size() != width || width < 2)
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(width) + " fields");
        std::vector<double> row;
        row.reserve(width);
        for (const std::string& f : fields) row.push_back(std::stod(f));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("csv: empty file " + path.string());
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    ds.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j + 1 < width; ++j)
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        ds.y[static_cast<Eigen::Index>(i)] = rows[i][width - 1];
    }
    ds.validate();
    return ds;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double ratio, uint64_t seed) {
    ds.validate();
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split: ratio in (0,1)");
    std::vector<int> pos, neg;
    for (int i = 0; i < ds.m(); ++i) (ds.y[i] > 0 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("split: a class is empty (degenerate)");

    SecureRng rng(seed);
    auto shuffle = [&rng](std::vector<int>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.next_u64() % i]);
    };
    shuffle(pos);
    shuffle(neg);

    std::vector<int> train_idx, test_idx;
    for (auto* cls : {&pos, &neg}) {
        size_t take = static_cast<size_t>(std::lround(ratio * static_cast<double>(cls->size())));
        take = std::min(std::max<size_t>(take, 1), cls->size() - 1);
        train_idx.insert(train_idx.end(), cls->begin(), cls->begin() + static_cast<long>(take));
        test_idx.insert(test_idx.end(), cls->begin() + static_cast<long>(take), cls->end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {ds.subset(train_idx), ds.subset(test_idx)};
}

double misclassification_rate(const Eigen::VectorXd& theta, const Dataset& test) {
    int wrong = 0;
    for (int i = 0; i < test.m(); ++i)
        if (predict(theta, test.X.row(i).transpose()) != static_cast<int>(test.y[i])) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(test.m());
}

namespace {

/// "rados encrypted, theta plain": peers run Protocol 1 against the key
/// holder, upload their encrypted rados, the coordinator decrypts them
/// (rado-level aggregates) and solves in the clear.
Eigen::VectorXd enc_rados_theta(const std::vector<PeerInput>& peers, const TrainConfig& config,
                                std::map<std::string, double>& phase_seconds) {
    auto start = Clock::now();
    SecureRng master(config.seed);
    SecureRng coord_rng = master.derive("coordinator");
    KeyPair keys = keygen(config.key_bits, coord_rng);
    FixedPointCodec codec(config.fraction_bits, keys.pk.n, config.magnitude_bits);
    phase_seconds["keygen"] = seconds_since(start);

    start = Clock::now();
    Bus bus;
    KeyHolderService service("coordinator", keys.sk, codec, coord_rng.derive("keyholder"),
                             &bus.audit());
    bus.register_party("coordinator", service.handler());

    std::vector<std::vector<Signature>> signatures = protocol_signatures(peers, config);
    std::vector<std::vector<Rado>> decrypted(peers.size());
    for (size_t p = 0; p < peers.size(); ++p) {
        std::string name = "peer" + std::to_string(p);
        SecureRng rng = master.derive(name);
        bus.register_party(name, [](const std::string&, const std::vector<uint8_t>&) {
            return std::vector<uint8_t>{};
        });
        SecureChannel ch{&bus, name, "coordinator", "encrados", keys.pk, &codec, &rng};
        auto [enc_x, enc_y] = encrypt_dataset(keys.pk, codec, peers[p].data, rng);
        for (size_t s = 0; s < signatures[p].size(); ++s) {
            CipherVector pi = encrypted_rado(ch, enc_x, enc_y, signatures[p][s]);
            Rado r;
            r.pi = decrypt_vector(keys.sk, codec, pi);
            r.peer_id = static_cast<int>(p);
            r.signature_id = static_cast<int>(s);
            bus.audit().record("coordinator", "rado.upload", ObservationKind::aggregate,
                               "rado (irreversible example aggregate)");
            decrypted[p].push_back(std::move(r));
        }
    }
    phase_seconds["rado"] = seconds_since(start);

    start = Clock::now();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(peers.front().data.d());
    int k_total = 0;
    for (const auto& list : decrypted)
        for (const Rado& r : list) {
            b += r.pi;
            ++k_total;
        }
    if (config.b_mean) b /= static_cast<double>(k_total);
    std::vector<std::vector<bool>> presence;
    for (const PeerInput& p : peers) presence.push_back(p.presence);
    Regularizer gamma = Regularizer::from_feature_presence(presence, config.epsilon);
    std::vector<PeerStats> stats;
    for (const auto& list : decrypted) stats.push_back(peer_stats(list, b));
    Eigen::VectorXd theta = derisked_theta(stats, gamma.diagonal());
    phase_seconds["solve"] = seconds_since(start);
    return theta;
}

}  // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& config, const Dataset& raw) {
    config.validate();
    Dataset ds = config.minmax_scale ? minmax_scaled(raw) : raw;
    auto [train, test] = stratified_split(ds, config.split_ratio, config.seed);

    ExperimentArtifacts out;
    out.metrics.config = config;
    out.metrics.library_digest = library_digest();

    auto start = Clock::now();
    switch (config.mode) {
        case ExperimentMode::baseline_logistic: {
            GdConfig gd;
            gd.step = 4.0;
            gd.max_iters = 2000;
            gd.tol = 1e-7;
            FitResult fit = fit_logistic(train, gd);
            out.theta = fit.classifier.theta;
            out.metrics.phase_seconds["train"] = seconds_since(start);
            break;
        }
        case ExperimentMode::rado_plain: {
            std::vector<PeerInput> peers = partition_dataset(train, config.peers, config.seed);
            out.theta = plain_train_theta(peers, config.train_config());
            out.metrics.phase_seconds["train"] = seconds_since(start);
            break;
        }
        case ExperimentMode::rado_enc_rados: {
            std::vector<PeerInput> peers = partition_dataset(train, config.peers, config.seed);
            out.theta = enc_rados_theta(peers, config.train_config(), out.metrics.phase_seconds);
            out.metrics.phase_seconds["train"] = seconds_since(start);
            break;
        }
        case ExperimentMode::rado_enc_full: {
            std::vector<PeerInput> peers = partition_dataset(train, config.peers, config.seed);
            TrainResult result = run_train(peers, config.train_config());
            out.theta = decrypt_model(result);
            out.metrics.phase_seconds = result.phase_seconds;
            out.metrics.phase_seconds["train"] = result.phase_seconds.at("total");
            out.trained = std::move(result);
            break;
        }
    }
    out.metrics.misclassification = misclassification_rate(out.theta, test);
    return out;
}

std::string bench_table(const std::vector<ExperimentConfig>& grid, const Dataset& ds) {
    std::ostringstream out;
    out << "mode              peers  rados  key_bits  f   misclass  train_s\n";
    for (const ExperimentConfig& config : grid) {
        ExperimentArtifacts result = run_experiment(config, ds);
        char line[160];
        std::snprintf(line, sizeof(line), "%-17s %5d  %5d  %8u  %-3u %.4f    %.3f\n",
                      to_string(config.mode), config.peers, config.rados_per_peer, config.key_bits,
                      config.fraction_bits, result.metrics.misclassification,
                      result.metrics.phase_seconds.at("train"));
        out << line;
    }
    return out.str();
}

void save_model(const std::filesystem::path& dir, TrainResult& result,
                const Eigen::VectorXd& theta, const MetricsReport& metrics,
                const std::optional<Dictionary>& dict) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "theta.csv");
        out.precision(17);
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            out << theta[i] << (i + 1 < theta.size() ? "," : "\n");
    }
    {
        json sidecar{{"dimension", theta.size()},
                     {"feature_map", "identity"},
                     {"config_digest", config_to_json(metrics.config)},
                     {"library_digest", metrics.library_digest}};
        std::ofstream out(dir / "theta.json");
        out << sidecar.dump(2) << '\n';
    }
    wire::write_file(dir / "public.key", wire::encode_public_key(result.keys.pk));
    wire::write_file(dir / "secret.key", wire::encode_secret_key(result.keys.sk));
    wire::write_file(dir / "theta.enc", wire::encode_cipher_vector(result.enc_theta));
    wire::write_file(dir / "surrogate.enc", wire::encode_cipher_vector(result.enc_surrogate_rado));
    for (size_t p = 0; p < result.enc_theta_p.size(); ++p)
        wire::write_file(dir / ("theta_p" + std::to_string(p) + ".enc"),
                         wire::encode_cipher_vector(result.enc_theta_p[p]));

    json model{{"peers", result.enc_theta_p.size()},
               {"fraction_bits", result.fraction_bits},
               {"magnitude_bits", result.magnitude_bits},
               {"owner", result.owner},
               {"surrogate_peer", result.surrogate_peer},
               {"surrogate_index", result.surrogate_index},
               {"gamma_diag", std::vector<double>(result.gamma_diag.data(),
                                                  result.gamma_diag.data() + result.gamma_diag.size())}};
    json presence = json::array();
    for (const auto& f : result.presence) {
        json row = json::array();
        for (bool b : f) row.push_back(b ? 1 : 0);
        presence.push_back(std::move(row));
    }
    model["presence"] = std::move(presence);
    {
        std::ofstream out(dir / "model.json");
        out << model.dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "metrics.json");
        out << metrics_to_json(metrics) << '\n';
    }
    if (dict) write_dictionary(dir / "dictionary.txt", *dict);
    result.bus->write_transcript(dir / "transcript.jsonl");
}

TrainResult load_model(const std::filesystem::path& dir) {
    TrainResult result;
    {
        std::ifstream in(dir / "model.json");
        if (!in) throw std::runtime_error("cannot open model: " + (dir / "model.json").string());
        json model = json::parse(in);
        result.fraction_bits = model.at("fraction_bits").get<unsigned>();
        result.magnitude_bits = model.at("magnitude_bits").get<unsigned>();
        result.owner = model.at("owner").get<std::vector<int>>();
        result.surrogate_peer = model.at("surrogate_peer").get<int>();
        result.surrogate_index = model.at("surrogate_index").get<int>();
        std::vector<double> gamma = model.at("gamma_diag").get<std::vector<double>>();
        result.gamma_diag = Eigen::Map<Eigen::VectorXd>(gamma.data(),
                                                        static_cast<Eigen::Index>(gamma.size()));
        for (const auto& row : model.at("presence")) {
            std::vector<bool> f;
            for (const auto& v : row) f.push_back(v.get<int>() != 0);
            result.presence.push_back(std::move(f));
        }
    }
    auto pk_bytes = wire::read_file(dir / "public.key");
    auto sk_bytes = wire::read_file(dir / "secret.key");
    result.keys.pk = wire::decode_public_key(pk_bytes);
    result.keys.sk = wire::decode_secret_key(sk_bytes);
    auto theta_bytes = wire::read_file(dir / "theta.enc");
    result.enc_theta = wire::decode_cipher_vector(theta_bytes);
    auto surrogate_bytes = wire::read_file(dir / "surrogate.enc");
    result.enc_surrogate_rado = wire::decode_cipher_vector(surrogate_bytes);

    size_t peers = result.presence.size();
    for (size_t p = 0; p < peers; ++p) {
        auto bytes = wire::read_file(dir / ("theta_p" + std::to_string(p) + ".enc"));
        result.enc_theta_p.push_back(wire::decode_cipher_vector(bytes));
        LiftMap map;
        map.global_dim = static_cast<int>(result.owner.size());
        for (int j = 0; j < map.global_dim; ++j)
            if (result.presence[p][static_cast<size_t>(j)]) map.positions.push_back(j);
        map.local_dim = static_cast<int>(map.positions.size());
        result.peer_maps.push_back(std::move(map));
    }
    return result;
}

}  // namespace secrado
