#pragma once

#include <optional>

#include "secrado/protocol.hpp"

namespace secrado {

enum class ExperimentMode { baseline_logistic, rado_plain, rado_enc_rados, rado_enc_full };

ExperimentMode experiment_mode_from_string(const std::string& name);
const char* to_string(ExperimentMode mode);

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::rado_plain;
    int peers = 4;
    int rados_per_peer = 25;
    unsigned key_bits = 512;
    unsigned fraction_bits = 32;
    unsigned magnitude_bits = 48;
    double epsilon = 1e-3;
    int ns_iterations = 32;
    uint64_t seed = 0;
    double split_ratio = 0.8;
    bool minmax_scale = false;
    bool b_mean = false;

    void validate() const;
    TrainConfig train_config() const;
};

/// Flat key=value config file; '#' starts a comment.  Unknown keys are
/// rejected.
ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig apply_config_line(ExperimentConfig config, const std::string& line);

struct MetricsReport {
    double misclassification = 0.0;
    std::map<std::string, double> phase_seconds;
    ExperimentConfig config;
    std::string library_digest;
};

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);
std::string library_digest();

/// UCI ionosphere file: 34 numeric columns then a g/b class column;
/// g -> +1, b -> -1.  Malformed rows are reported with their line
/// number.
Dataset load_ionosphere(const std::filesystem::path& path);

/// Numeric CSV with a trailing +1/-1 label column.
Dataset load_numeric_csv(const std::filesystem::path& path);

/// Stratified split: per-class seeded shuffle, round(ratio*m_c) rows
/// into train.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double ratio, uint64_t seed);

double misclassification_rate(const Eigen::VectorXd& theta, const Dataset& test);

struct ExperimentArtifacts {
    MetricsReport metrics;
    Eigen::VectorXd theta;
    std::optional<TrainResult> trained;  // only for the full protocol mode
};

ExperimentArtifacts run_experiment(const ExperimentConfig& config, const Dataset& ds);

/// Runs every grid row and renders a fixed-width timing/accuracy table.
std::string bench_table(const std::vector<ExperimentConfig>& grid, const Dataset& ds);

/// Model directory: classifier CSV + JSON sidecar, key material,
/// encrypted per-peer slices, the retained surrogate rado, metrics and
/// transcript.
void save_model(const std::filesystem::path& dir, TrainResult& result,
                const Eigen::VectorXd& theta, const MetricsReport& metrics,
                const std::optional<Dictionary>& dict = std::nullopt);
TrainResult load_model(const std::filesystem::path& dir);

}  // namespace secrado
