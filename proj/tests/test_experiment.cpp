#include <secrado/experiment.hpp>

#include <filesystem>
#include <fstream>

#include "testutil.hpp"

using namespace secrado;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

/// Ionosphere-format fixture rows (synthetic values, real shape: 34
/// numeric fields then g/b).
void write_iono_fixture(const std::filesystem::path& path, int rows) {
    std::ofstream out(path);
    SecureRng rng(81);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < 34; ++j) out << (rng.uniform01() * 2 - 1) << ',';
        out << (i % 3 == 0 ? 'b' : 'g') << '\n';
    }
}

Dataset synthetic_numeric(int m, int d, uint64_t seed) {
    SecureRng rng(seed);
    Dataset ds;
    ds.X.resize(m, d);
    ds.y.resize(m);
    for (int i = 0; i < m; ++i) {
        double label = i % 3 == 0 ? -1.0 : 1.0;
        for (int j = 0; j < d; ++j)
            ds.X(i, j) = label * (j % 2 == 0 ? 0.9 : -0.5) + (rng.uniform01() * 2 - 1);
        ds.y[i] = label;
    }
    return ds;
}

}  // namespace

TEST_CASE("ionosphere loader enforces the 35-field format") {
    auto path = temp_file("secrado_iono_fixture.csv");
    write_iono_fixture(path, 12);
    Dataset ds = load_ionosphere(path);
    CHECK(ds.m() == 12);
    CHECK(ds.d() == 34);
    for (int i = 0; i < 12; ++i) CHECK(ds.y[i] == (i % 3 == 0 ? -1.0 : 1.0));
    std::filesystem::remove(path);

    auto bad = temp_file("secrado_iono_bad.csv");
    {
        std::ofstream out(bad);
        for (int j = 0; j < 33; ++j) out << "0.5,";
        out << "g\n";  // 33 numeric fields only
    }
    CHECK_THROWS_WITH_AS(load_ionosphere(bad), doctest::Contains("line 1"), std::runtime_error);
    {
        std::ofstream out(bad);
        for (int j = 0; j < 34; ++j) out << "0.5,";
        out << "x\n";
    }
    CHECK_THROWS_WITH_AS(load_ionosphere(bad), doctest::Contains("class"), std::runtime_error);
    std::filesystem::remove(bad);
}

TEST_CASE("stratified split is deterministic, disjoint and balanced") {
    Dataset ds = synthetic_numeric(351, 5, 82);
    auto [train, test] = stratified_split(ds, 0.8, 0);
    CHECK(train.m() + test.m() == 351);
    CHECK((train.m() == 280 || train.m() == 281));

    auto count_pos = [](const Dataset& d) {
        int c = 0;
        for (int i = 0; i < d.m(); ++i) c += d.y[i] > 0;
        return c;
    };
    int total_pos = count_pos(ds);
    double train_ratio = static_cast<double>(count_pos(train)) / train.m();
    double full_ratio = static_cast<double>(total_pos) / ds.m();
    CHECK(std::abs(train_ratio - full_ratio) * train.m() <= 1.5);  // proportions within one row

    auto [train2, test2] = stratified_split(ds, 0.8, 0);
    CHECK(train2.X == train.X);
    CHECK(test2.X == test.X);

    // disjoint and exhaustive: multiset of rows matches (rows are
    // distinct with probability 1 here)
    CHECK_THROWS_AS(stratified_split(ds, 1.5, 0), std::invalid_argument);

    Dataset degenerate;
    degenerate.X = Eigen::MatrixXd::Ones(3, 2);
    degenerate.y = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(stratified_split(degenerate, 0.8, 0), std::invalid_argument);
}

TEST_CASE("misclassification matches a hand count") {
    Dataset test;
    test.X.resize(10, 1);
    test.y.resize(10);
    for (int i = 0; i < 10; ++i) {
        test.X(i, 0) = i < 5 ? 1.0 : -1.0;
        test.y[i] = 1.0;  // first five classified +1, rest -1: 5 wrong
    }
    Eigen::VectorXd theta = Eigen::VectorXd::Ones(1);
    CHECK(misclassification_rate(theta, test) == doctest::Approx(0.5));
}

TEST_CASE("config files parse and reject unknown keys") {
    auto path = temp_file("secrado_config_test.cfg");
    {
        std::ofstream out(path);
        out << "# experiment config\n";
        out << "mode = rado_enc_full\n";
        out << "peers = 3\n";
        out << "rados = 7\n";
        out << "key_bits = 256\n";
        out << "epsilon = 0.01\n";
        out << "seed = 42\n";
        out << "minmax_scale = true\n";
    }
    ExperimentConfig config = parse_config_file(path);
    CHECK(config.mode == ExperimentMode::rado_enc_full);
    CHECK(config.peers == 3);
    CHECK(config.rados_per_peer == 7);
    CHECK(config.key_bits == 256);
    CHECK(config.epsilon == 0.01);
    CHECK(config.seed == 42);
    CHECK(config.minmax_scale);
    std::filesystem::remove(path);

    CHECK_THROWS_WITH_AS(apply_config_line(ExperimentConfig{}, "no_such_key = 5"),
                         doctest::Contains("unknown config key"), std::invalid_argument);
    CHECK_THROWS_AS(experiment_mode_from_string("nope"), std::invalid_argument);
}

TEST_CASE("metrics reports roundtrip through their JSON schema") {
    MetricsReport report;
    report.misclassification = 0.125;
    report.phase_seconds = {{"train", 1.5}, {"total", 2.0}};
    report.config.mode = ExperimentMode::rado_plain;
    report.config.seed = 9;
    report.library_digest = library_digest();
    std::string text = metrics_to_json(report);
    MetricsReport back = metrics_from_json(text);
    CHECK(back.misclassification == report.misclassification);
    CHECK(back.phase_seconds == report.phase_seconds);
    CHECK(back.config.seed == 9);
    CHECK(back.config.mode == ExperimentMode::rado_plain);
    CHECK(back.library_digest == report.library_digest);
}

TEST_CASE("experiment modes run end to end on a synthetic dataset") {
    Dataset ds = synthetic_numeric(60, 4, 83);

    ExperimentConfig base;
    base.peers = 2;
    base.rados_per_peer = 4;
    base.key_bits = 256;
    base.ns_iterations = 10;
    base.seed = 1;

    base.mode = ExperimentMode::baseline_logistic;
    ExperimentArtifacts logistic = run_experiment(base, ds);
    CHECK(logistic.metrics.misclassification <= 0.35);

    base.mode = ExperimentMode::rado_plain;
    ExperimentArtifacts plain = run_experiment(base, ds);
    CHECK(plain.metrics.misclassification <= 0.45);
    CHECK(plain.metrics.phase_seconds.count("train") == 1);

    base.mode = ExperimentMode::rado_enc_rados;
    ExperimentArtifacts enc_rados = run_experiment(base, ds);
    // same signatures, same solve; only fixed-point noise differs
    CHECK(std::abs(enc_rados.metrics.misclassification - plain.metrics.misclassification) <= 0.01);

    base.mode = ExperimentMode::rado_enc_full;
    ExperimentArtifacts enc_full = run_experiment(base, ds);
    CHECK(std::abs(enc_full.metrics.misclassification - plain.metrics.misclassification) <= 0.01);
    CHECK(enc_full.trained.has_value());
    CHECK(enc_full.metrics.phase_seconds.at("train") >
          10.0 * plain.metrics.phase_seconds.at("train"));

    // same-seed reruns reproduce everything but the wall clock
    ExperimentArtifacts again = run_experiment(base, ds);
    CHECK(again.metrics.misclassification == enc_full.metrics.misclassification);
    CHECK((again.theta - enc_full.theta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trained models persist and classify after reload") {
    Dataset ds = synthetic_numeric(40, 4, 84);
    ExperimentConfig config;
    config.mode = ExperimentMode::rado_enc_full;
    config.peers = 2;
    config.rados_per_peer = 3;
    config.key_bits = 256;
    config.ns_iterations = 10;
    config.seed = 3;
    ExperimentArtifacts result = run_experiment(config, ds);
    REQUIRE(result.trained.has_value());

    auto dir = temp_file("secrado_model_dir");
    std::filesystem::remove_all(dir);
    save_model(dir, *result.trained, result.theta, result.metrics);

    for (const char* file :
         {"theta.csv", "theta.json", "public.key", "secret.key", "theta.enc", "surrogate.enc",
          "model.json", "metrics.json", "transcript.jsonl", "theta_p0.enc", "theta_p1.enc"})
        CHECK(std::filesystem::exists(dir / file));

    TrainResult loaded = load_model(dir);
    CHECK(loaded.keys.pk.n == result.trained->keys.pk.n);
    CHECK(loaded.owner == result.trained->owner);
    attach_classify_engine(loaded, 99);

    SecureRng rng(85);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd x(4);
        for (int i = 0; i < 4; ++i) x[i] = rng.uniform01() * 2 - 1;
        if (std::abs(result.theta.dot(x)) <= 1e-6) continue;
        ClassifyOutcome outcome = run_classify(loaded, 0, x, ClassifyMode::partitioned);
        CHECK(outcome.label == predict(result.theta, x));
    }

    std::filesystem::remove_all(dir);
}

TEST_CASE("bench table renders one row per grid entry") {
    Dataset ds = synthetic_numeric(40, 3, 86);
    ExperimentConfig fast;
    fast.mode = ExperimentMode::rado_plain;
    fast.peers = 2;
    fast.rados_per_peer = 3;
    ExperimentConfig logistic = fast;
    logistic.mode = ExperimentMode::baseline_logistic;
    std::string table = bench_table({fast, logistic}, ds);
    CHECK(table.find("rado_plain") != std::string::npos);
    CHECK(table.find("baseline_logistic") != std::string::npos);
    CHECK(table.find("key_bits") != std::string::npos);
}

TEST_CASE("text corpora train through the same pipeline") {
    SecureRng rng(87);
    std::vector<std::string> pos = {"alpha", "bravo", "charlie", "delta"};
    std::vector<std::string> neg = {"xray", "yankee", "zulu", "whiskey"};
    LabeledCorpus c0 = synth_corpus(pos, neg, 15, 0.1, rng);
    LabeledCorpus c1 = synth_corpus(pos, neg, 15, 0.1, rng);
    Dictionary dict = build_dictionary({c0, c1});
    std::vector<PeerInput> peers = featurize_corpora({c0, c1}, dict);

    TrainConfig config;
    config.key_bits = 256;
    config.rados_per_peer = 8;
    config.ns_iterations = 10;
    config.seed = 4;
    Eigen::VectorXd theta = plain_train_theta(peers, config);

    // planted separation: the plain rado solve classifies the corpus
    int wrong = 0, total = 0;
    for (const PeerInput& peer : peers)
        for (int i = 0; i < peer.data.m(); ++i) {
            wrong += predict(theta, peer.data.X.row(i).transpose()) !=
                     static_cast<int>(peer.data.y[i]);
            ++total;
        }
    CHECK(static_cast<double>(wrong) / total <= 0.05);
}
