#pragma once

#include <map>
#include <memory>

#include "secrado/enc_rado.hpp"
#include "secrado/learners.hpp"
#include "secrado/textfeat.hpp"

namespace secrado {

struct TrainConfig {
    unsigned key_bits = 1024;
    unsigned fraction_bits = 32;
    unsigned magnitude_bits = 48;
    double epsilon = 1e-3;
    int ns_iterations = 32;
    int rados_per_peer = 25;
    uint64_t seed = 0;
    bool b_mean = false;        // divide the blind sum b by the rado count
    bool encrypt_sigma = true;  // Protocol 1 with encrypted signatures
    int64_t message_budget = 1000000;
};

enum class TrainPhase { keygen, featurize, rado, mean, variance, invert, distribute, done };
const char* to_string(TrainPhase);
int phase_rank(TrainPhase);

/// Maps a transcript protocol tag ("train.rado", ...) to its phase;
/// returns nothing for non-train traffic.
std::optional<TrainPhase> phase_of_protocol_tag(const std::string& tag);

/// One peer's contribution to a training run: a local dataset already
/// expressed over the global feature space, plus which global
/// coordinates the peer actually holds.
struct PeerInput {
    Dataset data;
    std::vector<bool> presence;
};

/// Horizontal shards of one dataset, every feature present at every
/// peer.
std::vector<PeerInput> partition_dataset(const Dataset& ds, int peers, uint64_t seed);

/// Text path: one PeerInput per corpus over the shared dictionary.
std::vector<PeerInput> featurize_corpora(const std::vector<LabeledCorpus>& corpora,
                                         const Dictionary& dict);

/// The signatures each peer samples, one list per peer, derived
/// deterministically from the run seed.  The plain and encrypted
/// pipelines share these, which is what makes paired runs comparable.
std::vector<std::vector<Signature>> protocol_signatures(const std::vector<PeerInput>& peers,
                                                        const TrainConfig& config);

/// Everything the coordinator and peers hold after Protocol 2.
struct TrainResult {
    KeyPair keys;  // coordinator key pair (the sole key holder)
    CipherVector enc_theta;
    std::vector<CipherVector> enc_theta_p;
    std::vector<LiftMap> peer_maps;  // global positions of each theta_p entry
    std::vector<std::vector<bool>> presence;
    std::vector<int> owner;  // per coordinate: lowest peer holding it, -1 if none
    Eigen::VectorXd gamma_diag;
    CipherVector enc_surrogate_rado;  // "common extra rado" at the codec scale
    int surrogate_peer = -1;
    int surrogate_index = -1;
    unsigned fraction_bits = 32;
    unsigned magnitude_bits = 48;
    std::map<std::string, double> phase_seconds;
    std::shared_ptr<Bus> bus;       // transcript + audit live here
    std::shared_ptr<void> engine;   // simulated parties, used by run_classify
};

/// Protocol 2: coordinator keygen and broadcast, per-peer featurization
/// and encrypted rados, blind-summed b, centred outer products,
/// blind-summed A, encrypted inversion, theta, per-peer slices.
TrainResult run_train(const std::vector<PeerInput>& peers, const TrainConfig& config);

/// Plaintext twin of run_train on identical signatures: the de-risked
/// solve over per-peer statistics.  Oracle for encrypted/plain parity
/// and the "plain rados" experiment rows.
Eigen::VectorXd plain_train_theta(const std::vector<PeerInput>& peers, const TrainConfig& config);

/// Coordinator-side decryption of the final classifier, recorded in the
/// audit log as an aggregate/final observation.
Eigen::VectorXd decrypt_model(TrainResult& result);

enum class ClassifyMode { partitioned, rado_surrogate };

struct ClassifyOutcome {
    int label = 0;
    double alpha = 0.0;  // the aggregate the coordinator signed
};

/// Protocol 3 against a completed training run.  In partitioned mode
/// every peer holds its slice of the same entity's features (the
/// engine slices `x_global` by coordinate ownership); in rado_surrogate
/// mode remote peers answer with the retained extra rado instead.
ClassifyOutcome run_classify(TrainResult& model, int querying_peer,
                             const Eigen::VectorXd& x_global, ClassifyMode mode);

/// Rebuilds a classify-capable party set around a deserialized model:
/// fresh bus, coordinator from the stored keys, stub peers that receive
/// their classifier slices over it.  Training-only state stays absent.
void attach_classify_engine(TrainResult& model, uint64_t seed, int64_t message_budget = 1000000);

/// Audit verdict over a completed run's observation log.
struct AuditReport {
    bool ok = true;
    int coordinator_masked_events = 0;
    int coordinator_aggregate_events = 0;
    int peer_decrypt_events = 0;
    std::vector<std::string> violations;
};
AuditReport audit_run(const TrainResult& result);

/// Phase monotonicity over a transcript: no message tagged with a later
/// phase may precede one tagged with an earlier phase.
bool phases_monotone(const std::vector<ProtocolMessage>& transcript);

}  // namespace secrado
