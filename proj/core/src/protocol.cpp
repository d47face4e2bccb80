#include "secrado/protocol.hpp"

#include <chrono>
#include <optional>

namespace secrado {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string peer_name(int id) {
    return "peer" + std::to_string(id);
}

constexpr const char* kCoordinator = "coordinator";

/// The coordinator: sole key holder, masked-step service, collector of
/// feature-presence vectors and the final classification sign.
class CoordinatorNode {
  public:
    CoordinatorNode(KeyPair keys, FixedPointCodec codec, SecureRng rng, AuditLog* audit)
        : keys_(std::move(keys)),
          codec_(codec),
          rng_(std::move(rng)),
          audit_(audit),
          service_(kCoordinator, keys_.sk, codec_, rng_.derive("keyholder"), audit) {}

    const KeyPair& keys() const { return keys_; }
    const FixedPointCodec& codec() const { return codec_; }
    SecureRng& rng() { return rng_; }
    KeyHolderService& service() { return service_; }

    const std::vector<std::vector<bool>>& presence() const { return presence_; }

    Bus::Handler handler() {
        return [this](const std::string& step, const std::vector<uint8_t>& payload) {
            return handle(step, payload);
        };
    }

  private:
    KeyPair keys_;
    FixedPointCodec codec_;
    SecureRng rng_;
    AuditLog* audit_;
    KeyHolderService service_;
    std::vector<std::vector<bool>> presence_;

    std::vector<uint8_t> handle(const std::string& step, const std::vector<uint8_t>& payload) {
        if (step == "elemprod.mask" || step == "rescale.mask" || step == "recip.mask")
            return service_.handler()(step, payload);
        if (step == "features") {
            wire::Reader r(payload);
            uint32_t count = r.u32();
            std::vector<bool> f(count);
            for (uint32_t i = 0; i < count; ++i) f[i] = r.u8() != 0;
            presence_.push_back(std::move(f));
            audit_->record(kCoordinator, "features", ObservationKind::metadata,
                           "feature-presence vector (" + std::to_string(count) + " bits)");
            return {};
        }
        if (step == "classify.alpha") {
            wire::Reader r(payload);
            Ciphertext alpha_ct = r.ciphertext();
            double alpha = codec_.decode(decrypt(keys_.sk, alpha_ct), alpha_ct.scale);
            audit_->record(kCoordinator, "classify.alpha", ObservationKind::final_out,
                           "blind-summed classification score");
            std::vector<uint8_t> reply;
            wire::put_u8(reply, alpha >= 0.0 ? 1 : 0);
            // the decoded magnitude stays at the coordinator; only the
            // sign travels back
            last_alpha_ = alpha;
            return reply;
        }
        throw std::runtime_error("coordinator: unexpected step " + step);
    }

  public:
    std::optional<double> last_alpha_;
};

/// One simulated peer with its intermediary sub-role: it holds the
/// coordinator-key ciphertexts of its own data and runs the blinded
/// exchanges.  Peers never decrypt anything (they have no key).
class PeerNode {
  public:
    // `input` may be null for classify-only stubs rebuilt from a saved
    // model; training actions then refuse to run.
    PeerNode(int id, const PeerInput* input, SecureRng rng, unsigned fraction_bits,
             unsigned magnitude_bits)
        : id_(id),
          input_(input),
          rng_(std::move(rng)),
          fraction_bits_(fraction_bits),
          magnitude_bits_(magnitude_bits) {}

    std::string name() const { return peer_name(id_); }
    int id() const { return id_; }

    void bind(Bus& bus) {
        bus_ = &bus;
        bus.register_party(name(), [this](const std::string& step,
                                          const std::vector<uint8_t>& payload) {
            return handle(step, payload);
        });
    }

    void set_phase_tag(const std::string& tag) {
        phase_tag_ = tag;
        if (channel_) channel_->protocol = tag;
    }

    SecureChannel& channel() { return *channel_; }

    void send_features() {
        if (!input_) throw std::runtime_error(name() + ": no local data bound");
        std::vector<uint8_t> payload;
        wire::put_u32(payload, static_cast<uint32_t>(input_->presence.size()));
        for (bool b : input_->presence) wire::put_u8(payload, b ? 1 : 0);
        bus_->post(name(), kCoordinator, phase_tag_, "features", std::move(payload));
    }

    void build_rados(const std::vector<Signature>& signatures, bool encrypt_sigma) {
        if (!input_) throw std::runtime_error(name() + ": no local data bound");
        auto [enc_x, enc_y] = encrypt_dataset(channel_->pk, *channel_->codec, input_->data, rng_);
        enc_rados_.clear();
        for (const Signature& sigma : signatures) {
            CipherVector pi = encrypted_rado(*channel_, enc_x, enc_y, sigma, encrypt_sigma);
            if (pi_fold_.values.empty())
                pi_fold_ = pi;
            else
                pi_fold_ = hom_add(channel_->pk, pi_fold_, pi);
            enc_rados_.push_back(std::move(pi));
        }
        pending_["pi"] = pi_fold_;
    }

    /// u_i = pi_i (+) (-1)(x)b, outer products, folded; one rescale of
    /// the fold keeps the rounding error at a single half-ulp.
    void build_outer_products() {
        if (!b_) throw std::runtime_error(name() + ": b not received");
        CipherVector neg_b = hom_neg(channel_->pk, *b_);
        CipherMatrix fold;
        for (const CipherVector& pi : enc_rados_) {
            CipherVector u = hom_add(channel_->pk, pi, neg_b);
            CipherMatrix outer = sec_outer_prod(*channel_, u);
            fold = fold.values.empty() ? std::move(outer)
                                       : hom_add(channel_->pk, fold, outer);
        }
        fold = rescale(*channel_, fold, channel_->codec->fraction_bits());
        CipherVector flat;
        flat.scale = fold.scale;
        flat.values = std::move(fold.values);
        pending_["B"] = std::move(flat);
    }

    void set_pending(const std::string& tag, CipherVector value) {
        pending_[tag] = std::move(value);
    }

    const CipherVector& theta_slice() const {
        if (theta_p_.values.empty()) throw std::runtime_error(name() + ": no classifier slice");
        return theta_p_;
    }
    const CipherVector& pending_value(const std::string& tag) const {
        auto it = pending_.find(tag);
        if (it == pending_.end())
            throw std::runtime_error(name() + ": no pending value for tag " + tag);
        return it->second;
    }
    const CipherVector& surrogate_slice() const { return surrogate_slice_; }
    int rado_count() const { return static_cast<int>(enc_rados_.size()); }
    SecureRng& rng() { return rng_; }

  private:
    int id_;
    const PeerInput* input_;
    SecureRng rng_;
    unsigned fraction_bits_;
    unsigned magnitude_bits_;
    Bus* bus_ = nullptr;
    std::string phase_tag_ = "train.keygen";
    std::optional<FixedPointCodec> codec_;
    std::optional<SecureChannel> channel_;

    std::vector<CipherVector> enc_rados_;
    CipherVector pi_fold_;
    std::optional<CipherVector> b_;
    CipherVector theta_p_;
    CipherVector surrogate_slice_;
    std::map<std::string, CipherVector> pending_;

    std::vector<uint8_t> handle(const std::string& step, const std::vector<uint8_t>& payload) {
        if (step == "pubkey") {
            PublicKey pk = wire::decode_public_key(payload);
            codec_.emplace(fraction_bits_, pk.n, magnitude_bits_);
            channel_ = SecureChannel{bus_, name(), kCoordinator, phase_tag_,
                                     std::move(pk), &*codec_, &rng_};
            return {};
        }
        if (step == "b.broadcast") {
            wire::Reader r(payload);
            b_ = r.cipher_vector();
            return {};
        }
        if (step == "theta.slice") {
            wire::Reader r(payload);
            theta_p_ = r.cipher_vector();
            return {};
        }
        if (step == "surrogate.slice") {
            wire::Reader r(payload);
            surrogate_slice_ = r.cipher_vector();
            return {};
        }
        if (step == "surrogate.fetch") {
            wire::Reader r(payload);
            uint32_t index = r.u32();
            if (index >= enc_rados_.size())
                throw std::runtime_error(name() + ": surrogate index out of range");
            CipherVector out =
                rescale(*channel_, enc_rados_[index], channel_->codec->fraction_bits());
            std::vector<uint8_t> reply;
            wire::put_cipher_vector(reply, out);
            return reply;
        }
        if (step == "smadd.forward") {
            SmAddHop hop = decode_smadd_payload(payload);
            auto it = pending_.find(hop.tag);
            if (it == pending_.end())
                throw std::runtime_error(name() + ": no pending value for smadd tag " + hop.tag);
            return smadd_forward(*bus_, name(), phase_tag_, channel_->pk, it->second, payload);
        }
        throw std::runtime_error(name() + ": unexpected step " + step);
    }
};

struct EngineState {
    Bus bus;
    std::unique_ptr<CoordinatorNode> coordinator;
    std::vector<std::unique_ptr<PeerNode>> peers;
    std::vector<PeerInput> inputs;

    explicit EngineState(int64_t budget) : bus(budget) {}
};

EngineState& engine_of(const TrainResult& result) {
    if (!result.engine) throw std::runtime_error("protocol: training engine no longer available");
    return *static_cast<EngineState*>(result.engine.get());
}

int total_rados(const std::vector<std::vector<Signature>>& sigs) {
    int k = 0;
    for (const auto& s : sigs) k += static_cast<int>(s.size());
    return k;
}

}  // namespace

const char* to_string(TrainPhase phase) {
    switch (phase) {
        case TrainPhase::keygen: return "keygen";
        case TrainPhase::featurize: return "featurize";
        case TrainPhase::rado: return "rado";
        case TrainPhase::mean: return "mean";
        case TrainPhase::variance: return "variance";
        case TrainPhase::invert: return "invert";
        case TrainPhase::distribute: return "distribute";
        case TrainPhase::done: return "done";
    }
    return "?";
}

int phase_rank(TrainPhase phase) {
    return static_cast<int>(phase);
}

std::optional<TrainPhase> phase_of_protocol_tag(const std::string& tag) {
    if (!tag.starts_with("train.")) return std::nullopt;
    std::string suffix = tag.substr(6);
    for (TrainPhase p : {TrainPhase::keygen, TrainPhase::featurize, TrainPhase::rado,
                         TrainPhase::mean, TrainPhase::variance, TrainPhase::invert,
                         TrainPhase::distribute}) {
        if (suffix == to_string(p)) return p;
    }
    return std::nullopt;
}

std::vector<PeerInput> partition_dataset(const Dataset& ds, int peers, uint64_t seed) {
    ds.validate();
    if (peers < 1) throw std::invalid_argument("partition_dataset: need at least one peer");
    if (peers > ds.m()) throw std::invalid_argument("partition_dataset: more peers than examples");
    SecureRng rng(seed);
    std::vector<int> order(static_cast<size_t>(ds.m()));
    for (int i = 0; i < ds.m(); ++i) order[static_cast<size_t>(i)] = i;
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_u64() % i]);

    std::vector<PeerInput> out(static_cast<size_t>(peers));
    std::vector<std::vector<int>> shards(static_cast<size_t>(peers));
    for (size_t i = 0; i < order.size(); ++i) shards[i % static_cast<size_t>(peers)].push_back(order[i]);
    for (int p = 0; p < peers; ++p) {
        out[static_cast<size_t>(p)].data = ds.subset(shards[static_cast<size_t>(p)]);
        out[static_cast<size_t>(p)].presence.assign(static_cast<size_t>(ds.d()), true);
    }
    return out;
}

std::vector<PeerInput> featurize_corpora(const std::vector<LabeledCorpus>& corpora,
                                         const Dictionary& dict) {
    std::vector<PeerInput> out;
    out.reserve(corpora.size());
    for (const LabeledCorpus& corpus : corpora) {
        TextFeatures feats = local_text(dict, corpus);
        out.push_back(PeerInput{std::move(feats.data), std::move(feats.presence)});
    }
    return out;
}

std::vector<std::vector<Signature>> protocol_signatures(const std::vector<PeerInput>& peers,
                                                        const TrainConfig& config) {
    std::vector<std::vector<Signature>> out;
    out.reserve(peers.size());
    SecureRng master(config.seed);
    for (size_t p = 0; p < peers.size(); ++p) {
        SecureRng rng = master.derive(peer_name(static_cast<int>(p)) + ".signatures");
        out.push_back(sample_signatures(peers[p].data.m(), config.rados_per_peer, rng));
    }
    return out;
}

TrainResult run_train(const std::vector<PeerInput>& peers_in, const TrainConfig& config) {
    if (peers_in.empty()) throw std::invalid_argument("run_train: no peers");
    int d = peers_in.front().data.d();
    for (const PeerInput& p : peers_in) {
        p.data.validate();
        if (p.data.d() != d || static_cast<int>(p.presence.size()) != d)
            throw std::invalid_argument("run_train: peers disagree on the global dimension");
    }
    int num_peers = static_cast<int>(peers_in.size());

    auto engine = std::make_shared<EngineState>(config.message_budget);
    engine->inputs = peers_in;

    TrainResult result;
    result.fraction_bits = config.fraction_bits;
    result.magnitude_bits = config.magnitude_bits;
    SecureRng master(config.seed);

    auto total_start = Clock::now();
    auto phase_start = Clock::now();
    auto close_phase = [&](TrainPhase p) {
        result.phase_seconds[to_string(p)] = seconds_since(phase_start);
        phase_start = Clock::now();
    };

    // --- keygen ---------------------------------------------------------
    SecureRng coord_rng = master.derive(kCoordinator);
    KeyPair keys = keygen(config.key_bits, coord_rng);
    FixedPointCodec codec(config.fraction_bits, keys.pk.n, config.magnitude_bits);
    engine->coordinator = std::make_unique<CoordinatorNode>(
        keys, codec, std::move(coord_rng), &engine->bus.audit());
    engine->bus.register_party(kCoordinator, engine->coordinator->handler());

    for (int p = 0; p < num_peers; ++p) {
        engine->peers.push_back(std::make_unique<PeerNode>(
            p, &engine->inputs[static_cast<size_t>(p)], master.derive(peer_name(p)),
            config.fraction_bits, config.magnitude_bits));
        engine->peers.back()->bind(engine->bus);
    }
    for (auto& peer : engine->peers)
        engine->bus.post(kCoordinator, peer->name(), "train.keygen", "pubkey",
                         wire::encode_public_key(keys.pk));
    close_phase(TrainPhase::keygen);

    // --- featurize ------------------------------------------------------
    for (auto& peer : engine->peers) {
        peer->set_phase_tag("train.featurize");
        peer->send_features();
    }
    result.presence = engine->coordinator->presence();
    Regularizer gamma = Regularizer::from_feature_presence(result.presence, config.epsilon);
    result.gamma_diag = gamma.diagonal();
    close_phase(TrainPhase::featurize);

    // --- rado -----------------------------------------------------------
    std::vector<std::vector<Signature>> signatures = protocol_signatures(peers_in, config);
    for (int p = 0; p < num_peers; ++p) {
        engine->peers[static_cast<size_t>(p)]->set_phase_tag("train.rado");
        engine->peers[static_cast<size_t>(p)]->build_rados(signatures[static_cast<size_t>(p)],
                                                           config.encrypt_sigma);
    }
    close_phase(TrainPhase::rado);

    // --- mean (blind-summed b) -------------------------------------------
    for (auto& peer : engine->peers) peer->set_phase_tag("train.mean");
    std::vector<std::string> ring;
    for (auto& peer : engine->peers) ring.push_back(peer->name());
    unsigned f = config.fraction_bits;
    CipherVector b = sm_add(engine->bus, kCoordinator, keys.pk, engine->coordinator->rng(), ring,
                            "train.mean", "pi", d, f + 1);
    if (config.b_mean) {
        SecureChannel coord_channel{&engine->bus, kCoordinator, kCoordinator, "train.mean",
                                    keys.pk,      &engine->coordinator->codec(),
                                    &engine->coordinator->rng()};
        Bigint inv_count = codec.encode(1.0 / total_rados(signatures));
        CipherVector scaled;
        scaled.scale = b.scale + f;
        for (const Bigint& v : b.values)
            scaled.values.push_back(powmod(v, inv_count, keys.pk.n_squared));
        b = rescale(coord_channel, scaled, f + 1);
    }
    for (auto& peer : engine->peers) {
        std::vector<uint8_t> payload;
        wire::put_cipher_vector(payload, b);
        engine->bus.post(kCoordinator, peer->name(), "train.mean", "b.broadcast",
                         std::move(payload));
    }
    close_phase(TrainPhase::mean);

    // --- variance ---------------------------------------------------------
    for (auto& peer : engine->peers) {
        peer->set_phase_tag("train.variance");
        peer->build_outer_products();
    }
    CipherVector a_flat = sm_add(engine->bus, kCoordinator, keys.pk, engine->coordinator->rng(),
                                 ring, "train.variance", "B", d * d, f);
    close_phase(TrainPhase::variance);

    // --- invert -----------------------------------------------------------
    SecureChannel coord_channel{&engine->bus, kCoordinator, kCoordinator, "train.invert",
                                keys.pk,      &engine->coordinator->codec(),
                                &engine->coordinator->rng()};
    CipherMatrix a;
    a.rows = d;
    a.cols = d;
    a.values = std::move(a_flat.values);
    // the 1/2 factor of the gradient system rides the scale exponent
    a.scale = f + 1;
    CipherMatrix gamma_enc;
    gamma_enc.rows = d;
    gamma_enc.cols = d;
    gamma_enc.scale = f + 1;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Bigint value = i == j ? codec.encode_at(result.gamma_diag[i], f + 1) : Bigint(0);
            gamma_enc.values.push_back(
                encrypt(keys.pk, value, engine->coordinator->rng(), f + 1).value);
        }
    CipherMatrix system = hom_add(keys.pk, a, gamma_enc);
    CipherMatrix inverse = sec_inv(coord_channel, system, config.ns_iterations);

    CipherMatrix b_col;
    b_col.rows = d;
    b_col.cols = 1;
    b_col.scale = b.scale;
    b_col.values = b.values;
    CipherMatrix theta_col = rescale(
        coord_channel, sec_mat_prod(coord_channel, inverse, b_col), f);
    result.enc_theta.scale = theta_col.scale;
    result.enc_theta.values = std::move(theta_col.values);
    close_phase(TrainPhase::invert);

    // --- distribute ---------------------------------------------------------
    result.owner.assign(static_cast<size_t>(d), -1);
    for (int j = 0; j < d; ++j)
        for (int p = 0; p < num_peers; ++p)
            if (result.presence[static_cast<size_t>(p)][static_cast<size_t>(j)]) {
                result.owner[static_cast<size_t>(j)] = p;
                break;
            }
    for (int p = 0; p < num_peers; ++p) {
        engine->peers[static_cast<size_t>(p)]->set_phase_tag("train.distribute");
        LiftMap map;
        map.global_dim = d;
        for (int j = 0; j < d; ++j)
            if (result.presence[static_cast<size_t>(p)][static_cast<size_t>(j)])
                map.positions.push_back(j);
        map.local_dim = static_cast<int>(map.positions.size());
        CipherVector slice;
        slice.scale = result.enc_theta.scale;
        for (int j : map.positions)
            slice.values.push_back(result.enc_theta.values[static_cast<size_t>(j)]);
        std::vector<uint8_t> payload;
        wire::put_cipher_vector(payload, slice);
        engine->bus.post(kCoordinator, peer_name(p), "train.distribute", "theta.slice",
                         std::move(payload));
        result.enc_theta_p.push_back(std::move(slice));
        result.peer_maps.push_back(std::move(map));
    }

    // retain one training rado, encrypted, as the classify-time surrogate
    SecureRng& crng = engine->coordinator->rng();
    result.surrogate_peer = static_cast<int>(crng.next_u64() % static_cast<uint64_t>(num_peers));
    PeerNode& source = *engine->peers[static_cast<size_t>(result.surrogate_peer)];
    result.surrogate_index =
        static_cast<int>(crng.next_u64() % static_cast<uint64_t>(source.rado_count()));
    std::vector<uint8_t> fetch;
    wire::put_u32(fetch, static_cast<uint32_t>(result.surrogate_index));
    std::vector<uint8_t> reply = engine->bus.request(kCoordinator, source.name(),
                                                     "train.distribute", "surrogate.fetch", fetch);
    wire::Reader rd(reply);
    result.enc_surrogate_rado = rd.cipher_vector();
    engine->bus.audit().record(kCoordinator, "surrogate.provenance", ObservationKind::metadata,
                               "retained encrypted rado " + std::to_string(result.surrogate_index) +
                                   " of " + source.name());
    close_phase(TrainPhase::distribute);

    result.keys = keys;
    result.phase_seconds["total"] = seconds_since(total_start);
    result.bus = std::shared_ptr<Bus>(engine, &engine->bus);
    result.engine = engine;
    return result;
}

Eigen::VectorXd plain_train_theta(const std::vector<PeerInput>& peers, const TrainConfig& config) {
    if (peers.empty()) throw std::invalid_argument("plain_train_theta: no peers");
    int d = peers.front().data.d();
    std::vector<std::vector<Signature>> signatures = protocol_signatures(peers, config);

    std::vector<std::vector<Rado>> rados(peers.size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    int k_total = 0;
    for (size_t p = 0; p < peers.size(); ++p) {
        for (const Signature& sigma : signatures[p]) {
            Rado r = make_rado(peers[p].data, sigma);
            b += r.pi;
            rados[p].push_back(std::move(r));
            ++k_total;
        }
    }
    if (config.b_mean) b /= static_cast<double>(k_total);

    std::vector<std::vector<bool>> presence;
    for (const PeerInput& p : peers) presence.push_back(p.presence);
    Regularizer gamma = Regularizer::from_feature_presence(presence, config.epsilon);

    std::vector<PeerStats> stats;
    stats.reserve(peers.size());
    for (const auto& peer_rados : rados) stats.push_back(peer_stats(peer_rados, b));
    return derisked_theta(stats, gamma.diagonal());
}

Eigen::VectorXd decrypt_model(TrainResult& result) {
    FixedPointCodec codec(result.fraction_bits, result.keys.pk.n, result.magnitude_bits);
    Eigen::VectorXd theta = decrypt_vector(result.keys.sk, codec, result.enc_theta);
    result.bus->audit().record(kCoordinator, "model.decrypt", ObservationKind::aggregate,
                               "classifier theta (blind-summed, aggregated product)");
    return theta;
}

ClassifyOutcome run_classify(TrainResult& model, int querying_peer,
                             const Eigen::VectorXd& x_global, ClassifyMode mode) {
    EngineState& engine = engine_of(model);
    int num_peers = static_cast<int>(engine.peers.size());
    if (querying_peer < 0 || querying_peer >= num_peers)
        throw std::invalid_argument("run_classify: no such peer");
    int d = static_cast<int>(x_global.size());
    if (d != static_cast<int>(model.owner.size()))
        throw std::invalid_argument("run_classify: feature dimension mismatch");
    const FixedPointCodec& codec = engine.coordinator->codec();
    unsigned f = codec.fraction_bits();
    const PublicKey& pk = model.keys.pk;

    // owned slice of x in a peer's local coordinates: zero where another
    // peer owns the coordinate, so shared features are counted once
    auto owned_local_x = [&](int p) {
        const LiftMap& map = model.peer_maps[static_cast<size_t>(p)];
        Eigen::VectorXd x_local = Eigen::VectorXd::Zero(map.local_dim);
        for (int i = 0; i < map.local_dim; ++i) {
            int j = map.positions[static_cast<size_t>(i)];
            if (model.owner[static_cast<size_t>(j)] == p) x_local[i] = x_global[j];
        }
        return x_local;
    };

    for (auto& peer : engine.peers) peer->set_phase_tag("classify.local");

    if (mode == ClassifyMode::rado_surrogate) {
        // coordinator hands every remote peer its owned slice of the
        // retained rado
        for (int q = 0; q < num_peers; ++q) {
            if (q == querying_peer) continue;
            const LiftMap& map = model.peer_maps[static_cast<size_t>(q)];
            CipherVector slice;
            slice.scale = model.enc_surrogate_rado.scale;
            for (int i = 0; i < map.local_dim; ++i) {
                int j = map.positions[static_cast<size_t>(i)];
                slice.values.push_back(model.owner[static_cast<size_t>(j)] == q
                                           ? model.enc_surrogate_rado.values[static_cast<size_t>(j)]
                                           : encrypt_deterministic(pk, 0, slice.scale).value);
            }
            std::vector<uint8_t> payload;
            wire::put_cipher_vector(payload, slice);
            engine.bus.post(kCoordinator, peer_name(q), "classify.local", "surrogate.slice",
                            std::move(payload));
        }
    }

    // every peer computes its local score ct(alpha_q) at scale 2f
    for (int q = 0; q < num_peers; ++q) {
        PeerNode& peer = *engine.peers[static_cast<size_t>(q)];
        const CipherVector& theta_q = peer.theta_slice();
        Ciphertext alpha;
        if (mode == ClassifyMode::partitioned || q == querying_peer) {
            alpha = local_inner_prod(pk, codec, owned_local_x(q), theta_q);
        } else {
            peer.set_phase_tag("classify.remote");
            alpha = sec_inner_prod(peer.channel(), peer.surrogate_slice(), theta_q);
            peer.set_phase_tag("classify.local");
        }
        CipherVector pending;
        pending.scale = alpha.scale;
        pending.values.push_back(alpha.value);
        peer.set_pending("alpha", std::move(pending));
    }

    // blind ring sum seeded by the querying peer over the other peers,
    // then its own term, then the coordinator reveals only the sign
    PeerNode& p_node = *engine.peers[static_cast<size_t>(querying_peer)];
    std::vector<std::string> ring;
    for (int q = 0; q < num_peers; ++q)
        if (q != querying_peer) ring.push_back(peer_name(q));

    Ciphertext own = p_node.pending_value("alpha").at(0);
    Ciphertext alpha_total = own;
    if (!ring.empty()) {
        CipherVector total = sm_add(engine.bus, p_node.name(), pk, p_node.rng(), ring,
                                    "classify.sum", "alpha", 1, 2 * f);
        alpha_total = hom_add(pk, total.at(0), own);
    }

    std::vector<uint8_t> payload;
    wire::put_ciphertext(payload, alpha_total);
    std::vector<uint8_t> reply = engine.bus.request(p_node.name(), kCoordinator, "classify.sum",
                                                    "classify.alpha", std::move(payload));
    wire::Reader rd(reply);
    ClassifyOutcome outcome;
    outcome.label = rd.u8() == 1 ? 1 : -1;
    outcome.alpha = engine.coordinator->last_alpha_.value_or(0.0);
    return outcome;
}

AuditReport audit_run(const TrainResult& result) {
    AuditReport report;
    const AuditLog& audit = result.bus->audit();
    for (const AuditLog::Event& e : audit.events()) {
        bool is_peer = e.party.rfind("peer", 0) == 0;
        if (is_peer) {
            if (e.kind != ObservationKind::metadata) {
                report.ok = false;
                ++report.peer_decrypt_events;
                report.violations.push_back("peer observation: " + e.party + " " + e.step);
            }
            continue;
        }
        if (e.party != kCoordinator) continue;
        switch (e.kind) {
            case ObservationKind::masked:
                ++report.coordinator_masked_events;
                if (e.step != "elemprod.mask" && e.step != "rescale.mask" &&
                    e.step != "recip.mask") {
                    report.ok = false;
                    report.violations.push_back("unexpected masked observation at " + e.step);
                }
                break;
            case ObservationKind::aggregate:
            case ObservationKind::final_out:
                ++report.coordinator_aggregate_events;
                if (e.step != "model.decrypt" && e.step != "classify.alpha") {
                    report.ok = false;
                    report.violations.push_back("unexpected aggregate observation at " + e.step);
                }
                break;
            case ObservationKind::metadata:
                break;
        }
    }
    return report;
}

void attach_classify_engine(TrainResult& model, uint64_t seed, int64_t message_budget) {
    if (model.enc_theta_p.empty())
        throw std::invalid_argument("attach_classify_engine: model has no classifier slices");
    auto engine = std::make_shared<EngineState>(message_budget);
    SecureRng master(seed);
    FixedPointCodec codec(model.fraction_bits, model.keys.pk.n, model.magnitude_bits);
    engine->coordinator = std::make_unique<CoordinatorNode>(
        model.keys, codec, master.derive(kCoordinator), &engine->bus.audit());
    engine->bus.register_party(kCoordinator, engine->coordinator->handler());

    int num_peers = static_cast<int>(model.enc_theta_p.size());
    for (int p = 0; p < num_peers; ++p) {
        engine->peers.push_back(std::make_unique<PeerNode>(p, nullptr, master.derive(peer_name(p)),
                                                           model.fraction_bits,
                                                           model.magnitude_bits));
        engine->peers.back()->bind(engine->bus);
        engine->bus.post(kCoordinator, peer_name(p), "classify.setup", "pubkey",
                         wire::encode_public_key(model.keys.pk));
        std::vector<uint8_t> slice;
        wire::put_cipher_vector(slice, model.enc_theta_p[static_cast<size_t>(p)]);
        engine->bus.post(kCoordinator, peer_name(p), "classify.setup", "theta.slice",
                         std::move(slice));
    }
    model.bus = std::shared_ptr<Bus>(engine, &engine->bus);
    model.engine = engine;
}

bool phases_monotone(const std::vector<ProtocolMessage>& transcript) {
    int rank = 0;
    for (const ProtocolMessage& msg : transcript) {
        std::optional<TrainPhase> phase = phase_of_protocol_tag(msg.protocol);
        if (!phase) continue;
        int r = phase_rank(*phase);
        if (r < rank) return false;
        rank = r;
    }
    return true;
}

}  // namespace secrado
