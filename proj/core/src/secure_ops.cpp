#include "secrado/secure_ops.hpp"

#include <cmath>

namespace secrado {

namespace {

// Statistical hiding margin for additively masked rescale values.
constexpr unsigned kStatSecurityBits = 40;

// Multiplicative blind width for the scalar reciprocal.
constexpr unsigned kRecipMaskBits = 16;

std::string ring_summary(size_t count) {
    return std::to_string(count) + " uniformly masked ring value(s)";
}

}  // namespace

KeyHolderService::KeyHolderService(std::string name, SecretKey sk, FixedPointCodec codec,
                                   SecureRng rng, AuditLog* audit)
    : name_(std::move(name)),
      sk_(std::move(sk)),
      codec_(std::move(codec)),
      rng_(std::move(rng)),
      audit_(audit) {}

Bus::Handler KeyHolderService::handler() {
    return [this](const std::string& step, const std::vector<uint8_t>& payload) {
        return handle(step, payload);
    };
}

std::vector<uint8_t> KeyHolderService::handle(const std::string& step,
                                              const std::vector<uint8_t>& payload) {
    if (step == "elemprod.mask") return handle_elemprod(payload);
    if (step == "rescale.mask") return handle_rescale(payload);
    if (step == "recip.mask") return handle_recip(payload);
    throw std::runtime_error("key holder: unexpected step " + step);
}

std::vector<uint8_t> KeyHolderService::handle_elemprod(const std::vector<uint8_t>& payload) {
    wire::Reader r(payload);
    CipherVector v1 = r.cipher_vector();
    CipherVector v2 = r.cipher_vector();
    if (v1.size() != v2.size()) throw std::runtime_error("elemprod: length mismatch");

    const Bigint& n = sk_.pk.n;
    CipherVector out;
    out.scale = v1.scale + v2.scale;
    out.values.reserve(v1.values.size());
    for (int i = 0; i < v1.size(); ++i) {
        Bigint a = decrypt(sk_, v1.at(i));
        Bigint b = decrypt(sk_, v2.at(i));
        observed_.push_back(a);
        observed_.push_back(b);
        out.values.push_back(encrypt(sk_.pk, a * b % n, rng_, out.scale).value);
    }
    if (audit_)
        audit_->record(name_, "elemprod.mask", ObservationKind::masked,
                       ring_summary(2 * v1.values.size()));
    std::vector<uint8_t> reply;
    wire::put_cipher_vector(reply, out);
    return reply;
}

std::vector<uint8_t> KeyHolderService::handle_rescale(const std::vector<uint8_t>& payload) {
    wire::Reader r(payload);
    uint32_t from = r.u8();
    uint32_t to = r.u8();
    CipherVector masked = r.cipher_vector();
    if (from <= to) throw std::runtime_error("rescale: from_scale must exceed to_scale");
    unsigned delta = from - to;

    CipherVector out;
    out.scale = to;
    out.values.reserve(masked.values.size());
    Bigint half = pow2(delta - 1);
    for (int i = 0; i < masked.size(); ++i) {
        // The mask construction keeps the plaintext a moderate positive
        // integer (no ring wrap), so an arithmetic shift with
        // round-half-up is exact on the unmasked-equivalent value.
        Bigint y = decrypt(sk_, masked.at(i));
        Bigint shifted = (y + half) >> delta;
        out.values.push_back(encrypt(sk_.pk, shifted % sk_.pk.n, rng_, to).value);
    }
    if (audit_)
        audit_->record(name_, "rescale.mask", ObservationKind::masked,
                       ring_summary(masked.values.size()));
    std::vector<uint8_t> reply;
    wire::put_cipher_vector(reply, out);
    return reply;
}

std::vector<uint8_t> KeyHolderService::handle_recip(const std::vector<uint8_t>& payload) {
    wire::Reader r(payload);
    Ciphertext masked = r.ciphertext();
    Bigint w = decrypt(sk_, masked);
    if (w == 0 || 2 * w >= sk_.pk.n)
        throw std::runtime_error("recip: masked scalar not a positive working value");
    if (audit_)
        audit_->record(name_, "recip.mask", ObservationKind::masked,
                       "1 multiplicatively masked positive scalar");
    // w encodes s*t at `masked.scale`; return round(2^(2f+scale)/w),
    // i.e. 1/(s*t) at scale 2f.
    unsigned f = codec_.fraction_bits();
    Bigint numerator = pow2(2 * f + masked.scale);
    Bigint rec = (numerator + w / 2) / w;
    Ciphertext out = encrypt(sk_.pk, rec % sk_.pk.n, rng_, 2 * f);
    std::vector<uint8_t> reply;
    wire::put_ciphertext(reply, out);
    return reply;
}

Ciphertext local_inner_prod(const PublicKey& pk, const FixedPointCodec& codec,
                            const Eigen::VectorXd& x, const CipherVector& enc_theta) {
    if (x.size() != enc_theta.size())
        throw std::invalid_argument("local_inner_prod: length mismatch");
    uint32_t out_scale = enc_theta.scale + codec.fraction_bits();
    Ciphertext acc = encrypt_deterministic(pk, 0, out_scale);
    for (int i = 0; i < enc_theta.size(); ++i) {
        Bigint coef = codec.encode(x[i]);
        Ciphertext term = hom_scalar_mul(pk, coef, enc_theta.at(i));
        term.scale = out_scale;  // plaintext scalar carried fixed-point scale f
        acc = hom_add(pk, acc, term);
    }
    return acc;
}

CipherVector sec_elem_prod(SecureChannel& ch, const CipherVector& a, const CipherVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sec_elem_prod: length mismatch");
    const PublicKey& pk = ch.pk;
    const Bigint& n = pk.n;
    const Bigint& n2 = pk.n_squared;

    // Fresh uniform masks; the additions below must be re-randomised
    // encryptions, otherwise the key holder could divide out a
    // ciphertext it produced itself in an earlier round and recover the
    // mask.
    std::vector<Bigint> r1(a.values.size()), r2(a.values.size());
    CipherVector m1, m2;
    m1.scale = a.scale;
    m2.scale = b.scale;
    m1.values.reserve(a.values.size());
    m2.values.reserve(a.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) {
        r1[i] = ch.rng->below(n);
        r2[i] = ch.rng->below(n);
        m1.values.push_back(a.values[i] * encrypt(pk, r1[i], *ch.rng).value % n2);
        m2.values.push_back(b.values[i] * encrypt(pk, r2[i], *ch.rng).value % n2);
    }

    std::vector<uint8_t> payload;
    wire::put_cipher_vector(payload, m1);
    wire::put_cipher_vector(payload, m2);
    std::vector<uint8_t> reply =
        ch.bus->request(ch.self, ch.key_holder, ch.protocol, "elemprod.mask", std::move(payload));
    wire::Reader rd(reply);
    CipherVector prod = rd.cipher_vector();
    if (prod.size() != a.size()) throw std::runtime_error("sec_elem_prod: bad reply length");

    // (x1+r1)(x2+r2) - r2(x1+r1) - r1(x2+r2) + r1*r2 = x1*x2
    CipherVector out;
    out.scale = a.scale + b.scale;
    out.values.reserve(a.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) {
        Bigint v = prod.values[i];
        v = v * powmod(m1.values[i], n - r2[i], n2) % n2;
        v = v * powmod(m2.values[i], n - r1[i], n2) % n2;
        v = v * (1 + (r1[i] * r2[i] % n) * n) % n2;
        out.values.push_back(v);
    }
    return out;
}

Ciphertext sec_inner_prod(SecureChannel& ch, const CipherVector& a, const CipherVector& b) {
    return hom_sum(ch.pk, sec_elem_prod(ch, a, b));
}

CipherMatrix sec_outer_prod(SecureChannel& ch, const CipherVector& u) {
    int d = u.size();
    CipherMatrix out;
    out.rows = d;
    out.cols = d;
    out.scale = 2 * u.scale;
    out.values.reserve(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        CipherVector repeated;
        repeated.scale = u.scale;
        repeated.values.assign(static_cast<size_t>(d), u.values[static_cast<size_t>(i)]);
        CipherVector row = sec_elem_prod(ch, repeated, u);
        for (Bigint& v : row.values) out.values.push_back(std::move(v));
    }
    return out;
}

CipherMatrix sec_mat_prod(SecureChannel& ch, const CipherMatrix& x, const CipherMatrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("sec_mat_prod: shapes not conformable");
    CipherMatrix out;
    out.rows = x.rows;
    out.cols = y.cols;
    out.scale = x.scale + y.scale;
    out.values.reserve(static_cast<size_t>(x.rows) * y.cols);
    for (int i = 0; i < x.rows; ++i) {
        CipherVector row = x.row(i);
        for (int j = 0; j < y.cols; ++j)
            out.values.push_back(sec_inner_prod(ch, row, y.col(j)).value);
    }
    return out;
}

CipherVector rescale(SecureChannel& ch, const CipherVector& v, uint32_t to_scale) {
    if (v.scale <= to_scale)
        throw std::invalid_argument("rescale: from_scale must exceed to_scale");
    unsigned delta = v.scale - to_scale;
    unsigned bound_bits = ch.codec->plaintext_bound_bits();
    if (delta > bound_bits) throw std::invalid_argument("rescale: shift exceeds working range");
    if (bound_bits + kStatSecurityBits + 2 > ch.pk.bits)
        throw std::invalid_argument("rescale: key too small for the statistical mask");

    const Bigint& n = ch.pk.n;
    const Bigint& n2 = ch.pk.n_squared;
    // offset 2^L recentres the signed value as positive; the mask is a
    // uniform multiple of 2^delta so the key holder's shift slides past
    // both.
    Bigint offset = pow2(bound_bits);
    std::vector<Bigint> unmask(v.values.size());
    CipherVector masked;
    masked.scale = v.scale;
    masked.values.reserve(v.values.size());
    for (size_t i = 0; i < v.values.size(); ++i) {
        Bigint u = ch.rng->bits(bound_bits + kStatSecurityBits - delta);
        Bigint mask = (offset + (u << delta)) % n;
        unmask[i] = (u + pow2(bound_bits - delta)) % n;
        masked.values.push_back(v.values[i] * encrypt(ch.pk, mask, *ch.rng).value % n2);
    }

    std::vector<uint8_t> payload;
    wire::put_u8(payload, static_cast<uint8_t>(v.scale));
    wire::put_u8(payload, static_cast<uint8_t>(to_scale));
    wire::put_cipher_vector(payload, masked);
    std::vector<uint8_t> reply =
        ch.bus->request(ch.self, ch.key_holder, ch.protocol, "rescale.mask", std::move(payload));
    wire::Reader rd(reply);
    CipherVector shifted = rd.cipher_vector();
    if (shifted.size() != v.size()) throw std::runtime_error("rescale: bad reply length");

    CipherVector out;
    out.scale = to_scale;
    out.values.reserve(v.values.size());
    for (size_t i = 0; i < v.values.size(); ++i) {
        Bigint neg = (n - unmask[i]) % n;
        out.values.push_back(shifted.values[i] * (1 + neg * n) % n2);
    }
    return out;
}

Ciphertext rescale(SecureChannel& ch, const Ciphertext& c, uint32_t to_scale) {
    CipherVector v;
    v.scale = c.scale;
    v.values.push_back(c.value);
    CipherVector out = rescale(ch, v, to_scale);
    return out.at(0);
}

CipherMatrix rescale(SecureChannel& ch, const CipherMatrix& m, uint32_t to_scale) {
    CipherVector flat;
    flat.scale = m.scale;
    flat.values = m.values;
    CipherVector out = rescale(ch, flat, to_scale);
    CipherMatrix res;
    res.rows = m.rows;
    res.cols = m.cols;
    res.scale = to_scale;
    res.values = std::move(out.values);
    return res;
}

Ciphertext sec_scalar_recip(SecureChannel& ch, const Ciphertext& t) {
    unsigned f = ch.codec->fraction_bits();
    Bigint s = pow2(kRecipMaskBits - 1) + ch.rng->bits(kRecipMaskBits - 1);
    Ciphertext masked = hom_scalar_mul(ch.pk, s, t);

    std::vector<uint8_t> payload;
    wire::put_ciphertext(payload, masked);
    std::vector<uint8_t> reply =
        ch.bus->request(ch.self, ch.key_holder, ch.protocol, "recip.mask", std::move(payload));
    wire::Reader rd(reply);
    Ciphertext rec = rd.ciphertext();  // ct(1/(s*t)) at scale 2f
    Ciphertext out = hom_scalar_mul(ch.pk, s, rec);
    return rescale(ch, out, f);
}

Eigen::MatrixXd newton_schulz_inverse(const Eigen::MatrixXd& a, int iterations) {
    if (a.rows() != a.cols()) throw std::invalid_argument("newton_schulz: matrix must be square");
    double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    double norminf = a.cwiseAbs().rowwise().sum().maxCoeff();
    return newton_schulz_inverse(a, iterations, a.transpose() / (norm1 * norminf));
}

Eigen::MatrixXd newton_schulz_inverse(const Eigen::MatrixXd& a, int iterations,
                                      Eigen::MatrixXd v0) {
    if (a.rows() != a.cols()) throw std::invalid_argument("newton_schulz: matrix must be square");
    Eigen::MatrixXd v = std::move(v0);
    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (int k = 0; k < iterations; ++k) {
        Eigen::MatrixXd m = a * v;
        v = v * (3 * identity - m * (3 * identity - m));
    }
    return v;
}

CipherMatrix sec_inv(SecureChannel& ch, const CipherMatrix& a, int iterations) {
    if (a.rows != a.cols) throw std::invalid_argument("sec_inv: matrix must be square");
    unsigned f = ch.codec->fraction_bits();
    int d = a.rows;

    CipherMatrix work = a;
    if (work.scale > f) work = rescale(ch, work, f);
    if (work.scale < f) {
        // exact upscale by a power of two
        Bigint shift = pow2(f - work.scale);
        for (Bigint& v : work.values)
            v = powmod(v, shift, ch.pk.n_squared);
        work.scale = f;
    }

    // V0 = I / trace(A); for the SPD matrices this protocol inverts that
    // puts every eigenvalue of V0*A in (0,1), so the iteration contracts.
    CipherVector diag;
    diag.scale = f;
    for (int i = 0; i < d; ++i) diag.values.push_back(work.at(i, i));
    Ciphertext trace_inv = sec_scalar_recip(ch, hom_sum(ch.pk, diag));

    CipherMatrix v;
    v.rows = d;
    v.cols = d;
    v.scale = f;
    v.values.reserve(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            v.values.push_back(i == j ? trace_inv.value : encrypt(ch.pk, 0, *ch.rng, f).value);

    Bigint three = Bigint(3) << f;  // 3I entries at scale f
    auto three_i_minus = [&](const CipherMatrix& m) {
        CipherMatrix out;
        out.rows = m.rows;
        out.cols = m.cols;
        out.scale = m.scale;
        out.values.reserve(m.values.size());
        for (int i = 0; i < m.rows; ++i)
            for (int j = 0; j < m.cols; ++j) {
                Ciphertext neg = hom_neg(ch.pk, m.cipher_at(i, j));
                if (i == j)
                    neg = hom_add(ch.pk, neg, encrypt_deterministic(ch.pk, three, m.scale));
                out.values.push_back(std::move(neg.value));
            }
        return out;
    };

    for (int k = 0; k < iterations; ++k) {
        CipherMatrix m = rescale(ch, sec_mat_prod(ch, work, v), f);
        CipherMatrix inner = rescale(ch, sec_mat_prod(ch, m, three_i_minus(m)), f);
        v = rescale(ch, sec_mat_prod(ch, v, three_i_minus(inner)), f);
    }
    return v;
}

SmAddHop decode_smadd_payload(std::span<const uint8_t> payload) {
    wire::Reader r(payload);
    SmAddHop hop;
    hop.tag = r.string();
    uint32_t count = r.u32();
    hop.remaining.reserve(count);
    for (uint32_t i = 0; i < count; ++i) hop.remaining.push_back(r.string());
    hop.running = r.cipher_vector();
    return hop;
}

std::vector<uint8_t> encode_smadd_payload(const SmAddHop& hop) {
    std::vector<uint8_t> out;
    wire::put_string(out, hop.tag);
    wire::put_u32(out, static_cast<uint32_t>(hop.remaining.size()));
    for (const std::string& name : hop.remaining) wire::put_string(out, name);
    wire::put_cipher_vector(out, hop.running);
    return out;
}

std::vector<uint8_t> smadd_forward(Bus& bus, const std::string& self, const std::string& protocol,
                                   const PublicKey& pk, const CipherVector& own,
                                   const std::vector<uint8_t>& payload) {
    SmAddHop hop = decode_smadd_payload(payload);
    hop.running = hom_add(pk, hop.running, own);
    if (hop.remaining.empty()) {
        std::vector<uint8_t> out;
        wire::put_cipher_vector(out, hop.running);
        return out;
    }
    std::string next = hop.remaining.front();
    hop.remaining.erase(hop.remaining.begin());
    return bus.request(self, next, protocol, "smadd.forward", encode_smadd_payload(hop));
}

CipherVector sm_add(Bus& bus, const std::string& coordinator, const PublicKey& pk, SecureRng& rng,
                    std::span<const std::string> ring, const std::string& protocol,
                    const std::string& tag, int length, uint32_t scale) {
    if (ring.empty()) throw std::invalid_argument("sm_add: empty ring");

    SmAddHop hop;
    hop.tag = tag;
    hop.remaining.assign(ring.begin() + 1, ring.end());
    hop.running.scale = scale;
    std::vector<Bigint> seeds(static_cast<size_t>(length));
    for (auto& s : seeds) {
        s = rng.below(pk.n);
        hop.running.values.push_back(encrypt(pk, s, rng, scale).value);
    }

    std::vector<uint8_t> reply = bus.request(coordinator, std::string(ring.front()), protocol,
                                             "smadd.forward", encode_smadd_payload(hop));
    wire::Reader rd(reply);
    CipherVector total = rd.cipher_vector();
    if (total.size() != length) throw std::runtime_error("sm_add: bad ring reply length");

    // remove the seed: ct(r + sum v) (+) (-1)(x)ct(r)
    CipherVector out;
    out.scale = scale;
    out.values.reserve(seeds.size());
    for (size_t i = 0; i < seeds.size(); ++i) {
        Bigint neg = (pk.n - seeds[i]) % pk.n;
        out.values.push_back(total.values[i] * (1 + neg * pk.n) % pk.n_squared);
    }
    return out;
}

}  // namespace secrado
