#include "secrado/paillier.hpp"

namespace secrado {

namespace {

constexpr int kMillerRabinRounds = 40;
constexpr int kMaxPrimeAttempts = 100000;

Bigint random_prime(unsigned bits, SecureRng& rng) {
    if (bits < 2) throw std::invalid_argument("random_prime: need at least 2 bits");
    for (int attempt = 0; attempt < kMaxPrimeAttempts; ++attempt) {
        Bigint candidate = rng.bits(bits);
        mpz_setbit(candidate.get_mpz_t(), bits - 1);
        mpz_setbit(candidate.get_mpz_t(), 0);
        if (mpz_probab_prime_p(candidate.get_mpz_t(), kMillerRabinRounds) > 0)
            return candidate;
    }
    throw std::runtime_error("random_prime: no prime found within retry budget");
}

KeyPair build_keypair(const Bigint& p, const Bigint& q) {
    KeyPair kp;
    kp.pk.n = p * q;
    kp.pk.n_squared = kp.pk.n * kp.pk.n;
    kp.pk.bits = static_cast<unsigned>(bit_length(kp.pk.n));
    kp.sk.pk = kp.pk;
    kp.sk.lambda = lcm(p - 1, q - 1);
    // With g = n+1, g^lambda = 1 + lambda*n (mod n^2), so
    // L(g^lambda mod n^2) = lambda mod n.
    kp.sk.mu = invmod(kp.sk.lambda % kp.pk.n, kp.pk.n);
    return kp;
}

void check_same_key_range(const PublicKey& pk, const Ciphertext& c) {
    if (c.value < 0 || c.value >= pk.n_squared)
        throw std::invalid_argument("ciphertext value outside [0, n^2)");
}

}  // namespace

CipherVector CipherMatrix::row(int r) const {
    CipherVector out;
    out.scale = scale;
    out.values.reserve(static_cast<size_t>(cols));
    for (int c = 0; c < cols; ++c) out.values.push_back(at(r, c));
    return out;
}

CipherVector CipherMatrix::col(int c) const {
    CipherVector out;
    out.scale = scale;
    out.values.reserve(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) out.values.push_back(at(r, c));
    return out;
}

CipherMatrix CipherMatrix::transposed() const {
    CipherMatrix out;
    out.rows = cols;
    out.cols = rows;
    out.scale = scale;
    out.values.resize(values.size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out.at(c, r) = at(r, c);
    return out;
}

KeyPair keygen(unsigned bits, SecureRng& rng) {
    if (bits < 128) throw std::invalid_argument("keygen: modulus below 128 bits");
    for (;;) {
        Bigint p = random_prime(bits / 2, rng);
        Bigint q = random_prime(bits - bits / 2, rng);
        if (p == q) continue;
        KeyPair kp = build_keypair(p, q);
        if (kp.pk.bits == bits) return kp;
    }
}

KeyPair keypair_from_primes(const Bigint& p, const Bigint& q) {
    if (p == q) throw std::invalid_argument("keypair_from_primes: p == q");
    if (mpz_probab_prime_p(p.get_mpz_t(), kMillerRabinRounds) == 0 ||
        mpz_probab_prime_p(q.get_mpz_t(), kMillerRabinRounds) == 0)
        throw std::invalid_argument("keypair_from_primes: inputs must be prime");
    return build_keypair(p, q);
}

Ciphertext encrypt(const PublicKey& pk, const Bigint& m, SecureRng& rng, uint32_t scale) {
    if (m < 0 || m >= pk.n) throw std::out_of_range("encrypt: plaintext outside [0, n)");
    Bigint r = rng.coprime_below(pk.n);
    Bigint value = ((1 + m * pk.n) % pk.n_squared) * powmod(r, pk.n, pk.n_squared) % pk.n_squared;
    return Ciphertext{value, scale};
}

Ciphertext encrypt_deterministic(const PublicKey& pk, const Bigint& m, uint32_t scale) {
    if (m < 0 || m >= pk.n) throw std::out_of_range("encrypt: plaintext outside [0, n)");
    return Ciphertext{(1 + m * pk.n) % pk.n_squared, scale};
}

Bigint decrypt(const SecretKey& sk, const Ciphertext& c) {
    check_same_key_range(sk.pk, c);
    Bigint u = powmod(c.value, sk.lambda, sk.pk.n_squared);
    Bigint l = (u - 1) / sk.pk.n;
    return l * sk.mu % sk.pk.n;
}

Ciphertext hom_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
    if (a.scale != b.scale)
        throw ScaleMismatchError("hom_add: operand scales differ (" + std::to_string(a.scale) +
                                 " vs " + std::to_string(b.scale) + ")");
    return Ciphertext{a.value * b.value % pk.n_squared, a.scale};
}

Ciphertext hom_scalar_mul(const PublicKey& pk, const Bigint& alpha, const Ciphertext& c) {
    Bigint e = alpha % pk.n;
    if (e < 0) e += pk.n;
    return Ciphertext{powmod(c.value, e, pk.n_squared), c.scale};
}

Ciphertext hom_neg(const PublicKey& pk, const Ciphertext& c) {
    return hom_scalar_mul(pk, -1, c);
}

CipherVector hom_add(const PublicKey& pk, const CipherVector& a, const CipherVector& b) {
    if (a.scale != b.scale) throw ScaleMismatchError("hom_add(vector): operand scales differ");
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("hom_add(vector): length mismatch");
    CipherVector out;
    out.scale = a.scale;
    out.values.reserve(a.values.size());
    for (size_t i = 0; i < a.values.size(); ++i)
        out.values.push_back(a.values[i] * b.values[i] % pk.n_squared);
    return out;
}

CipherMatrix hom_add(const PublicKey& pk, const CipherMatrix& a, const CipherMatrix& b) {
    if (a.scale != b.scale) throw ScaleMismatchError("hom_add(matrix): operand scales differ");
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("hom_add(matrix): shape mismatch");
    CipherMatrix out;
    out.rows = a.rows;
    out.cols = a.cols;
    out.scale = a.scale;
    out.values.reserve(a.values.size());
    for (size_t i = 0; i < a.values.size(); ++i)
        out.values.push_back(a.values[i] * b.values[i] % pk.n_squared);
    return out;
}

CipherVector hom_neg(const PublicKey& pk, const CipherVector& v) {
    CipherVector out;
    out.scale = v.scale;
    out.values.reserve(v.values.size());
    for (const Bigint& x : v.values)
        out.values.push_back(hom_neg(pk, Ciphertext{x, v.scale}).value);
    return out;
}

Ciphertext hom_sum(const PublicKey& pk, const CipherVector& v) {
    if (v.values.empty()) throw std::invalid_argument("hom_sum: empty vector");
    Bigint acc = 1;
    for (const Bigint& x : v.values) acc = acc * x % pk.n_squared;
    return Ciphertext{acc, v.scale};
}

}  // namespace secrado
