#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "secrado/bigint.hpp"
#include "secrado/rng.hpp"

namespace secrado {

/// Thrown when two ciphertexts with different fixed-point scales are
/// combined.  A mismatch is a protocol-design bug; nothing rescales
/// silently.
class ScaleMismatchError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Paillier public key with the g = n + 1 generator convention, so an
/// encryption is (1 + m*n) * r^n mod n^2.
struct PublicKey {
    Bigint n;
    Bigint n_squared;
    unsigned bits = 0;

    Bigint g() const { return n + 1; }
};

struct SecretKey {
    PublicKey pk;
    Bigint lambda;  // lcm(p-1, q-1)
    Bigint mu;      // (L(g^lambda mod n^2))^-1 mod n
};

struct KeyPair {
    PublicKey pk;
    SecretKey sk;
};

/// An encrypted value together with its public fixed-point scale
/// exponent: the plaintext ring integer represents value / 2^scale.
struct Ciphertext {
    Bigint value;
    uint32_t scale = 0;
};

/// Ciphertext vector with one uniform scale for all entries.
struct CipherVector {
    std::vector<Bigint> values;
    uint32_t scale = 0;

    int size() const { return static_cast<int>(values.size()); }
    Ciphertext at(int i) const { return Ciphertext{values.at(static_cast<size_t>(i)), scale}; }
};

/// Row-major ciphertext matrix, uniform scale.
struct CipherMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Bigint> values;
    uint32_t scale = 0;

    Bigint& at(int r, int c) { return values.at(static_cast<size_t>(r) * cols + c); }
    const Bigint& at(int r, int c) const { return values.at(static_cast<size_t>(r) * cols + c); }
    Ciphertext cipher_at(int r, int c) const { return Ciphertext{at(r, c), scale}; }

    CipherVector row(int r) const;
    CipherVector col(int c) const;
    CipherMatrix transposed() const;
};

/// Generates a fresh key pair.  `bits` is the modulus size; 128 is the
/// floor (toy sizes go through keypair_from_primes instead).
KeyPair keygen(unsigned bits, SecureRng& rng);

/// Test backdoor: build a key pair from explicit primes, e.g. p=3, q=5,
/// so brute-force oracles can check every plaintext in [0, n).
KeyPair keypair_from_primes(const Bigint& p, const Bigint& q);

Ciphertext encrypt(const PublicKey& pk, const Bigint& m, SecureRng& rng, uint32_t scale = 0);

/// Non-rerandomised encryption (1 + m*n mod n^2).  Only for values the
/// receiving party already knows, e.g. plaintext signature entries or
/// public constants folded into a homomorphic sum.
Ciphertext encrypt_deterministic(const PublicKey& pk, const Bigint& m, uint32_t scale = 0);

Bigint decrypt(const SecretKey& sk, const Ciphertext& c);

/// ct(x) (+) ct(y) -> ct(x + y mod n).  Scales must match.
Ciphertext hom_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

/// alpha (*) ct(x) -> ct(alpha * x mod n) for integer alpha (negative
/// alpha goes through its residue mod n, so -1 is the exponent n - 1).
/// Real-valued scalars must be fixed-point encoded first, which adds the
/// encoding scale; see FixedPointCodec.
Ciphertext hom_scalar_mul(const PublicKey& pk, const Bigint& alpha, const Ciphertext& c);

Ciphertext hom_neg(const PublicKey& pk, const Ciphertext& c);

CipherVector hom_add(const PublicKey& pk, const CipherVector& a, const CipherVector& b);
CipherMatrix hom_add(const PublicKey& pk, const CipherMatrix& a, const CipherMatrix& b);
CipherVector hom_neg(const PublicKey& pk, const CipherVector& v);

/// Folds a ciphertext vector with homomorphic additions: ct(sum_i v_i).
Ciphertext hom_sum(const PublicKey& pk, const CipherVector& v);

}  // namespace secrado
