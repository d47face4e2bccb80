#pragma once

#include <Eigen/Dense>

#include "secrado/paillier.hpp"

namespace secrado {

/// Maps reals into the Paillier plaintext ring Z_n as two's-complement
/// style fixed point: v -> round(v * 2^scale), with negatives stored in
/// the upper half of the ring (m > n/2 decodes as m - n).
///
/// `fraction_bits` (f) is the default working scale.  Products of two
/// scale-f values land at scale 2f; the overall budget is max_scale =
/// 3f, and the construction-time invariant 2^(2f + magnitude_bits) <
/// n/2 keeps every in-budget value away from the ring wraparound.
class FixedPointCodec {
  public:
    FixedPointCodec(unsigned fraction_bits, Bigint modulus, unsigned magnitude_bits = 48);

    unsigned fraction_bits() const { return fraction_bits_; }
    unsigned magnitude_bits() const { return magnitude_bits_; }
    uint32_t max_scale() const { return 3 * fraction_bits_; }
    const Bigint& modulus() const { return modulus_; }

    /// encode at the default scale f
    Bigint encode(double v) const { return encode_at(v, fraction_bits_); }

    /// round(v * 2^scale) in ring representation
    Bigint encode_at(double v, uint32_t scale) const;

    /// ring value -> real, interpreting m > n/2 as negative
    double decode(const Bigint& m, uint32_t scale) const;

    /// Largest bit length a (signed) working value may reach; used by
    /// interactive rescaling to size statistical masks.
    unsigned plaintext_bound_bits() const { return 2 * fraction_bits_ + magnitude_bits_; }

  private:
    unsigned fraction_bits_;
    unsigned magnitude_bits_;
    Bigint modulus_;
    Bigint half_modulus_;
};

CipherVector encrypt_vector(const PublicKey& pk, const FixedPointCodec& codec,
                            const Eigen::VectorXd& values, SecureRng& rng);
CipherVector encrypt_vector_at(const PublicKey& pk, const FixedPointCodec& codec,
                               const Eigen::VectorXd& values, uint32_t scale, SecureRng& rng);
Eigen::VectorXd decrypt_vector(const SecretKey& sk, const FixedPointCodec& codec,
                               const CipherVector& v);

CipherMatrix encrypt_matrix(const PublicKey& pk, const FixedPointCodec& codec,
                            const Eigen::MatrixXd& values, SecureRng& rng);
Eigen::MatrixXd decrypt_matrix(const SecretKey& sk, const FixedPointCodec& codec,
                               const CipherMatrix& m);

}  // namespace secrado
