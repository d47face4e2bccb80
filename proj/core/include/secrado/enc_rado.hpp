#pragma once

#include "secrado/rado.hpp"
#include "secrado/secure_ops.hpp"

namespace secrado {

/// Builds one encrypted rado from an elementwise-encrypted dataset:
/// ct(phi_i) = ct(sigma_i) (+) ct(y_i), the 1/2 factor folded into the
/// fixed-point scale, then one secure inner product per feature column.
/// Decrypts to make_rado's output within codec tolerance.
///
/// With `encrypt_sigma` false the signature entries ride as
/// non-rerandomised encryptions (the key holder may learn sigma, which
/// the threat model tolerates); true hides sigma too.
CipherVector encrypted_rado(SecureChannel& ch, const CipherMatrix& enc_x,
                            const CipherVector& enc_y, const Signature& sigma,
                            bool encrypt_sigma = true);

/// Elementwise encryption of a dataset for Protocol 1: features at the
/// codec scale, labels as +-1 ring integers at scale 0.
std::pair<CipherMatrix, CipherVector> encrypt_dataset(const PublicKey& pk,
                                                      const FixedPointCodec& codec,
                                                      const Dataset& ds, SecureRng& rng);

}  // namespace secrado
