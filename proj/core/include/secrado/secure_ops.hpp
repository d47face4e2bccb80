#pragma once

#include <optional>
#include <span>
#include <string>

#include "secrado/bus.hpp"
#include "secrado/fixed_point.hpp"
#include "secrado/serialize.hpp"

namespace secrado {

/// Roles a simulated party can play.  Every protocol instance has
/// exactly one key holder.
enum class PartyRole { public_worker, key_holder, coordinator, peer };

/// The private-key side (party B) of the two-party protocols.  It
/// answers masked requests over the bus: decrypt, compute on blinded
/// cleartext, re-encrypt.  Every decryption is recorded in the audit
/// log, and the raw ring values B observed are kept so tests can check
/// that they really are uniform junk.
///
/// Steps served: "elemprod.mask", "rescale.mask", "recip.mask".
class KeyHolderService {
  public:
    KeyHolderService(std::string name, SecretKey sk, FixedPointCodec codec, SecureRng rng,
                     AuditLog* audit);

    /// Handler to register on a Bus under this service's party name.
    Bus::Handler handler();

    const std::string& name() const { return name_; }
    const PublicKey& public_key() const { return sk_.pk; }

    /// Ring values decrypted while serving elemprod masks, in arrival
    /// order.  Test hook for the blinding-uniformity checks.
    const std::vector<Bigint>& observed_masked_values() const { return observed_; }

  private:
    std::string name_;
    SecretKey sk_;
    FixedPointCodec codec_;
    SecureRng rng_;
    AuditLog* audit_;
    std::vector<Bigint> observed_;

    std::vector<uint8_t> handle(const std::string& step, const std::vector<uint8_t>& payload);
    std::vector<uint8_t> handle_elemprod(const std::vector<uint8_t>& payload);
    std::vector<uint8_t> handle_rescale(const std::vector<uint8_t>& payload);
    std::vector<uint8_t> handle_recip(const std::vector<uint8_t>& payload);
};

/// The public-worker side (party A): everything it sends to the key
/// holder is blinded first, everything that comes back is unblinded
/// locally.
struct SecureChannel {
    Bus* bus = nullptr;
    std::string self;
    std::string key_holder;
    std::string protocol = "secmath";
    PublicKey pk;
    const FixedPointCodec* codec = nullptr;
    SecureRng* rng = nullptr;
};

/// ct(sum_i x_i * theta_i) computed entirely at the caller from a
/// plaintext vector and an encrypted one; nothing is revealed and no
/// interaction happens.  Result scale = theta.scale + f.
Ciphertext local_inner_prod(const PublicKey& pk, const FixedPointCodec& codec,
                            const Eigen::VectorXd& x, const CipherVector& enc_theta);

/// Elementwise ciphertext product via the mask -> decrypt -> multiply ->
/// re-encrypt -> unblind exchange.  Result scale = a.scale + b.scale.
CipherVector sec_elem_prod(SecureChannel& ch, const CipherVector& a, const CipherVector& b);

/// Inner product: sec_elem_prod folded with homomorphic additions.
Ciphertext sec_inner_prod(SecureChannel& ch, const CipherVector& a, const CipherVector& b);

/// Outer product u u^T as a d x d ciphertext matrix (d elementwise
/// products against repeated-scalar rows).
CipherMatrix sec_outer_prod(SecureChannel& ch, const CipherVector& u);

/// Matrix product, entrywise secure inner products.  Result scale =
/// x.scale + y.scale; callers rescale when chaining.
CipherMatrix sec_mat_prod(SecureChannel& ch, const CipherMatrix& x, const CipherMatrix& y);

/// Drops a ciphertext from one scale to a smaller one with round-half-up
/// on the underlying signed value; introduced error <= 2^-to_scale.  The
/// key holder only sees the value under a statistical mask chosen as a
/// multiple of 2^(from-to), so its shift commutes with unblinding.
Ciphertext rescale(SecureChannel& ch, const Ciphertext& c, uint32_t to_scale);
CipherVector rescale(SecureChannel& ch, const CipherVector& v, uint32_t to_scale);
CipherMatrix rescale(SecureChannel& ch, const CipherMatrix& m, uint32_t to_scale);

/// ct(1/t) for an encrypted positive scalar, via a multiplicative blind:
/// B sees s*t for a random 16-bit s and returns ct(1/(s*t)).  Used to
/// seed the encrypted Newton-Schulz iteration with 1/trace(A).
Ciphertext sec_scalar_recip(SecureChannel& ch, const Ciphertext& t);

/// Plaintext Newton-Schulz: V <- V(3I - A V(3I - A V)) from
/// V0 = A^T / (|A|_1 |A|_inf), which contracts for any invertible A.
Eigen::MatrixXd newton_schulz_inverse(const Eigen::MatrixXd& a, int iterations);
Eigen::MatrixXd newton_schulz_inverse(const Eigen::MatrixXd& a, int iterations,
                                      Eigen::MatrixXd v0);

/// Encrypted Newton-Schulz inverse of a symmetric positive definite
/// matrix, all products through sec_mat_prod with rescaling between
/// iterations.  The iteration count is fixed up front: convergence is
/// not observable under encryption, so there is no data-dependent exit.
CipherMatrix sec_inv(SecureChannel& ch, const CipherMatrix& a, int iterations);

/// Blind multi-party addition.  The coordinator seeds a ring with
/// ct(r), every hop homomorphically adds its contribution, and the
/// coordinator removes r from the returned sum; the sum is exact in the
/// plaintext ring.  Every hop must answer step "smadd.forward" (payload:
/// tag, remaining hops, running vector) by adding its value for `tag`
/// and forwarding to the next hop.
CipherVector sm_add(Bus& bus, const std::string& coordinator, const PublicKey& pk, SecureRng& rng,
                    std::span<const std::string> ring, const std::string& protocol,
                    const std::string& tag, int length, uint32_t scale);

/// Payload helpers for parties implementing the smadd.forward step.
struct SmAddHop {
    std::string tag;
    std::vector<std::string> remaining;
    CipherVector running;
};
SmAddHop decode_smadd_payload(std::span<const uint8_t> payload);
std::vector<uint8_t> encode_smadd_payload(const SmAddHop& hop);

/// Forwards one smadd hop: adds `own` to the running vector and either
/// returns it (last hop) or relays the request to the next hop.
std::vector<uint8_t> smadd_forward(Bus& bus, const std::string& self, const std::string& protocol,
                                   const PublicKey& pk, const CipherVector& own,
                                   const std::vector<uint8_t>& payload);

}  // namespace secrado
