#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "secrado/bigint.hpp"

namespace secrado {

/// Deterministic CSPRNG (ChaCha20 keystream).  A seeded instance produces
/// the same byte stream on every platform, which is what makes protocol
/// transcripts replayable in tests.  Instances are cheap; give each
/// execution strand its own (they are not safe to share across threads).
class SecureRng {
  public:
    /// Keyed from OS entropy.
    SecureRng();

    /// Deterministic stream for the given seed.
    explicit SecureRng(uint64_t seed);

    /// Independent deterministic substream, e.g. one per simulated party.
    SecureRng derive(std::string_view label) const;

    void fill(std::span<unsigned char> out);
    uint64_t next_u64();

    /// Uniform on [0, bound), bound > 0. Rejection-sampled, no modulo bias.
    Bigint below(const Bigint& bound);

    /// Uniform on [0, 2^nbits).
    Bigint bits(unsigned nbits);

    /// Uniform on Z_bound^* (nonzero, coprime to bound).
    Bigint coprime_below(const Bigint& bound);

    /// Fair coin: -1 or +1.
    int sign();

    /// Uniform double in [0, 1).
    double uniform01();

  private:
    std::array<unsigned char, 32> key_{};
    uint64_t block_counter_ = 0;
    std::array<unsigned char, 1024> buffer_{};
    size_t buffer_pos_;

    void refill();
};

}  // namespace secrado
