#pragma once

#include <doctest.h>

#include <secrado/bus.hpp>
#include <secrado/paillier.hpp>
#include <secrado/secure_ops.hpp>

namespace secrado::test {

/// Toy key pair p=3, q=5 (n=15): small enough to brute-force every
/// plaintext.
inline KeyPair toy_keys() {
    return keypair_from_primes(3, 5);
}

/// One shared 256-bit key pair per test binary; keygen is the slow part.
inline const KeyPair& small_keys() {
    static KeyPair kp = [] {
        SecureRng rng(20240811);
        return keygen(256, rng);
    }();
    return kp;
}

/// Bus + key-holder service + worker-side channel, wired together.
struct TwoPartyRig {
    KeyPair keys;
    FixedPointCodec codec;
    Bus bus;
    KeyHolderService service;
    SecureRng worker_rng;
    SecureChannel channel;

    explicit TwoPartyRig(unsigned fraction_bits = 32, uint64_t seed = 7)
        : keys(small_keys()),
          codec(fraction_bits, keys.pk.n),
          bus(1000000),
          service("keyholder", keys.sk, codec, SecureRng(seed).derive("keyholder"), &bus.audit()),
          worker_rng(SecureRng(seed).derive("worker")),
          channel{&bus, "worker", "keyholder", "secmath", keys.pk, &codec, &worker_rng} {
        bus.register_party("keyholder", service.handler());
        bus.register_party("worker",
                           [](const std::string&, const std::vector<uint8_t>&) {
                               return std::vector<uint8_t>{};
                           });
    }
};

/// chi-square statistic for observed counts against a uniform
/// expectation.
inline double chi_square_uniform(const std::vector<int>& counts) {
    double total = 0;
    for (int c : counts) total += c;
    double expected = total / static_cast<double>(counts.size());
    double stat = 0;
    for (int c : counts) {
        double d = c - expected;
        stat += d * d / expected;
    }
    return stat;
}

}  // namespace secrado::test
