#include "secrado/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>
#include <vector>

namespace secrado {

namespace {

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0)
        throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

SecureRng::SecureRng() : buffer_pos_(buffer_.size()) {
    ensure_sodium();
    randombytes_buf(key_.data(), key_.size());
}

SecureRng::SecureRng(uint64_t seed) : buffer_pos_(buffer_.size()) {
    ensure_sodium();
    unsigned char seed_bytes[8];
    for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
    static const unsigned char domain[] = "secrado.rng.seed";
    crypto_generichash(key_.data(), key_.size(), seed_bytes, sizeof(seed_bytes), domain,
                       sizeof(domain) - 1);
}

SecureRng SecureRng::derive(std::string_view label) const {
    SecureRng child;
    crypto_generichash(child.key_.data(), child.key_.size(),
                       reinterpret_cast<const unsigned char*>(label.data()), label.size(),
                       key_.data(), key_.size());
    child.block_counter_ = 0;
    child.buffer_pos_ = child.buffer_.size();
    return child;
}

void SecureRng::refill() {
    unsigned char nonce[crypto_stream_chacha20_NONCEBYTES] = {0};
    for (int i = 0; i < 8; ++i) nonce[i] = static_cast<unsigned char>(block_counter_ >> (8 * i));
    ++block_counter_;
    crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce, key_.data());
    buffer_pos_ = 0;
}

void SecureRng::fill(std::span<unsigned char> out) {
    size_t done = 0;
    while (done < out.size()) {
        if (buffer_pos_ == buffer_.size()) refill();
        size_t take = std::min(out.size() - done, buffer_.size() - buffer_pos_);
        std::memcpy(out.data() + done, buffer_.data() + buffer_pos_, take);
        buffer_pos_ += take;
        done += take;
    }
}

uint64_t SecureRng::next_u64() {
    unsigned char b[8];
    fill(b);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

Bigint SecureRng::bits(unsigned nbits) {
    if (nbits == 0) return 0;
    size_t nbytes = (nbits + 7) / 8;
    std::vector<unsigned char> buf(nbytes);
    fill(buf);
    unsigned excess = static_cast<unsigned>(nbytes * 8 - nbits);
    buf[0] = static_cast<unsigned char>(buf[0] & (0xffu >> excess));
    Bigint out;
    mpz_import(out.get_mpz_t(), buf.size(), 1, 1, 0, 0, buf.data());
    return out;
}

Bigint SecureRng::below(const Bigint& bound) {
    if (bound <= 0) throw std::invalid_argument("SecureRng::below: bound must be positive");
    unsigned nbits = static_cast<unsigned>(bit_length(bound));
    for (;;) {
        Bigint candidate = bits(nbits);
        if (candidate < bound) return candidate;
    }
}

Bigint SecureRng::coprime_below(const Bigint& bound) {
    for (;;) {
        Bigint candidate = below(bound);
        if (candidate != 0 && gcd(candidate, bound) == 1) return candidate;
    }
}

int SecureRng::sign() {
    return (next_u64() & 1) ? 1 : -1;
}

double SecureRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace secrado
