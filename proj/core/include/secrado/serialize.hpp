#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "secrado/paillier.hpp"

namespace secrado::wire {

/// Byte formats.  All integers are big-endian; big integers are
/// length-prefixed (u32 byte count) magnitude bytes.
///   public key:  [n]
///   secret key:  [n][lambda][mu]
///   ciphertext:  [value][u8 scale]
///   vector:      [u32 count][u8 scale][count x value]
///   matrix:      [u32 rows][u32 cols][u8 scale][rows*cols x value]

void put_u8(std::vector<uint8_t>& out, uint8_t v);
void put_u32(std::vector<uint8_t>& out, uint32_t v);
void put_bigint(std::vector<uint8_t>& out, const Bigint& v);
void put_string(std::vector<uint8_t>& out, const std::string& s);
void put_ciphertext(std::vector<uint8_t>& out, const Ciphertext& c);
void put_cipher_vector(std::vector<uint8_t>& out, const CipherVector& v);
void put_cipher_matrix(std::vector<uint8_t>& out, const CipherMatrix& m);

class Reader {
  public:
    explicit Reader(std::span<const uint8_t> data) : data_(data) {}
    uint8_t u8();
    uint32_t u32();
    Bigint bigint();
    std::string string();
    Ciphertext ciphertext();
    CipherVector cipher_vector();
    CipherMatrix cipher_matrix();
    bool done() const { return pos_ == data_.size(); }

  private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    void need(size_t n) const;
};

std::vector<uint8_t> encode_public_key(const PublicKey& pk);
PublicKey decode_public_key(std::span<const uint8_t> data);

std::vector<uint8_t> encode_secret_key(const SecretKey& sk);
SecretKey decode_secret_key(std::span<const uint8_t> data);

std::vector<uint8_t> encode_ciphertext(const Ciphertext& c);
Ciphertext decode_ciphertext(std::span<const uint8_t> data);

std::vector<uint8_t> encode_cipher_vector(const CipherVector& v);
CipherVector decode_cipher_vector(std::span<const uint8_t> data);

std::vector<uint8_t> encode_cipher_matrix(const CipherMatrix& m);
CipherMatrix decode_cipher_matrix(std::span<const uint8_t> data);

void write_file(const std::filesystem::path& path, std::span<const uint8_t> data);
std::vector<uint8_t> read_file(const std::filesystem::path& path);

}  // namespace secrado::wire
