#include "secrado/serialize.hpp"

#include <fstream>

namespace secrado::wire {

void put_u8(std::vector<uint8_t>& out, uint8_t v) {
    out.push_back(v);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_bigint(std::vector<uint8_t>& out, const Bigint& v) {
    if (v < 0) throw std::invalid_argument("wire: big integers are non-negative");
    size_t count = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
    if (v == 0) count = 0;
    put_u32(out, static_cast<uint32_t>(count));
    size_t old = out.size();
    out.resize(old + count);
    if (count > 0) {
        size_t written = 0;
        mpz_export(out.data() + old, &written, 1, 1, 1, 0, v.get_mpz_t());
        if (written != count) throw std::logic_error("wire: bigint export size mismatch");
    }
}

void put_string(std::vector<uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void put_ciphertext(std::vector<uint8_t>& out, const Ciphertext& c) {
    if (c.scale > 255) throw std::invalid_argument("wire: scale exceeds u8");
    put_bigint(out, c.value);
    put_u8(out, static_cast<uint8_t>(c.scale));
}

void put_cipher_vector(std::vector<uint8_t>& out, const CipherVector& v) {
    if (v.scale > 255) throw std::invalid_argument("wire: scale exceeds u8");
    put_u32(out, static_cast<uint32_t>(v.values.size()));
    put_u8(out, static_cast<uint8_t>(v.scale));
    for (const Bigint& x : v.values) put_bigint(out, x);
}

void put_cipher_matrix(std::vector<uint8_t>& out, const CipherMatrix& m) {
    if (m.scale > 255) throw std::invalid_argument("wire: scale exceeds u8");
    put_u32(out, static_cast<uint32_t>(m.rows));
    put_u32(out, static_cast<uint32_t>(m.cols));
    put_u8(out, static_cast<uint8_t>(m.scale));
    for (const Bigint& x : m.values) put_bigint(out, x);
}

void Reader::need(size_t n) const {
    if (pos_ + n > data_.size()) throw std::runtime_error("wire: truncated input");
}

uint8_t Reader::u8() {
    need(1);
    return data_[pos_++];
}

uint32_t Reader::u32() {
    need(4);
    uint32_t v = (static_cast<uint32_t>(data_[pos_]) << 24) |
                 (static_cast<uint32_t>(data_[pos_ + 1]) << 16) |
                 (static_cast<uint32_t>(data_[pos_ + 2]) << 8) |
                 static_cast<uint32_t>(data_[pos_ + 3]);
    pos_ += 4;
    return v;
}

Bigint Reader::bigint() {
    uint32_t count = u32();
    need(count);
    Bigint v;
    if (count > 0) mpz_import(v.get_mpz_t(), count, 1, 1, 1, 0, data_.data() + pos_);
    pos_ += count;
    return v;
}

std::string Reader::string() {
    uint32_t count = u32();
    need(count);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), count);
    pos_ += count;
    return s;
}

Ciphertext Reader::ciphertext() {
    Ciphertext c;
    c.value = bigint();
    c.scale = u8();
    return c;
}

CipherVector Reader::cipher_vector() {
    CipherVector v;
    uint32_t count = u32();
    v.scale = u8();
    v.values.reserve(count);
    for (uint32_t i = 0; i < count; ++i) v.values.push_back(bigint());
    return v;
}

CipherMatrix Reader::cipher_matrix() {
    CipherMatrix m;
    m.rows = static_cast<int>(u32());
    m.cols = static_cast<int>(u32());
    m.scale = u8();
    m.values.reserve(static_cast<size_t>(m.rows) * m.cols);
    for (int i = 0; i < m.rows * m.cols; ++i) m.values.push_back(bigint());
    return m;
}

std::vector<uint8_t> encode_public_key(const PublicKey& pk) {
    std::vector<uint8_t> out;
    put_bigint(out, pk.n);
    return out;
}

PublicKey decode_public_key(std::span<const uint8_t> data) {
    Reader r(data);
    PublicKey pk;
    pk.n = r.bigint();
    if (pk.n < 2) throw std::runtime_error("wire: invalid public key modulus");
    pk.n_squared = pk.n * pk.n;
    pk.bits = static_cast<unsigned>(bit_length(pk.n));
    return pk;
}

std::vector<uint8_t> encode_secret_key(const SecretKey& sk) {
    std::vector<uint8_t> out;
    put_bigint(out, sk.pk.n);
    put_bigint(out, sk.lambda);
    put_bigint(out, sk.mu);
    return out;
}

SecretKey decode_secret_key(std::span<const uint8_t> data) {
    Reader r(data);
    SecretKey sk;
    sk.pk.n = r.bigint();
    sk.pk.n_squared = sk.pk.n * sk.pk.n;
    sk.pk.bits = static_cast<unsigned>(bit_length(sk.pk.n));
    sk.lambda = r.bigint();
    sk.mu = r.bigint();
    return sk;
}

std::vector<uint8_t> encode_ciphertext(const Ciphertext& c) {
    std::vector<uint8_t> out;
    put_ciphertext(out, c);
    return out;
}

Ciphertext decode_ciphertext(std::span<const uint8_t> data) {
    Reader r(data);
    return r.ciphertext();
}

std::vector<uint8_t> encode_cipher_vector(const CipherVector& v) {
    std::vector<uint8_t> out;
    put_cipher_vector(out, v);
    return out;
}

CipherVector decode_cipher_vector(std::span<const uint8_t> data) {
    Reader r(data);
    return r.cipher_vector();
}

std::vector<uint8_t> encode_cipher_matrix(const CipherMatrix& m) {
    std::vector<uint8_t> out;
    put_cipher_matrix(out, m);
    return out;
}

CipherMatrix decode_cipher_matrix(std::span<const uint8_t> data) {
    Reader r(data);
    return r.cipher_matrix();
}

void write_file(const std::filesystem::path& path, std::span<const uint8_t> data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    auto size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> data(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(data.data()), size);
    if (!in) throw std::runtime_error("read failed: " + path.string());
    return data;
}

}  // namespace secrado::wire
