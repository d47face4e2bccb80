#include <secrado/serialize.hpp>

#include <filesystem>

#include "testutil.hpp"

using namespace secrado;

TEST_CASE("key serialization is byte-stable and invertible") {
    const KeyPair& kp = test::small_keys();
    auto pk_bytes = wire::encode_public_key(kp.pk);
    PublicKey pk = wire::decode_public_key(pk_bytes);
    CHECK(pk.n == kp.pk.n);
    CHECK(pk.n_squared == kp.pk.n_squared);
    CHECK(pk.bits == kp.pk.bits);
    CHECK(wire::encode_public_key(pk) == pk_bytes);

    auto sk_bytes = wire::encode_secret_key(kp.sk);
    SecretKey sk = wire::decode_secret_key(sk_bytes);
    CHECK(sk.lambda == kp.sk.lambda);
    CHECK(sk.mu == kp.sk.mu);
    SecureRng rng(21);
    CHECK(decrypt(sk, encrypt(pk, 12345, rng)) == 12345);
}

TEST_CASE("ciphertext serialization keeps value and scale") {
    const KeyPair& kp = test::small_keys();
    SecureRng rng(22);
    Ciphertext c = encrypt(kp.pk, 77, rng, 33);
    Ciphertext back = wire::decode_ciphertext(wire::encode_ciphertext(c));
    CHECK(back.value == c.value);
    CHECK(back.scale == 33);
    CHECK_THROWS_AS(wire::encode_ciphertext(Ciphertext{Bigint(1), 300}), std::invalid_argument);
}

TEST_CASE("vector and matrix frames") {
    const KeyPair& kp = test::small_keys();
    SecureRng rng(23);
    CipherVector v;
    v.scale = 7;
    for (int i = 0; i < 5; ++i) v.values.push_back(encrypt(kp.pk, i, rng).value);
    CipherVector v2 = wire::decode_cipher_vector(wire::encode_cipher_vector(v));
    CHECK(v2.scale == 7);
    CHECK(v2.values == v.values);

    CipherMatrix m;
    m.rows = 2;
    m.cols = 3;
    m.scale = 9;
    for (int i = 0; i < 6; ++i) m.values.push_back(encrypt(kp.pk, i, rng).value);
    CipherMatrix m2 = wire::decode_cipher_matrix(wire::encode_cipher_matrix(m));
    CHECK(m2.rows == 2);
    CHECK(m2.cols == 3);
    CHECK(m2.scale == 9);
    CHECK(m2.values == m.values);
}

TEST_CASE("truncated input is rejected") {
    auto bytes = wire::encode_public_key(test::small_keys().pk);
    bytes.pop_back();
    CHECK_THROWS_AS(wire::decode_public_key(bytes), std::runtime_error);
}

TEST_CASE("zero encodes as an empty magnitude") {
    std::vector<uint8_t> out;
    wire::put_bigint(out, 0);
    CHECK(out.size() == 4);
    wire::Reader r(out);
    CHECK(r.bigint() == 0);
    CHECK(r.done());
}

TEST_CASE("file helpers roundtrip") {
    auto path = std::filesystem::temp_directory_path() / "secrado_wire_test.bin";
    std::vector<uint8_t> data{1, 2, 3, 250};
    wire::write_file(path, data);
    CHECK(wire::read_file(path) == data);
    std::filesystem::remove(path);
}
