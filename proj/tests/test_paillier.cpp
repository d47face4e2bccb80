#include <secrado/paillier.hpp>

#include "testutil.hpp"

using namespace secrado;

TEST_CASE("toy key from explicit primes") {
    KeyPair kp = test::toy_keys();
    CHECK(kp.pk.n == 15);
    CHECK(kp.pk.n_squared == 225);
    CHECK(kp.pk.g() == 16);
    CHECK_THROWS_AS(keypair_from_primes(3, 3), std::invalid_argument);
    CHECK_THROWS_AS(keypair_from_primes(4, 5), std::invalid_argument);
}

TEST_CASE("toy key: decrypt is the inverse of encrypt on every plaintext") {
    KeyPair kp = test::toy_keys();
    SecureRng rng(1);
    // brute force over the whole plaintext ring
    for (int x = 0; x < 15; ++x) {
        Ciphertext c = encrypt(kp.pk, x, rng);
        CHECK(decrypt(kp.sk, c) == x);
    }
}

TEST_CASE("encrypt rejects out-of-range plaintexts") {
    KeyPair kp = test::toy_keys();
    SecureRng rng(2);
    CHECK_THROWS_AS(encrypt(kp.pk, 15, rng), std::out_of_range);
    CHECK_THROWS_AS(encrypt(kp.pk, -1, rng), std::out_of_range);
    CHECK_THROWS_AS(decrypt(kp.sk, Ciphertext{Bigint(225), 0}), std::invalid_argument);
}

TEST_CASE("fresh encryptions of equal plaintexts differ") {
    KeyPair kp = test::small_keys();
    SecureRng rng(3);
    int collisions = 0;
    for (int i = 0; i < 100; ++i) {
        Ciphertext a = encrypt(kp.pk, 0, rng);
        Ciphertext b = encrypt(kp.pk, 0, rng);
        if (a.value == b.value) ++collisions;
        CHECK(decrypt(kp.sk, a) == 0);
        CHECK(decrypt(kp.sk, b) == 0);
    }
    CHECK(collisions == 0);
}

TEST_CASE("toy key: worked additions and scalar products") {
    KeyPair kp = test::toy_keys();
    SecureRng rng(4);
    Ciphertext seven = encrypt(kp.pk, 7, rng);
    CHECK(decrypt(kp.sk, seven) == 7);
    CHECK(decrypt(kp.sk, encrypt(kp.pk, 14, rng)) == 14);  // n-1 boundary

    Ciphertext sum = hom_add(kp.pk, encrypt(kp.pk, 3, rng), encrypt(kp.pk, 4, rng));
    CHECK(decrypt(kp.sk, sum) == 7);

    Ciphertext doubled = hom_scalar_mul(kp.pk, 2, encrypt(kp.pk, 5, rng));
    CHECK(decrypt(kp.sk, doubled) == 10);
    Ciphertext same = hom_scalar_mul(kp.pk, 1, seven);
    CHECK(decrypt(kp.sk, same) == 7);

    // (-1) (x) ct(5) (+) ct(5) = ct(0)
    Ciphertext five = encrypt(kp.pk, 5, rng);
    CHECK(decrypt(kp.sk, hom_add(kp.pk, hom_neg(kp.pk, five), encrypt(kp.pk, 5, rng))) == 0);

    // additive identity
    Ciphertext x = encrypt(kp.pk, 11, rng);
    CHECK(decrypt(kp.sk, hom_add(kp.pk, x, encrypt(kp.pk, 0, rng))) == 11);
}

TEST_CASE("homomorphic laws hold for random values mod n") {
    KeyPair kp = test::small_keys();
    SecureRng rng(5);
    for (int i = 0; i < 100; ++i) {
        Bigint x = rng.below(kp.pk.n);
        Bigint y = rng.below(kp.pk.n);
        Bigint alpha = rng.below(kp.pk.n);
        Ciphertext cx = encrypt(kp.pk, x, rng);
        Ciphertext cy = encrypt(kp.pk, y, rng);
        CHECK(decrypt(kp.sk, hom_add(kp.pk, cx, cy)) == (x + y) % kp.pk.n);
        CHECK(decrypt(kp.sk, hom_scalar_mul(kp.pk, alpha, cx)) == alpha * x % kp.pk.n);
    }
}

TEST_CASE("hom_add rejects mismatched scales") {
    KeyPair kp = test::toy_keys();
    SecureRng rng(6);
    Ciphertext a = encrypt(kp.pk, 1, rng, 4);
    Ciphertext b = encrypt(kp.pk, 2, rng, 5);
    CHECK_THROWS_AS(hom_add(kp.pk, a, b), ScaleMismatchError);
}

TEST_CASE("keygen produces a modulus of the requested size") {
    SecureRng rng(7);
    KeyPair kp = keygen(256, rng);
    CHECK(kp.pk.bits == 256);
    CHECK(bit_length(kp.pk.n) == 256);
    CHECK_THROWS_AS(keygen(64, rng), std::invalid_argument);
    for (int i = 0; i < 100; ++i) {
        Bigint x = rng.below(kp.pk.n);
        CHECK(decrypt(kp.sk, encrypt(kp.pk, x, rng)) == x);
    }
}

TEST_CASE("deterministic rng reproduces keys and ciphertexts") {
    SecureRng a(99), b(99);
    KeyPair ka = keygen(128, a);
    KeyPair kb = keygen(128, b);
    CHECK(ka.pk.n == kb.pk.n);
    Ciphertext ca = encrypt(ka.pk, 42, a);
    Ciphertext cb = encrypt(kb.pk, 42, b);
    CHECK(ca.value == cb.value);
}

TEST_CASE("hom_sum folds a vector") {
    KeyPair kp = test::toy_keys();
    SecureRng rng(8);
    CipherVector v;
    v.scale = 0;
    for (int x : {1, 2, 3})
        v.values.push_back(encrypt(kp.pk, x, rng).value);
    CHECK(decrypt(kp.sk, hom_sum(kp.pk, v)) == 6);
    CHECK_THROWS_AS(hom_sum(kp.pk, CipherVector{}), std::invalid_argument);
}
