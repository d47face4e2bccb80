#include <secrado/secure_ops.hpp>

#include <cmath>
#include <set>

#include "testutil.hpp"

using namespace secrado;

namespace {

CipherVector encrypt_at(test::TwoPartyRig& rig, const Eigen::VectorXd& v, uint32_t scale) {
    return encrypt_vector_at(rig.keys.pk, rig.codec, v, scale, rig.worker_rng);
}

Eigen::VectorXd random_vec(int n, SecureRng& rng, double range = 10.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = (rng.uniform01() * 2 - 1) * range;
    return v;
}

Eigen::MatrixXd random_spd(int d, double cond, SecureRng& rng) {
    // random orthogonal basis via QR of a gaussian-ish matrix
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            g(i, j) = rng.uniform01() + rng.uniform01() + rng.uniform01() - 1.5;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd eigs(d);
    for (int i = 0; i < d; ++i)
        eigs[i] = std::exp(rng.uniform01() * std::log(cond));
    eigs *= (0.5 + 2.0 * rng.uniform01()) / eigs.maxCoeff();
    return q * eigs.asDiagonal() * q.transpose();
}

}  // namespace

TEST_CASE("local_inner_prod computes without interaction") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    SecureRng rng(41);

    Eigen::VectorXd theta = random_vec(4, rng);
    CipherVector enc_theta = encrypt_at(rig, theta, f);

    size_t messages_before = rig.bus.transcript().size();
    Ciphertext zero = local_inner_prod(rig.keys.pk, rig.codec, Eigen::VectorXd::Zero(4), enc_theta);
    CHECK(rig.bus.transcript().size() == messages_before);  // nothing sent
    CHECK(rig.codec.decode(decrypt(rig.keys.sk, zero), zero.scale) == 0.0);

    Eigen::VectorXd selector = Eigen::VectorXd::Zero(4);
    selector[0] = 1.0;
    Ciphertext first = local_inner_prod(rig.keys.pk, rig.codec, selector, enc_theta);
    CHECK(rig.codec.decode(decrypt(rig.keys.sk, first), first.scale) ==
          doctest::Approx(theta[0]).epsilon(1e-8));

    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x = random_vec(4, rng);
        Ciphertext out = local_inner_prod(rig.keys.pk, rig.codec, x, enc_theta);
        double got = rig.codec.decode(decrypt(rig.keys.sk, out), out.scale);
        worst = std::max(worst, std::abs(got - x.dot(theta)));
    }
    CHECK(worst <= std::ldexp(1.0, -static_cast<int>(f) + 4));
}

TEST_CASE("sec_elem_prod matches the plaintext product") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();

    Eigen::VectorXd a(2), b(2);
    a << 2, 3;
    b << 4, 5;
    CipherVector out = sec_elem_prod(rig.channel, encrypt_at(rig, a, f), encrypt_at(rig, b, f));
    CHECK(out.scale == 2 * f);
    Eigen::VectorXd got = decrypt_vector(rig.keys.sk, rig.codec, out);
    CHECK(got[0] == doctest::Approx(8).epsilon(1e-9));
    CHECK(got[1] == doctest::Approx(15).epsilon(1e-9));

    CipherVector annihilated =
        sec_elem_prod(rig.channel, encrypt_at(rig, a, f), encrypt_at(rig, Eigen::VectorXd::Zero(2), f));
    Eigen::VectorXd zeros = decrypt_vector(rig.keys.sk, rig.codec, annihilated);
    CHECK(zeros.cwiseAbs().maxCoeff() <= std::ldexp(1.0, -static_cast<int>(f) + 4));

    CHECK_THROWS_AS(sec_elem_prod(rig.channel, encrypt_at(rig, a, f),
                                  encrypt_at(rig, Eigen::VectorXd::Zero(3), f)),
                    std::invalid_argument);
}

TEST_CASE("key holder only ever sees uniform junk") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    // fixed inputs, many transcripts
    Eigen::VectorXd a(1), b(1);
    a << 3.25;
    b << -1.5;
    CipherVector ca = encrypt_at(rig, a, f);
    CipherVector cb = encrypt_at(rig, b, f);
    for (int i = 0; i < 500; ++i) sec_elem_prod(rig.channel, ca, cb);

    const std::vector<Bigint>& seen = rig.service.observed_masked_values();
    REQUIRE(seen.size() == 1000);
    // bucket by floor(16 v / n): uniform residues land uniformly;
    // 1% critical value for 15 degrees of freedom is 30.578
    std::vector<int> counts(16, 0);
    for (const Bigint& v : seen) {
        Bigint idx = v * 16 / rig.keys.pk.n;
        ++counts[static_cast<size_t>(idx.get_ui())];
    }
    CHECK(test::chi_square_uniform(counts) < 30.578);

    // masks are fresh per call: no repeated masked value for equal inputs
    std::set<Bigint> distinct(seen.begin(), seen.end());
    CHECK(distinct.size() == seen.size());
}

TEST_CASE("sec_inner_prod folds the elementwise product") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    SecureRng rng(42);

    Eigen::VectorXd ones(2), ab = random_vec(2, rng);
    ones << 1, 1;
    Ciphertext sum = sec_inner_prod(rig.channel, encrypt_at(rig, ones, f), encrypt_at(rig, ab, f));
    CHECK(rig.codec.decode(decrypt(rig.keys.sk, sum), sum.scale) ==
          doctest::Approx(ab.sum()).epsilon(1e-7));

    Eigen::VectorXd e0(2), e1(2);
    e0 << 1, 0;
    e1 << 0, 1;
    Ciphertext ortho = sec_inner_prod(rig.channel, encrypt_at(rig, e0, f), encrypt_at(rig, e1, f));
    CHECK(std::abs(rig.codec.decode(decrypt(rig.keys.sk, ortho), ortho.scale)) <=
          std::ldexp(1.0, -static_cast<int>(f) + 4));

    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x = random_vec(3, rng), y = random_vec(3, rng);
        Ciphertext out =
            sec_inner_prod(rig.channel, encrypt_at(rig, x, f), encrypt_at(rig, y, f));
        double got = rig.codec.decode(decrypt(rig.keys.sk, out), out.scale);
        worst = std::max(worst, std::abs(got - x.dot(y)));
    }
    CHECK(worst <= std::ldexp(1.0, -static_cast<int>(f) + 4));
}

TEST_CASE("sec_outer_prod produces the symmetric rank-one matrix") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    SecureRng rng(43);

    Eigen::VectorXd u(2);
    u << 2, 3;
    CipherMatrix z = sec_outer_prod(rig.channel, encrypt_at(rig, u, f));
    Eigen::MatrixXd got = decrypt_matrix(rig.keys.sk, rig.codec, z);
    Eigen::MatrixXd expected(2, 2);
    expected << 4, 6, 6, 9;
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-7);

    Eigen::VectorXd e0(2);
    e0 << 1, 0;
    Eigen::MatrixXd basis =
        decrypt_matrix(rig.keys.sk, rig.codec, sec_outer_prod(rig.channel, encrypt_at(rig, e0, f)));
    CHECK(basis(0, 0) == doctest::Approx(1).epsilon(1e-7));
    CHECK(std::abs(basis(0, 1)) + std::abs(basis(1, 0)) + std::abs(basis(1, 1)) <= 1e-6);

    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd v = random_vec(3, rng, 5.0);
        Eigen::MatrixXd m =
            decrypt_matrix(rig.keys.sk, rig.codec, sec_outer_prod(rig.channel, encrypt_at(rig, v, f)));
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((m - v * v.transpose()).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("sec_mat_prod multiplies through the identity and random cases") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    SecureRng rng(44);

    Eigen::MatrixXd x(2, 2);
    x << 1.5, -2, 0.25, 3;
    CipherMatrix cx = encrypt_matrix(rig.keys.pk, rig.codec, x, rig.worker_rng);
    CipherMatrix ci =
        encrypt_matrix(rig.keys.pk, rig.codec, Eigen::MatrixXd::Identity(2, 2), rig.worker_rng);

    CipherMatrix prod = sec_mat_prod(rig.channel, cx, ci);
    CHECK(prod.scale == 2 * f);
    CHECK((decrypt_matrix(rig.keys.sk, rig.codec, prod) - x).cwiseAbs().maxCoeff() <= 1e-6);

    CipherMatrix zero = encrypt_matrix(rig.keys.pk, rig.codec, Eigen::MatrixXd::Zero(2, 2),
                                       rig.worker_rng);
    CHECK(decrypt_matrix(rig.keys.sk, rig.codec, sec_mat_prod(rig.channel, cx, zero))
              .cwiseAbs()
              .maxCoeff() <= 1e-6);

    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd a(2, 2), b(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                a(i, j) = rng.uniform01() * 4 - 2;
                b(i, j) = rng.uniform01() * 4 - 2;
            }
        CipherMatrix out = sec_mat_prod(rig.channel,
                                        encrypt_matrix(rig.keys.pk, rig.codec, a, rig.worker_rng),
                                        encrypt_matrix(rig.keys.pk, rig.codec, b, rig.worker_rng));
        CHECK((decrypt_matrix(rig.keys.sk, rig.codec, out) - a * b).cwiseAbs().maxCoeff() <= 1e-4);
    }

    CHECK_THROWS_AS(sec_mat_prod(rig.channel, cx, encrypt_matrix(rig.keys.pk, rig.codec,
                                                                 Eigen::MatrixXd::Zero(3, 2),
                                                                 rig.worker_rng)),
                    std::invalid_argument);
}

TEST_CASE("rescale drops the scale with round-half-up") {
    test::TwoPartyRig rig;
    SecureRng rng(45);

    // 1.0 at scale 64 -> scale 32, exactly
    Ciphertext one = encrypt(rig.keys.pk, rig.codec.encode_at(1.0, 64), rig.worker_rng, 64);
    Ciphertext dropped = rescale(rig.channel, one, 32);
    CHECK(dropped.scale == 32);
    CHECK(rig.codec.decode(decrypt(rig.keys.sk, dropped), 32) == 1.0);

    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        double v = (rng.uniform01() * 2 - 1) * 1000.0;
        Ciphertext c = encrypt(rig.keys.pk, rig.codec.encode_at(v, 64), rig.worker_rng, 64);
        Ciphertext r = rescale(rig.channel, c, 32);
        double back = rig.codec.decode(decrypt(rig.keys.sk, r), 32);
        double reference = rig.codec.decode(rig.codec.encode_at(v, 64), 64);
        worst = std::max(worst, std::abs(back - reference));
    }
    CHECK(worst <= std::ldexp(1.0, -32));

    CHECK_THROWS_AS(rescale(rig.channel, dropped, 32), std::invalid_argument);
    CHECK_THROWS_AS(rescale(rig.channel, dropped, 40), std::invalid_argument);
}

TEST_CASE("sm_add sums exactly over the ring") {
    test::TwoPartyRig rig;
    SecureRng rng(46);
    const PublicKey& pk = rig.keys.pk;

    // three parties with scalar values 1, 2, 3
    std::vector<std::string> names;
    std::vector<CipherVector> values;
    for (int p = 0; p < 3; ++p) {
        std::string name = "party" + std::to_string(p);
        names.push_back(name);
        CipherVector v;
        v.scale = 0;
        v.values.push_back(encrypt(pk, p + 1, rig.worker_rng).value);
        values.push_back(std::move(v));
    }
    for (int p = 0; p < 3; ++p)
        rig.bus.register_party(names[static_cast<size_t>(p)],
                               [&, p](const std::string& step, const std::vector<uint8_t>& payload) {
                                   REQUIRE(step == "smadd.forward");
                                   return smadd_forward(rig.bus, names[static_cast<size_t>(p)],
                                                        "smadd", pk, values[static_cast<size_t>(p)],
                                                        payload);
                               });

    SecureRng coord_rng(47);
    CipherVector total = sm_add(rig.bus, "keyholder", pk, coord_rng, names, "smadd", "v", 1, 0);
    CHECK(decrypt(rig.keys.sk, total.at(0)) == 6);

    // single party: its own value
    CipherVector single = sm_add(rig.bus, "keyholder", pk, coord_rng,
                                 std::span<const std::string>(names.data(), 1), "smadd", "v", 1, 0);
    CHECK(decrypt(rig.keys.sk, single.at(0)) == 1);

    // five parties, random vectors, exact in the integer domain
    std::vector<std::string> many;
    std::vector<CipherVector> vecs;
    std::vector<Bigint> expected(4, 0);
    for (int p = 0; p < 5; ++p) {
        std::string name = "vecparty" + std::to_string(p);
        many.push_back(name);
        CipherVector v;
        v.scale = 0;
        for (int i = 0; i < 4; ++i) {
            Bigint x = rng.below(pk.n);
            expected[static_cast<size_t>(i)] = (expected[static_cast<size_t>(i)] + x) % pk.n;
            v.values.push_back(encrypt(pk, x, rig.worker_rng).value);
        }
        vecs.push_back(std::move(v));
    }
    for (int p = 0; p < 5; ++p)
        rig.bus.register_party(many[static_cast<size_t>(p)],
                               [&, p](const std::string&, const std::vector<uint8_t>& payload) {
                                   return smadd_forward(rig.bus, many[static_cast<size_t>(p)],
                                                        "smadd", pk, vecs[static_cast<size_t>(p)],
                                                        payload);
                               });
    CipherVector vec_total = sm_add(rig.bus, "keyholder", pk, coord_rng, many, "smadd", "v", 4, 0);
    for (int i = 0; i < 4; ++i)
        CHECK(decrypt(rig.keys.sk, vec_total.at(i)) == expected[static_cast<size_t>(i)]);

    // a missing party breaks the ring
    std::vector<std::string> broken = {names[0], "ghost"};
    CHECK_THROWS_AS(sm_add(rig.bus, "keyholder", pk, coord_rng, broken, "smadd", "v", 1, 0),
                    std::runtime_error);
}

TEST_CASE("newton_schulz scalar recurrence from a fixed start") {
    // A = 2I, V0 = 0.25I. The scalar recurrence v <- v(3 - 2v(3 - 2v))
    // gives 7/16 then 511/1024, converging to 1/2.
    Eigen::MatrixXd a = 2 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd v0 = 0.25 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd v1 = newton_schulz_inverse(a, 1, v0);
    CHECK(v1(0, 0) == doctest::Approx(0.4375).epsilon(1e-15));
    Eigen::MatrixXd v2 = newton_schulz_inverse(a, 2, v0);
    CHECK(v2(0, 0) == doctest::Approx(0.4990234375).epsilon(1e-15));
    Eigen::MatrixXd v8 = newton_schulz_inverse(a, 8, v0);
    CHECK(v8(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(v8(0, 1)) <= 1e-15);
}

TEST_CASE("newton_schulz identity is a fixed point") {
    Eigen::MatrixXd i3 = Eigen::MatrixXd::Identity(3, 3);
    CHECK((newton_schulz_inverse(i3, 5, i3) - i3).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("newton_schulz inverts well-conditioned SPD matrices") {
    SecureRng rng(48);
    for (int trial = 0; trial < 25; ++trial) {
        int d = 2 + static_cast<int>(rng.next_u64() % 3);  // up to 4x4
        Eigen::MatrixXd a = random_spd(d, 50.0, rng);
        Eigen::MatrixXd v = newton_schulz_inverse(a, 32);
        CHECK((v * a - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-3);
    }
}

TEST_CASE("newton_schulz residual contracts after the first step") {
    SecureRng rng(49);
    Eigen::MatrixXd a = random_spd(4, 30.0, rng);
    double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    double norminf = a.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::MatrixXd v = a.transpose() / (norm1 * norminf);
    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(4, 4);
    double residual = (v * a - identity).norm();
    CHECK(residual < 1.0);
    for (int k = 0; k < 12; ++k) {
        v = newton_schulz_inverse(a, 1, v);
        double next = (v * a - identity).norm();
        CHECK(next <= residual + 1e-12);
        residual = next;
    }
}

TEST_CASE("sec_inv inverts an encrypted SPD matrix") {
    test::TwoPartyRig rig;
    SecureRng rng(50);
    Eigen::MatrixXd a = random_spd(2, 5.0, rng);
    CipherMatrix enc = encrypt_matrix(rig.keys.pk, rig.codec, a, rig.worker_rng);
    CipherMatrix inv = sec_inv(rig.channel, enc, 16);
    Eigen::MatrixXd got = decrypt_matrix(rig.keys.sk, rig.codec, inv);
    CHECK((got * a - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-2);

    CipherMatrix not_square;
    not_square.rows = 2;
    not_square.cols = 3;
    CHECK_THROWS_AS(sec_inv(rig.channel, not_square, 4), std::invalid_argument);
}

TEST_CASE("sec_scalar_recip inverts a positive encrypted scalar") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    SecureRng rng(51);
    for (double t : {0.5, 3.0, 117.25}) {
        Ciphertext enc = encrypt(rig.keys.pk, rig.codec.encode(t), rig.worker_rng, f);
        Ciphertext rec = sec_scalar_recip(rig.channel, enc);
        CHECK(rig.codec.decode(decrypt(rig.keys.sk, rec), rec.scale) ==
              doctest::Approx(1.0 / t).epsilon(1e-5));
    }
    (void)rng;
}

TEST_CASE("scale bookkeeping follows the documented ledger") {
    test::TwoPartyRig rig;
    unsigned f = rig.codec.fraction_bits();
    SecureRng rng(52);

    for (int trial = 0; trial < 10; ++trial) {
        uint32_t s1 = f + static_cast<uint32_t>(rng.next_u64() % 8);
        uint32_t s2 = f - static_cast<uint32_t>(rng.next_u64() % 8);
        Eigen::VectorXd x = random_vec(2, rng, 2.0), y = random_vec(2, rng, 2.0);
        CipherVector cx = encrypt_at(rig, x, s1), cy = encrypt_at(rig, y, s2);

        CipherVector prod = sec_elem_prod(rig.channel, cx, cy);
        CHECK(prod.scale == s1 + s2);
        CHECK(sec_inner_prod(rig.channel, cx, cy).scale == s1 + s2);
        CHECK(sec_outer_prod(rig.channel, cx).scale == 2 * s1);

        uint32_t target = s2 - 1;
        CHECK(rescale(rig.channel, prod, target).scale == target);
        CHECK(local_inner_prod(rig.keys.pk, rig.codec, x, cy).scale == s2 + f);
    }
}
