#include "secrado/fixed_point.hpp"

#include <cmath>

namespace secrado {

FixedPointCodec::FixedPointCodec(unsigned fraction_bits, Bigint modulus, unsigned magnitude_bits)
    : fraction_bits_(fraction_bits),
      magnitude_bits_(magnitude_bits),
      modulus_(std::move(modulus)),
      half_modulus_(modulus_ / 2) {
    if (fraction_bits_ == 0) throw std::invalid_argument("codec: fraction_bits must be positive");
    if (max_scale() > 255) throw std::invalid_argument("codec: scale budget exceeds u8 wire field");
    if (pow2(2 * fraction_bits_ + magnitude_bits_) * 2 >= modulus_)
        throw std::invalid_argument("codec: 2^(2f+magnitude) must stay below n/2");
}

Bigint FixedPointCodec::encode_at(double v, uint32_t scale) const {
    if (!std::isfinite(v)) throw std::invalid_argument("encode: value not finite");
    if (scale > max_scale()) throw std::out_of_range("encode: scale beyond budget");
    // mpf carries the full double mantissa through the 2^scale shift.
    mpf_class shifted(std::abs(v), 128);
    mpf_mul_2exp(shifted.get_mpf_t(), shifted.get_mpf_t(), scale);
    shifted += 0.5;
    Bigint magnitude;
    mpz_set_f(magnitude.get_mpz_t(), shifted.get_mpf_t());  // truncates: floor(|v|*2^s + 0.5)
    if (2 * magnitude >= modulus_)
        throw std::overflow_error("encode: value exceeds the ring working range");
    if (v < 0 && magnitude != 0) return modulus_ - magnitude;
    return magnitude;
}

double FixedPointCodec::decode(const Bigint& m, uint32_t scale) const {
    if (m < 0 || m >= modulus_) throw std::out_of_range("decode: ring value outside [0, n)");
    double magnitude;
    if (m > half_modulus_) {
        Bigint neg = modulus_ - m;
        magnitude = -mpz_get_d(neg.get_mpz_t());
    } else {
        magnitude = mpz_get_d(m.get_mpz_t());
    }
    return std::ldexp(magnitude, -static_cast<int>(scale));
}

CipherVector encrypt_vector(const PublicKey& pk, const FixedPointCodec& codec,
                            const Eigen::VectorXd& values, SecureRng& rng) {
    return encrypt_vector_at(pk, codec, values, codec.fraction_bits(), rng);
}

CipherVector encrypt_vector_at(const PublicKey& pk, const FixedPointCodec& codec,
                               const Eigen::VectorXd& values, uint32_t scale, SecureRng& rng) {
    CipherVector out;
    out.scale = scale;
    out.values.reserve(static_cast<size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i)
        out.values.push_back(encrypt(pk, codec.encode_at(values[i], scale), rng, scale).value);
    return out;
}

Eigen::VectorXd decrypt_vector(const SecretKey& sk, const FixedPointCodec& codec,
                               const CipherVector& v) {
    Eigen::VectorXd out(v.size());
    for (int i = 0; i < v.size(); ++i) out[i] = codec.decode(decrypt(sk, v.at(i)), v.scale);
    return out;
}

CipherMatrix encrypt_matrix(const PublicKey& pk, const FixedPointCodec& codec,
                            const Eigen::MatrixXd& values, SecureRng& rng) {
    CipherMatrix out;
    out.rows = static_cast<int>(values.rows());
    out.cols = static_cast<int>(values.cols());
    out.scale = codec.fraction_bits();
    out.values.reserve(static_cast<size_t>(values.size()));
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c)
            out.values.push_back(
                encrypt(pk, codec.encode(values(r, c)), rng, out.scale).value);
    return out;
}

Eigen::MatrixXd decrypt_matrix(const SecretKey& sk, const FixedPointCodec& codec,
                               const CipherMatrix& m) {
    Eigen::MatrixXd out(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            out(r, c) = codec.decode(decrypt(sk, m.cipher_at(r, c)), m.scale);
    return out;
}

}  // namespace secrado
