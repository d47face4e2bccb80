#include "secrado/enc_rado.hpp"

namespace secrado {

std::pair<CipherMatrix, CipherVector> encrypt_dataset(const PublicKey& pk,
                                                      const FixedPointCodec& codec,
                                                      const Dataset& ds, SecureRng& rng) {
    ds.validate();
    CipherMatrix enc_x = encrypt_matrix(pk, codec, ds.X, rng);
    CipherVector enc_y;
    enc_y.scale = 0;
    enc_y.values.reserve(static_cast<size_t>(ds.m()));
    for (int i = 0; i < ds.m(); ++i) {
        Bigint label = ds.y[i] > 0 ? Bigint(1) : pk.n - 1;
        enc_y.values.push_back(encrypt(pk, label, rng).value);
    }
    return {std::move(enc_x), std::move(enc_y)};
}

CipherVector encrypted_rado(SecureChannel& ch, const CipherMatrix& enc_x,
                            const CipherVector& enc_y, const Signature& sigma,
                            bool encrypt_sigma) {
    sigma.validate();
    if (enc_x.rows != sigma.size() || enc_y.size() != sigma.size())
        throw std::invalid_argument("encrypted_rado: row/signature/label count mismatch");
    if (enc_y.scale != 0)
        throw ScaleMismatchError("encrypted_rado: labels must be scale-0 integers");

    const PublicKey& pk = ch.pk;
    CipherVector phi;
    phi.scale = 0;
    phi.values.reserve(static_cast<size_t>(sigma.size()));
    for (int i = 0; i < sigma.size(); ++i) {
        Bigint s = sigma.entries[static_cast<size_t>(i)] > 0 ? Bigint(1) : pk.n - 1;
        Ciphertext enc_s =
            encrypt_sigma ? encrypt(pk, s, *ch.rng) : encrypt_deterministic(pk, s);
        phi.values.push_back(hom_add(pk, enc_s, enc_y.at(i)).value);
    }
    // 1/2 factor: bump the scale exponent instead of multiplying by an
    // encoded 0.5, so (sigma_i + y_i)/2 stays exact in {-1, 0, 1}.
    phi.scale = 1;

    CipherVector pi;
    pi.scale = phi.scale + enc_x.scale;
    pi.values.reserve(static_cast<size_t>(enc_x.cols));
    for (int j = 0; j < enc_x.cols; ++j)
        pi.values.push_back(sec_inner_prod(ch, phi, enc_x.col(j)).value);
    return pi;
}

}  // namespace secrado
