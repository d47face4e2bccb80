#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace secrado {

using Bigint = mpz_class;

inline Bigint powmod(const Bigint& base, const Bigint& exp, const Bigint& mod) {
    Bigint out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return out;
}

inline Bigint invmod(const Bigint& a, const Bigint& mod) {
    Bigint out;
    if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw std::domain_error("invmod: value not invertible");
    return out;
}

inline Bigint lcm(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return out;
}

inline Bigint gcd(const Bigint& a, const Bigint& b) {
    Bigint out;
    mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return out;
}

inline size_t bit_length(const Bigint& v) {
    return mpz_sizeinbase(v.get_mpz_t(), 2);
}

inline Bigint pow2(unsigned long k) {
    Bigint out;
    mpz_ui_pow_ui(out.get_mpz_t(), 2, k);
    return out;
}

}  // namespace secrado
