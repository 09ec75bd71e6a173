#pragma once

// Reference computations for table verification, kept independent of the
// library's build path: 16-bit patterns are re-decoded here from scratch
// into (significand, exponent) pairs, and every transcendental runs in
// 256-bit MPFR instead of long double.

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>

namespace oracle {

inline constexpr mpfr_prec_t kPrec = 256;

// float16 pattern -> value = sig * 2^exp (finite nonzero only)
inline bool f16_parts(std::uint16_t raw, long& sig, long& exp) {
    const unsigned e = (raw >> 10) & 0x1F;
    const unsigned f = raw & 0x3FF;
    const bool neg = (raw & 0x8000) != 0;
    if (e == 31) return false;
    if (e == 0) {
        if (f == 0) return false;
        sig = static_cast<long>(f);
        exp = -24;
    } else {
        sig = static_cast<long>(1024 + f);
        exp = static_cast<long>(e) - 25;
    }
    if (neg) sig = -sig;
    return true;
}

// posit16 (es = 1) pattern -> value = sig * 2^exp (finite nonzero only)
inline bool p16_parts(std::uint16_t raw, long& sig, long& exp) {
    if (raw == 0 || raw == 0x8000) return false;
    const bool neg = (raw & 0x8000) != 0;
    const std::uint16_t mag = neg ? static_cast<std::uint16_t>(0x10000 - raw) : raw;
    // walk the 15 bits below the sign as a string
    int idx = 14;
    const int first = (mag >> 14) & 1;
    int run = 0;
    while (idx >= 0 && ((mag >> idx) & 1) == first) {
        ++run;
        --idx;
    }
    --idx;  // terminator
    const int k = first ? run - 1 : -run;
    int e = 0;
    if (idx >= 0) {
        e = (mag >> idx) & 1;
        --idx;
    }
    const int fw = idx >= 0 ? idx + 1 : 0;
    const long frac = fw > 0 ? static_cast<long>(mag & ((1u << fw) - 1)) : 0;
    sig = (1L << fw) + frac;       // 1.frac scaled by 2^fw
    exp = 2L * k + e - fw;
    if (neg) sig = -sig;
    return true;
}

class Real {
  public:
    Real() { mpfr_init2(v_, kPrec); }
    ~Real() { mpfr_clear(v_); }
    Real(const Real&) = delete;
    Real& operator=(const Real&) = delete;
    mpfr_ptr get() { return v_; }

  private:
    mpfr_t v_;
};

// floor(k * log2(sig * 2^exp)) for positive sig
inline std::int32_t scaled_log_floor(long sig, long exp, int k) {
    Real x, l;
    mpfr_set_si(x.get(), sig, MPFR_RNDN);
    mpfr_mul_2si(x.get(), x.get(), exp, MPFR_RNDN);
    mpfr_log2(l.get(), x.get(), MPFR_RNDN);
    mpfr_mul_si(l.get(), l.get(), k, MPFR_RNDN);
    mpfr_floor(l.get(), l.get());
    return static_cast<std::int32_t>(mpfr_get_si(l.get(), MPFR_RNDN));
}

// floor(k * log2(|s1 + s2 * 2^(theta/k)|)) with s1, s2 in {-1, +1}
inline std::int32_t scaled_sigma_floor(int s1, int s2, std::int32_t theta, int k) {
    Real t, p, l;
    mpfr_set_si(t.get(), theta, MPFR_RNDN);
    mpfr_div_si(t.get(), t.get(), k, MPFR_RNDN);
    mpfr_exp2(p.get(), t.get(), MPFR_RNDN);
    if (s2 < 0) mpfr_neg(p.get(), p.get(), MPFR_RNDN);
    mpfr_add_si(p.get(), p.get(), s1, MPFR_RNDN);
    mpfr_log2(l.get(), p.get(), MPFR_RNDN);
    mpfr_mul_si(l.get(), l.get(), k, MPFR_RNDN);
    mpfr_floor(l.get(), l.get());
    return static_cast<std::int32_t>(mpfr_get_si(l.get(), MPFR_RNDN));
}

// 2^(n/k) rounded to float16, nearest-even, in integer significand space
inline std::uint16_t exp_entry_f16(std::int32_t n, int k) {
    Real t, v, s;
    mpfr_set_si(t.get(), n, MPFR_RNDN);
    mpfr_div_si(t.get(), t.get(), k, MPFR_RNDN);
    mpfr_exp2(v.get(), t.get(), MPFR_RNDN);
    const long E = mpfr_get_exp(v.get()) - 1;  // v = m * 2^(E+1), m in [0.5, 1)
    long sig;
    if (E < -14) {
        mpfr_mul_2si(s.get(), v.get(), 24, MPFR_RNDN);
        mpfr_rint(s.get(), s.get(), MPFR_RNDN);  // ties to even
        sig = mpfr_get_si(s.get(), MPFR_RNDN);
        if (sig < 1024) return static_cast<std::uint16_t>(sig);
        return 0x0400;
    }
    mpfr_mul_2si(s.get(), v.get(), 10 - E, MPFR_RNDN);
    mpfr_rint(s.get(), s.get(), MPFR_RNDN);
    sig = mpfr_get_si(s.get(), MPFR_RNDN);
    long e2 = E;
    if (sig == 2048) {
        sig = 1024;
        ++e2;
    }
    if (e2 > 15) return 0x7C00;
    return static_cast<std::uint16_t>(((e2 + 15) << 10) | (sig - 1024));
}

// 2^(n/k) as a correctly rounded long double (for posit expTable checks)
inline long double exp_value_ld(std::int32_t n, int k) {
    Real t, v;
    mpfr_set_si(t.get(), n, MPFR_RNDN);
    mpfr_div_si(t.get(), t.get(), k, MPFR_RNDN);
    mpfr_exp2(v.get(), t.get(), MPFR_RNDN);
    return mpfr_get_ld(v.get(), MPFR_RNDN);
}

}  // namespace oracle
