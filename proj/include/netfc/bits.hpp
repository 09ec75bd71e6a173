#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

// Bit-exact codecs for the two 16-bit operand formats: IEEE 754 half
// precision and posit16 (es = 1).  Decoding goes through an 80-bit long
// double, which holds every representable value of either format exactly;
// it is used at table-build time only, never on the emulated datapath.

namespace netfc {

enum class Format : std::uint8_t { Float16 = 0, Posit16 = 1 };

inline const char* format_name(Format f) {
    return f == Format::Float16 ? "float16" : "posit16";
}

struct Bits16 {
    std::uint16_t raw = 0;
    Format kind = Format::Float16;

    friend bool operator==(const Bits16&, const Bits16&) = default;
};

enum class NumClass : std::uint8_t { Zero, Subnormal, Normal, Infinity, NaN, NaR };

struct Decoded {
    NumClass cls = NumClass::Zero;
    bool negative = false;
    long double value = 0.0L;  // exact for Zero/Subnormal/Normal; NaN/Inf/NaR carry the IEEE analog

    bool finite_nonzero() const {
        return cls == NumClass::Subnormal || cls == NumClass::Normal;
    }
};

// 15-bit magnitude pattern; integer ordering equals |value| ordering within a format.
using Mag15 = std::uint16_t;

enum class Ordering : std::int8_t { LT = -1, EQ = 0, GT = 1 };

namespace f16 {

inline constexpr std::uint16_t sign_mask = 0x8000;
inline constexpr std::uint16_t pos_inf = 0x7C00;
inline constexpr std::uint16_t neg_inf = 0xFC00;
inline constexpr std::uint16_t quiet_nan = 0x7E00;
inline constexpr std::uint16_t max_finite = 0x7BFF;  // 65504
inline constexpr long double max_value = 65504.0L;

inline Decoded decode(std::uint16_t raw) {
    Decoded d;
    d.negative = (raw & sign_mask) != 0;
    const unsigned e = (raw >> 10) & 0x1F;
    const unsigned f = raw & 0x3FF;
    if (e == 0) {
        if (f == 0) {
            d.cls = NumClass::Zero;
            d.value = d.negative ? -0.0L : 0.0L;
        } else {
            d.cls = NumClass::Subnormal;
            d.value = std::ldexp(static_cast<long double>(f), -24);
            if (d.negative) d.value = -d.value;
        }
    } else if (e == 31) {
        if (f == 0) {
            d.cls = NumClass::Infinity;
            d.value = d.negative ? -HUGE_VALL : HUGE_VALL;
        } else {
            d.cls = NumClass::NaN;
            d.value = std::nanl("");
        }
    } else {
        d.cls = NumClass::Normal;
        d.value = std::ldexp(static_cast<long double>(1024 + f), static_cast<int>(e) - 25);
        if (d.negative) d.value = -d.value;
    }
    return d;
}

// Round-to-nearest-even.  Overflow goes to infinity at the usual 65520
// midpoint; the tiny end underflows through the subnormals to zero.
inline std::uint16_t encode_nearest(long double v) {
    if (std::isnan(v)) return quiet_nan;
    const std::uint16_t s = std::signbit(v) ? sign_mask : 0;
    if (std::isinf(v)) return s | pos_inf;
    long double a = std::fabs(v);
    if (a == 0.0L) return s;
    if (a >= 65520.0L) return s | pos_inf;
    int e = std::ilogb(a);
    if (e < -14) {
        // subnormal lane: round a / 2^-24 to an integer significand
        const auto q = static_cast<std::uint32_t>(std::llrint(std::ldexp(a, 24)));
        return s | static_cast<std::uint16_t>(q);  // q == 1024 lands on the min normal
    }
    auto sig = static_cast<std::uint32_t>(std::llrint(std::ldexp(a, 10 - e)));
    if (sig == 2048) {
        sig = 1024;
        ++e;
    }
    if (e > 15) return s | pos_inf;
    return s | static_cast<std::uint16_t>(((e + 15) << 10) | (sig - 1024));
}

}  // namespace f16

namespace p16 {

// es = 1, so useed = 4 and the value is 4^k * 2^e * 1.f.
inline constexpr std::uint16_t nar = 0x8000;
inline constexpr std::uint16_t maxpos = 0x7FFF;  // 2^28
inline constexpr std::uint16_t minpos = 0x0001;  // 2^-28
inline constexpr int log2_range = 28;

inline Decoded decode(std::uint16_t raw) {
    Decoded d;
    if (raw == 0) {
        d.cls = NumClass::Zero;
        return d;
    }
    if (raw == nar) {
        d.cls = NumClass::NaR;
        d.value = std::nanl("");
        return d;
    }
    d.negative = (raw & 0x8000) != 0;
    const std::uint16_t mag = d.negative ? static_cast<std::uint16_t>(-raw) : raw;
    const bool rbit = (mag >> 14) & 1;
    int pos = 14;
    int run = 0;
    while (pos >= 0 && (((mag >> pos) & 1) != 0) == rbit) {
        ++run;
        --pos;
    }
    --pos;  // skip the terminating bit when present
    const int k = rbit ? run - 1 : -run;
    int e = 0;
    if (pos >= 0) {
        e = (mag >> pos) & 1;
        --pos;
    }
    const int fw = pos >= 0 ? pos + 1 : 0;
    const std::uint32_t frac = fw > 0 ? (mag & ((1u << fw) - 1)) : 0;
    long double f = 1.0L + std::ldexp(static_cast<long double>(frac), -fw);
    d.cls = NumClass::Normal;
    d.value = std::ldexp(f, 2 * k + e);
    if (d.negative) d.value = -d.value;
    return d;
}

// Nearest with ties-to-even on the posit pattern.  Posit never rounds a
// nonzero value to zero or past maxpos: both ends saturate.
inline std::uint16_t encode_nearest(long double v) {
    if (std::isnan(v)) return nar;
    if (v == 0.0L) return 0;
    const bool neg = std::signbit(v);
    long double a = std::fabs(v);
    std::uint16_t mag;
    if (a >= std::ldexp(1.0L, log2_range)) {
        mag = maxpos;
    } else if (a <= std::ldexp(1.0L, -log2_range)) {
        mag = minpos;
    } else {
        int e2 = 0;
        const long double m = std::frexp(a, &e2);  // a = m * 2^e2, m in [0.5, 1)
        const int scale = e2 - 1;                  // a = (2m) * 2^scale, 2m in [1, 2)
        const int k = (scale >= 0) ? scale / 2 : -((-scale + 1) / 2);
        const int e = scale - 2 * k;               // in {0, 1}
        // significand as a 64-bit integer: bit 63 is the implicit one
        const auto sig = static_cast<std::uint64_t>(std::ldexp(m, 64));
        // assemble regime | e | fraction into a wide bit string, then round
        // to the 15 bits available after the sign
        unsigned __int128 str = 0;
        int len = 0;
        if (k >= 0) {
            str = (static_cast<unsigned __int128>(1) << (k + 2)) - 2;  // k+1 ones, one zero
            len = k + 2;
        } else {
            str = 1;  // -k zeroes, one one
            len = -k + 1;
        }
        str = (str << 1) | static_cast<unsigned>(e);
        ++len;
        str = (str << 63) | (sig & ((std::uint64_t{1} << 63) - 1));
        len += 63;
        const int cut = len - 15;
        auto keep = static_cast<std::uint32_t>(str >> cut);
        const bool guard = ((str >> (cut - 1)) & 1) != 0;
        const bool sticky = (str & ((static_cast<unsigned __int128>(1) << (cut - 1)) - 1)) != 0;
        if (guard && (sticky || (keep & 1))) ++keep;
        if (keep > maxpos) keep = maxpos;  // carry past the top regime saturates
        if (keep == 0) keep = minpos;
        mag = static_cast<std::uint16_t>(keep);
    }
    return neg ? static_cast<std::uint16_t>(-mag) : mag;
}

}  // namespace p16

inline Decoded decode(Bits16 b) {
    return b.kind == Format::Float16 ? f16::decode(b.raw) : p16::decode(b.raw);
}

inline Bits16 encode_nearest(long double v, Format kind) {
    const std::uint16_t raw =
        kind == Format::Float16 ? f16::encode_nearest(v) : p16::encode_nearest(v);
    return Bits16{raw, kind};
}

// Magnitude pattern of a finite nonzero operand; the logTable key.
inline Mag15 magnitude_bits(Bits16 b) {
    if (b.kind == Format::Float16) {
        const unsigned e = (b.raw >> 10) & 0x1F;
        if (e == 31 || (b.raw & 0x7FFF) == 0)
            throw std::invalid_argument("magnitude_bits: operand is not finite nonzero");
        return b.raw & 0x7FFF;
    }
    if (b.raw == 0 || b.raw == p16::nar)
        throw std::invalid_argument("magnitude_bits: operand is not finite nonzero");
    const bool neg = (b.raw & 0x8000) != 0;
    return neg ? static_cast<std::uint16_t>(-b.raw) : b.raw;
}

inline Ordering compare_magnitude(Bits16 a, Bits16 b) {
    if (a.kind != b.kind)
        throw std::invalid_argument("compare_magnitude: mixed formats");
    const Mag15 ma = magnitude_bits(a);
    const Mag15 mb = magnitude_bits(b);
    if (ma < mb) return Ordering::LT;
    if (ma > mb) return Ordering::GT;
    return Ordering::EQ;
}

inline bool sign_bit(Bits16 b) { return (b.raw & 0x8000) != 0; }

inline bool is_zero(Bits16 b) {
    return b.kind == Format::Float16 ? (b.raw & 0x7FFF) == 0 : b.raw == 0;
}

// Flip the sign of a value; posit zero and NaR map to themselves.
inline Bits16 negate(Bits16 b) {
    if (b.kind == Format::Float16) return Bits16{static_cast<std::uint16_t>(b.raw ^ 0x8000), b.kind};
    return Bits16{static_cast<std::uint16_t>(-b.raw), b.kind};
}

// Attach a sign to a positive magnitude pattern.
inline Bits16 apply_sign(std::uint16_t mag, bool negative, Format kind) {
    if (kind == Format::Float16)
        return Bits16{static_cast<std::uint16_t>(mag | (negative ? 0x8000 : 0)), kind};
    return Bits16{negative ? static_cast<std::uint16_t>(-mag) : mag, kind};
}

inline Bits16 zero_bits(Format kind, bool negative = false) {
    if (kind == Format::Float16) return Bits16{negative ? f16::sign_mask : std::uint16_t{0}, kind};
    return Bits16{0, kind};  // posit has a single zero
}

inline Bits16 nan_bits(Format kind) {
    return kind == Format::Float16 ? Bits16{f16::quiet_nan, kind} : Bits16{p16::nar, kind};
}

inline std::uint16_t parse_u16_hex(const std::string& s);  // table_io.hpp

}  // namespace netfc
