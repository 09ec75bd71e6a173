#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "netfc/bits.hpp"

// The float-to-integer comparison method: hosts convert operands with a
// scaling factor, the switch adds 16-bit lanes with two's-complement
// wraparound, the receiver divides the factor back out.  Conversion
// truncates toward zero (the fractional remainder is the part "lost on the
// wire").  Wraparound is the modeled failure mode, not an error.

namespace netfc {

struct BaselineConfig {
    std::int64_t sf = 10000;
};

inline std::int16_t baseline_lane(double v, const BaselineConfig& cfg) {
    const double scaled = std::trunc(std::fabs(v) * static_cast<double>(cfg.sf));
    auto wide = static_cast<std::int64_t>(scaled);
    if (v < 0) wide = -wide;
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(wide & 0xFFFF));
}

inline double baseline_add(Bits16 x, Bits16 y, const BaselineConfig& cfg) {
    if (x.kind != Format::Float16 || y.kind != Format::Float16)
        throw std::invalid_argument("baseline_add: float16 operands only");
    const std::int16_t ix = baseline_lane(static_cast<double>(decode(x).value), cfg);
    const std::int16_t iy = baseline_lane(static_cast<double>(decode(y).value), cfg);
    const auto sum = static_cast<std::int16_t>(
        static_cast<std::uint16_t>((static_cast<std::int32_t>(ix) + iy) & 0xFFFF));
    return static_cast<double>(sum) / static_cast<double>(cfg.sf);
}

inline double baseline_sub(Bits16 x, Bits16 y, const BaselineConfig& cfg) {
    return baseline_add(x, negate(y), cfg);
}

}  // namespace netfc
