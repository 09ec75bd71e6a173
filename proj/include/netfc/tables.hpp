#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "netfc/bits.hpp"

// Lookup-table generation for the match-action datapath.  One TableSet per
// (format, scaling factor k) holds:
//
//   logX/logY   magnitude pattern -> floor(log2(|v|) * k)       (two copies)
//   miAdd       theta -> floor(log2(1 + 2^(theta/k)) * k)
//   miSubPos    theta -> floor(log2(1 - 2^(theta/k)) * k), theta <= 0
//   miSubNeg    theta -> floor(log2(2^(theta/k) - 1) * k), theta >= 0
//   exp         n -> 16-bit encoding of 2^(n/k)
//   decision    (sign x, sign y, |x|>|y|) -> (mi variant, result sign)
//
// Key lanes are the smallest power-of-two two's-complement ranges that hold
// the live domain; the pad slots carry out-of-range sentinels and count as
// entries, which reproduces the hardware SRAM accounting (2 bytes/entry,
// 229,376 entries = 448 KiB for float16 at k = 1024).

namespace netfc {

enum class TableId : std::uint8_t { LogX, LogY, MiAdd, MiSubPos, MiSubNeg, Exp, Decision };

inline const char* table_name(TableId id) {
    switch (id) {
        case TableId::LogX: return "logx";
        case TableId::LogY: return "logy";
        case TableId::MiAdd: return "miadd";
        case TableId::MiSubPos: return "misubpos";
        case TableId::MiSubNeg: return "misubneg";
        case TableId::Exp: return "exp";
        case TableId::Decision: return "decision";
    }
    return "?";
}

enum class MiVariant : std::uint8_t { Add = 0, SubPos = 1, SubNeg = 2 };

// 16-bit payload widened by a tag bit, so sentinels never collide with data.
struct TableValue {
    enum class Tag : std::uint8_t { Value, ResultZero, OutOfRangeLow, OutOfRangeHigh, Missing };
    Tag tag = Tag::Missing;
    std::int32_t value = 0;

    static TableValue of(std::int32_t v) { return {Tag::Value, v}; }
    static TableValue result_zero() { return {Tag::ResultZero, 0}; }
    static TableValue oor_low() { return {Tag::OutOfRangeLow, 0}; }
    static TableValue oor_high() { return {Tag::OutOfRangeHigh, 0}; }
    static TableValue missing() { return {Tag::Missing, 0}; }

    bool is_value() const { return tag == Tag::Value; }
    friend bool operator==(const TableValue&, const TableValue&) = default;
};

struct ExactTable {
    TableId id{};
    Format format{};
    int k = 0;
    int key_bits = 0;
    bool keys_signed = false;
    std::int32_t lane_min = 0;
    std::int32_t lane_max = -1;
    std::vector<TableValue> slots;

    std::size_t lane_size() const { return static_cast<std::size_t>(lane_max - lane_min + 1); }

    TableValue& slot(std::int32_t key) { return slots[static_cast<std::size_t>(key - lane_min)]; }
    const TableValue& slot(std::int32_t key) const {
        return slots[static_cast<std::size_t>(key - lane_min)];
    }

    // Keys beyond the lane behave like the adjacent out-of-range pad.
    TableValue lookup(std::int32_t key) const {
        if (key < lane_min) return TableValue::oor_low();
        if (key > lane_max) return TableValue::oor_high();
        return slot(key);
    }

    // Pruned (missing) slots are not stored rows.
    std::uint64_t entry_count() const {
        std::uint64_t n = 0;
        for (const auto& s : slots)
            if (s.tag != TableValue::Tag::Missing) ++n;
        return n;
    }
    std::uint64_t memory_bytes() const { return 2 * entry_count(); }

    // min/max over Value-tagged slots; false when none.
    bool value_range(std::int32_t& lo, std::int32_t& hi) const {
        bool any = false;
        for (const auto& s : slots) {
            if (!s.is_value()) continue;
            if (!any) {
                lo = hi = s.value;
                any = true;
            } else {
                lo = std::min(lo, s.value);
                hi = std::max(hi, s.value);
            }
        }
        return any;
    }
};

struct DecisionEntry {
    MiVariant variant = MiVariant::Add;
    bool negative = false;
};

inline std::int32_t pack_decision(DecisionEntry d) {
    return (static_cast<std::int32_t>(d.variant) << 1) | (d.negative ? 1 : 0);
}
inline DecisionEntry unpack_decision(std::int32_t v) {
    return {static_cast<MiVariant>(v >> 1), (v & 1) != 0};
}

// floor(log2(a) * k) in extended precision; exact on powers of two.
inline std::int32_t scaled_log_floor(long double a, int k) {
    int e = 0;
    const long double m = std::frexp(a, &e);
    if (m == 0.5L) return static_cast<std::int32_t>(e - 1) * k;
    return static_cast<std::int32_t>(std::floor(std::log2(a) * static_cast<long double>(k)));
}

inline bool is_power_of_two(int k) { return k >= 1 && (k & (k - 1)) == 0; }

inline void require_valid_k(int k) {
    if (!is_power_of_two(k))
        throw std::invalid_argument("scaling factor k must be a positive power of two");
}

// Scaled-log extremes of the finite nonzero values of a format.
inline std::int32_t min_scaled_log(Format f, int k) {
    return f == Format::Float16 ? -24 * k : -p16::log2_range * k;
}
inline std::int32_t max_scaled_log(Format f, int k) {
    return f == Format::Float16 ? scaled_log_floor(f16::max_value, k) : p16::log2_range * k;
}

// miTable domain half-width: corner cases shortcut past |theta| = 15k
// (float16) / 64k (posit16), so the tables never see keys beyond that.
inline std::int32_t mi_domain(Format f, int k) { return (f == Format::Float16 ? 15 : 64) * k; }

// Smallest two's-complement lane [-2^(b-1), 2^(b-1)-1] covering [lo, hi].
inline int signed_lane_bits(std::int32_t lo, std::int32_t hi) {
    int b = 2;
    while (-(std::int64_t{1} << (b - 1)) > lo || (std::int64_t{1} << (b - 1)) - 1 < hi) ++b;
    return b;
}

namespace detail {

inline ExactTable make_signed_lane(TableId id, Format f, int k, std::int32_t lo, std::int32_t hi) {
    ExactTable t;
    t.id = id;
    t.format = f;
    t.k = k;
    t.keys_signed = true;
    t.key_bits = signed_lane_bits(lo, hi);
    t.lane_min = -(std::int32_t{1} << (t.key_bits - 1));
    t.lane_max = (std::int32_t{1} << (t.key_bits - 1)) - 1;
    t.slots.resize(t.lane_size());
    return t;
}

}  // namespace detail

inline ExactTable build_log_table(TableId id, Format f, int k) {
    require_valid_k(k);
    ExactTable t;
    t.id = id;
    t.format = f;
    t.k = k;
    t.key_bits = 15;
    t.keys_signed = false;
    t.lane_min = 0;
    t.lane_max = 0x7FFF;
    t.slots.resize(t.lane_size());
    t.slot(0) = TableValue::oor_low();
    const std::int32_t top = f == Format::Float16 ? f16::max_finite : p16::maxpos;
    for (std::int32_t key = 1; key <= 0x7FFF; ++key) {
        if (key > top) {
            t.slot(key) = TableValue::oor_high();  // float16 inf/nan patterns
            continue;
        }
        const Decoded d = decode(Bits16{static_cast<std::uint16_t>(key), f});
        t.slot(key) = TableValue::of(scaled_log_floor(d.value, k));
    }
    return t;
}

namespace detail {

inline constexpr long double kLn2 = 0.693147180559945309417232121458176568L;

// floor(k * log2(1 + 2^(theta/k))) for theta <= 0; log1p keeps the tiny-x
// tail exact where 1 + x would collapse to 1
inline std::int32_t mi_add_neg_floor(std::int32_t theta, int k) {
    if (theta == 0) return k;  // log2(2) * k
    const long double x = std::exp2(static_cast<long double>(theta) / k);
    const long double g = std::log1p(x) / kLn2 * k;
    return static_cast<std::int32_t>(std::floor(g));
}

// floor(k * log2(1 - 2^(theta/k))) for theta < 0
inline std::int32_t mi_subpos_floor(std::int32_t theta, int k) {
    const long double x = std::exp2(static_cast<long double>(theta) / k);
    const long double g = std::log1p(-x) / kLn2 * k;
    return static_cast<std::int32_t>(std::floor(g));
}

}  // namespace detail

inline ExactTable build_mi_table(MiVariant variant, Format f, int k) {
    require_valid_k(k);
    const std::int32_t r = mi_domain(f, k);
    const TableId id = variant == MiVariant::Add      ? TableId::MiAdd
                       : variant == MiVariant::SubPos ? TableId::MiSubPos
                                                      : TableId::MiSubNeg;
    ExactTable t = detail::make_signed_lane(id, f, k, -r, r);
    const std::int32_t lo = variant == MiVariant::SubNeg ? 0 : -r;
    const std::int32_t hi = variant == MiVariant::SubPos ? 0 : r;
    for (std::int32_t key = t.lane_min; key <= t.lane_max; ++key) {
        if (key < lo) {
            t.slot(key) = TableValue::oor_low();
            continue;
        }
        if (key > hi) {
            t.slot(key) = TableValue::oor_high();
            continue;
        }
        if (key == 0 && variant != MiVariant::Add) {
            t.slot(key) = TableValue::result_zero();  // exact cancellation
            continue;
        }
        // positive half via the exact floored identity
        // k*log2(1 +- 2^(t/k)) = t + k*log2(+-1 + 2^(-t/k)) for integer t
        std::int32_t v = 0;
        switch (variant) {
            case MiVariant::Add:
                v = key <= 0 ? detail::mi_add_neg_floor(key, k)
                             : key + detail::mi_add_neg_floor(-key, k);
                break;
            case MiVariant::SubPos: v = detail::mi_subpos_floor(key, k); break;
            case MiVariant::SubNeg: v = key + detail::mi_subpos_floor(-key, k); break;
        }
        t.slot(key) = TableValue::of(v);
    }
    return t;
}

inline ExactTable build_exp_table(Format f, int k) {
    require_valid_k(k);
    const std::int32_t lo = min_scaled_log(f, k);
    const std::int32_t hi = max_scaled_log(f, k);
    ExactTable t = detail::make_signed_lane(TableId::Exp, f, k, lo, hi);
    const auto kk = static_cast<long double>(k);
    for (std::int32_t key = t.lane_min; key <= t.lane_max; ++key) {
        if (key < lo) {
            t.slot(key) = TableValue::oor_low();
            continue;
        }
        if (key > hi) {
            t.slot(key) = TableValue::oor_high();
            continue;
        }
        const Bits16 b = encode_nearest(std::exp2(static_cast<long double>(key) / kk), f);
        t.slot(key) = TableValue::of(b.raw);
    }
    return t;
}

// Table I, row for row; keyed by (x>0)<<2 | (y>0)<<1 | (|x|>|y|).
inline ExactTable build_decision_table(Format f, int k) {
    ExactTable t;
    t.id = TableId::Decision;
    t.format = f;
    t.k = k;
    t.key_bits = 3;
    t.keys_signed = false;
    t.lane_min = 0;
    t.lane_max = 7;
    t.slots.resize(8);
    const auto set = [&](bool xp, bool yp, bool gt, MiVariant v, bool neg) {
        t.slot((xp ? 4 : 0) | (yp ? 2 : 0) | (gt ? 1 : 0)) =
            TableValue::of(pack_decision({v, neg}));
    };
    set(true, true, true, MiVariant::Add, false);
    set(true, true, false, MiVariant::Add, false);
    set(true, false, true, MiVariant::SubPos, false);
    set(true, false, false, MiVariant::SubNeg, true);
    set(false, true, true, MiVariant::SubPos, true);
    set(false, true, false, MiVariant::SubNeg, false);
    set(false, false, true, MiVariant::Add, true);
    set(false, false, false, MiVariant::Add, true);
    return t;
}

struct TableSet {
    Format format = Format::Float16;
    int k = 0;
    ExactTable log_x, log_y, mi_add, mi_sub_pos, mi_sub_neg, exp, decision;

    // Corner thresholds on the scaled-log lane.
    std::int32_t dominant_threshold = 0;   // add/sub: |j - i| beyond this returns the big operand
    std::int32_t overflow_threshold = 0;   // mul/div: n above this saturates high
    std::int32_t underflow_threshold = 0;  // mul/div: n below this saturates low

    const ExactTable& mi(MiVariant v) const {
        switch (v) {
            case MiVariant::Add: return mi_add;
            case MiVariant::SubPos: return mi_sub_pos;
            case MiVariant::SubNeg: return mi_sub_neg;
        }
        return mi_add;
    }

    DecisionEntry decide(bool x_pos, bool y_pos, bool mag_gt) const {
        const std::int32_t idx = (x_pos ? 4 : 0) | (y_pos ? 2 : 0) | (mag_gt ? 1 : 0);
        return unpack_decision(decision.slot(idx).value);
    }

    const ExactTable* table(TableId id) const {
        switch (id) {
            case TableId::LogX: return &log_x;
            case TableId::LogY: return &log_y;
            case TableId::MiAdd: return &mi_add;
            case TableId::MiSubPos: return &mi_sub_pos;
            case TableId::MiSubNeg: return &mi_sub_neg;
            case TableId::Exp: return &exp;
            case TableId::Decision: return &decision;
        }
        return nullptr;
    }
    ExactTable* table(TableId id) {
        return const_cast<ExactTable*>(static_cast<const TableSet*>(this)->table(id));
    }

    // SRAM accounting covers the five datapath table kinds (six instances);
    // the 8-row decision table is match-logic, not value storage.
    std::uint64_t entry_count() const {
        return log_x.entry_count() + log_y.entry_count() + mi_add.entry_count() +
               mi_sub_pos.entry_count() + mi_sub_neg.entry_count() + exp.entry_count();
    }
    std::uint64_t memory_bytes() const { return 2 * entry_count(); }

    std::uint64_t fingerprint() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        const auto mix = [&h](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xFF;
                h *= 0x100000001b3ULL;
            }
        };
        mix(static_cast<std::uint64_t>(format));
        mix(static_cast<std::uint64_t>(k));
        for (TableId id : {TableId::LogX, TableId::LogY, TableId::MiAdd, TableId::MiSubPos,
                           TableId::MiSubNeg, TableId::Exp, TableId::Decision}) {
            const ExactTable& t = *table(id);
            mix(static_cast<std::uint64_t>(t.lane_min));
            mix(static_cast<std::uint64_t>(t.lane_max));
            for (const auto& s : t.slots) {
                mix(static_cast<std::uint64_t>(s.tag));
                if (s.is_value()) mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.value)));
            }
        }
        return h;
    }
};

inline TableSet build_table_set(Format f, int k) {
    require_valid_k(k);
    TableSet ts;
    ts.format = f;
    ts.k = k;
    ts.log_x = build_log_table(TableId::LogX, f, k);
    ts.log_y = build_log_table(TableId::LogY, f, k);
    ts.mi_add = build_mi_table(MiVariant::Add, f, k);
    ts.mi_sub_pos = build_mi_table(MiVariant::SubPos, f, k);
    ts.mi_sub_neg = build_mi_table(MiVariant::SubNeg, f, k);
    ts.exp = build_exp_table(f, k);
    ts.decision = build_decision_table(f, k);
    ts.dominant_threshold = mi_domain(f, k);
    if (f == Format::Float16) {
        ts.overflow_threshold = 15 * k;
        ts.underflow_threshold = -24 * k;
    } else {
        ts.overflow_threshold = p16::log2_range * k;
        ts.underflow_threshold = -p16::log2_range * k;
    }
    return ts;
}

// Drop entries that cannot be reached when every operand and result is
// guaranteed to lie in [-hi,-lo] u [lo,hi] u {0}.  Reachability is computed
// by interval arithmetic over the kept tables, so pipeline behaviour on
// in-range traffic is bit-identical; out-of-range traffic hits missing rows.
inline TableSet prune_to_range(const TableSet& ts, long double lo, long double hi) {
    if (!(lo > 0.0L) || !(lo < hi)) throw std::invalid_argument("prune_to_range: need 0 < lo < hi");
    TableSet out = ts;

    for (ExactTable* lt : {&out.log_x, &out.log_y}) {
        for (std::int32_t key = lt->lane_min; key <= lt->lane_max; ++key) {
            TableValue& s = lt->slot(key);
            if (!s.is_value()) continue;  // sentinel pads stay
            const Decoded d = decode(Bits16{static_cast<std::uint16_t>(key), ts.format});
            if (d.value < lo || d.value > hi) s = TableValue::missing();
        }
    }

    std::int32_t log_lo = 0, log_hi = 0;
    if (!out.log_x.value_range(log_lo, log_hi))
        throw std::invalid_argument("prune_to_range: no representable magnitude in range");

    const std::int32_t theta_max = log_hi - log_lo;
    for (ExactTable* mt : {&out.mi_add, &out.mi_sub_pos, &out.mi_sub_neg}) {
        for (std::int32_t key = mt->lane_min; key <= mt->lane_max; ++key) {
            TableValue& s = mt->slot(key);
            if (s.tag != TableValue::Tag::Value && s.tag != TableValue::Tag::ResultZero)
                continue;  // sentinel pads stay
            if (key < -theta_max || key > theta_max) s = TableValue::missing();
        }
    }

    std::int32_t mi_lo = 0, mi_hi = 0;
    bool any_mi = false;
    for (const ExactTable* mt : {&out.mi_add, &out.mi_sub_pos, &out.mi_sub_neg}) {
        std::int32_t a = 0, b = 0;
        if (mt->value_range(a, b)) {
            mi_lo = any_mi ? std::min(mi_lo, a) : a;
            mi_hi = any_mi ? std::max(mi_hi, b) : b;
            any_mi = true;
        }
    }

    // n reachable by add (i + m), mul (i + j) and div (i - j)
    std::int32_t reach_lo = std::min({log_lo + mi_lo, 2 * log_lo, log_lo - log_hi});
    std::int32_t reach_hi = std::max({log_hi + mi_hi, 2 * log_hi, log_hi - log_lo});
    for (std::int32_t key = out.exp.lane_min; key <= out.exp.lane_max; ++key) {
        TableValue& s = out.exp.slot(key);
        if (!s.is_value()) continue;  // sentinel pads stay
        if (key < reach_lo || key > reach_hi) s = TableValue::missing();
    }
    return out;
}

}  // namespace netfc
