#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "netfc/bits.hpp"
#include "netfc/errors.hpp"
#include "netfc/tables.hpp"

// The emulated match-action datapath.  Operands enter as raw 16-bit
// patterns and every step from there is a table lookup, an integer ALU op
// or a bit operation; no host floating point touches the data lanes.
//
// Stage model (mirrors an RMT pipeline): parse is stage 0 and free;
// each lookup or ALU op takes a stage; steps with no data dependence may
// share a stage (the two log lookups hit distinct physical tables); a final
// bit op whose missing input is produced by a lookup folds into that
// lookup's action stage.  Under this model the non-corner add path costs
// exactly 5 stages and mul/div cost 3.

namespace netfc {

enum class OpKind : std::uint8_t { Add, Sub, Mul, Div };

inline const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Div: return "div";
    }
    return "?";
}

enum class StepKind : std::uint8_t { ExactLookup, TernaryLookup, IntAdd, IntSub, IntCmp, BitOp };

struct Step {
    StepKind kind;
    const char* label;
    int stage;
};

struct StageTrace {
    std::vector<Step> steps;

    int stage_count() const {
        int m = 0;
        for (const auto& s : steps) m = std::max(m, s.stage);
        return m;
    }
};

enum class Corner : std::uint8_t {
    None,
    ZeroOperand,
    DominantOperand,
    Cancelled,
    Overflow,
    Underflow,
    InvalidDiv,
    NaROperand,
};

inline const char* corner_name(Corner c) {
    switch (c) {
        case Corner::None: return "none";
        case Corner::ZeroOperand: return "zero-operand";
        case Corner::DominantOperand: return "dominant-operand";
        case Corner::Cancelled: return "cancelled";
        case Corner::Overflow: return "overflow";
        case Corner::Underflow: return "underflow";
        case Corner::InvalidDiv: return "invalid-div";
        case Corner::NaROperand: return "nar-operand";
    }
    return "?";
}

struct PipelineResult {
    Bits16 value{};
    Corner corner = Corner::None;
    StageTrace trace;
};

namespace detail {

inline void check_operands(Bits16 x, Bits16 y, const TableSet& ts) {
    if (x.kind != y.kind || x.kind != ts.format)
        throw format_mismatch("pipeline: operand/table formats differ");
    if (ts.format == Format::Float16) {
        if (((x.raw >> 10) & 0x1F) == 31 || ((y.raw >> 10) & 0x1F) == 31)
            throw exceptional_operand("pipeline: NaN/Infinity operand");
    }
}

inline bool is_nar(Bits16 b) { return b.kind == Format::Posit16 && b.raw == p16::nar; }

inline std::int32_t require_value(const TableValue& v, const char* table) {
    if (!v.is_value()) throw missing_entry(std::string("pipeline: missing entry in ") + table);
    return v.value;
}

// saturated results for the overflow/underflow sentinels
inline Bits16 saturate_high(Format f, bool neg) {
    return f == Format::Float16 ? apply_sign(f16::pos_inf, neg, f) : apply_sign(p16::maxpos, neg, f);
}
inline Bits16 saturate_low(Format f, bool neg) {
    return f == Format::Float16 ? zero_bits(f, neg) : apply_sign(p16::minpos, neg, f);
}

}  // namespace detail

inline PipelineResult add(Bits16 x, Bits16 y, const TableSet& ts) {
    detail::check_operands(x, y, ts);
    PipelineResult r;
    auto& steps = r.trace.steps;

    if (detail::is_nar(x) || detail::is_nar(y)) {
        steps.push_back({StepKind::BitOp, "nar-propagate", 1});
        r.value = Bits16{p16::nar, ts.format};
        r.corner = Corner::NaROperand;
        return r;
    }

    steps.push_back({StepKind::IntCmp, "x==0", 1});
    steps.push_back({StepKind::IntCmp, "y==0", 1});
    if (is_zero(x) || is_zero(y)) {
        steps.push_back({StepKind::BitOp, "select-operand", 2});
        r.value = is_zero(x) ? y : x;
        r.corner = Corner::ZeroOperand;
        return r;
    }

    const Mag15 mx = magnitude_bits(x);
    const Mag15 my = magnitude_bits(y);
    steps.push_back({StepKind::ExactLookup, "logX", 1});
    steps.push_back({StepKind::ExactLookup, "logY", 1});
    steps.push_back({StepKind::IntCmp, "|x|>|y|", 1});
    const std::int32_t i = detail::require_value(ts.log_x.lookup(mx), "logX");
    const std::int32_t j = detail::require_value(ts.log_y.lookup(my), "logY");
    const bool mag_gt = mx > my;

    steps.push_back({StepKind::IntSub, "n=j-i", 2});
    steps.push_back({StepKind::ExactLookup, "decision", 2});
    const std::int32_t n = j - i;
    const DecisionEntry de = ts.decide(!sign_bit(x), !sign_bit(y), mag_gt);

    steps.push_back({StepKind::IntCmp, "|n|>threshold", 3});
    if (n > ts.dominant_threshold || n < -ts.dominant_threshold) {
        steps.push_back({StepKind::BitOp, "select-operand", 4});
        r.value = n > 0 ? y : x;
        r.corner = Corner::DominantOperand;
        return r;
    }

    const ExactTable& mt = ts.mi(de.variant);
    steps.push_back({StepKind::ExactLookup, table_name(mt.id), 3});
    const TableValue m = mt.lookup(n);
    if (m.tag == TableValue::Tag::ResultZero) {
        steps.push_back({StepKind::BitOp, "emit-zero", 3});
        r.value = zero_bits(ts.format, de.negative);
        r.corner = Corner::Cancelled;
        return r;
    }

    steps.push_back({StepKind::IntAdd, "i+m", 4});
    const std::int32_t t = i + detail::require_value(m, table_name(mt.id));

    steps.push_back({StepKind::ExactLookup, "exp", 5});
    steps.push_back({StepKind::BitOp, "set-sign", 5});
    const TableValue e = ts.exp.lookup(t);
    switch (e.tag) {
        case TableValue::Tag::Value:
            r.value = apply_sign(static_cast<std::uint16_t>(e.value), de.negative, ts.format);
            break;
        case TableValue::Tag::OutOfRangeHigh:
            r.value = detail::saturate_high(ts.format, de.negative);
            r.corner = Corner::Overflow;
            break;
        case TableValue::Tag::OutOfRangeLow:
            r.value = detail::saturate_low(ts.format, de.negative);
            r.corner = Corner::Underflow;
            break;
        default:
            detail::require_value(e, "exp");
    }
    return r;
}

inline PipelineResult sub(Bits16 x, Bits16 y, const TableSet& ts) {
    detail::check_operands(x, y, ts);
    return add(x, negate(y), ts);
}

namespace detail {

inline PipelineResult mul_div(Bits16 x, Bits16 y, const TableSet& ts, bool divide) {
    check_operands(x, y, ts);
    PipelineResult r;
    auto& steps = r.trace.steps;

    if (is_nar(x) || is_nar(y)) {
        steps.push_back({StepKind::BitOp, "nar-propagate", 1});
        r.value = Bits16{p16::nar, ts.format};
        r.corner = Corner::NaROperand;
        return r;
    }

    steps.push_back({StepKind::IntCmp, "x==0", 1});
    steps.push_back({StepKind::IntCmp, "y==0", 1});
    const bool neg = sign_bit(x) != sign_bit(y);
    if (divide && is_zero(y)) {
        steps.push_back({StepKind::BitOp, "emit-nan", 2});
        r.value = nan_bits(ts.format);
        r.corner = Corner::InvalidDiv;
        return r;
    }
    if (is_zero(x) || (!divide && is_zero(y))) {
        steps.push_back({StepKind::BitOp, "emit-zero", 2});
        r.value = zero_bits(ts.format, neg);
        r.corner = Corner::ZeroOperand;
        return r;
    }

    steps.push_back({StepKind::ExactLookup, "logX", 1});
    steps.push_back({StepKind::ExactLookup, "logY", 1});
    steps.push_back({StepKind::BitOp, "sign-xor", 1});
    const std::int32_t i = require_value(ts.log_x.lookup(magnitude_bits(x)), "logX");
    const std::int32_t j = require_value(ts.log_y.lookup(magnitude_bits(y)), "logY");

    steps.push_back({divide ? StepKind::IntSub : StepKind::IntAdd, divide ? "n=i-j" : "n=i+j", 2});
    const std::int32_t n = divide ? i - j : i + j;

    steps.push_back({StepKind::IntCmp, "n>overflow", 3});
    steps.push_back({StepKind::IntCmp, "n<underflow", 3});
    if (n > ts.overflow_threshold) {
        steps.push_back({StepKind::BitOp, "saturate", 4});
        r.value = saturate_high(ts.format, neg);
        r.corner = Corner::Overflow;
        return r;
    }
    if (n < ts.underflow_threshold) {
        steps.push_back({StepKind::BitOp, "saturate", 4});
        r.value = saturate_low(ts.format, neg);
        r.corner = Corner::Underflow;
        return r;
    }

    steps.push_back({StepKind::ExactLookup, "exp", 3});
    steps.push_back({StepKind::BitOp, "set-sign", 3});
    const std::int32_t e = require_value(ts.exp.lookup(n), "exp");
    r.value = apply_sign(static_cast<std::uint16_t>(e), neg, ts.format);
    return r;
}

}  // namespace detail

inline PipelineResult mul(Bits16 x, Bits16 y, const TableSet& ts) {
    return detail::mul_div(x, y, ts, false);
}

inline PipelineResult div(Bits16 x, Bits16 y, const TableSet& ts) {
    return detail::mul_div(x, y, ts, true);
}

inline PipelineResult run_op(OpKind op, Bits16 x, Bits16 y, const TableSet& ts) {
    switch (op) {
        case OpKind::Add: return add(x, y, ts);
        case OpKind::Sub: return sub(x, y, ts);
        case OpKind::Mul: return mul(x, y, ts);
        case OpKind::Div: return div(x, y, ts);
    }
    throw std::invalid_argument("run_op: bad op");
}

inline int stage_count(const StageTrace& t) { return t.stage_count(); }

}  // namespace netfc
