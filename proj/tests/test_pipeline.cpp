#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "netfc/pipeline.hpp"

using namespace netfc;

namespace {

const TableSet& f16_set() {
    static const TableSet ts = build_table_set(Format::Float16, 1024);
    return ts;
}
const TableSet& p16_set() {
    static const TableSet ts = build_table_set(Format::Posit16, 512);
    return ts;
}

Bits16 fb(long double v) { return encode_nearest(v, Format::Float16); }
Bits16 posit(long double v) { return encode_nearest(v, Format::Posit16); }

double value_of(Bits16 b) { return static_cast<double>(decode(b).value); }

bool zero_equivalent(Bits16 a, Bits16 b) {
    return a.raw == b.raw || (is_zero(a) && is_zero(b));
}

// finite nonzero operand drawn uniformly from the format's patterns
Bits16 random_operand(std::mt19937_64& rng, Format f) {
    for (;;) {
        const auto raw = static_cast<std::uint16_t>(rng());
        const Decoded d = decode(Bits16{raw, f});
        if (d.finite_nonzero()) return Bits16{raw, f};
    }
}

}  // namespace

TEST_CASE("add handles the power-of-two exact case") {
    const PipelineResult r = add(fb(2.0L), fb(2.0L), f16_set());
    CHECK(r.value.raw == fb(4.0L).raw);
    CHECK(r.corner == Corner::None);
    CHECK(r.trace.stage_count() == 5);
}

TEST_CASE("add zero shortcuts") {
    const Bits16 x = fb(1.25L);
    const PipelineResult r1 = add(x, fb(0.0L), f16_set());
    CHECK(r1.value == x);
    CHECK(r1.corner == Corner::ZeroOperand);
    CHECK(r1.trace.stage_count() <= 2);
    const PipelineResult r2 = add(fb(0.0L), x, f16_set());
    CHECK(r2.value == x);
    CHECK(r2.corner == Corner::ZeroOperand);
}

TEST_CASE("add exact cancellation") {
    const PipelineResult r = add(fb(4.0L), fb(-4.0L), f16_set());
    CHECK(is_zero(r.value));
    CHECK(r.corner == Corner::Cancelled);
}

TEST_CASE("add dominant operand") {
    const PipelineResult r = add(fb(1.0L), fb(65504.0L), f16_set());
    CHECK(r.value.raw == fb(65504.0L).raw);
    CHECK(r.corner == Corner::DominantOperand);
    const PipelineResult r2 = add(fb(65504.0L), fb(1.0L), f16_set());
    CHECK(r2.value.raw == fb(65504.0L).raw);
    CHECK(r2.corner == Corner::DominantOperand);
}

TEST_CASE("add stays within 0.2% on a non-trivial pair") {
    const PipelineResult r = add(fb(1.5L), fb(2.5L), f16_set());
    CHECK(value_of(r.value) == Catch::Approx(4.0).epsilon(0.002));
}

TEST_CASE("mixed-sign add follows the decision table") {
    // x = -4, y = 2: SubPos row with negative result; the tables give -2 exactly
    const PipelineResult r = add(fb(-4.0L), fb(2.0L), f16_set());
    CHECK(value_of(r.value) == -2.0);
    CHECK(r.corner == Corner::None);
}

TEST_CASE("mul power-of-two exactness and sign") {
    const PipelineResult r = mul(fb(-8.0L), fb(16.0L), f16_set());
    CHECK(value_of(r.value) == -128.0);
    CHECK(r.corner == Corner::None);
    CHECK(r.trace.stage_count() <= 4);
}

TEST_CASE("mul overflow corner returns infinity") {
    const PipelineResult r = mul(fb(512.0L), fb(512.0L), f16_set());
    CHECK(r.value.raw == f16::pos_inf);
    CHECK(r.corner == Corner::Overflow);
    const PipelineResult rn = mul(fb(-512.0L), fb(512.0L), f16_set());
    CHECK(rn.value.raw == f16::neg_inf);
}

TEST_CASE("mul underflow corner returns signed zero") {
    const PipelineResult r = mul(fb(std::ldexp(1.0L, -14)), fb(-std::ldexp(1.0L, -14)), f16_set());
    CHECK(is_zero(r.value));
    CHECK(sign_bit(r.value));
    CHECK(r.corner == Corner::Underflow);
}

TEST_CASE("mul zero operand") {
    const PipelineResult r = mul(fb(3.0L), fb(0.0L), f16_set());
    CHECK(is_zero(r.value));
    CHECK(r.corner == Corner::ZeroOperand);
}

TEST_CASE("mul accuracy on a non-trivial pair") {
    const PipelineResult r = mul(fb(3.0L), fb(5.0L), f16_set());
    CHECK(value_of(r.value) == Catch::Approx(15.0).epsilon(0.002));
}

TEST_CASE("div cases") {
    CHECK(value_of(div(fb(-128.0L), fb(16.0L), f16_set()).value) == -8.0);

    const PipelineResult bad = div(fb(1.0L), fb(0.0L), f16_set());
    CHECK(decode(bad.value).cls == NumClass::NaN);
    CHECK(bad.corner == Corner::InvalidDiv);
    CHECK(div(fb(0.0L), fb(0.0L), f16_set()).corner == Corner::InvalidDiv);

    const PipelineResult zero = div(fb(0.0L), fb(5.0L), f16_set());
    CHECK(is_zero(zero.value));
    CHECK(zero.corner == Corner::ZeroOperand);

    CHECK(value_of(div(fb(1.0L), fb(3.0L), f16_set()).value) ==
          Catch::Approx(1.0 / 3.0).epsilon(0.002));
    CHECK(div(fb(1.0L), fb(3.0L), f16_set()).trace.stage_count() <= 4);
}

TEST_CASE("exceptional float16 operands are rejected at parse") {
    CHECK_THROWS_AS(add(Bits16{f16::pos_inf, Format::Float16}, fb(1.0L), f16_set()),
                    exceptional_operand);
    CHECK_THROWS_AS(mul(fb(1.0L), Bits16{f16::quiet_nan, Format::Float16}, f16_set()),
                    exceptional_operand);
    CHECK_THROWS_AS(add(fb(1.0L), posit(1.0L), f16_set()), format_mismatch);
    CHECK_THROWS_AS(add(posit(1.0L), posit(1.0L), f16_set()), format_mismatch);
}

TEST_CASE("posit NaR propagates") {
    const PipelineResult r = add(Bits16{p16::nar, Format::Posit16}, posit(2.0L), p16_set());
    CHECK(r.value.raw == p16::nar);
    CHECK(r.corner == Corner::NaROperand);
    CHECK(div(posit(1.0L), posit(0.0L), p16_set()).value.raw == p16::nar);
}

TEST_CASE("posit mul/div saturate instead of overflowing") {
    const PipelineResult r = mul(posit(65536.0L), posit(65536.0L), p16_set());
    CHECK(r.value.raw == p16::maxpos);
    CHECK(r.corner == Corner::Overflow);
    const PipelineResult u = mul(posit(std::ldexp(1.0L, -20)), posit(std::ldexp(1.0L, -20)), p16_set());
    CHECK(u.value.raw == p16::minpos);
    CHECK(u.corner == Corner::Underflow);
    const PipelineResult d = div(posit(std::ldexp(1.0L, 20)), posit(std::ldexp(1.0L, -20)), p16_set());
    CHECK(d.value.raw == p16::maxpos);
    CHECK(d.corner == Corner::Overflow);
}

TEST_CASE("posit add works across the decision rows") {
    const PipelineResult r = add(posit(-4.0L), posit(2.0L), p16_set());
    CHECK(value_of(r.value) == Catch::Approx(-2.0).epsilon(0.005));
    const PipelineResult q = add(posit(2.0L), posit(2.0L), p16_set());
    CHECK(value_of(q.value) == 4.0);
}

TEST_CASE("stage budget: add 5, mul/div at most 4, zero shortcut at most 2") {
    CHECK(add(fb(1.5L), fb(2.5L), f16_set()).trace.stage_count() == 5);
    CHECK(add(fb(-1.5L), fb(2.5L), f16_set()).trace.stage_count() == 5);
    CHECK(mul(fb(1.5L), fb(2.5L), f16_set()).trace.stage_count() <= 4);
    CHECK(div(fb(1.5L), fb(2.5L), f16_set()).trace.stage_count() <= 4);
    CHECK(add(fb(0.0L), fb(2.5L), f16_set()).trace.stage_count() <= 2);
}

TEST_CASE("every trace step is an integer primitive") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 20000; ++it) {
        const Bits16 x = random_operand(rng, Format::Float16);
        const Bits16 y = random_operand(rng, Format::Float16);
        for (OpKind op : {OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div}) {
            const PipelineResult r = run_op(op, x, y, f16_set());
            for (const Step& s : r.trace.steps) {
                const bool integer_primitive =
                    s.kind == StepKind::ExactLookup || s.kind == StepKind::TernaryLookup ||
                    s.kind == StepKind::IntAdd || s.kind == StepKind::IntSub ||
                    s.kind == StepKind::IntCmp || s.kind == StepKind::BitOp;
                REQUIRE(integer_primitive);
            }
        }
    }
}

TEST_CASE("add commutes and sub coheres with add") {
    std::mt19937_64 rng(13);
    const TableSet& ts = f16_set();
    for (int it = 0; it < 100000; ++it) {
        const Bits16 x = random_operand(rng, Format::Float16);
        const Bits16 y = random_operand(rng, Format::Float16);
        const Bits16 xy = add(x, y, ts).value;
        const Bits16 yx = add(y, x, ts).value;
        if (!zero_equivalent(xy, yx)) {
            CAPTURE(x.raw, y.raw, xy.raw, yx.raw);
            REQUIRE(false);
        }
        const Bits16 mxy = mul(x, y, ts).value;
        const Bits16 myx = mul(y, x, ts).value;
        REQUIRE(mxy.raw == myx.raw);
        const Bits16 s = sub(x, y, ts).value;
        const Bits16 a = add(x, negate(y), ts).value;
        REQUIRE(s.raw == a.raw);
    }
}

TEST_CASE("result sign matches the exact sign when no cancellation fires") {
    std::mt19937_64 rng(17);
    const TableSet& ts = f16_set();
    int checked = 0;
    while (checked < 100000) {
        const Bits16 x = random_operand(rng, Format::Float16);
        const Bits16 y = random_operand(rng, Format::Float16);
        const PipelineResult r = add(x, y, ts);
        if (r.corner == Corner::Cancelled || is_zero(r.value)) continue;
        const double exact =
            static_cast<double>(decode(x).value) + static_cast<double>(decode(y).value);
        if (exact == 0.0) continue;
        ++checked;
        REQUIRE(sign_bit(r.value) == (exact < 0.0));
    }
}

TEST_CASE("power-of-two mul/div are bit-exact") {
    const TableSet& ts = f16_set();
    for (int a = -24; a <= 15; ++a) {
        for (int b = -24; b <= 15; ++b) {
            const Bits16 x = fb(std::ldexp(1.0L, a));
            const Bits16 y = fb(std::ldexp(1.0L, b));
            if (a + b >= -24 && a + b <= 15) {
                const PipelineResult r = mul(x, y, ts);
                REQUIRE(value_of(r.value) == std::ldexp(1.0, a + b));
            }
            if (a - b >= -24 && a - b <= 15) {
                const PipelineResult r = div(x, y, ts);
                REQUIRE(value_of(r.value) == std::ldexp(1.0, a - b));
            }
        }
    }
    for (int a = -24; a <= 14; ++a) {
        const Bits16 x = fb(std::ldexp(1.0L, a));
        REQUIRE(value_of(add(x, x, ts).value) == std::ldexp(1.0, a + 1));
        const Bits16 nx = fb(-std::ldexp(1.0L, a));
        REQUIRE(value_of(add(nx, nx, ts).value) == -std::ldexp(1.0, a + 1));
    }
}

TEST_CASE("pruned tables miss on out-of-range operands") {
    const TableSet pruned = prune_to_range(f16_set(), 1e-4L, 2e-2L);
    CHECK_THROWS_AS(mul(fb(0.5L), fb(0.25L), pruned), missing_entry);
    CHECK_NOTHROW(mul(fb(0.005L), fb(0.004L), pruned));
}

TEST_CASE("pruned pipeline is bit-identical on in-range traffic") {
    const TableSet& full = f16_set();
    const TableSet pruned = prune_to_range(full, 1e-4L, 2e-2L);
    std::mt19937_64 rng(19);
    auto in_range = [&](double v) { return v == 0.0 || (std::fabs(v) >= 1e-4 && std::fabs(v) <= 2e-2); };
    int done = 0;
    while (done < 20000) {
        const double vx = -0.01 + (rng() >> 11) * 0x1.0p-53 * 0.02;
        const double vy = -0.01 + (rng() >> 11) * 0x1.0p-53 * 0.02;
        const Bits16 x = fb(vx);
        const Bits16 y = fb(vy);
        if (!in_range(value_of(x)) || !in_range(value_of(y))) continue;
        const double sum = value_of(x) + value_of(y);
        if (!in_range(sum)) continue;
        ++done;
        const PipelineResult a = add(x, y, full);
        const PipelineResult b = add(x, y, pruned);
        REQUIRE(a.value.raw == b.value.raw);
        REQUIRE(a.corner == b.corner);
    }
}

TEST_CASE("a shared table set serves concurrent callers") {
    const TableSet& ts = f16_set();
    std::vector<std::thread> workers;
    std::array<std::atomic<bool>, 4> ok{};
    for (int w = 0; w < 4; ++w) {
        ok[w] = true;
        workers.emplace_back([&, w] {
            std::mt19937_64 rng(100 + w);
            for (int i = 0; i < 20000; ++i) {
                const Bits16 x = random_operand(rng, Format::Float16);
                const Bits16 y = random_operand(rng, Format::Float16);
                const PipelineResult a = add(x, y, ts);
                const PipelineResult b = add(x, y, ts);
                if (a.value.raw != b.value.raw || a.corner != b.corner) ok[w] = false;
            }
        });
    }
    for (auto& t : workers) t.join();
    for (int w = 0; w < 4; ++w) CHECK(ok[w]);
}
