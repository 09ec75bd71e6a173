#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "netfc/errors.hpp"
#include "netfc/tables.hpp"

// Prefix-based lossless compression of exact-match tables into ternary
// (key, mask, value, priority) rules, the way a TCAM would hold them.
// A maximal aligned block of 2^s consecutive key patterns sharing one value
// collapses into a single rule with s trailing don't-care bits.  Signed keys
// are matched as two's-complement patterns inside the lane, so a run never
// merges across the sign wrap (that boundary is never block-aligned).

namespace netfc {

struct TernaryEntry {
    std::uint32_t key = 0;   // don't-care bits are zero
    std::uint32_t mask = 0;  // 1 = care bit
    TableValue value;
    std::int32_t priority = 0;  // lower matches first
};

struct CompressedTable {
    TableId id{};
    Format format{};
    int k = 0;
    int key_bits = 0;
    bool keys_signed = false;
    std::int32_t lane_min = 0;
    std::int32_t lane_max = -1;
    std::uint64_t original_count = 0;
    std::vector<TernaryEntry> entries;  // sorted by priority

    std::uint64_t compressed_count() const { return entries.size(); }
    double savings() const {
        if (original_count == 0) return 0.0;
        return 1.0 - static_cast<double>(compressed_count()) / static_cast<double>(original_count);
    }

    std::uint32_t lane_mask() const {
        return key_bits >= 32 ? 0xFFFFFFFFu : ((1u << key_bits) - 1);
    }
    std::uint32_t pattern_of(std::int32_t key) const {
        return static_cast<std::uint32_t>(key) & lane_mask();
    }
    std::int32_t key_of(std::uint32_t pattern) const {
        if (!keys_signed) return static_cast<std::int32_t>(pattern);
        const std::uint32_t sign = 1u << (key_bits - 1);
        return (pattern & sign) ? static_cast<std::int32_t>(pattern) - (1 << key_bits)
                                : static_cast<std::int32_t>(pattern);
    }
};

inline CompressedTable compress(const ExactTable& t) {
    CompressedTable ct;
    ct.id = t.id;
    ct.format = t.format;
    ct.k = t.k;
    ct.key_bits = t.key_bits;
    ct.keys_signed = t.keys_signed;
    ct.lane_min = t.lane_min;
    ct.lane_max = t.lane_max;
    ct.original_count = t.entry_count();

    const std::uint32_t full = ct.lane_mask();
    const auto emit_run = [&](std::uint32_t first, std::uint32_t last, const TableValue& v) {
        // aligned power-of-two decomposition of [first, last]
        std::uint64_t a = first;
        const std::uint64_t b = last;
        while (a <= b) {
            std::uint32_t size = 1;
            while ((a & (std::uint64_t{size} * 2 - 1)) == 0 && a + std::uint64_t{size} * 2 - 1 <= b)
                size *= 2;
            ct.entries.push_back(
                {static_cast<std::uint32_t>(a), full & ~(size - 1), v, 0});
            a += size;
        }
    };

    bool open = false;
    std::uint32_t run_start = 0;
    TableValue run_value;
    const auto n_patterns = static_cast<std::uint64_t>(t.lane_size());
    for (std::uint64_t p = 0; p < n_patterns; ++p) {
        const auto pattern = static_cast<std::uint32_t>(p);
        const TableValue& v = t.slot(ct.key_of(pattern));
        const bool storable = v.tag != TableValue::Tag::Missing;
        if (open && (!storable || !(v == run_value))) {
            emit_run(run_start, pattern - 1, run_value);
            open = false;
        }
        if (storable && !open) {
            open = true;
            run_start = pattern;
            run_value = v;
        }
    }
    if (open) emit_run(run_start, static_cast<std::uint32_t>(n_patterns - 1), run_value);

    // longest mask (most care bits) first, then ascending key
    std::stable_sort(ct.entries.begin(), ct.entries.end(),
                     [](const TernaryEntry& a, const TernaryEntry& b) {
                         const int ca = std::popcount(a.mask);
                         const int cb = std::popcount(b.mask);
                         if (ca != cb) return ca > cb;
                         return a.key < b.key;
                     });
    for (std::size_t i = 0; i < ct.entries.size(); ++i)
        ct.entries[i].priority = static_cast<std::int32_t>(i);
    return ct;
}

// First (lowest-priority-number) matching rule wins, TCAM style.
inline TableValue lookup_ternary(const CompressedTable& ct, std::int32_t key) {
    if (key < ct.lane_min || key > ct.lane_max)
        throw missing_entry("lookup_ternary: key outside lane");
    const std::uint32_t pattern = ct.pattern_of(key);
    for (const auto& e : ct.entries)
        if ((pattern & e.mask) == e.key) return e.value;
    throw missing_entry("lookup_ternary: no matching entry");
}

// Expand the rules back into a dense table (highest priority wins).
inline ExactTable reconstruct(const CompressedTable& ct) {
    ExactTable t;
    t.id = ct.id;
    t.format = ct.format;
    t.k = ct.k;
    t.key_bits = ct.key_bits;
    t.keys_signed = ct.keys_signed;
    t.lane_min = ct.lane_min;
    t.lane_max = ct.lane_max;
    t.slots.assign(t.lane_size(), TableValue::missing());
    for (auto it = ct.entries.rbegin(); it != ct.entries.rend(); ++it) {
        const std::uint32_t dc = ~it->mask & ct.lane_mask();
        // enumerate don't-care combinations of this rule
        std::uint32_t sub = 0;
        while (true) {
            t.slot(ct.key_of(it->key | sub)) = it->value;
            if (sub == dc) break;
            sub = (sub - dc) & dc;
        }
    }
    return t;
}

struct LossReport {
    bool equal = false;
    std::vector<std::int32_t> mismatches;  // first few offending keys
    std::uint64_t original_count = 0;
    std::uint64_t compressed_count = 0;
    double savings = 0.0;
};

inline LossReport verify_lossless(const ExactTable& t, const CompressedTable& ct,
                                  std::size_t max_mismatches = 32) {
    LossReport rep;
    rep.original_count = t.entry_count();
    rep.compressed_count = ct.compressed_count();
    rep.savings = ct.savings();
    rep.equal = true;
    if (t.lane_min != ct.lane_min || t.lane_max != ct.lane_max || t.key_bits != ct.key_bits) {
        rep.equal = false;
        return rep;
    }
    const ExactTable back = reconstruct(ct);
    for (std::int32_t key = t.lane_min; key <= t.lane_max; ++key) {
        if (t.slot(key) == back.slot(key)) continue;
        rep.equal = false;
        if (rep.mismatches.size() < max_mismatches) rep.mismatches.push_back(key);
    }
    return rep;
}

inline std::vector<CompressedTable> compress_set(const TableSet& ts) {
    return {compress(ts.log_x),      compress(ts.log_y),   compress(ts.mi_add),
            compress(ts.mi_sub_pos), compress(ts.mi_sub_neg), compress(ts.exp)};
}

inline double aggregate_savings(const std::vector<CompressedTable>& all) {
    std::uint64_t orig = 0, comp = 0;
    for (const auto& ct : all) {
        orig += ct.original_count;
        comp += ct.compressed_count();
    }
    if (orig == 0) return 0.0;
    return 1.0 - static_cast<double>(comp) / static_cast<double>(orig);
}

}  // namespace netfc
