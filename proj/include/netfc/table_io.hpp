#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "netfc/compress.hpp"
#include "netfc/errors.hpp"
#include "netfc/tables.hpp"

// Rule files.
//
// Exact tables:   # netfc-tables v1 format=<float16|posit16> k=<int>
//                 <table>,<key-hex>,<value-hex-or-sentinel>
// Ternary tables: # netfc-ternary v1 format=<float16|posit16> k=<int>
//                 <table>,<key-hex>/<mask-hex>,<value-hex-or-sentinel>,<priority>
//
// Keys are the two's-complement lane pattern, zero-padded hex; rows are in
// ascending key order (ternary: ascending priority).  Sentinels are the
// literal tokens ZERO, LOW and HIGH.  Log/mi values are 8-hex-digit signed
// 32-bit lanes; exp and decision values are 4 hex digits.

namespace netfc {

struct io_error : error {
    using error::error;
};

namespace io_detail {

inline int key_hex_digits(const ExactTable& t) { return (t.key_bits + 3) / 4; }

inline std::string hex_pattern(std::uint32_t pattern, int digits) {
    static const char* x = "0123456789abcdef";
    std::string s(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = x[pattern & 0xF];
        pattern >>= 4;
    }
    return s;
}

inline std::uint32_t key_pattern(const ExactTable& t, std::int32_t key) {
    const std::uint32_t mask = t.key_bits >= 32 ? 0xFFFFFFFFu : ((1u << t.key_bits) - 1);
    return static_cast<std::uint32_t>(key) & mask;
}

inline std::string value_token(const ExactTable& t, const TableValue& v) {
    switch (v.tag) {
        case TableValue::Tag::ResultZero: return "ZERO";
        case TableValue::Tag::OutOfRangeLow: return "LOW";
        case TableValue::Tag::OutOfRangeHigh: return "HIGH";
        case TableValue::Tag::Missing: return "";
        case TableValue::Tag::Value: break;
    }
    const bool wide = t.id == TableId::LogX || t.id == TableId::LogY || t.id == TableId::MiAdd ||
                      t.id == TableId::MiSubPos || t.id == TableId::MiSubNeg;
    return hex_pattern(static_cast<std::uint32_t>(v.value), wide ? 8 : 4);
}

inline bool parse_value_token(const ExactTable& t, const std::string& tok, TableValue& out) {
    if (tok == "ZERO") {
        out = TableValue::result_zero();
        return true;
    }
    if (tok == "LOW") {
        out = TableValue::oor_low();
        return true;
    }
    if (tok == "HIGH") {
        out = TableValue::oor_high();
        return true;
    }
    std::uint32_t v = 0;
    for (char c : tok) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else return false;
        v = (v << 4) | static_cast<std::uint32_t>(d);
    }
    if (tok.size() == 8)
        out = TableValue::of(static_cast<std::int32_t>(v));
    else
        out = TableValue::of(static_cast<std::int32_t>(static_cast<std::uint16_t>(v)));
    return !tok.empty();
}

// blank lanes with the geometry the builders would produce
inline ExactTable blank_table(TableId id, Format f, int k) {
    ExactTable t;
    switch (id) {
        case TableId::LogX:
        case TableId::LogY:
            t.key_bits = 15;
            t.keys_signed = false;
            t.lane_min = 0;
            t.lane_max = 0x7FFF;
            break;
        case TableId::MiAdd:
        case TableId::MiSubPos:
        case TableId::MiSubNeg: {
            const std::int32_t r = mi_domain(f, k);
            t.key_bits = signed_lane_bits(-r, r);
            t.keys_signed = true;
            t.lane_min = -(std::int32_t{1} << (t.key_bits - 1));
            t.lane_max = (std::int32_t{1} << (t.key_bits - 1)) - 1;
            break;
        }
        case TableId::Exp: {
            const std::int32_t lo = min_scaled_log(f, k);
            const std::int32_t hi = max_scaled_log(f, k);
            t.key_bits = signed_lane_bits(lo, hi);
            t.keys_signed = true;
            t.lane_min = -(std::int32_t{1} << (t.key_bits - 1));
            t.lane_max = (std::int32_t{1} << (t.key_bits - 1)) - 1;
            break;
        }
        case TableId::Decision:
            t.key_bits = 3;
            t.keys_signed = false;
            t.lane_min = 0;
            t.lane_max = 7;
            break;
    }
    t.id = id;
    t.format = f;
    t.k = k;
    t.slots.assign(t.lane_size(), TableValue::missing());
    return t;
}

inline std::int32_t key_from_pattern(const ExactTable& t, std::uint32_t pattern) {
    if (!t.keys_signed) return static_cast<std::int32_t>(pattern);
    const std::uint32_t sign = 1u << (t.key_bits - 1);
    return (pattern & sign) ? static_cast<std::int32_t>(pattern) - (1 << t.key_bits)
                            : static_cast<std::int32_t>(pattern);
}

}  // namespace io_detail

inline void export_rules(const TableSet& ts, std::ostream& os) {
    os << "# netfc-tables v1 format=" << format_name(ts.format) << " k=" << ts.k << "\n";
    for (TableId id : {TableId::LogX, TableId::LogY, TableId::MiAdd, TableId::MiSubPos,
                       TableId::MiSubNeg, TableId::Exp, TableId::Decision}) {
        const ExactTable& t = *ts.table(id);
        const int digits = io_detail::key_hex_digits(t);
        for (std::int32_t key = t.lane_min; key <= t.lane_max; ++key) {
            const TableValue& v = t.slot(key);
            if (v.tag == TableValue::Tag::Missing) continue;
            os << table_name(id) << ',' << io_detail::hex_pattern(io_detail::key_pattern(t, key), digits)
               << ',' << io_detail::value_token(t, v) << "\n";
        }
    }
}

inline void export_rules(const TableSet& ts, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for writing: " + path);
    export_rules(ts, f);
    if (!f.good()) throw io_error("write failed: " + path);
}

inline TableSet import_rules(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw io_error("empty rule file");
    Format f{};
    int k = 0;
    {
        std::istringstream hs(header);
        std::string hash, name, fmt_kv, k_kv;
        hs >> hash >> name >> fmt_kv >> k_kv;
        if (hash != "#" || name != "netfc-tables" || !hs) {
            // allow the compact "#netfc-tables" spelling too
            if (header.rfind("# netfc-tables v1 ", 0) != 0)
                throw io_error("bad rule file header: " + header);
        }
        const auto fpos = header.find("format=");
        const auto kpos = header.find("k=");
        if (fpos == std::string::npos || kpos == std::string::npos)
            throw io_error("bad rule file header: " + header);
        const std::string fmt = header.substr(fpos + 7, header.find(' ', fpos) - (fpos + 7));
        if (fmt == "float16") f = Format::Float16;
        else if (fmt == "posit16") f = Format::Posit16;
        else throw io_error("unknown format in header: " + fmt);
        k = std::stoi(header.substr(kpos + 2));
    }
    require_valid_k(k);

    TableSet ts;
    ts.format = f;
    ts.k = k;
    for (TableId id : {TableId::LogX, TableId::LogY, TableId::MiAdd, TableId::MiSubPos,
                       TableId::MiSubNeg, TableId::Exp, TableId::Decision})
        *ts.table(id) = io_detail::blank_table(id, f, k);
    ts.dominant_threshold = mi_domain(f, k);
    if (f == Format::Float16) {
        ts.overflow_threshold = 15 * k;
        ts.underflow_threshold = -24 * k;
    } else {
        ts.overflow_threshold = p16::log2_range * k;
        ts.underflow_threshold = -p16::log2_range * k;
    }

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw io_error("malformed rule at line " + std::to_string(lineno));
        const std::string tname = line.substr(0, c1);
        const std::string keytok = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string valtok = line.substr(c2 + 1);
        ExactTable* t = nullptr;
        for (TableId id : {TableId::LogX, TableId::LogY, TableId::MiAdd, TableId::MiSubPos,
                           TableId::MiSubNeg, TableId::Exp, TableId::Decision})
            if (tname == table_name(id)) t = ts.table(id);
        if (!t) throw io_error("unknown table '" + tname + "' at line " + std::to_string(lineno));
        std::uint32_t pattern = 0;
        for (char c : keytok) {
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else throw io_error("bad key at line " + std::to_string(lineno));
            pattern = (pattern << 4) | static_cast<std::uint32_t>(d);
        }
        const std::int32_t key = io_detail::key_from_pattern(*t, pattern);
        if (key < t->lane_min || key > t->lane_max)
            throw io_error("key outside lane at line " + std::to_string(lineno));
        TableValue v;
        if (!io_detail::parse_value_token(*t, valtok, v))
            throw io_error("bad value at line " + std::to_string(lineno));
        t->slot(key) = v;
    }
    return ts;
}

inline TableSet import_rules(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    return import_rules(f);
}

inline void export_ternary_rules(const std::vector<CompressedTable>& tables, Format f, int k,
                                 std::ostream& os) {
    os << "# netfc-ternary v1 format=" << format_name(f) << " k=" << k << "\n";
    for (const auto& ct : tables) {
        const int digits = (ct.key_bits + 3) / 4;
        for (const auto& e : ct.entries) {
            os << table_name(ct.id) << ',' << io_detail::hex_pattern(e.key, digits) << '/'
               << io_detail::hex_pattern(e.mask, digits) << ',';
            switch (e.value.tag) {
                case TableValue::Tag::ResultZero: os << "ZERO"; break;
                case TableValue::Tag::OutOfRangeLow: os << "LOW"; break;
                case TableValue::Tag::OutOfRangeHigh: os << "HIGH"; break;
                default: {
                    const bool wide = ct.id != TableId::Exp && ct.id != TableId::Decision;
                    os << io_detail::hex_pattern(static_cast<std::uint32_t>(e.value.value),
                                                 wide ? 8 : 4);
                }
            }
            os << ',' << e.priority << "\n";
        }
    }
}

inline void export_ternary_rules(const std::vector<CompressedTable>& tables, Format f, int k,
                                 const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + path);
    export_ternary_rules(tables, f, k, os);
    if (!os.good()) throw io_error("write failed: " + path);
}

}  // namespace netfc
