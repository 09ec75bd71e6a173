#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netfc/pipeline.hpp"
#include "netfc/wire.hpp"

// Slowloris detection demo: per-destination connection and byte registers
// with the connections-per-byte ratio computed in the data plane by the
// table-lookup divider.  A query reads the CPB register directly (zero
// control-plane crossings); the legacy slow path detours the raw counters
// through a controller that divides in double precision, modeled as two
// control-plane crossings and a configurable round-trip delay.

namespace netfc {

struct Verdict {
    Bits16 cpb{};
    Bits16 threshold{};
    bool attack = false;
    int control_plane_hops = 0;
    double modeled_latency_ms = 0.0;
};

class TelemetryRegisters {
  public:
    struct DstState {
        std::set<std::string> flows;  // exact distinct-4-tuple tracking at desk scale
        std::uint64_t conn_count = 0;
        std::uint64_t byte_count = 0;
        std::optional<Bits16> cpb;
    };

    // attack when cpb > threshold: many connections per byte is the
    // Slowloris signature (low bytes-per-connection, inverted)
    TelemetryRegisters(const TableSet& tables, double threshold = 1e-3,
                       double transit_ms = 0.05)
        : tables_(&tables),
          threshold_(encode_nearest(static_cast<long double>(threshold), tables.format)),
          transit_ms_(transit_ms) {
        if (tables.format != Format::Float16)
            throw std::invalid_argument("telemetry registers run on float16 tables");
    }

    void on_packet(const std::string& dst, const std::string& src, std::uint16_t sport,
                   std::uint16_t dport, std::uint64_t payload_bytes) {
        DstState& st = state_for(dst);
        st.flows.insert(src + '|' + std::to_string(sport) + '|' + std::to_string(dport));
        st.conn_count = st.flows.size();
        st.byte_count += payload_bytes;
        if (st.byte_count == 0) return;  // division stays invalid until bytes arrive
        const Bits16 conns = saturating_count(st.conn_count);
        const Bits16 bytes = saturating_count(st.byte_count);
        const PipelineResult r = div(conns, bytes, *tables_);
        if (r.corner != Corner::InvalidDiv) st.cpb = r.value;
    }

    // fast path: the register holds the answer
    std::optional<Verdict> query(const std::string& dst) const {
        const auto it = per_dst_.find(dst);
        if (it == per_dst_.end() || !it->second.cpb) return std::nullopt;
        Verdict v;
        v.cpb = *it->second.cpb;
        v.threshold = threshold_;
        v.attack = magnitude_gt(v.cpb, threshold_);
        v.control_plane_hops = 0;
        v.modeled_latency_ms = transit_ms_;
        return v;
    }

    // slow path: counters to the controller, divide there, write back
    std::optional<Verdict> query_slow_path(const std::string& dst, double cp_delay_ms) {
        const auto it = per_dst_.find(dst);
        if (it == per_dst_.end() || it->second.byte_count == 0) return std::nullopt;
        ++controller_invocations_;
        const double cpb = static_cast<double>(it->second.conn_count) /
                           static_cast<double>(it->second.byte_count);
        Verdict v;
        v.cpb = encode_nearest(static_cast<long double>(cpb), tables_->format);
        v.threshold = threshold_;
        v.attack = cpb > static_cast<double>(decode(threshold_).value);
        v.control_plane_hops = 2;  // registers out, verdict back
        v.modeled_latency_ms = cp_delay_ms + transit_ms_;
        return v;
    }

    // op=5 query packets: x carries the destination index in first-seen order
    NetFcPacket handle_query_packet(NetFcPacket p) const {
        if (p.op != static_cast<std::uint8_t>(PacketOp::Query)) {
            p.flags |= kFlagError;
            return p;
        }
        if (p.x >= key_order_.size()) {
            p.flags |= kFlagError;
            p.result = 0;
            return p;
        }
        const auto v = query(key_order_[p.x]);
        if (!v) {
            p.flags |= kFlagError;
            p.result = 0;
            return p;
        }
        p.result = v->cpb.raw;
        if (v->attack) p.flags |= kFlagCorner;
        return p;
    }

    const DstState* state(const std::string& dst) const {
        const auto it = per_dst_.find(dst);
        return it == per_dst_.end() ? nullptr : &it->second;
    }
    const std::vector<std::string>& destinations() const { return key_order_; }
    std::uint64_t controller_invocations() const { return controller_invocations_; }
    Bits16 threshold() const { return threshold_; }
    double transit_ms() const { return transit_ms_; }

  private:
    DstState& state_for(const std::string& dst) {
        const auto [it, fresh] = per_dst_.try_emplace(dst);
        if (fresh) key_order_.push_back(dst);
        return it->second;
    }

    // counters saturate at the largest float16-representable count before
    // conversion, keeping the divider away from its own overflow corners
    Bits16 saturating_count(std::uint64_t n) const {
        const auto capped = static_cast<long double>(n > 65504 ? 65504 : n);
        return encode_nearest(capped, tables_->format);
    }

    static bool magnitude_gt(Bits16 a, Bits16 b) {
        return a.raw > b.raw;  // both operands are positive float16 patterns
    }

    const TableSet* tables_;
    Bits16 threshold_;
    double transit_ms_;
    std::map<std::string, DstState> per_dst_;
    std::vector<std::string> key_order_;
    std::uint64_t controller_invocations_ = 0;
};

// One line of the pcap-like csv trace: ts,src,dst,sport,dport,bytes
struct TraceRecord {
    double ts = 0.0;
    std::string src;
    std::string dst;
    std::uint16_t sport = 0;
    std::uint16_t dport = 0;
    std::uint64_t bytes = 0;
};

inline std::optional<TraceRecord> parse_trace_line(const std::string& line) {
    if (line.empty() || line[0] == '#') return std::nullopt;
    TraceRecord r;
    std::size_t pos = 0;
    const auto next = [&](std::string& out) {
        const auto comma = line.find(',', pos);
        if (comma == std::string::npos) return false;
        out = line.substr(pos, comma - pos);
        pos = comma + 1;
        return true;
    };
    std::string ts, sport, dport;
    if (!next(ts) || !next(r.src) || !next(r.dst) || !next(sport) || !next(dport)) return std::nullopt;
    const std::string bytes = line.substr(pos);
    try {
        r.ts = std::stod(ts);
        r.sport = static_cast<std::uint16_t>(std::stoul(sport));
        r.dport = static_cast<std::uint16_t>(std::stoul(dport));
        r.bytes = std::stoull(bytes);
    } catch (...) {
        return std::nullopt;
    }
    return r;
}

}  // namespace netfc
