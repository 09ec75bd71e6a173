// netfc - table-lookup floating-point arithmetic for match-action pipelines.
//
// Subcommands: gen-tables, compress-tables, compute, eval, sweep, serve,
// send, recv, attack-demo.  Exit codes: 0 ok, 2 usage, 3 I/O, 4
// verification failure.  NETFC_SEED overrides the built-in dataset seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "netfc/compress.hpp"
#include "netfc/evaluate.hpp"
#include "netfc/slowloris.hpp"
#include "netfc/table_io.hpp"
#include "netfc/wire.hpp"

using namespace netfc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerification = 4;

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop.store(true); }

Format parse_format(const std::string& s) {
    if (s == "float16") return Format::Float16;
    if (s == "posit16") return Format::Posit16;
    throw CLI::ValidationError("--format", "must be float16 or posit16");
}

int default_k(Format f) { return f == Format::Float16 ? 1024 : 512; }

OpKind parse_op(const std::string& s) {
    if (s == "add") return OpKind::Add;
    if (s == "sub") return OpKind::Sub;
    if (s == "mul") return OpKind::Mul;
    if (s == "div") return OpKind::Div;
    throw CLI::ValidationError("--op", "must be add, sub, mul or div");
}

// operands come in as raw bits (0x....) or decimal values
Bits16 parse_operand(const std::string& s, Format fmt) {
    if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) {
        const unsigned long v = std::stoul(s.substr(2), nullptr, 16);
        if (v > 0xFFFF) throw CLI::ValidationError("operand", "raw pattern exceeds 16 bits");
        return Bits16{static_cast<std::uint16_t>(v), fmt};
    }
    return encode_nearest(std::strtold(s.c_str(), nullptr), fmt);
}

std::string bits_hex(std::uint16_t v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04x", v);
    return buf;
}

std::string decoded_str(Bits16 b) {
    const Decoded d = decode(b);
    switch (d.cls) {
        case NumClass::NaN: return "nan";
        case NumClass::NaR: return "nar";
        case NumClass::Infinity: return d.negative ? "-inf" : "+inf";
        default: break;
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10Lg", d.value);
    return buf;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
    if (!os.good()) throw io_error("write failed: " + path);
}

int cmd_gen_tables(Format fmt, int k, const std::string& prune, const std::string& out) {
    TableSet ts = build_table_set(fmt, k);
    if (!prune.empty()) {
        const auto comma = prune.find(',');
        if (comma == std::string::npos)
            throw CLI::ValidationError("--prune", "expected lo,hi");
        const long double lo = std::strtold(prune.substr(0, comma).c_str(), nullptr);
        const long double hi = std::strtold(prune.substr(comma + 1).c_str(), nullptr);
        ts = prune_to_range(ts, lo, hi);
    }
    export_rules(ts, out);
    const std::uint64_t bytes = ts.memory_bytes();
    std::cout << ts.entry_count() << " entries, ";
    if (bytes % 1024 == 0)
        std::cout << bytes / 1024 << " KiB";
    else
        std::cout << bytes << " B";
    std::cout << " (" << format_name(fmt) << ", k=" << k << ") -> " << out << "\n";
    return kExitOk;
}

int cmd_compress_tables(const std::string& in, const std::string& out, const std::string& report) {
    const TableSet ts = import_rules(in);
    const std::vector<CompressedTable> all = compress_set(ts);
    nlohmann::json tables = nlohmann::json::array();
    bool all_equal = true;
    for (const auto& ct : all) {
        const LossReport rep = verify_lossless(*ts.table(ct.id), ct);
        all_equal = all_equal && rep.equal;
        tables.push_back({{"table", table_name(ct.id)},
                          {"original", ct.original_count},
                          {"compressed", ct.compressed_count()},
                          {"savings", ct.savings()},
                          {"lossless", rep.equal}});
    }
    export_ternary_rules(all, ts.format, ts.k, out);
    const nlohmann::json j{{"format", format_name(ts.format)},
                           {"k", ts.k},
                           {"tables", tables},
                           {"aggregate_savings", aggregate_savings(all)},
                           {"lossless", all_equal}};
    if (!report.empty()) write_json(j, report);
    std::cout << "aggregate savings " << aggregate_savings(all) * 100.0 << "% -> " << out << "\n";
    if (!all_equal) {
        std::cerr << "error: compression verification failed\n";
        return kExitVerification;
    }
    return kExitOk;
}

int cmd_compute(Format fmt, int k, OpKind op, const std::string& xs, const std::string& ys,
                bool trace) {
    const TableSet ts = build_table_set(fmt, k);
    const Bits16 x = parse_operand(xs, fmt);
    const Bits16 y = parse_operand(ys, fmt);
    const PipelineResult r = run_op(op, x, y, ts);
    std::cout << op_name(op) << "(" << decoded_str(x) << ", " << decoded_str(y)
              << ") = " << decoded_str(r.value) << "  bits=" << bits_hex(r.value.raw)
              << "  corner=" << corner_name(r.corner) << "  stages=" << r.trace.stage_count()
              << "\n";
    if (trace) {
        for (const Step& s : r.trace.steps) {
            const char* kind = s.kind == StepKind::ExactLookup   ? "exact-lookup"
                               : s.kind == StepKind::TernaryLookup ? "ternary-lookup"
                               : s.kind == StepKind::IntAdd        ? "int-add"
                               : s.kind == StepKind::IntSub        ? "int-sub"
                               : s.kind == StepKind::IntCmp        ? "int-cmp"
                                                                   : "bit-op";
            std::cout << "  stage " << s.stage << ": " << kind << " " << s.label << "\n";
        }
    }
    return kExitOk;
}

int cmd_eval(OpKind op, int dataset, Format fmt, int k, std::int64_t baseline_sf,
             const std::string& heatmap, const std::string& report) {
    const TableSet ts = build_table_set(fmt, k);
    const Dataset ds = gen_dataset(dataset, default_seed(), fmt);
    std::optional<BaselineConfig> cfg;
    if (baseline_sf > 0) cfg = BaselineConfig{baseline_sf};
    const EvalReport rep = evaluate(op, ds, ts, cfg);
    if (!heatmap.empty()) export_heatmap_csv(rep.netfc_heatmap, heatmap);
    if (!report.empty()) export_report(rep, report, ReportFormat::Json);
    std::cout << op_name(op) << " dataset " << dataset << " (" << format_name(fmt) << ", k=" << k
              << ", seed=" << ds.seed << "): median " << rep.netfc.median << ", average "
              << rep.netfc.average << ", min " << rep.netfc.minimum << ", mse " << rep.netfc.mse
              << "\n";
    if (cfg)
        std::cout << "baseline sf=" << cfg->sf << ": median " << rep.baseline.median
                  << ", average " << rep.baseline.average << ", mse " << rep.baseline.mse << "\n";
    return kExitOk;
}

int cmd_sweep(OpKind op, int dataset, Format fmt, const std::string& ks_csv,
              const std::string& report) {
    std::vector<int> ks;
    std::size_t pos = 0;
    while (pos < ks_csv.size()) {
        const auto comma = ks_csv.find(',', pos);
        const std::string tok =
            ks_csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        ks.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    const Dataset ds = gen_dataset(dataset, default_seed(), fmt);
    const auto points = sweep_scaling_factor(op, ds, fmt, ks);
    for (const auto& p : points)
        std::cout << "k=" << p.k << ": median " << p.median_accuracy << ", " << p.entries
                  << " entries, " << p.memory_bytes << " B\n";
    if (!report.empty()) write_json(sweep_json(op, ds, fmt, points), report);
    return kExitOk;
}

int cmd_serve(const std::string& listen, const std::string& forward, Format fmt, int k) {
    const TableSet ts = build_table_set(fmt, k);
    UdpService service(ts, listen, forward);
    service.start();
    std::cout << "netfc switch on " << listen << " (port " << service.local_port()
              << "), forwarding to " << forward << "\n";
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    const CounterSnapshot c = service.counters();
    std::cout << "received " << c.received << ", processed " << c.processed << ", pass-through "
              << c.not_netfc << ", corners " << c.corners << ", errors " << c.errors << "\n";
    return kExitOk;
}

int cmd_send(const std::string& file, int dataset, OpKind op, Format fmt, const std::string& dest,
             int rate) {
    std::vector<std::pair<Bits16, Bits16>> pairs;
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is) throw io_error("cannot open: " + file);
        for (std::string line; std::getline(is, line);) {
            if (line.empty() || line[0] == '#') continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            pairs.emplace_back(parse_operand(line.substr(0, comma), fmt),
                               parse_operand(line.substr(comma + 1), fmt));
        }
    } else {
        pairs = gen_dataset(dataset, default_seed(), fmt).pairs;
    }
    UdpSocket sock;
    sock.bind(parse_hostport("0.0.0.0:0"));
    const sockaddr_in dst = parse_hostport(dest);
    const auto gap = rate > 0 ? std::chrono::microseconds(1000000 / rate)
                              : std::chrono::microseconds(0);
    for (const auto& [x, y] : pairs) {
        NetFcPacket p;
        p.op = op == OpKind::Add ? 1 : op == OpKind::Sub ? 2 : op == OpKind::Mul ? 3 : 4;
        p.format = fmt == Format::Float16 ? 0 : 1;
        p.x = x.raw;
        p.y = y.raw;
        const auto bytes = serialize(p);
        sock.send_to(bytes.data(), bytes.size(), dst);
        if (gap.count() > 0) std::this_thread::sleep_for(gap);
    }
    std::cout << "sent " << pairs.size() << " packets to " << dest << "\n";
    return kExitOk;
}

int cmd_recv(const std::string& listen, const std::string& report, std::uint64_t count,
             int idle_timeout_ms) {
    UdpSocket sock;
    sock.bind(parse_hostport(listen));
    std::cout << "receiver on port " << sock.local_port() << "\n";
    std::vector<AccuracyRecord> records;
    HeatmapGrid heat;
    std::uint64_t seen = 0, netfc_count = 0, corner_count = 0, error_count = 0;
    std::vector<std::uint8_t> buf;
    std::signal(SIGINT, handle_signal);
    while (!g_stop.load() && (count == 0 || seen < count)) {
        const ssize_t got = sock.recv_timeout(buf, idle_timeout_ms);
        if (got < 0) {
            if (seen > 0) break;  // stream ended
            continue;
        }
        ++seen;
        const auto p = parse(buf.data(), buf.size());
        if (!p || p->op < 1 || p->op > 4) continue;
        ++netfc_count;
        if (p->flags & kFlagCorner) ++corner_count;
        if (p->flags & kFlagError) ++error_count;
        const Format fmt = p->format == 0 ? Format::Float16 : Format::Posit16;
        static constexpr OpKind kOps[] = {OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div};
        const double a = static_cast<double>(decode(Bits16{p->x, fmt}).value);
        const double b = static_cast<double>(decode(Bits16{p->y, fmt}).value);
        const double expect = exact_op(kOps[p->op - 1], a, b);
        const Decoded rd = decode(Bits16{p->result, fmt});
        const double result = rd.cls == NumClass::NaN || rd.cls == NumClass::NaR
                                  ? std::nan("")
                                  : static_cast<double>(rd.value);
        const double acc = accuracy(expect, result);
        records.push_back({expect, result, acc});
        heat.add(acc);
    }
    nlohmann::json j{{"packets", seen},
                     {"netfc_packets", netfc_count},
                     {"corners", corner_count},
                     {"errors", error_count}};
    if (!records.empty()) {
        const Aggregate agg = aggregate(records);
        j["accuracy"] = aggregate_json(agg);
        j["heatmap"] = heatmap_json(heat);
        std::cout << "received " << seen << " packets: median " << agg.median << ", average "
                  << agg.average << ", mse " << agg.mse << "\n";
    } else {
        std::cout << "received " << seen << " packets\n";
    }
    if (!report.empty()) write_json(j, report);
    return kExitOk;
}

int cmd_attack_demo(const std::string& trace_path, double threshold, double cp_delay_ms,
                    const std::string& report) {
    const TableSet ts = build_table_set(Format::Float16, 1024);
    TelemetryRegisters reg(ts, threshold);
    std::ifstream is(trace_path);
    if (!is) throw io_error("cannot open: " + trace_path);
    std::uint64_t fed = 0;
    for (std::string line; std::getline(is, line);) {
        const auto r = parse_trace_line(line);
        if (!r) continue;
        reg.on_packet(r->dst, r->src, r->sport, r->dport, r->bytes);
        ++fed;
    }

    nlohmann::json dsts = nlohmann::json::array();
    std::uint64_t attacks = 0, agreements = 0, comparable = 0;
    double fast_latency = 0.0, slow_latency = 0.0;
    const std::uint64_t fast_path_controller_calls = reg.controller_invocations();
    for (const auto& dst : reg.destinations()) {
        const auto* st = reg.state(dst);
        const auto fast = reg.query(dst);
        nlohmann::json d{{"dst", dst}, {"connections", st->conn_count}, {"bytes", st->byte_count}};
        if (fast) {
            d["cpb_bits"] = bits_hex(fast->cpb.raw);
            d["cpb"] = static_cast<double>(decode(fast->cpb).value);
            d["attack"] = fast->attack;
            if (fast->attack) ++attacks;
            const auto slow = reg.query_slow_path(dst, cp_delay_ms);
            if (slow) {
                const double cpb = static_cast<double>(decode(fast->cpb).value);
                const double thr = static_cast<double>(decode(reg.threshold()).value);
                if (std::fabs(cpb - thr) >= 0.01 * thr) {
                    ++comparable;
                    if (slow->attack == fast->attack) ++agreements;
                }
                fast_latency = fast->modeled_latency_ms;
                slow_latency = slow->modeled_latency_ms;
            }
        }
        dsts.push_back(d);
    }

    const nlohmann::json j{
        {"trace_records", fed},
        {"destinations", dsts},
        {"attacks_flagged", attacks},
        {"threshold", threshold},
        {"fast_path", {{"control_plane_hops", 0}, {"modeled_latency_ms", fast_latency},
                       {"controller_invocations", fast_path_controller_calls}}},
        {"slow_path", {{"control_plane_hops", 2}, {"modeled_latency_ms", slow_latency},
                       {"cp_delay_ms", cp_delay_ms}}},
        {"latency_ratio", fast_latency > 0.0 ? slow_latency / fast_latency : 0.0},
        {"verdict_agreement", {{"comparable", comparable}, {"agreed", agreements}}}};
    if (!report.empty()) write_json(j, report);
    std::cout << "destinations " << reg.destinations().size() << ", attacks " << attacks
              << ", fast 0 hops / " << fast_latency << " ms, slow 2 hops / " << slow_latency
              << " ms (ratio " << (fast_latency > 0 ? slow_latency / fast_latency : 0.0) << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netfc: table-lookup floating-point arithmetic for match-action pipelines"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a TOML-like file; flags win");

    std::string format_s = "float16";
    int k = 0;
    std::string op_s = "add";

    // gen-tables
    auto* gen = app.add_subcommand("gen-tables", "build and export the lookup tables");
    std::string gen_prune, gen_out = "netfc-rules.txt";
    gen->add_option("--format", format_s, "float16 or posit16");
    gen->add_option("--k", k, "scaling factor (power of two)");
    gen->add_option("--prune", gen_prune, "restrict to |values| in lo,hi");
    gen->add_option("--out", gen_out, "rule file path");

    // compress-tables
    auto* comp = app.add_subcommand("compress-tables", "prefix-compress a rule file into ternary rules");
    std::string comp_in, comp_out = "netfc-ternary.txt", comp_report;
    comp->add_option("--in", comp_in, "exact rule file")->required();
    comp->add_option("--out", comp_out, "ternary rule file");
    comp->add_option("--report", comp_report, "json report path");

    // compute
    auto* compute = app.add_subcommand("compute", "run one operation through the pipeline");
    std::string comp_x, comp_y;
    bool show_trace = false;
    compute->add_option("--format", format_s);
    compute->add_option("--k", k);
    compute->add_option("--op", op_s, "add|sub|mul|div");
    compute->add_option("--x", comp_x, "operand (decimal or 0x raw bits)")->required();
    compute->add_option("--y", comp_y, "operand (decimal or 0x raw bits)")->required();
    compute->add_flag("--trace", show_trace, "print the stage trace");

    // eval
    auto* eval = app.add_subcommand("eval", "score an operation over a dataset");
    int eval_dataset = 1;
    std::int64_t eval_baseline = 0;
    std::string eval_heatmap, eval_report;
    eval->add_option("--op", op_s);
    eval->add_option("--dataset", eval_dataset, "1, 2 or 3");
    eval->add_option("--format", format_s);
    eval->add_option("--k", k);
    eval->add_option("--baseline", eval_baseline, "also run the float-to-integer baseline at this sf");
    eval->add_option("--heatmap", eval_heatmap, "write the 10x10 heatmap csv");
    eval->add_option("--report", eval_report, "write the json report");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "median accuracy and memory across scaling factors");
    std::string sweep_ks = "64,128,256,512,1024", sweep_report;
    int sweep_dataset = 2;
    sweep->add_option("--ks", sweep_ks, "comma-separated powers of two");
    sweep->add_option("--op", op_s);
    sweep->add_option("--dataset", sweep_dataset);
    sweep->add_option("--format", format_s);
    sweep->add_option("--report", sweep_report, "write the json report");

    // serve
    auto* serve = app.add_subcommand("serve", "run the switch emulator");
    std::string serve_listen = "0.0.0.0:9474", serve_forward;
    serve->add_option("--listen", serve_listen, "bind address:port");
    serve->add_option("--forward", serve_forward, "next hop address:port")->required();
    serve->add_option("--format", format_s);
    serve->add_option("--k", k);

    // send
    auto* send = app.add_subcommand("send", "emit NetFC packets");
    std::string send_file, send_dest;
    int send_dataset = 2, send_rate = 0;
    send->add_option("--file", send_file, "csv of operand pairs (x,y per line)");
    send->add_option("--dataset", send_dataset, "built-in dataset when no file given");
    send->add_option("--op", op_s);
    send->add_option("--format", format_s);
    send->add_option("--dest", send_dest, "switch address:port")->required();
    send->add_option("--rate", send_rate, "packets per second (0 = unpaced)");

    // recv
    auto* recv = app.add_subcommand("recv", "receive processed packets and score them");
    std::string recv_listen = "0.0.0.0:9475", recv_report;
    std::uint64_t recv_count = 0;
    int recv_idle = 2000;
    recv->add_option("--listen", recv_listen);
    recv->add_option("--report", recv_report, "write the json report");
    recv->add_option("--count", recv_count, "stop after this many packets (0 = until idle)");
    recv->add_option("--idle-ms", recv_idle, "stop after this long without traffic");

    // attack-demo
    auto* demo = app.add_subcommand("attack-demo", "Slowloris detection over a csv trace");
    std::string demo_trace, demo_report;
    double demo_threshold = 1e-3, demo_delay = 43.0;
    demo->add_option("--trace", demo_trace, "csv: ts,src,dst,sport,dport,bytes")->required();
    demo->add_option("--threshold", demo_threshold, "connections-per-byte attack threshold");
    demo->add_option("--cp-delay-ms", demo_delay, "modeled control-plane round trip");
    demo->add_option("--report", demo_report, "write the json report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Format fmt = parse_format(format_s);
        if (k == 0) k = default_k(fmt);
        const OpKind op = parse_op(op_s);
        if (gen->parsed()) return cmd_gen_tables(fmt, k, gen_prune, gen_out);
        if (comp->parsed()) return cmd_compress_tables(comp_in, comp_out, comp_report);
        if (compute->parsed()) return cmd_compute(fmt, k, op, comp_x, comp_y, show_trace);
        if (eval->parsed())
            return cmd_eval(op, eval_dataset, fmt, k, eval_baseline, eval_heatmap, eval_report);
        if (sweep->parsed()) return cmd_sweep(op, sweep_dataset, fmt, sweep_ks, sweep_report);
        if (serve->parsed()) return cmd_serve(serve_listen, serve_forward, fmt, k);
        if (send->parsed()) return cmd_send(send_file, send_dataset, op, fmt, send_dest, send_rate);
        if (recv->parsed()) return cmd_recv(recv_listen, recv_report, recv_count, recv_idle);
        if (demo->parsed()) return cmd_attack_demo(demo_trace, demo_threshold, demo_delay, demo_report);
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const socket_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
