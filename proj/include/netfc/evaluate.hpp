#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "netfc/baseline.hpp"
#include "netfc/dataset.hpp"
#include "netfc/errors.hpp"
#include "netfc/metrics.hpp"
#include "netfc/pipeline.hpp"

// Dataset evaluation: run an operation over every pair through the table
// pipeline, score it against a double-precision expected result (the
// receiver-CPU oracle), and aggregate.  The float-to-integer baseline can
// ride along for add/sub.

namespace netfc {

struct EvalReport {
    OpKind op = OpKind::Add;
    int dataset_kind = 1;
    Format format = Format::Float16;
    int k = 0;
    std::uint64_t seed = 0;
    std::size_t record_count = 0;

    Aggregate netfc;
    HeatmapGrid netfc_heatmap;
    std::vector<AccuracyRecord> netfc_records;

    std::optional<std::int64_t> baseline_sf;
    Aggregate baseline;
    HeatmapGrid baseline_heatmap;
    std::vector<AccuracyRecord> baseline_records;
};

inline double exact_op(OpKind op, double a, double b) {
    switch (op) {
        case OpKind::Add: return a + b;
        case OpKind::Sub: return a - b;
        case OpKind::Mul: return a * b;
        case OpKind::Div: return a / b;
    }
    return 0.0;
}

inline EvalReport evaluate(OpKind op, const Dataset& ds, const TableSet& ts,
                           std::optional<BaselineConfig> baseline_cfg = std::nullopt) {
    if (ds.format != ts.format) throw format_mismatch("evaluate: dataset/table formats differ");
    if (baseline_cfg && op != OpKind::Add && op != OpKind::Sub)
        throw std::invalid_argument("evaluate: the float-to-integer baseline only supports add/sub");

    EvalReport rep;
    rep.op = op;
    rep.dataset_kind = ds.kind;
    rep.format = ds.format;
    rep.k = ts.k;
    rep.seed = ds.seed;
    rep.record_count = ds.pairs.size();
    rep.netfc_records.reserve(ds.pairs.size());
    if (baseline_cfg) {
        rep.baseline_sf = baseline_cfg->sf;
        rep.baseline_records.reserve(ds.pairs.size());
    }

    for (const auto& [x, y] : ds.pairs) {
        const double a = static_cast<double>(decode(x).value);
        const double b = static_cast<double>(decode(y).value);
        const double expect = exact_op(op, a, b);

        const PipelineResult pr = run_op(op, x, y, ts);
        const Decoded pd = decode(pr.value);
        const double result = pd.cls == NumClass::NaN || pd.cls == NumClass::NaR
                                  ? std::nan("")
                                  : static_cast<double>(pd.value);
        const double acc = accuracy(expect, result);
        rep.netfc_records.push_back({expect, result, acc});
        rep.netfc_heatmap.add(acc);

        if (baseline_cfg) {
            const double br = op == OpKind::Add ? baseline_add(x, y, *baseline_cfg)
                                                : baseline_sub(x, y, *baseline_cfg);
            const double bacc = accuracy(expect, br);
            rep.baseline_records.push_back({expect, br, bacc});
            rep.baseline_heatmap.add(bacc);
        }
    }

    rep.netfc = aggregate(rep.netfc_records);
    if (baseline_cfg) rep.baseline = aggregate(rep.baseline_records);
    return rep;
}

struct SweepPoint {
    int k = 0;
    double median_accuracy = 0.0;
    std::uint64_t entries = 0;
    std::uint64_t memory_bytes = 0;
};

inline std::vector<SweepPoint> sweep_scaling_factor(OpKind op, const Dataset& ds, Format format,
                                                    const std::vector<int>& ks) {
    if (ks.empty()) throw std::invalid_argument("sweep: no scaling factors given");
    std::vector<SweepPoint> points;
    points.reserve(ks.size());
    for (int k : ks) {
        require_valid_k(k);
        const TableSet ts = build_table_set(format, k);
        const EvalReport rep = evaluate(op, ds, ts);
        points.push_back({k, rep.netfc.median, ts.entry_count(), ts.memory_bytes()});
    }
    return points;
}

// ---- serialization ----

inline nlohmann::json heatmap_json(const HeatmapGrid& g) {
    nlohmann::json cells = nlohmann::json::array();
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) cells.push_back(g.count(i, j));
    return cells;
}

inline nlohmann::json aggregate_json(const Aggregate& a) {
    return {{"average", a.average}, {"median", a.median}, {"minimum", a.minimum}, {"mse", a.mse}};
}

inline nlohmann::json report_json(const EvalReport& rep) {
    nlohmann::json j{
        {"op", op_name(rep.op)},
        {"dataset", rep.dataset_kind},
        {"format", format_name(rep.format)},
        {"k", rep.k},
        {"seed", rep.seed},
        {"records", rep.record_count},
        {"netfc", aggregate_json(rep.netfc)},
        {"heatmap", heatmap_json(rep.netfc_heatmap)},
    };
    if (rep.baseline_sf) {
        j["baseline"] = aggregate_json(rep.baseline);
        j["baseline"]["sf"] = *rep.baseline_sf;
        j["baseline_heatmap"] = heatmap_json(rep.baseline_heatmap);
    }
    return j;
}

enum class ReportFormat { Json, Csv };

inline void export_report(const EvalReport& rep, const std::string& path, ReportFormat fmt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("cannot open for writing: " + path);
    if (fmt == ReportFormat::Json) {
        os << report_json(rep).dump(2) << "\n";
    } else {
        os << (rep.baseline_sf ? "expect,result,accuracy,baseline_result,baseline_accuracy\n"
                               : "expect,result,accuracy\n");
        char line[192];
        for (std::size_t i = 0; i < rep.netfc_records.size(); ++i) {
            const auto& r = rep.netfc_records[i];
            if (rep.baseline_sf) {
                const auto& b = rep.baseline_records[i];
                std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.expect,
                              r.result, r.accuracy, b.result, b.accuracy);
            } else {
                std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", r.expect, r.result,
                              r.accuracy);
            }
            os << line;
        }
    }
    if (!os.good()) throw error("write failed: " + path);
}

inline void export_heatmap_csv(const HeatmapGrid& g, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("cannot open for writing: " + path);
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) os << g.count(i, j) << (j == 9 ? "" : ",");
        os << "\n";
    }
    if (!os.good()) throw error("write failed: " + path);
}

inline nlohmann::json sweep_json(OpKind op, const Dataset& ds, Format format,
                                 const std::vector<SweepPoint>& points) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : points)
        arr.push_back({{"k", p.k},
                       {"median_accuracy", p.median_accuracy},
                       {"entries", p.entries},
                       {"memory_bytes", p.memory_bytes}});
    return {{"op", op_name(op)},
            {"dataset", ds.kind},
            {"format", format_name(format)},
            {"seed", ds.seed},
            {"points", arr}};
}

}  // namespace netfc
