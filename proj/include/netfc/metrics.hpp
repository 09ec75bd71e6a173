#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Accuracy metric, MSE and the 10x10 decile/percentile heatmap.

namespace netfc {

// accuracy = e^(-|expect - result| / |expect|), in [0, 1].  A result with
// the wrong magnitude entirely lands near e^-1 = 0.3679; expect = 0 keeps
// the same spirit: exact hit scores 1, anything else scores e^-1.
inline double accuracy(double expect, double result) {
    if (std::isnan(result)) return 0.0;
    if (expect == result) return 1.0;  // also covers matching infinities
    if (expect == 0.0) return std::exp(-1.0);
    if (!std::isfinite(expect)) return 0.0;
    const double rel = std::fabs(expect - result) / std::fabs(expect);
    return std::exp(-rel);
}

struct AccuracyRecord {
    double expect = 0.0;
    double result = 0.0;
    double accuracy = 0.0;
};

inline double mse(const std::vector<AccuracyRecord>& records) {
    if (records.empty()) throw std::invalid_argument("mse: empty record set");
    double acc = 0.0;
    for (const auto& r : records) {
        const double d = r.expect - r.result;
        acc += d * d;
    }
    return acc / static_cast<double>(records.size());
}

// Cell (i, j) counts records with accuracy in [0.1 i + 0.01 j, 0.1 i + 0.01 (j+1));
// accuracy 1.0 clamps into (9, 9).  Raw counts are stored; the displayed
// quantity is log2(count), with empty cells blank rather than -inf.
struct HeatmapGrid {
    std::array<std::uint64_t, 100> counts{};

    void add(double accuracy_value) {
        int cell = static_cast<int>(std::floor(accuracy_value * 100.0));
        cell = std::clamp(cell, 0, 99);
        ++counts[static_cast<std::size_t>(cell)];
    }

    std::uint64_t count(int i, int j) const {
        return counts[static_cast<std::size_t>(i * 10 + j)];
    }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }

    // log2 of the cell count; false for empty cells
    bool log2_cell(int i, int j, double& out) const {
        const std::uint64_t c = count(i, j);
        if (c == 0) return false;
        out = std::log2(static_cast<double>(c));
        return true;
    }
};

struct Aggregate {
    double average = 0.0;
    double median = 0.0;
    double minimum = 0.0;
    double mse = 0.0;
};

inline Aggregate aggregate(const std::vector<AccuracyRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: empty record set");
    Aggregate a;
    std::vector<double> acc;
    acc.reserve(records.size());
    double sum = 0.0;
    double lo = 1.0;
    for (const auto& r : records) {
        acc.push_back(r.accuracy);
        sum += r.accuracy;
        lo = std::min(lo, r.accuracy);
    }
    std::sort(acc.begin(), acc.end());
    const std::size_t n = acc.size();
    a.average = sum / static_cast<double>(n);
    a.median = n % 2 ? acc[n / 2] : 0.5 * (acc[n / 2 - 1] + acc[n / 2]);
    a.minimum = lo;
    a.mse = mse(records);
    return a;
}

}  // namespace netfc
