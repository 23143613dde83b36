#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "churnforge/model.hpp"

namespace churnforge::analysis {

struct CorrelationResult {
    double rho = 0.0;        // in [-1, 1]
    std::size_t n_points = 0; // >= 2

    bool operator==(const CorrelationResult&) const = default;
};

// Product-moment correlation, two-pass (means first, then central moments).
// Throws PreconditionError on mismatched lengths or fewer than two points,
// UndefinedCorrelationError when either series has zero variance.
CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// pearson over (participation_degree, winning_degree) pairs.
CorrelationResult degree_correlation(const std::vector<WorkerFeatures>& features);

// Tallies the dropout subset into the ten success-rate ranges [0,10],
// (10,20], ..., (90,100] percent. Bin membership is decided by exact integer
// cross-multiplication on the degrees, never by real-valued comparison.
// Means are reported in percent; empty bins carry no mean.
BinTable bin_success_rates(const std::vector<WorkerFeatures>& dropouts);

// pearson over (mean success rate, dropout count) of the nonempty bins,
// optionally omitting the (90,100] row. Throws PreconditionError when fewer
// than two usable bins remain.
CorrelationResult bin_dropout_correlation(const BinTable& table, bool exclude_top_bin);

// CSV: range_low_pct,range_high_pct,dropout_count,mean_success_rate_pct
// (mean to two decimals, empty field for empty bins).
void write_bin_table(std::ostream& out, const BinTable& table);
void write_bin_table_file(const std::string& path, const BinTable& table);
BinTable read_bin_table(std::istream& in);
BinTable read_bin_table_file(const std::string& path);

// Aligned human-readable rendering: range, count, mean success rate.
std::string render_bin_table(const BinTable& table);

} // namespace churnforge::analysis
