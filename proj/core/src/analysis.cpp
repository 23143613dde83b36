#include "churnforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "churnforge/errors.hpp"
#include "text.hpp"

namespace churnforge::analysis {

namespace {

constexpr std::string_view kBinsHeader =
    "range_low_pct,range_high_pct,dropout_count,mean_success_rate_pct";

// Index of the range holding success rate w/p under the partition
// [0,10], (10,20], ..., (90,100] percent, by integer arithmetic only:
// the bin is ceil(10*w/p) - 1, except that a zero rate lands in bin 0.
std::size_t bin_index(std::int64_t winning, std::int64_t participation) {
    if (winning == 0) return 0;
    const std::int64_t decile_ceil = (10 * winning + participation - 1) / participation;
    return static_cast<std::size_t>(decile_ceil - 1);
}

} // namespace

CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw PreconditionError("pearson: mismatched lengths");
    if (xs.size() < 2) throw PreconditionError("pearson: need at least two points");
    const auto n = static_cast<double>(xs.size());

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedCorrelationError("pearson: zero variance in an input series");
    }
    const double rho = sxy / std::sqrt(sxx * syy);
    return CorrelationResult{std::clamp(rho, -1.0, 1.0), xs.size()};
}

CorrelationResult degree_correlation(const std::vector<WorkerFeatures>& features) {
    std::vector<double> participation, winning;
    participation.reserve(features.size());
    winning.reserve(features.size());
    for (const WorkerFeatures& f : features) {
        participation.push_back(static_cast<double>(f.participation_degree));
        winning.push_back(static_cast<double>(f.winning_degree));
    }
    return pearson(participation, winning);
}

BinTable bin_success_rates(const std::vector<WorkerFeatures>& dropouts) {
    std::array<std::int64_t, BinTable::kBinCount> counts{};
    std::array<double, BinTable::kBinCount> rate_sums{};
    for (const WorkerFeatures& f : dropouts) {
        const std::size_t bin = bin_index(f.winning_degree, f.participation_degree);
        ++counts[bin];
        rate_sums[bin] +=
            100.0 * static_cast<double>(f.winning_degree) / static_cast<double>(f.participation_degree);
    }
    std::array<BinRow, BinTable::kBinCount> rows;
    for (std::size_t i = 0; i < BinTable::kBinCount; ++i) {
        rows[i].range_low_pct = static_cast<int>(i) * 10;
        rows[i].range_high_pct = rows[i].range_low_pct + 10;
        rows[i].dropout_count = counts[i];
        if (counts[i] > 0) {
            rows[i].mean_success_rate_pct = rate_sums[i] / static_cast<double>(counts[i]);
        }
    }
    return BinTable(rows);
}

CorrelationResult bin_dropout_correlation(const BinTable& table, bool exclude_top_bin) {
    std::vector<double> means, counts;
    for (std::size_t i = 0; i < BinTable::kBinCount; ++i) {
        if (exclude_top_bin && i == BinTable::kBinCount - 1) continue;
        const BinRow& row = table.rows()[i];
        if (row.dropout_count == 0) continue;
        means.push_back(*row.mean_success_rate_pct);
        counts.push_back(static_cast<double>(row.dropout_count));
    }
    if (means.size() < 2) {
        throw PreconditionError("bin_dropout_correlation: fewer than two usable bins");
    }
    return pearson(means, counts);
}

void write_bin_table(std::ostream& out, const BinTable& table) {
    out << kBinsHeader << '\n';
    for (const BinRow& row : table.rows()) {
        out << row.range_low_pct << ',' << row.range_high_pct << ',' << row.dropout_count << ',';
        if (row.mean_success_rate_pct.has_value()) {
            out << detail::format_fixed2(*row.mean_success_rate_pct);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing bin table stream");
}

void write_bin_table_file(const std::string& path, const BinTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_bin_table(out, table);
}

BinTable read_bin_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("bin table file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kBinsHeader) {
        throw SchemaError("bin table header must be '" + std::string(kBinsHeader) + "'");
    }
    std::array<BinRow, BinTable::kBinCount> rows;
    std::size_t next = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (next >= BinTable::kBinCount) {
            throw SchemaError("bin table has more than " + std::to_string(BinTable::kBinCount) +
                              " rows");
        }
        std::istringstream fields(line);
        std::string lo, hi, count, mean;
        if (!std::getline(fields, lo, ',') || !std::getline(fields, hi, ',') ||
            !std::getline(fields, count, ',')) {
            throw SchemaError("bin table line " + std::to_string(line_no) + ": expected 4 fields");
        }
        std::getline(fields, mean); // absent and empty both mean "no mean"
        BinRow& row = rows[next++];
        try {
            row.range_low_pct = std::stoi(lo);
            row.range_high_pct = std::stoi(hi);
            row.dropout_count = std::stoll(count);
            if (!mean.empty()) row.mean_success_rate_pct = std::stod(mean);
        } catch (const std::exception&) {
            throw SchemaError("bin table line " + std::to_string(line_no) + ": malformed number");
        }
    }
    if (next != BinTable::kBinCount) {
        throw SchemaError("bin table must carry exactly " + std::to_string(BinTable::kBinCount) +
                          " rows");
    }
    return BinTable(rows);
}

BinTable read_bin_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_bin_table(in);
}

std::string render_bin_table(const BinTable& table) {
    std::ostringstream out;
    out << "success rate (%)   dropouts   mean rate (%)\n";
    for (const BinRow& row : table.rows()) {
        std::ostringstream range;
        range << row.range_low_pct << '-' << row.range_high_pct;
        std::string range_text = range.str();
        range_text.resize(19, ' ');
        std::string count_text = std::to_string(row.dropout_count);
        count_text.resize(11, ' ');
        out << range_text << count_text
            << (row.mean_success_rate_pct.has_value()
                    ? detail::format_fixed2(*row.mean_success_rate_pct)
                    : std::string("-"))
            << '\n';
    }
    return out.str();
}

} // namespace churnforge::analysis
