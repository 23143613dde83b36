#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "churnforge/analysis.hpp"
#include "churnforge/errors.hpp"
#include "churnforge/rng.hpp"

using namespace churnforge;
using analysis::CorrelationResult;

namespace {

constexpr double kTol = 1e-9;

BinTable make_table(const std::vector<std::pair<std::int64_t, std::optional<double>>>& cells) {
    std::array<BinRow, BinTable::kBinCount> rows{};
    for (std::size_t i = 0; i < BinTable::kBinCount; ++i) {
        rows[i].range_low_pct = static_cast<int>(i * 10);
        rows[i].range_high_pct = static_cast<int>(i * 10 + 10);
        if (i < cells.size()) {
            rows[i].dropout_count = cells[i].first;
            rows[i].mean_success_rate_pct = cells[i].second;
        }
    }
    return BinTable(rows);
}

} // namespace

TEST_CASE("pearson on pinned fixtures") {
    struct Fixture {
        std::vector<double> xs;
        std::vector<double> ys;
        double rho;
    };
    const std::vector<Fixture> fixtures{
        {{1, 2, 3}, {2, 4, 6}, 1.0},
        {{1, 2, 3}, {3, 2, 1}, -1.0},
        {{1, 2, 3, 4}, {1, 3, 2, 5}, 0.8315218406202999},
        {{0, 1, 4, 9, 16}, {1, 2, 3, 4, 5}, 0.95892660297076829},
        {{2, 4, 4, 4, 5, 5, 7, 9}, {1, 3, 2, 5, 4, 6, 8, 7}, 0.84559432466447048},
        {{10, 20, 30, 40}, {5, 1, 4, 2}, -0.42426406871192851},
        {{1.5, 2.5, 4.0, 5.0, 7.5}, {2.0, 4.5, 4.0, 8.5, 9.0}, 0.9018304346296869},
    };
    for (const Fixture& f : fixtures) {
        const CorrelationResult r = analysis::pearson(f.xs, f.ys);
        CHECK(std::abs(r.rho - f.rho) <= kTol);
        CHECK(r.n_points == f.xs.size());
    }
}

TEST_CASE("pearson error cases") {
    CHECK_THROWS_AS(analysis::pearson({1, 2}, {1, 2, 3}), PreconditionError);
    CHECK_THROWS_AS(analysis::pearson({1}, {2}), PreconditionError);
    CHECK_THROWS_AS(analysis::pearson({}, {}), PreconditionError);
    CHECK_THROWS_AS(analysis::pearson({5, 5, 5}, {1, 2, 3}), UndefinedCorrelationError);
    CHECK_THROWS_AS(analysis::pearson({1, 2, 3}, {4, 4, 4}), UndefinedCorrelationError);
}

TEST_CASE("pearson is symmetric, affine-equivariant, and bounded") {
    Rng rng(97);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(40);
        std::vector<double> xs(n);
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = 3.0 * rng.normal();
            ys[i] = 0.5 * xs[i] + 2.0 * rng.normal();
        }

        CorrelationResult base;
        try {
            base = analysis::pearson(xs, ys);
        } catch (const UndefinedCorrelationError&) {
            continue; // astronomically unlikely, but not a failure of the property
        }
        CHECK(base.rho >= -1.0);
        CHECK(base.rho <= 1.0);
        CHECK(analysis::pearson(ys, xs).rho == doctest::Approx(base.rho).epsilon(1e-12));

        const double a = 0.25 + rng.uniform01() * 4.0;
        const double b = 10.0 * rng.normal();
        std::vector<double> scaled_up(n);
        std::vector<double> flipped(n);
        for (std::size_t i = 0; i < n; ++i) {
            scaled_up[i] = a * xs[i] + b;
            flipped[i] = -a * xs[i] + b;
        }
        CHECK(std::abs(analysis::pearson(scaled_up, ys).rho - base.rho) <= kTol);
        CHECK(std::abs(analysis::pearson(flipped, ys).rho + base.rho) <= kTol);
    }
}

TEST_CASE("degree_correlation on a pinned fixture") {
    const std::vector<WorkerFeatures> features{
        WorkerFeatures("a", 10, 2),
        WorkerFeatures("b", 5, 1),
        WorkerFeatures("c", 8, 4),
        WorkerFeatures("d", 3, 0),
    };
    const CorrelationResult r = analysis::degree_correlation(features);
    CHECK(std::abs(r.rho - 0.72192954366049615) <= kTol);
    CHECK(r.n_points == 4);
}

TEST_CASE("bin membership is decided by exact arithmetic on the degrees") {
    // (participation, wins) pairs whose rates sit on or near bin boundaries.
    const std::vector<WorkerFeatures> dropouts{
        WorkerFeatures("a", 10, 1),    // exactly 10% -> first bin (closed at 10)
        WorkerFeatures("b", 1, 1),     // 100% -> last bin
        WorkerFeatures("c", 2500, 391) // 15.64% -> second bin
    };
    const BinTable table = analysis::bin_success_rates(dropouts);
    CHECK(table.rows()[0].dropout_count == 1);
    CHECK(table.rows()[1].dropout_count == 1);
    CHECK(table.rows()[9].dropout_count == 1);
    CHECK(table.rows()[1].mean_success_rate_pct.value() == doctest::Approx(15.64).epsilon(1e-12));
    CHECK(table.rows()[9].mean_success_rate_pct.value() == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(table.total_dropouts() == 3);
}

TEST_CASE("bin_success_rates on a 20-worker fixture") {
    // (wins, participation) pairs.
    const std::vector<std::pair<int, int>> degrees{
        {0, 5},  {0, 9},  {1, 10}, {1, 20}, {3, 30}, {3, 20},  {1, 8},
        {2, 21}, {5, 20}, {6, 24}, {7, 20}, {2, 6},  {9, 20},  {1, 2},
        {12, 25}, {11, 20}, {5, 9}, {13, 20}, {3, 4}, {17, 20},
    };
    std::vector<WorkerFeatures> dropouts;
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        dropouts.emplace_back("w" + std::to_string(i), degrees[i].second, degrees[i].first);
    }

    const BinTable table = analysis::bin_success_rates(dropouts);

    const std::vector<std::int64_t> counts{6, 2, 2, 2, 3, 2, 1, 1, 1, 0};
    const std::vector<double> means{
        5.753968253968254, 13.75, 25.0,  34.166666666666664, 47.666666666666664,
        55.27777777777778, 65.0,  75.0,  85.0,
    };
    for (std::size_t i = 0; i < BinTable::kBinCount; ++i) {
        CAPTURE(i);
        CHECK(table.rows()[i].dropout_count == counts[i]);
        if (counts[i] == 0) {
            CHECK_FALSE(table.rows()[i].mean_success_rate_pct.has_value());
        } else {
            CHECK(std::abs(table.rows()[i].mean_success_rate_pct.value() - means[i]) <= kTol);
        }
    }
    CHECK(table.total_dropouts() == 20);
}

TEST_CASE("bin_success_rates of an empty population is the empty table") {
    const BinTable table = analysis::bin_success_rates({});
    for (const BinRow& row : table.rows()) {
        CHECK(row.dropout_count == 0);
        CHECK_FALSE(row.mean_success_rate_pct.has_value());
    }
    CHECK(table.total_dropouts() == 0);
}

TEST_CASE("bin_dropout_correlation skips empty bins and the optional top bin") {
    const BinTable table = make_table({
        {30, 5.0}, {20, 15.0}, {10, 25.0}, {0, std::nullopt}, {0, std::nullopt},
        {0, std::nullopt}, {0, std::nullopt}, {0, std::nullopt}, {0, std::nullopt}, {50, 95.0},
    });

    const CorrelationResult excl = analysis::bin_dropout_correlation(table, true);
    CHECK(excl.n_points == 3);
    CHECK(excl.rho == doctest::Approx(-1.0).epsilon(1e-12));

    const CorrelationResult incl = analysis::bin_dropout_correlation(table, false);
    CHECK(incl.n_points == 4);
    CHECK(std::abs(incl.rho - 0.7649463099740119) <= kTol);
}

TEST_CASE("bin_dropout_correlation error cases") {
    SUBCASE("fewer than two usable bins") {
        const BinTable table = make_table({{30, 5.0}});
        CHECK_THROWS_AS(analysis::bin_dropout_correlation(table, true), PreconditionError);
    }
    SUBCASE("only the top bin and one other, top excluded") {
        const BinTable table = make_table({
            {30, 5.0}, {0, std::nullopt}, {0, std::nullopt}, {0, std::nullopt},
            {0, std::nullopt}, {0, std::nullopt}, {0, std::nullopt}, {0, std::nullopt},
            {0, std::nullopt}, {50, 95.0},
        });
        CHECK_THROWS_AS(analysis::bin_dropout_correlation(table, true), PreconditionError);
        CHECK_NOTHROW(analysis::bin_dropout_correlation(table, false));
    }
    SUBCASE("identical counts have no count variance") {
        const BinTable table = make_table({{10, 5.0}, {10, 15.0}, {10, 25.0}});
        CHECK_THROWS_AS(analysis::bin_dropout_correlation(table, true),
                        UndefinedCorrelationError);
    }
}

TEST_CASE("bin table csv round-trips and is byte-stable") {
    const BinTable table = make_table({
        {6, 5.753968253968254}, {2, 13.75}, {0, std::nullopt}, {2, 34.166666666666664},
    });

    std::ostringstream out;
    analysis::write_bin_table(out, table);
    CHECK(out.str() ==
          "range_low_pct,range_high_pct,dropout_count,mean_success_rate_pct\n"
          "0,10,6,5.75\n"
          "10,20,2,13.75\n"
          "20,30,0,\n"
          "30,40,2,34.17\n"
          "40,50,0,\n"
          "50,60,0,\n"
          "60,70,0,\n"
          "70,80,0,\n"
          "80,90,0,\n"
          "90,100,0,\n");

    std::istringstream in(out.str());
    const BinTable parsed = analysis::read_bin_table(in);
    for (std::size_t i = 0; i < BinTable::kBinCount; ++i) {
        CHECK(parsed.rows()[i].dropout_count == table.rows()[i].dropout_count);
        CHECK(parsed.rows()[i].mean_success_rate_pct.has_value() ==
              table.rows()[i].mean_success_rate_pct.has_value());
        if (parsed.rows()[i].mean_success_rate_pct.has_value()) {
            // Two-decimal serialization bounds the round-trip error.
            CHECK(std::abs(*parsed.rows()[i].mean_success_rate_pct -
                           *table.rows()[i].mean_success_rate_pct) <= 0.005 + 1e-12);
        }
    }
}

TEST_CASE("bin table reader rejects malformed input") {
    SUBCASE("wrong header") {
        std::istringstream in("low,high,count,mean\n");
        CHECK_THROWS_AS(analysis::read_bin_table(in), SchemaError);
    }
    SUBCASE("missing rows") {
        std::istringstream in(
            "range_low_pct,range_high_pct,dropout_count,mean_success_rate_pct\n"
            "0,10,6,5.75\n");
        CHECK_THROWS_AS(analysis::read_bin_table(in), Error);
    }
    SUBCASE("wrong ranges") {
        std::ostringstream out;
        analysis::write_bin_table(out, make_table({{1, 5.0}}));
        std::string csv = out.str();
        const auto pos = csv.find("90,100");
        REQUIRE(pos != std::string::npos);
        csv.replace(pos, 6, "90,101");
        std::istringstream in(csv);
        CHECK_THROWS_AS(analysis::read_bin_table(in), Error);
    }
}

TEST_CASE("rendered bin table shows ranges, counts, and a dash for empty means") {
    const BinTable table = make_table({{6, 5.75}, {0, std::nullopt}});
    const std::string text = analysis::render_bin_table(table);
    CHECK(text.find("success rate (%)") != std::string::npos);
    CHECK(text.find("0-10") != std::string::npos);
    CHECK(text.find("10-20") != std::string::npos);
    CHECK(text.find("90-100") != std::string::npos);
    CHECK(text.find("5.75") != std::string::npos);
    CHECK(text.find('-') != std::string::npos);
}
