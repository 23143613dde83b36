// Acceptance gate for the churnforge pipeline. Each criterion prints exactly
// one [PASS]/[FAIL] line; the process exits nonzero if any checked criterion
// fails. An optional argument narrows the run to that criterion number.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "churnforge/analysis.hpp"
#include "churnforge/classify.hpp"
#include "churnforge/errors.hpp"
#include "churnforge/eval.hpp"
#include "churnforge/ingest.hpp"
#include "churnforge/label.hpp"
#include "churnforge/model.hpp"
#include "churnforge/network.hpp"
#include "churnforge/rng.hpp"
#include "churnforge/synth.hpp"

namespace fs = std::filesystem;
using namespace churnforge;

namespace {

// ------------------------------------------------------------------ helpers

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

bool expect(bool condition, std::string& detail, const std::string& message) {
    if (!condition && detail.empty()) {
        detail = message;
    }
    return condition;
}

std::string fmt(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

// --------------------------------------------------- criterion 1: bin table

// The ten success-rate ranges with their dropout counts and mean rates, as
// shipped in data/demo_bins.csv.
BinTable published_table() {
    constexpr std::int64_t counts[10] = {366, 43, 62, 72, 78, 15, 14, 8, 2, 64};
    constexpr double means[10] = {0.15,  15.64, 25.40, 35.58, 48.97,
                                  56.20, 66.33, 76.89, 84.60, 100.00};
    std::array<BinRow, BinTable::kBinCount> rows{};
    for (std::size_t i = 0; i < BinTable::kBinCount; ++i) {
        rows[i].range_low_pct = static_cast<int>(i * 10);
        rows[i].range_high_pct = static_cast<int>(i * 10 + 10);
        rows[i].dropout_count = counts[i];
        rows[i].mean_success_rate_pct = means[i];
    }
    return BinTable(rows);
}

bool run_published_bins(std::string& detail) {
    constexpr double kExpectedRho = -0.73;
    constexpr double kRhoTolerance = 0.02;
    constexpr double kBudgetSeconds = 1.0;

    const Stopwatch watch;
    const BinTable table = published_table();
    const auto excl = analysis::bin_dropout_correlation(table, true);
    const auto incl = analysis::bin_dropout_correlation(table, false);

    bool ok = true;
    ok &= expect(excl.n_points == 9, detail, "expected 9 sub-90% bins");
    ok &= expect(std::abs(excl.rho - kExpectedRho) <= kRhoTolerance, detail,
                 "rho without top bin = " + fmt(excl.rho) + ", want " + fmt(kExpectedRho) +
                     " +/- " + fmt(kRhoTolerance));
    ok &= expect(incl.rho < 0.0, detail,
                 "rho with top bin = " + fmt(incl.rho) + ", want a negative value");
    ok &= expect(watch.seconds() < kBudgetSeconds, detail, "exceeded the 1 s budget");
    return ok;
}

// -------------------------------------- criterion 2: classifier equivalence

using Vec3 = std::array<double, 3>;

Vec3 oracle_vector(const WorkerFeatures& f) {
    return {static_cast<double>(f.participation_degree),
            static_cast<double>(f.winning_degree), f.success_rate};
}

// Exhaustive-scan k-NN written against the contract only: z-score by
// population moments (sd floored at 1e-9), square distances, stable order by
// (distance, position in the worker_id-sorted training list), majority vote.
DropoutLabel knn_oracle(std::vector<label::LabeledWorker> train, int k,
                        const WorkerFeatures& query, bool standardize) {
    std::sort(train.begin(), train.end(),
              [](const label::LabeledWorker& a, const label::LabeledWorker& b) {
                  return a.features.worker_id < b.features.worker_id;
              });
    const std::size_t n = train.size();

    Vec3 mean{0.0, 0.0, 0.0};
    Vec3 sd{1.0, 1.0, 1.0};
    if (standardize) {
        Vec3 sum{0.0, 0.0, 0.0};
        for (const auto& w : train) {
            const Vec3 v = oracle_vector(w.features);
            for (std::size_t j = 0; j < 3; ++j) sum[j] += v[j];
        }
        for (std::size_t j = 0; j < 3; ++j) mean[j] = sum[j] / static_cast<double>(n);
        Vec3 sumsq{0.0, 0.0, 0.0};
        for (const auto& w : train) {
            const Vec3 v = oracle_vector(w.features);
            for (std::size_t j = 0; j < 3; ++j) sumsq[j] += (v[j] - mean[j]) * (v[j] - mean[j]);
        }
        for (std::size_t j = 0; j < 3; ++j) {
            sd[j] = std::sqrt(sumsq[j] / static_cast<double>(n));
            if (sd[j] < 1e-9) sd[j] = 1e-9;
        }
    }
    const auto z = [&](const Vec3& v) {
        Vec3 out;
        for (std::size_t j = 0; j < 3; ++j) out[j] = (v[j] - mean[j]) / sd[j];
        return out;
    };

    const Vec3 zq = z(oracle_vector(query));
    std::vector<std::pair<double, std::size_t>> by_distance;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 zi = z(oracle_vector(train[i].features));
        double d = 0.0;
        for (std::size_t j = 0; j < 3; ++j) d += (zi[j] - zq[j]) * (zi[j] - zq[j]);
        by_distance.emplace_back(d, i);
    }
    std::stable_sort(by_distance.begin(), by_distance.end());

    int dropout_votes = 0;
    for (int v = 0; v < k; ++v) {
        if (train[by_distance[static_cast<std::size_t>(v)].second].label ==
            DropoutLabel::Dropout) {
            ++dropout_votes;
        }
    }
    return 2 * dropout_votes > k ? DropoutLabel::Dropout : DropoutLabel::Active;
}

// Direct density evaluation for Gaussian naive Bayes: frequency priors,
// per-class population moments, shared variance floor, ties to Dropout.
DropoutLabel gnb_oracle(const std::vector<label::LabeledWorker>& train,
                        const WorkerFeatures& query) {
    const std::size_t n = train.size();

    Vec3 pooled_mean{0.0, 0.0, 0.0};
    for (const auto& w : train) {
        const Vec3 v = oracle_vector(w.features);
        for (std::size_t j = 0; j < 3; ++j) pooled_mean[j] += v[j];
    }
    for (std::size_t j = 0; j < 3; ++j) pooled_mean[j] /= static_cast<double>(n);
    double max_pooled_variance = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (const auto& w : train) {
            const double d = oracle_vector(w.features)[j] - pooled_mean[j];
            acc += d * d;
        }
        max_pooled_variance = std::max(max_pooled_variance, acc / static_cast<double>(n));
    }
    const double floor = 1e-9 * std::max(max_pooled_variance, 1e-12);

    std::array<std::vector<Vec3>, 2> members;
    for (const auto& w : train) {
        members[w.label == DropoutLabel::Dropout ? 0 : 1].push_back(oracle_vector(w.features));
    }

    std::array<double, 2> score{};
    for (std::size_t cls = 0; cls < 2; ++cls) {
        const auto& rows = members[cls];
        const double m = static_cast<double>(rows.size());
        score[cls] = std::log(m / static_cast<double>(n));
        for (std::size_t j = 0; j < 3; ++j) {
            double mean = 0.0;
            for (const Vec3& v : rows) mean += v[j];
            mean /= m;
            double var = 0.0;
            for (const Vec3& v : rows) var += (v[j] - mean) * (v[j] - mean);
            var /= m;
            if (var < floor) var = floor;
            const double x = oracle_vector(query)[j];
            score[cls] += -0.5 * std::log(2.0 * std::numbers::pi * var) -
                          (x - mean) * (x - mean) / (2.0 * var);
        }
    }
    return score[0] >= score[1] ? DropoutLabel::Dropout : DropoutLabel::Active;
}

bool run_classifier_parity(std::string& detail) {
    constexpr int kInstances = 200;
    constexpr double kBudgetSeconds = 10.0;

    const Stopwatch watch;
    Rng rng(20240601);
    bool ok = true;
    for (int instance = 0; instance < kInstances && ok; ++instance) {
        const std::size_t n_train = 4 + rng.uniform_index(47); // 4..50
        std::vector<label::LabeledWorker> train;
        for (std::size_t i = 0; i < n_train; ++i) {
            char id[8];
            std::snprintf(id, sizeof(id), "w%03zu", i);
            const auto part = static_cast<std::int64_t>(1 + rng.uniform_index(40));
            const auto wins = static_cast<std::int64_t>(
                rng.uniform_index(static_cast<std::size_t>(part) + 1));
            const DropoutLabel y =
                rng.bernoulli(0.5) ? DropoutLabel::Dropout : DropoutLabel::Active;
            train.push_back({WorkerFeatures(id, part, wins), y});
        }
        // Guarantee both classes so the Bayes fit is well-posed.
        train[0].label = DropoutLabel::Dropout;
        train[1].label = DropoutLabel::Active;

        const classify::KnnModel knn1 = classify::knn_fit(train, 1);
        const classify::KnnModel knn3 = classify::knn_fit(train, 3);
        const classify::GnbModel gnb = classify::gnb_fit(train);

        const std::size_t n_test = 1 + rng.uniform_index(10);
        for (std::size_t t = 0; t < n_test && ok; ++t) {
            const auto part = static_cast<std::int64_t>(1 + rng.uniform_index(40));
            const auto wins = static_cast<std::int64_t>(
                rng.uniform_index(static_cast<std::size_t>(part) + 1));
            const WorkerFeatures query("query", part, wins);

            ok &= expect(classify::knn_predict(knn1, query) == knn_oracle(train, 1, query, true),
                         detail, "knn k=1 mismatch at instance " + std::to_string(instance));
            ok &= expect(classify::knn_predict(knn3, query) == knn_oracle(train, 3, query, true),
                         detail, "knn k=3 mismatch at instance " + std::to_string(instance));
            ok &= expect(classify::gnb_predict(gnb, query) == gnb_oracle(train, query), detail,
                         "bayes mismatch at instance " + std::to_string(instance));
        }
    }
    ok &= expect(watch.seconds() < kBudgetSeconds, detail, "exceeded the 10 s budget");
    return ok;
}

// ------------------------------------------- criterion 3: pearson behavior

bool run_pearson_properties(std::string& detail) {
    constexpr double kTol = 1e-9;
    bool ok = true;

    const struct {
        std::vector<double> xs, ys;
        double rho;
    } fixtures[] = {
        {{1, 2, 3}, {2, 4, 6}, 1.0},
        {{1, 2, 3}, {3, 2, 1}, -1.0},
        {{1, 2, 3, 4}, {1, 3, 2, 5}, 0.8315218406202999},
        {{0, 1, 4, 9, 16}, {1, 2, 3, 4, 5}, 0.95892660297076829},
        {{2, 4, 4, 4, 5, 5, 7, 9}, {1, 3, 2, 5, 4, 6, 8, 7}, 0.84559432466447048},
        {{10, 20, 30, 40}, {5, 1, 4, 2}, -0.42426406871192851},
        {{1.5, 2.5, 4.0, 5.0, 7.5}, {2.0, 4.5, 4.0, 8.5, 9.0}, 0.9018304346296869},
    };
    int index = 0;
    for (const auto& f : fixtures) {
        const double rho = analysis::pearson(f.xs, f.ys).rho;
        ok &= expect(std::abs(rho - f.rho) <= kTol, detail,
                     "fixture " + std::to_string(index) + ": rho = " + fmt(rho) + ", want " +
                         fmt(f.rho));
        ++index;
    }

    Rng rng(20240602);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const std::size_t n = 3 + rng.uniform_index(30);
        std::vector<double> xs(n), ys(n), up(n), down(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = 2.0 * rng.normal();
            ys[i] = 0.7 * xs[i] + 1.5 * rng.normal();
        }
        const double a = 0.5 + 3.0 * rng.uniform01();
        const double b = 5.0 * rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            up[i] = a * xs[i] + b;
            down[i] = -a * xs[i] + b;
        }
        const double base = analysis::pearson(xs, ys).rho;
        ok &= expect(std::abs(analysis::pearson(up, ys).rho - base) <= kTol, detail,
                     "positive-scale equivariance broke at trial " + std::to_string(trial));
        ok &= expect(std::abs(analysis::pearson(down, ys).rho + base) <= kTol, detail,
                     "negative-scale antisymmetry broke at trial " + std::to_string(trial));
    }
    return ok;
}

// ------------------------------------------ criterion 4: labeling behavior

std::vector<Timestamp> random_history(Rng& rng, std::size_t n) {
    std::vector<Timestamp> times;
    Timestamp now = static_cast<Timestamp>(rng.uniform_index(50));
    for (std::size_t i = 0; i < n; ++i) {
        times.push_back(now);
        now += 1 + static_cast<Timestamp>(rng.uniform_index(400));
    }
    return times;
}

EventLog random_log(Rng& rng, std::size_t n_workers, std::size_t n_tasks) {
    std::vector<ArrivalEvent> raw;
    for (std::size_t t = 0; t < n_tasks; ++t) {
        const std::string task = "t" + std::to_string(t);
        const auto base = static_cast<Timestamp>(rng.uniform_index(100000));
        const std::size_t entrants = 1 + rng.uniform_index(4);
        const std::size_t start = rng.uniform_index(n_workers);
        const std::size_t winner = rng.uniform_index(entrants);
        for (std::size_t e = 0; e < entrants; ++e) {
            raw.emplace_back("w" + std::to_string((start + e) % n_workers), task,
                             base + static_cast<Timestamp>(e), e == winner);
        }
    }
    return ingest::finalize_log(std::move(raw));
}

bool run_label_properties(std::string& detail) {
    bool ok = true;
    Rng rng(20240603);

    // Telescoping: inter-arrival gaps sum to the history's total span.
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const auto times = random_history(rng, 2 + rng.uniform_index(40));
        const auto gaps = label::inter_arrival(times);
        const Timestamp total = std::accumulate(gaps.begin(), gaps.end(), Timestamp{0});
        ok &= expect(total == times.back() - times.front(), detail,
                     "telescoping sum broke at trial " + std::to_string(trial));
    }

    // Monotonicity: growing psi can only move workers from Dropout to Active.
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const auto times = random_history(rng, 1 + rng.uniform_index(25));
        const Timestamp horizon_end =
            times.back() + static_cast<Timestamp>(rng.uniform_index(800));
        const auto psi_small = static_cast<Timestamp>(rng.uniform_index(300));
        const Timestamp psi_large =
            psi_small + 1 + static_cast<Timestamp>(rng.uniform_index(300));
        for (const auto make_rule :
             {&LabelRule::threshold_last_gap, &LabelRule::threshold_absence}) {
            const auto strict = label::apply_label_rule(times, make_rule(psi_small), horizon_end);
            const auto lenient = label::apply_label_rule(times, make_rule(psi_large), horizon_end);
            ok &= expect(!(lenient == DropoutLabel::Dropout && strict == DropoutLabel::Active),
                         detail, "psi-monotonicity broke at trial " + std::to_string(trial));
        }
    }

    // No leakage: dataset features equal features of the truncated log.
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const EventLog log = random_log(rng, 6, 12 + rng.uniform_index(25));
        const Timestamp cut = label::split_cut_time(log, 2.0 / 3.0);
        std::vector<ArrivalEvent> visible;
        for (const ArrivalEvent& ev : log.events()) {
            if (ev.timestamp <= cut) visible.push_back(ev);
        }
        const auto expected =
            network::worker_features(network::build_networks(ingest::finalize_log(visible)));
        const auto labeled = label::label_dataset(log, cut);
        bool same = labeled.size() == expected.size();
        for (std::size_t i = 0; same && i < labeled.size(); ++i) {
            same = labeled[i].features == expected[i];
        }
        ok &= expect(same, detail, "label features leaked at trial " + std::to_string(trial));
    }
    return ok;
}

// -------------------------------------- criterion 5: synthetic end-to-end

bool run_market_pipeline(std::string& detail) {
    constexpr double kMinDegreeRho = 0.80;
    constexpr double kMaxBinRho = -0.50;
    constexpr double kMinCellAccuracy = 65.0;
    constexpr double kBudgetSecondsPerSeed = 10.0;
    const std::vector<int> ratios{10, 20, 30, 40, 50, 60, 70, 80, 90};

    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 5 && ok; ++seed) {
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        const Stopwatch watch;

        const EventLog log = synth::generate_market(synth::default_config(seed));
        const auto features = network::worker_features(network::build_networks(log));
        const auto degree = analysis::degree_correlation(features);
        ok &= expect(degree.rho >= kMinDegreeRho, detail,
                     "degree rho = " + fmt(degree.rho) + " < " + fmt(kMinDegreeRho) + tag);

        const Timestamp cut = label::split_cut_time(log, 2.0 / 3.0);
        const auto labeled = label::label_dataset(log, cut);
        std::vector<WorkerFeatures> dropouts;
        for (const auto& w : labeled) {
            if (w.label == DropoutLabel::Dropout) dropouts.push_back(w.features);
        }
        const BinTable bins = analysis::bin_success_rates(dropouts);
        const auto bin_rho = analysis::bin_dropout_correlation(bins, true);
        ok &= expect(bin_rho.rho <= kMaxBinRho, detail,
                     "bin rho = " + fmt(bin_rho.rho) + " > " + fmt(kMaxBinRho) + tag);

        const auto rows = eval::split_sweep(labeled, ratios, seed);
        for (const eval::SweepRow& row : rows) {
            for (const double cell : {row.acc_knn1, row.acc_knn3, row.acc_gnb}) {
                ok &= expect(cell >= kMinCellAccuracy, detail,
                             "sweep cell " + fmt(cell) + " < " + fmt(kMinCellAccuracy) + " at " +
                                 std::to_string(row.train_pct) + "%" + tag);
            }
        }
        ok &= expect(watch.seconds() < kBudgetSecondsPerSeed, detail,
                     "exceeded the 10 s per-seed budget" + tag);
    }
    return ok;
}

// ------------------------------------------ criterion 6: cli determinism

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool run_cli_determinism(std::string& detail) {
    const std::string bin = CHURNFORGE_BIN_PATH;
    const fs::path root = fs::temp_directory_path() / "churnforge_acceptance";
    fs::remove_all(root);

    const auto run_in = [&](const fs::path& dir, const std::string& args) {
        fs::create_directories(dir);
        const std::string cmd = "cd '" + dir.string() + "' && '" + bin + "' " + args +
                                " > /dev/null 2> /dev/null";
        return std::system(cmd.c_str()) == 0;
    };

    bool ok = true;
    const std::string market = "--n-workers 150 --n-tasks 900 --horizon-days 180";
    for (const char* leg : {"r1", "r2"}) {
        const fs::path dir = root / leg;
        ok &= expect(run_in(dir, "simulate --seed 7 " + market + " --quiet"), detail,
                     "simulate failed");
        ok &= expect(run_in(dir, "analyze --events events.csv --quiet"), detail,
                     "analyze failed");
        ok &= expect(run_in(dir, "evaluate --labels labels.csv --seed 11 --quiet"), detail,
                     "evaluate failed");
        if (!ok) break;
    }

    if (ok) {
        for (const char* artifact :
             {"events.csv", "features.csv", "labels.csv", "bins.csv", "sweep.csv"}) {
            const std::string a = slurp(root / "r1" / artifact);
            const std::string b = slurp(root / "r2" / artifact);
            ok &= expect(!a.empty() && a == b, detail,
                         std::string(artifact) + " differs between identical runs");
        }
    }

    std::error_code ec;
    fs::remove_all(root, ec);
    return ok;
}

// ------------------------------------------- criterion 7: ingest round-trip

bool run_round_trip(std::string& detail) {
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 50 && ok; ++seed) {
        synth::MarketConfig config = synth::default_config(seed);
        config.n_workers = 50;
        config.n_tasks = 300;
        config.horizon_days = 90;
        const EventLog original = synth::generate_market(config);

        for (const ingest::LogFormat format :
             {ingest::LogFormat::Csv, ingest::LogFormat::Jsonl}) {
            std::ostringstream serialized;
            ingest::write_events(serialized, original.events(), format);
            std::istringstream source(serialized.str());
            auto [events, report] = ingest::parse_events(source, format);
            ok &= expect(report.rejections.empty(), detail,
                         "round-trip rejected rows at seed " + std::to_string(seed));
            const EventLog rebuilt = ingest::finalize_log(
                std::move(events),
                std::make_pair(original.horizon_start(), original.horizon_end()));
            ok &= expect(rebuilt == original, detail,
                         "round-trip changed the log at seed " + std::to_string(seed) +
                             (format == ingest::LogFormat::Csv ? " (csv)" : " (jsonl)"));
        }
    }
    return ok;
}

// ----------------------------------------------------------------- harness

struct Criterion {
    const char* name;
    bool (*run)(std::string&);
};

constexpr Criterion kCriteria[] = {
    {"published bin table yields the expected correlation", run_published_bins},
    {"classifiers match independent oracles exactly", run_classifier_parity},
    {"pearson fixtures and affine equivariance hold to 1e-9", run_pearson_properties},
    {"labeling invariants hold on random histories", run_label_properties},
    {"synthetic market meets the end-to-end thresholds", run_market_pipeline},
    {"cli reruns are byte-identical", run_cli_determinism},
    {"event logs round-trip through both formats", run_round_trip},
};
constexpr int kCriterionCount = static_cast<int>(sizeof(kCriteria) / sizeof(kCriteria[0]));

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > kCriterionCount) {
            std::fprintf(stderr, "usage: %s [criterion 1..%d]\n", argv[0], kCriterionCount);
            return 2;
        }
    }

    bool all_ok = true;
    for (int number = 1; number <= kCriterionCount; ++number) {
        if (only != 0 && number != only) continue;
        const Criterion& criterion = kCriteria[number - 1];
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            if (detail.empty()) detail = e.what();
            ok = false;
        }
        std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, criterion.name,
                    detail.empty() ? "" : " - ", detail.c_str());
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
