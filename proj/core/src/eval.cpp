#include "churnforge/eval.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "churnforge/classify.hpp"
#include "churnforge/errors.hpp"
#include "churnforge/rng.hpp"
#include "text.hpp"

namespace churnforge::eval {

namespace {

constexpr int kMaxRedraws = 100;

bool single_class(const std::vector<label::LabeledWorker>& pool) {
    for (std::size_t i = 1; i < pool.size(); ++i) {
        if (pool[i].label != pool[0].label) return false;
    }
    return true;
}

double model_accuracy(const std::vector<label::LabeledWorker>& test,
                      const std::vector<DropoutLabel>& predictions) {
    std::vector<DropoutLabel> truths;
    truths.reserve(test.size());
    for (const label::LabeledWorker& w : test) truths.push_back(w.label);
    return accuracy(predictions, truths);
}

} // namespace

double accuracy(const std::vector<DropoutLabel>& predictions,
                const std::vector<DropoutLabel>& truths) {
    if (predictions.empty()) throw PreconditionError("accuracy: empty inputs");
    if (predictions.size() != truths.size()) {
        throw PreconditionError("accuracy: mismatched lengths");
    }
    std::size_t matches = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == truths[i]) ++matches;
    }
    return 100.0 * static_cast<double>(matches) / static_cast<double>(predictions.size());
}

std::vector<SweepRow> split_sweep(const std::vector<label::LabeledWorker>& data,
                                  const std::vector<int>& ratios, std::uint64_t seed) {
    if (data.size() < 2 || single_class(data)) {
        throw PreconditionError("split_sweep: pool must contain both classes");
    }
    for (int pct : ratios) {
        if (pct <= 0 || pct >= 100) {
            throw PreconditionError("split_sweep: ratios must lie in (0, 100)");
        }
    }

    const std::size_t n = data.size();
    std::vector<SweepRow> rows;
    rows.reserve(ratios.size());
    for (int pct : ratios) {
        const std::size_t train_size =
            (static_cast<std::size_t>(pct) * n + 99) / 100; // ceil(pct * n / 100)
        if (train_size >= n) {
            throw EvaluationError("ratio " + std::to_string(pct) + ": empty test part");
        }

        // The sub-seed is a pure function of (seed, ratio, attempt): request
        // order and earlier ratios never perturb a row's draw.
        std::vector<label::LabeledWorker> train, test;
        bool drawn = false;
        for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(pct),
                                static_cast<std::uint64_t>(attempt)));
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            shuffle(order, rng);

            train.clear();
            test.clear();
            for (std::size_t i = 0; i < n; ++i) {
                (i < train_size ? train : test).push_back(data[order[i]]);
            }
            if (!single_class(train)) {
                drawn = true;
                break;
            }
        }
        if (!drawn) {
            throw EvaluationError("ratio " + std::to_string(pct) + ": no two-class training draw in " +
                                  std::to_string(kMaxRedraws) + " attempts");
        }

        const classify::KnnModel knn1 = classify::knn_fit(train, 1);
        const classify::KnnModel knn3 = classify::knn_fit(train, 3);
        const classify::GnbModel gnb = classify::gnb_fit(train);

        std::vector<DropoutLabel> pred_knn1, pred_knn3, pred_gnb;
        pred_knn1.reserve(test.size());
        pred_knn3.reserve(test.size());
        pred_gnb.reserve(test.size());
        for (const label::LabeledWorker& w : test) {
            pred_knn1.push_back(classify::knn_predict(knn1, w.features));
            pred_knn3.push_back(classify::knn_predict(knn3, w.features));
            pred_gnb.push_back(classify::gnb_predict(gnb, w.features));
        }
        rows.push_back(SweepRow{pct, model_accuracy(test, pred_knn1),
                                model_accuracy(test, pred_knn3), model_accuracy(test, pred_gnb)});
    }
    return rows;
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "train_pct,knn1,knn3,bayes\n";
    for (const SweepRow& row : rows) {
        out << row.train_pct << ',' << detail::format_fixed2(row.acc_knn1) << ','
            << detail::format_fixed2(row.acc_knn3) << ',' << detail::format_fixed2(row.acc_gnb)
            << '\n';
    }
    if (!out) throw IoError("failed writing sweep stream");
}

void write_sweep_file(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_sweep(out, rows);
}

std::vector<SweepRow> read_sweep(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("sweep file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "train_pct,knn1,knn3,bayes") {
        throw SchemaError("sweep header must be 'train_pct,knn1,knn3,bayes'");
    }
    std::vector<SweepRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string pct, knn1, knn3, bayes;
        if (!std::getline(fields, pct, ',') || !std::getline(fields, knn1, ',') ||
            !std::getline(fields, knn3, ',') || !std::getline(fields, bayes)) {
            throw SchemaError("sweep line " + std::to_string(line_no) + ": expected 4 fields");
        }
        try {
            rows.push_back(
                SweepRow{std::stoi(pct), std::stod(knn1), std::stod(knn3), std::stod(bayes)});
        } catch (const std::exception&) {
            throw SchemaError("sweep line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return rows;
}

std::vector<SweepRow> read_sweep_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_sweep(in);
}

std::string render_sweep(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "train-test split   k-NN (k=1)   k-NN (k=3)   Bayes\n";
    for (const SweepRow& row : rows) {
        std::ostringstream split;
        split << row.train_pct << '-' << (100 - row.train_pct);
        std::string split_text = split.str();
        split_text.resize(19, ' ');
        std::string knn1 = detail::format_fixed2(row.acc_knn1);
        knn1.resize(13, ' ');
        std::string knn3 = detail::format_fixed2(row.acc_knn3);
        knn3.resize(13, ' ');
        out << split_text << knn1 << knn3 << detail::format_fixed2(row.acc_gnb) << '\n';
    }
    return out.str();
}

} // namespace churnforge::eval
