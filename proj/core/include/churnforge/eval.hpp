#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "churnforge/label.hpp"
#include "churnforge/model.hpp"

namespace churnforge::eval {

// One row of the split-ratio sweep; accuracies in percent.
struct SweepRow {
    int train_pct = 0;
    double acc_knn1 = 0.0;
    double acc_knn3 = 0.0;
    double acc_gnb = 0.0;

    bool operator==(const SweepRow&) const = default;
};

// 100 * matches / total. Throws PreconditionError on mismatched or empty
// inputs.
double accuracy(const std::vector<DropoutLabel>& predictions,
                const std::vector<DropoutLabel>& truths);

// For each requested train percentage: seeded shuffle of the labeled pool,
// first ceil(pct*n/100) records train and the rest test, then k-NN (k=1,3)
// and Gaussian naive Bayes accuracies on the test part. A draw whose training
// part is single-class is redrawn with an incremented sub-seed, at most 100
// times. Rows come back in request order; identical inputs and seed give
// identical rows. Throws PreconditionError when the pool lacks a class or a
// ratio lies outside (0,100); EvaluationError (naming the ratio) on redraw
// exhaustion or an empty test part.
std::vector<SweepRow> split_sweep(const std::vector<label::LabeledWorker>& data,
                                  const std::vector<int>& ratios, std::uint64_t seed);

// CSV: train_pct,knn1,knn3,bayes (accuracies to two decimals).
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_file(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep(std::istream& in);
std::vector<SweepRow> read_sweep_file(const std::string& path);

// Aligned human-readable rendering.
std::string render_sweep(const std::vector<SweepRow>& rows);

} // namespace churnforge::eval
