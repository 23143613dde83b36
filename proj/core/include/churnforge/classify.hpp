#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "churnforge/label.hpp"
#include "churnforge/model.hpp"

namespace churnforge::classify {

inline constexpr std::size_t kFeatureCount = 3;

// (participation_degree, winning_degree, success_rate) as reals.
using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector to_vector(const WorkerFeatures& f);

// Per-feature z-scoring fitted on training data. Population (1/n) standard
// deviations; degenerate features are clamped to the floor so they
// standardize to all-zeros instead of dividing by zero.
class StandardScaler {
public:
    static constexpr double kSdFloor = 1e-9;

    // Throws PreconditionError on an empty sample.
    static StandardScaler fit(const std::vector<FeatureVector>& rows);

    // The identity transform (mean 0, sd 1 everywhere).
    static StandardScaler identity();

    FeatureVector transform(const FeatureVector& x) const;

    const FeatureVector& means() const noexcept { return means_; }
    const FeatureVector& sds() const noexcept { return sds_; }

private:
    FeatureVector means_{0.0, 0.0, 0.0};
    FeatureVector sds_{1.0, 1.0, 1.0};
};

// k-nearest-neighbors over the scaled feature space: squared Euclidean
// distance, distance ties broken by stored (worker_id) order, majority vote.
struct KnnModel {
    int k = 1;
    StandardScaler scaler;
    std::vector<FeatureVector> points; // transformed, in worker_id order
    std::vector<DropoutLabel> labels;  // parallel to points
};

// Fits on the training set; vectors are standardized (unless standardize is
// false) and stored sorted by worker_id. Throws ConfigError when k is even,
// non-positive, or exceeds the training-set size.
KnnModel knn_fit(const std::vector<label::LabeledWorker>& train, int k, bool standardize = true);

DropoutLabel knn_predict(const KnnModel& model, const WorkerFeatures& x);

// Gaussian naive Bayes: class priors from frequencies, per-class per-feature
// means and population variances, variances clamped from below.
struct GnbModel {
    static constexpr std::size_t kDropout = 0;
    static constexpr std::size_t kActive = 1;

    std::array<double, 2> log_priors{};
    std::array<FeatureVector, 2> means{};
    std::array<FeatureVector, 2> variances{}; // already floored
    double variance_floor = 0.0;
};

// Throws ConfigError when the training set is empty or single-class (the
// resulting predictor would be constant; the caller must know).
GnbModel gnb_fit(const std::vector<label::LabeledWorker>& train);

// Argmax of log prior + summed log Gaussian densities; an exact score tie
// resolves to Dropout.
DropoutLabel gnb_predict(const GnbModel& model, const WorkerFeatures& x);

// Diagnostic renderings of the fitted parameters. Not a stable format.
std::string describe(const KnnModel& model);
std::string describe(const GnbModel& model);

} // namespace churnforge::classify
