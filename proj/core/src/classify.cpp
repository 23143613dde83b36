#include "churnforge/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "churnforge/errors.hpp"
#include "text.hpp"

namespace churnforge::classify {

namespace {

std::size_t class_index(DropoutLabel label) {
    return label == DropoutLabel::Dropout ? GnbModel::kDropout : GnbModel::kActive;
}

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    double sum = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double d = a[f] - b[f];
        sum += d * d;
    }
    return sum;
}

} // namespace

FeatureVector to_vector(const WorkerFeatures& f) {
    return {static_cast<double>(f.participation_degree), static_cast<double>(f.winning_degree),
            f.success_rate};
}

StandardScaler StandardScaler::fit(const std::vector<FeatureVector>& rows) {
    if (rows.empty()) throw PreconditionError("StandardScaler: empty sample");
    const auto n = static_cast<double>(rows.size());
    StandardScaler scaler;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double mean = 0.0;
        for (const FeatureVector& row : rows) mean += row[f];
        mean /= n;
        double var = 0.0;
        for (const FeatureVector& row : rows) {
            const double d = row[f] - mean;
            var += d * d;
        }
        var /= n;
        scaler.means_[f] = mean;
        scaler.sds_[f] = std::max(std::sqrt(var), kSdFloor);
    }
    return scaler;
}

StandardScaler StandardScaler::identity() { return StandardScaler{}; }

FeatureVector StandardScaler::transform(const FeatureVector& x) const {
    FeatureVector out;
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = (x[f] - means_[f]) / sds_[f];
    return out;
}

KnnModel knn_fit(const std::vector<label::LabeledWorker>& train, int k, bool standardize) {
    if (k < 1 || k % 2 == 0) throw ConfigError("k must be a positive odd integer");
    if (static_cast<std::size_t>(k) > train.size()) {
        throw ConfigError("k exceeds the training-set size");
    }
    std::vector<const label::LabeledWorker*> ordered;
    ordered.reserve(train.size());
    for (const label::LabeledWorker& w : train) ordered.push_back(&w);
    std::sort(ordered.begin(), ordered.end(),
              [](const label::LabeledWorker* a, const label::LabeledWorker* b) {
                  return a->features.worker_id < b->features.worker_id;
              });

    std::vector<FeatureVector> raw;
    raw.reserve(ordered.size());
    for (const label::LabeledWorker* w : ordered) raw.push_back(to_vector(w->features));

    KnnModel model;
    model.k = k;
    model.scaler = standardize ? StandardScaler::fit(raw) : StandardScaler::identity();
    model.points.reserve(raw.size());
    for (const FeatureVector& row : raw) model.points.push_back(model.scaler.transform(row));
    model.labels.reserve(ordered.size());
    for (const label::LabeledWorker* w : ordered) model.labels.push_back(w->label);
    return model;
}

DropoutLabel knn_predict(const KnnModel& model, const WorkerFeatures& x) {
    const FeatureVector query = model.scaler.transform(to_vector(x));
    std::vector<double> dist(model.points.size());
    for (std::size_t i = 0; i < model.points.size(); ++i) {
        dist[i] = squared_distance(model.points[i], query);
    }
    std::vector<std::size_t> order(model.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Equal distances resolve to the earlier stored (worker_id-ordered) point.
    std::partial_sort(order.begin(), order.begin() + model.k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (dist[a] != dist[b]) return dist[a] < dist[b];
                          return a < b;
                      });
    int dropout_votes = 0;
    for (int i = 0; i < model.k; ++i) {
        if (model.labels[order[static_cast<std::size_t>(i)]] == DropoutLabel::Dropout) {
            ++dropout_votes;
        }
    }
    return 2 * dropout_votes > model.k ? DropoutLabel::Dropout : DropoutLabel::Active;
}

GnbModel gnb_fit(const std::vector<label::LabeledWorker>& train) {
    std::array<std::vector<FeatureVector>, 2> by_class;
    for (const label::LabeledWorker& w : train) {
        by_class[class_index(w.label)].push_back(to_vector(w.features));
    }
    if (by_class[0].empty() || by_class[1].empty()) {
        throw ConfigError("training set must contain both classes");
    }

    // The variance floor is relative to the most-varying pooled feature so it
    // rescales with the data instead of fixing an absolute magnitude.
    const auto n_total = static_cast<double>(train.size());
    double max_pooled_var = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double mean = 0.0;
        for (const label::LabeledWorker& w : train) mean += to_vector(w.features)[f];
        mean /= n_total;
        double var = 0.0;
        for (const label::LabeledWorker& w : train) {
            const double d = to_vector(w.features)[f] - mean;
            var += d * d;
        }
        max_pooled_var = std::max(max_pooled_var, var / n_total);
    }

    GnbModel model;
    model.variance_floor = 1e-9 * std::max(max_pooled_var, 1e-12);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& rows = by_class[c];
        const auto n = static_cast<double>(rows.size());
        model.log_priors[c] = std::log(n / n_total);
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            double mean = 0.0;
            for (const FeatureVector& row : rows) mean += row[f];
            mean /= n;
            double var = 0.0;
            for (const FeatureVector& row : rows) {
                const double d = row[f] - mean;
                var += d * d;
            }
            var /= n;
            model.means[c][f] = mean;
            model.variances[c][f] = std::max(var, model.variance_floor);
        }
    }
    return model;
}

DropoutLabel gnb_predict(const GnbModel& model, const WorkerFeatures& x) {
    const FeatureVector v = to_vector(x);
    std::array<double, 2> score{};
    for (std::size_t c = 0; c < 2; ++c) {
        score[c] = model.log_priors[c];
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const double var = model.variances[c][f];
            const double d = v[f] - model.means[c][f];
            score[c] += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
        }
    }
    // >= : an exact posterior tie flags the worker as a dropout.
    return score[GnbModel::kDropout] >= score[GnbModel::kActive] ? DropoutLabel::Dropout
                                                                 : DropoutLabel::Active;
}

std::string describe(const KnnModel& model) {
    std::ostringstream out;
    out << "knn k=" << model.k << " points=" << model.points.size() << "\nscaler means:";
    for (double m : model.scaler.means()) out << ' ' << detail::format_double(m);
    out << "\nscaler sds:";
    for (double s : model.scaler.sds()) out << ' ' << detail::format_double(s);
    out << '\n';
    return out.str();
}

std::string describe(const GnbModel& model) {
    static constexpr const char* kClassNames[2] = {"dropout", "active"};
    std::ostringstream out;
    out << "gaussian naive bayes, variance floor " << detail::format_double(model.variance_floor)
        << '\n';
    for (std::size_t c = 0; c < 2; ++c) {
        out << kClassNames[c] << " log-prior " << detail::format_double(model.log_priors[c])
            << "\n  means:";
        for (double m : model.means[c]) out << ' ' << detail::format_double(m);
        out << "\n  variances:";
        for (double v : model.variances[c]) out << ' ' << detail::format_double(v);
        out << '\n';
    }
    return out.str();
}

} // namespace churnforge::classify
