#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "churnforge/model.hpp"

namespace churnforge::label {

// A worker's classifier features together with its dropout label. Features
// are computed from the labeling window only, never from the outcome window.
struct LabeledWorker {
    WorkerFeatures features;
    DropoutLabel label = DropoutLabel::Active;

    bool operator==(const LabeledWorker&) const = default;
};

// Successive differences of an ascending timestamp list; empty for n <= 1.
// Throws PreconditionError on unsorted input.
std::vector<Timestamp> inter_arrival(const std::vector<Timestamp>& times);

// Labels one worker's ascending arrival times under the given rule.
// ThresholdLastGap: Dropout iff the final gap is strictly greater than psi
// (Active when fewer than two arrivals exist). ThresholdAbsence: Dropout iff
// horizon_end - last arrival is strictly greater than psi. WindowAbsence:
// Dropout iff there is no arrival after cut_time; a worker with no arrival at
// or before cut_time is outside the rule's population and is a
// PreconditionError here (label_dataset excludes such workers upstream).
// Throws PreconditionError on empty or unsorted times.
DropoutLabel apply_label_rule(const std::vector<Timestamp>& times, const LabelRule& rule,
                              Timestamp horizon_end);

// Smallest timestamp c such that at least ceil(train_fraction * D) of the D
// distinct tasks have every event at or before c — i.e. the chronological cut
// that puts the first train_fraction of tasks fully inside the training
// window. Throws PreconditionError on an empty log or a fraction outside
// (0, 1).
Timestamp split_cut_time(const EventLog& log, double train_fraction);

// Supervised labeling against a chronological cut: the population is every
// worker with at least one event at or before cut_time, features come from
// the sub-log of events at or before cut_time, and the label is Dropout iff
// the worker has zero events after cut_time. Output sorted by worker_id.
// Throws PreconditionError when cut_time lies outside the horizon.
std::vector<LabeledWorker> label_dataset(const EventLog& log, Timestamp cut_time);

// Rule-dispatching overload. WindowAbsence delegates to the cut_time
// overload; the Threshold* modes label every worker in the log from its full
// arrival history, with features computed over the whole log.
std::vector<LabeledWorker> label_dataset(const EventLog& log, const LabelRule& rule);

// CSV dump: worker_id,participation_degree,winning_degree,success_rate,label.
void write_labels(std::ostream& out, const std::vector<LabeledWorker>& labeled);
void write_labels_file(const std::string& path, const std::vector<LabeledWorker>& labeled);

// Reads a CSV produced by write_labels. Throws SchemaError / ValidationError
// on malformed input.
std::vector<LabeledWorker> read_labels(std::istream& in);
std::vector<LabeledWorker> read_labels_file(const std::string& path);

} // namespace churnforge::label
