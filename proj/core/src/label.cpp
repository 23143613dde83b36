#include "churnforge/label.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "churnforge/errors.hpp"
#include "text.hpp"

namespace churnforge::label {

namespace {

void require_ascending(const std::vector<Timestamp>& times, const char* op) {
    if (!std::is_sorted(times.begin(), times.end())) {
        throw PreconditionError(std::string(op) + ": times must be sorted ascending");
    }
}

constexpr std::string_view kLabelsHeader =
    "worker_id,participation_degree,winning_degree,success_rate,label";

} // namespace

std::vector<Timestamp> inter_arrival(const std::vector<Timestamp>& times) {
    require_ascending(times, "inter_arrival");
    if (times.size() < 2) return {};
    std::vector<Timestamp> gaps;
    gaps.reserve(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(times[i] - times[i - 1]);
    return gaps;
}

DropoutLabel apply_label_rule(const std::vector<Timestamp>& times, const LabelRule& rule,
                              Timestamp horizon_end) {
    if (times.empty()) throw PreconditionError("apply_label_rule: empty arrival history");
    require_ascending(times, "apply_label_rule");
    switch (rule.mode) {
        case LabelRule::Mode::ThresholdLastGap: {
            if (times.size() < 2) return DropoutLabel::Active; // no gap exists
            const Timestamp final_gap = times[times.size() - 1] - times[times.size() - 2];
            return final_gap > rule.psi ? DropoutLabel::Dropout : DropoutLabel::Active;
        }
        case LabelRule::Mode::ThresholdAbsence:
            return (horizon_end - times.back()) > rule.psi ? DropoutLabel::Dropout
                                                           : DropoutLabel::Active;
        case LabelRule::Mode::WindowAbsence: {
            if (times.front() > rule.cut_time) {
                throw PreconditionError(
                    "apply_label_rule: worker has no arrival at or before the cut");
            }
            return times.back() > rule.cut_time ? DropoutLabel::Active : DropoutLabel::Dropout;
        }
    }
    throw PreconditionError("apply_label_rule: unknown rule mode");
}

Timestamp split_cut_time(const EventLog& log, double train_fraction) {
    if (log.events().empty()) throw PreconditionError("split_cut_time: empty log");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw PreconditionError("split_cut_time: train_fraction must lie in (0, 1)");
    }
    // A task is inside the training window once all its events are; the cut
    // is therefore the k-th smallest per-task last-event time.
    std::map<std::string, Timestamp> last_event;
    for (const ArrivalEvent& e : log.events()) {
        auto [it, inserted] = last_event.try_emplace(e.task_id, e.timestamp);
        if (!inserted) it->second = std::max(it->second, e.timestamp);
    }
    std::vector<Timestamp> last_times;
    last_times.reserve(last_event.size());
    for (const auto& [task, t] : last_event) last_times.push_back(t);

    const auto n_tasks = static_cast<double>(last_times.size());
    auto k = static_cast<std::size_t>(std::ceil(train_fraction * n_tasks));
    k = std::min(std::max<std::size_t>(k, 1), last_times.size());
    std::nth_element(last_times.begin(), last_times.begin() + (k - 1), last_times.end());
    return last_times[k - 1];
}

std::vector<LabeledWorker> label_dataset(const EventLog& log, Timestamp cut_time) {
    if (cut_time < log.horizon_start() || cut_time > log.horizon_end()) {
        throw PreconditionError("label_dataset: cut_time outside the horizon");
    }
    struct Tally {
        std::int64_t participation = 0;
        std::int64_t wins = 0;
        bool seen_after = false;
    };
    std::map<std::string, Tally> tallies; // ordered: output is sorted by worker_id
    for (const ArrivalEvent& e : log.events()) {
        Tally& t = tallies[e.worker_id];
        if (e.timestamp <= cut_time) {
            ++t.participation;
            if (e.is_winner) ++t.wins;
        } else {
            t.seen_after = true;
        }
    }
    std::vector<LabeledWorker> out;
    out.reserve(tallies.size());
    for (const auto& [worker, t] : tallies) {
        if (t.participation == 0) continue; // first arrival after the cut: not in population
        out.push_back(LabeledWorker{
            WorkerFeatures(worker, t.participation, t.wins),
            t.seen_after ? DropoutLabel::Active : DropoutLabel::Dropout});
    }
    return out;
}

std::vector<LabeledWorker> label_dataset(const EventLog& log, const LabelRule& rule) {
    if (rule.mode == LabelRule::Mode::WindowAbsence) return label_dataset(log, rule.cut_time);
    struct History {
        std::int64_t participation = 0;
        std::int64_t wins = 0;
        std::vector<Timestamp> times;
    };
    std::map<std::string, History> histories;
    for (const ArrivalEvent& e : log.events()) {
        History& h = histories[e.worker_id];
        ++h.participation;
        if (e.is_winner) ++h.wins;
        h.times.push_back(e.timestamp); // log order keeps each history ascending
    }
    std::vector<LabeledWorker> out;
    out.reserve(histories.size());
    for (const auto& [worker, h] : histories) {
        out.push_back(LabeledWorker{WorkerFeatures(worker, h.participation, h.wins),
                                    apply_label_rule(h.times, rule, log.horizon_end())});
    }
    return out;
}

void write_labels(std::ostream& out, const std::vector<LabeledWorker>& labeled) {
    out << kLabelsHeader << '\n';
    for (const LabeledWorker& w : labeled) {
        out << w.features.worker_id << ',' << w.features.participation_degree << ','
            << w.features.winning_degree << ',' << detail::format_double(w.features.success_rate)
            << ',' << to_string(w.label) << '\n';
    }
    if (!out) throw IoError("failed writing labels stream");
}

void write_labels_file(const std::string& path, const std::vector<LabeledWorker>& labeled) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_labels(out, labeled);
}

std::vector<LabeledWorker> read_labels(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("labels file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLabelsHeader) {
        throw SchemaError("labels header must be '" + std::string(kLabelsHeader) + "'");
    }
    std::vector<LabeledWorker> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string worker, part, wins, rate, label_text;
        if (!std::getline(fields, worker, ',') || !std::getline(fields, part, ',') ||
            !std::getline(fields, wins, ',') || !std::getline(fields, rate, ',') ||
            !std::getline(fields, label_text)) {
            throw SchemaError("labels line " + std::to_string(line_no) + ": expected 5 fields");
        }
        try {
            LabeledWorker w{WorkerFeatures(worker, std::stoll(part), std::stoll(wins)),
                            parse_dropout_label(label_text)};
            out.push_back(std::move(w)); // success_rate is recomputed from the degrees
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw SchemaError("labels line " + std::to_string(line_no) + ": malformed degree");
        }
    }
    return out;
}

std::vector<LabeledWorker> read_labels_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_labels(in);
}

} // namespace churnforge::label
