#include "churnforge/model.hpp"

#include <cmath>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "churnforge/errors.hpp"

namespace churnforge {

namespace {

// Ids are opaque tokens but must stay bijective through the CSV/JSONL
// interchange formats, so structural characters are rejected up front.
bool valid_id_token(const std::string& id) {
    if (id.empty()) return false;
    for (const char c : id) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') return false;
    }
    return true;
}

std::string pair_key(const std::string& worker, const std::string& task) {
    std::string key;
    key.reserve(worker.size() + task.size() + 1);
    key += worker;
    key += '\x1f';
    key += task;
    return key;
}

} // namespace

ArrivalEvent::ArrivalEvent(std::string worker, std::string task, Timestamp ts, bool winner)
    : worker_id(std::move(worker)), task_id(std::move(task)), timestamp(ts), is_winner(winner) {
    if (!valid_id_token(worker_id)) {
        throw ValidationError("invalid worker_id token: '" + worker_id + "'");
    }
    if (!valid_id_token(task_id)) {
        throw ValidationError("invalid task_id token: '" + task_id + "'");
    }
    if (timestamp < 0) {
        throw ValidationError("negative timestamp for worker '" + worker_id + "'");
    }
}

bool event_order_less(const ArrivalEvent& a, const ArrivalEvent& b) {
    return std::tie(a.timestamp, a.task_id, a.worker_id) <
           std::tie(b.timestamp, b.task_id, b.worker_id);
}

EventLog::EventLog(std::vector<ArrivalEvent> events, Timestamp horizon_start, Timestamp horizon_end)
    : events_(std::move(events)), horizon_start_(horizon_start), horizon_end_(horizon_end) {
    if (horizon_start_ > horizon_end_) {
        throw ValidationError("horizon_start exceeds horizon_end");
    }

    std::unordered_set<std::string> seen_pairs;
    std::unordered_set<std::string> tasks_with_winner;
    seen_pairs.reserve(events_.size());

    for (std::size_t i = 0; i < events_.size(); ++i) {
        const ArrivalEvent& e = events_[i];
        if (e.timestamp < horizon_start_ || e.timestamp > horizon_end_) {
            throw ValidationError("event for task '" + e.task_id + "' lies outside the horizon");
        }
        if (i > 0 && !event_order_less(events_[i - 1], e)) {
            throw ValidationError("events are not sorted by (timestamp, task_id, worker_id)");
        }
        if (!seen_pairs.insert(pair_key(e.worker_id, e.task_id)).second) {
            throw ValidationError("duplicate participation of worker '" + e.worker_id +
                                  "' in task '" + e.task_id + "'");
        }
        if (e.is_winner && !tasks_with_winner.insert(e.task_id).second) {
            throw ValidationError("task '" + e.task_id + "' has more than one winner");
        }
    }
}

WorkerFeatures::WorkerFeatures(std::string worker, std::int64_t participation, std::int64_t winning)
    : worker_id(std::move(worker)), participation_degree(participation), winning_degree(winning) {
    if (worker_id.empty()) {
        throw ValidationError("empty worker_id in features");
    }
    if (participation_degree < 1) {
        throw ValidationError("worker '" + worker_id + "' has participation_degree < 1");
    }
    if (winning_degree < 0 || winning_degree > participation_degree) {
        throw ValidationError("worker '" + worker_id + "' has winning_degree outside [0, participation_degree]");
    }
    success_rate = static_cast<double>(winning_degree) / static_cast<double>(participation_degree);
}

std::string_view to_string(DropoutLabel label) {
    return label == DropoutLabel::Dropout ? "dropout" : "active";
}

DropoutLabel parse_dropout_label(std::string_view text) {
    if (text == "dropout") return DropoutLabel::Dropout;
    if (text == "active") return DropoutLabel::Active;
    throw ValidationError("unknown label '" + std::string(text) + "'");
}

LabelRule LabelRule::threshold_last_gap(Timestamp psi) {
    if (psi < 0) throw ValidationError("psi must be non-negative");
    LabelRule rule;
    rule.mode = Mode::ThresholdLastGap;
    rule.psi = psi;
    return rule;
}

LabelRule LabelRule::threshold_absence(Timestamp psi) {
    if (psi < 0) throw ValidationError("psi must be non-negative");
    LabelRule rule;
    rule.mode = Mode::ThresholdAbsence;
    rule.psi = psi;
    return rule;
}

LabelRule LabelRule::window_absence(Timestamp cut_time) {
    LabelRule rule;
    rule.mode = Mode::WindowAbsence;
    rule.cut_time = cut_time;
    return rule;
}

BinTable::BinTable(std::array<BinRow, kBinCount> rows) : rows_(rows) {
    // Mean-in-range checks allow a whisker of accumulated rounding.
    constexpr double kSlack = 1e-9;
    for (std::size_t i = 0; i < kBinCount; ++i) {
        const BinRow& row = rows_[i];
        const int lo = static_cast<int>(i) * 10;
        const int hi = lo + 10;
        if (row.range_low_pct != lo || row.range_high_pct != hi) {
            throw ValidationError("bin ranges must partition [0,100] in 10-point steps");
        }
        if (row.dropout_count < 0) {
            throw ValidationError("negative dropout count in bin table");
        }
        if (row.dropout_count == 0) {
            if (row.mean_success_rate_pct.has_value()) {
                throw ValidationError("empty bin must carry no mean");
            }
            continue;
        }
        if (!row.mean_success_rate_pct.has_value()) {
            throw ValidationError("nonempty bin is missing its mean");
        }
        const double mean = *row.mean_success_rate_pct;
        const double lower = (i == 0) ? 0.0 : static_cast<double>(lo);
        const bool above_lower = (i == 0) ? (mean >= lower - kSlack) : (mean > lower - kSlack);
        if (!above_lower || mean > static_cast<double>(hi) + kSlack) {
            throw ValidationError("bin mean lies outside its range");
        }
    }
}

std::int64_t BinTable::total_dropouts() const noexcept {
    std::int64_t total = 0;
    for (const BinRow& row : rows_) total += row.dropout_count;
    return total;
}

} // namespace churnforge
