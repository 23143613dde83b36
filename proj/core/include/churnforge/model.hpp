#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace churnforge {

// Integer seconds since epoch (UTC). Gaps and threshold comparisons stay exact.
using Timestamp = std::int64_t;

// One participation of a worker in a task, optionally as its winner.
struct ArrivalEvent {
    std::string worker_id;
    std::string task_id;
    Timestamp timestamp = 0;
    bool is_winner = false;

    // Throws ValidationError on an empty or non-token id or a negative timestamp.
    ArrivalEvent(std::string worker, std::string task, Timestamp ts, bool winner);

    bool operator==(const ArrivalEvent&) const = default;
};

// Total order used everywhere a log is sorted: (timestamp, task_id, worker_id).
bool event_order_less(const ArrivalEvent& a, const ArrivalEvent& b);

// Validated, immutable, time-sorted participation log. The single source of
// truth for every downstream module.
class EventLog {
public:
    // Throws ValidationError unless events are sorted by event_order_less,
    // (worker, task) pairs are unique, each task has at most one winner, and
    // every timestamp lies in [horizon_start, horizon_end].
    EventLog(std::vector<ArrivalEvent> events, Timestamp horizon_start, Timestamp horizon_end);

    const std::vector<ArrivalEvent>& events() const noexcept { return events_; }
    Timestamp horizon_start() const noexcept { return horizon_start_; }
    Timestamp horizon_end() const noexcept { return horizon_end_; }

    bool operator==(const EventLog&) const = default;

private:
    std::vector<ArrivalEvent> events_;
    Timestamp horizon_start_ = 0;
    Timestamp horizon_end_ = 0;
};

// The three classifier features of one worker.
struct WorkerFeatures {
    std::string worker_id;
    std::int64_t participation_degree = 0;
    std::int64_t winning_degree = 0;
    double success_rate = 0.0; // winning_degree / participation_degree, in [0, 1]

    // Computes success_rate from the degrees. Requires participation >= 1 and
    // winning <= participation; throws ValidationError otherwise.
    WorkerFeatures(std::string worker, std::int64_t participation, std::int64_t winning);

    bool operator==(const WorkerFeatures&) const = default;
};

enum class DropoutLabel { Dropout, Active };

std::string_view to_string(DropoutLabel label);
DropoutLabel parse_dropout_label(std::string_view text); // throws ValidationError

// How a worker is demarcated as a dropout.
struct LabelRule {
    enum class Mode {
        ThresholdLastGap, // final inter-arrival gap strictly greater than psi
        ThresholdAbsence, // absence at horizon end strictly greater than psi
        WindowAbsence,    // active at or before cut_time, silent after it
    };

    Mode mode = Mode::WindowAbsence;
    Timestamp psi = 0;      // Threshold* modes only
    Timestamp cut_time = 0; // WindowAbsence only

    static LabelRule threshold_last_gap(Timestamp psi); // throws ValidationError if psi < 0
    static LabelRule threshold_absence(Timestamp psi);  // throws ValidationError if psi < 0
    static LabelRule window_absence(Timestamp cut_time);
};

// One success-rate range with its dropout count and mean rate, in percent.
struct BinRow {
    int range_low_pct = 0;
    int range_high_pct = 0;
    std::int64_t dropout_count = 0;
    std::optional<double> mean_success_rate_pct; // empty marker when count == 0

    bool operator==(const BinRow&) const = default;
};

// Ten success-rate ranges partitioning [0, 100]: [0,10], (10,20], ..., (90,100].
class BinTable {
public:
    static constexpr std::size_t kBinCount = 10;

    // Throws ValidationError unless rows carry the canonical ranges in order,
    // counts are non-negative, and every nonempty row's mean lies inside its
    // range (empty rows carry no mean).
    explicit BinTable(std::array<BinRow, kBinCount> rows);

    const std::array<BinRow, kBinCount>& rows() const noexcept { return rows_; }
    std::int64_t total_dropouts() const noexcept;

    bool operator==(const BinTable&) const = default;

private:
    std::array<BinRow, kBinCount> rows_;
};

} // namespace churnforge
