#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "churnforge/model.hpp"

namespace churnforge::ingest {

enum class LogFormat { Csv, Jsonl };

LogFormat format_from_name(std::string_view name); // "csv" | "jsonl", throws ConfigError
std::string_view format_name(LogFormat format);

// Picks the forced format when given, otherwise goes by file extension
// (".jsonl"/".ndjson" -> Jsonl), defaulting to Csv.
LogFormat infer_format(const std::filesystem::path& path, std::optional<LogFormat> forced);

// What happened while reading a source: accepted count plus one
// (line number, reason) entry per skipped record.
struct IngestReport {
    std::size_t events_read = 0;
    std::vector<std::pair<std::size_t, std::string>> rejections;

    std::size_t events_rejected() const noexcept { return rejections.size(); }
};

// Reads records in input order. Malformed data rows are skipped and reported;
// a missing or wrong header (CSV) is a SchemaError.
std::pair<std::vector<ArrivalEvent>, IngestReport> parse_events(std::istream& source,
                                                                LogFormat format);

// Sorts, collapses duplicate (worker, task) pairs (is_winner = OR, earliest
// timestamp kept), defaults the horizon to [min ts, max ts], and validates.
// Collapsed duplicates are appended to *report when one is supplied.
// Throws PreconditionError when events are empty and no horizon is given.
EventLog finalize_log(std::vector<ArrivalEvent> events,
                      std::optional<std::pair<Timestamp, Timestamp>> horizon = std::nullopt,
                      IngestReport* report = nullptr);

void write_events(std::ostream& out, std::span<const ArrivalEvent> events, LogFormat format);

std::pair<std::vector<ArrivalEvent>, IngestReport> read_events_file(
    const std::filesystem::path& path, LogFormat format);

void write_events_file(const std::filesystem::path& path, std::span<const ArrivalEvent> events,
                       LogFormat format);

} // namespace churnforge::ingest
