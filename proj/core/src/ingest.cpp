#include "churnforge/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "churnforge/errors.hpp"

namespace churnforge::ingest {

namespace {

constexpr std::string_view kCsvHeader = "worker_id,task_id,timestamp,is_winner";

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool parse_timestamp(const std::string& text, Timestamp& out) {
    if (text.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(text, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == text.size();
}

bool parse_bool(const std::string& text, bool& out) {
    if (text == "true" || text == "1") {
        out = true;
        return true;
    }
    if (text == "false" || text == "0") {
        out = false;
        return true;
    }
    return false;
}

// Returns an error message, or empty on success.
std::string parse_csv_record(const std::string& line, std::vector<ArrivalEvent>& out) {
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 4) {
        return "expected 4 fields, got " + std::to_string(fields.size());
    }
    Timestamp ts = 0;
    if (!parse_timestamp(fields[2], ts)) {
        return "non-integer timestamp '" + fields[2] + "'";
    }
    bool winner = false;
    if (!parse_bool(fields[3], winner)) {
        return "invalid is_winner '" + fields[3] + "' (expected true/false/1/0)";
    }
    try {
        out.emplace_back(fields[0], fields[1], ts, winner);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::string parse_jsonl_record(const std::string& line, std::vector<ArrivalEvent>& out) {
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) return "invalid JSON";
    if (!obj.is_object()) return "record is not a JSON object";

    const auto worker = obj.find("worker_id");
    const auto task = obj.find("task_id");
    const auto ts = obj.find("timestamp");
    const auto winner = obj.find("is_winner");
    if (worker == obj.end() || task == obj.end() || ts == obj.end() || winner == obj.end()) {
        return "missing one of worker_id/task_id/timestamp/is_winner";
    }
    if (!worker->is_string() || !task->is_string()) {
        return "worker_id and task_id must be strings";
    }
    if (!ts->is_number_integer() && !ts->is_number_unsigned()) {
        return "timestamp must be an integer";
    }
    bool is_winner = false;
    if (winner->is_boolean()) {
        is_winner = winner->get<bool>();
    } else if (winner->is_number_integer() || winner->is_number_unsigned()) {
        const auto v = winner->get<std::int64_t>();
        if (v != 0 && v != 1) return "is_winner integer must be 0 or 1";
        is_winner = v == 1;
    } else {
        return "is_winner must be a boolean";
    }
    try {
        out.emplace_back(worker->get<std::string>(), task->get<std::string>(),
                         ts->get<Timestamp>(), is_winner);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

} // namespace

LogFormat format_from_name(std::string_view name) {
    if (name == "csv") return LogFormat::Csv;
    if (name == "jsonl") return LogFormat::Jsonl;
    throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or jsonl)");
}

std::string_view format_name(LogFormat format) {
    return format == LogFormat::Csv ? "csv" : "jsonl";
}

LogFormat infer_format(const std::filesystem::path& path, std::optional<LogFormat> forced) {
    if (forced.has_value()) return *forced;
    const std::string ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson") return LogFormat::Jsonl;
    return LogFormat::Csv;
}

std::pair<std::vector<ArrivalEvent>, IngestReport> parse_events(std::istream& source,
                                                                LogFormat format) {
    if (!source) throw IoError("unreadable event source");

    std::vector<ArrivalEvent> events;
    IngestReport report;
    std::string line;
    std::size_t line_no = 0;

    if (format == LogFormat::Csv) {
        if (!std::getline(source, line)) {
            throw SchemaError("missing CSV header '" + std::string(kCsvHeader) + "'");
        }
        ++line_no;
        if (strip_cr(line) != kCsvHeader) {
            throw SchemaError("bad CSV header, expected '" + std::string(kCsvHeader) + "'");
        }
    }

    while (std::getline(source, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::string error = format == LogFormat::Csv ? parse_csv_record(line, events)
                                                           : parse_jsonl_record(line, events);
        if (!error.empty()) {
            report.rejections.emplace_back(line_no, error);
        }
    }
    if (source.bad()) throw IoError("read failure while parsing events");

    report.events_read = events.size();
    return {std::move(events), std::move(report)};
}

EventLog finalize_log(std::vector<ArrivalEvent> events,
                      std::optional<std::pair<Timestamp, Timestamp>> horizon,
                      IngestReport* report) {
    if (events.empty() && !horizon.has_value()) {
        throw PreconditionError("finalize_log needs events or an explicit horizon");
    }

    std::stable_sort(events.begin(), events.end(), event_order_less);

    // Collapse duplicate (worker, task) pairs: earliest timestamp wins,
    // is_winner is the OR over the duplicates.
    std::vector<ArrivalEvent> unique;
    unique.reserve(events.size());
    std::unordered_map<std::string, std::size_t> first_index;
    first_index.reserve(events.size());
    for (ArrivalEvent& e : events) {
        std::string key = e.worker_id;
        key += '\x1f';
        key += e.task_id;
        const auto [it, inserted] = first_index.try_emplace(std::move(key), unique.size());
        if (inserted) {
            unique.push_back(std::move(e));
        } else {
            unique[it->second].is_winner = unique[it->second].is_winner || e.is_winner;
            if (report != nullptr) {
                report->rejections.emplace_back(
                    0, "collapsed duplicate participation of worker '" + e.worker_id +
                           "' in task '" + e.task_id + "'");
            }
        }
    }

    // The winner flag may have moved onto an earlier copy; restore the order.
    std::stable_sort(unique.begin(), unique.end(), event_order_less);

    Timestamp start = 0;
    Timestamp end = 0;
    if (horizon.has_value()) {
        start = horizon->first;
        end = horizon->second;
    } else {
        start = unique.front().timestamp;
        end = unique.back().timestamp;
    }
    return EventLog(std::move(unique), start, end);
}

void write_events(std::ostream& out, std::span<const ArrivalEvent> events, LogFormat format) {
    if (format == LogFormat::Csv) {
        out << kCsvHeader << '\n';
        for (const ArrivalEvent& e : events) {
            out << e.worker_id << ',' << e.task_id << ',' << e.timestamp << ','
                << (e.is_winner ? "true" : "false") << '\n';
        }
        return;
    }
    for (const ArrivalEvent& e : events) {
        nlohmann::json obj{{"worker_id", e.worker_id},
                           {"task_id", e.task_id},
                           {"timestamp", e.timestamp},
                           {"is_winner", e.is_winner}};
        out << obj.dump() << '\n';
    }
}

std::pair<std::vector<ArrivalEvent>, IngestReport> read_events_file(
    const std::filesystem::path& path, LogFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return parse_events(in, format);
}

void write_events_file(const std::filesystem::path& path, std::span<const ArrivalEvent> events,
                       LogFormat format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_events(out, events, format);
    out.flush();
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

} // namespace churnforge::ingest
