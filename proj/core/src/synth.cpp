#include "churnforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "churnforge/errors.hpp"
#include "churnforge/rng.hpp"

namespace churnforge::synth {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
// Keeps zero-padded ids lexicographically ordered like their indices.
constexpr std::int64_t kMaxEntities = 999999;

std::string padded_id(char prefix, std::int64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%06lld", prefix, static_cast<long long>(index + 1));
    return buf;
}

double parse_real(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(std::string(value), &used);
        if (used == value.size()) return parsed;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + std::string(key) + "': malformed real '" +
                      std::string(value) + "'");
}

std::int64_t parse_integer(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::int64_t parsed = std::stoll(std::string(value), &used);
        if (used == value.size()) return parsed;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + std::string(key) + "': malformed integer '" +
                      std::string(value) + "'");
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

} // namespace

void MarketConfig::validate() const {
    if (n_workers < 2) throw ConfigError("n_workers must be at least 2");
    if (n_tasks < 1) throw ConfigError("n_tasks must be at least 1");
    if (n_workers > kMaxEntities || n_tasks > kMaxEntities) {
        throw ConfigError("n_workers and n_tasks are capped at 999999");
    }
    if (horizon_days < 1) throw ConfigError("horizon_days must be at least 1");
    if (!(task_rate > 0.0)) throw ConfigError("task_rate must be positive");
    if (!(worker_join_spread >= 0.0) || worker_join_spread > 1.0) {
        throw ConfigError("worker_join_spread must lie in [0, 1]");
    }
    if (!(skill_alpha > 0.0) || !(skill_beta > 0.0)) {
        throw ConfigError("skill_alpha and skill_beta must be positive");
    }
    if (!(base_participation_prob > 0.0) || base_participation_prob > 1.0) {
        throw ConfigError("base_participation_prob must lie in (0, 1]");
    }
    if (!(streak_hazard >= 0.0)) throw ConfigError("streak_hazard must be non-negative");
    if (!(base_hazard >= 0.0)) throw ConfigError("base_hazard must be non-negative");
}

MarketConfig default_config(std::uint64_t seed) {
    MarketConfig config;
    config.n_workers = 1000;
    config.n_tasks = 13000;
    config.horizon_days = 600;
    config.task_rate = 22.0;
    config.worker_join_spread = 0.35;
    config.skill_alpha = 1.2;
    config.skill_beta = 3.0;
    config.base_participation_prob = 0.01;
    config.streak_hazard = 0.004;
    config.base_hazard = 0.002;
    config.seed = seed;
    return config;
}

void apply_config_entry(MarketConfig& config, std::string_view key, std::string_view value) {
    if (key == "n_workers") {
        config.n_workers = parse_integer(key, value);
    } else if (key == "n_tasks") {
        config.n_tasks = parse_integer(key, value);
    } else if (key == "horizon_days") {
        config.horizon_days = parse_integer(key, value);
    } else if (key == "task_rate") {
        config.task_rate = parse_real(key, value);
    } else if (key == "worker_join_spread") {
        config.worker_join_spread = parse_real(key, value);
    } else if (key == "skill_alpha") {
        config.skill_alpha = parse_real(key, value);
    } else if (key == "skill_beta") {
        config.skill_beta = parse_real(key, value);
    } else if (key == "base_participation_prob") {
        config.base_participation_prob = parse_real(key, value);
    } else if (key == "streak_hazard") {
        config.streak_hazard = parse_real(key, value);
    } else if (key == "base_hazard") {
        config.base_hazard = parse_real(key, value);
    } else if (key == "seed") {
        const std::int64_t parsed = parse_integer(key, value);
        if (parsed < 0) throw ConfigError("config key 'seed': must be non-negative");
        config.seed = static_cast<std::uint64_t>(parsed);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

MarketConfig read_config_file(const std::string& path, MarketConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const std::size_t hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        apply_config_entry(base, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    return base;
}

EventLog generate_market(const MarketConfig& config) {
    config.validate();
    const Timestamp horizon_end = config.horizon_days * kSecondsPerDay;
    Rng rng(config.seed);

    // 1. Task arrival times: Poisson process truncated at n_tasks / horizon.
    std::vector<Timestamp> task_times;
    task_times.reserve(static_cast<std::size_t>(config.n_tasks));
    const double rate_per_second = config.task_rate / static_cast<double>(kSecondsPerDay);
    double t = 0.0;
    while (static_cast<std::int64_t>(task_times.size()) < config.n_tasks) {
        t += rng.exponential(rate_per_second);
        if (t > static_cast<double>(horizon_end)) break;
        task_times.push_back(static_cast<Timestamp>(t));
    }

    // 2. Worker join times, uniform over the opening stretch of the horizon.
    const std::size_t n_workers = static_cast<std::size_t>(config.n_workers);
    const double join_window = config.worker_join_spread * static_cast<double>(horizon_end);
    std::vector<Timestamp> join_time(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        join_time[w] = static_cast<Timestamp>(rng.uniform01() * join_window);
    }

    // 3. Worker skills, clamped away from zero so a winner draw always lands.
    std::vector<double> skill(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        skill[w] = std::max(rng.beta(config.skill_alpha, config.skill_beta), 1e-12);
    }

    std::vector<std::string> worker_ids(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        worker_ids[w] = padded_id('w', static_cast<std::int64_t>(w));
    }

    // 4. Tasks in arrival order: entry draws, one winner, exit draws.
    std::vector<char> alive(n_workers, 1);
    std::vector<std::int64_t> loss_streak(n_workers, 0);
    std::vector<ArrivalEvent> events;
    std::vector<std::size_t> participants;
    for (std::size_t task = 0; task < task_times.size(); ++task) {
        const Timestamp when = task_times[task];
        participants.clear();
        for (std::size_t w = 0; w < n_workers; ++w) {
            if (!alive[w] || join_time[w] > when) continue;
            if (rng.bernoulli(config.base_participation_prob)) participants.push_back(w);
        }
        if (participants.empty()) continue; // the contest attracts nobody: no events

        double total_skill = 0.0;
        for (std::size_t w : participants) total_skill += skill[w];
        const double pick = rng.uniform01() * total_skill;
        std::size_t winner = participants.back();
        double cumulative = 0.0;
        for (std::size_t w : participants) {
            cumulative += skill[w];
            if (pick < cumulative) {
                winner = w;
                break;
            }
        }

        const std::string task_id = padded_id('t', static_cast<std::int64_t>(task));
        for (std::size_t w : participants) {
            events.emplace_back(worker_ids[w], task_id, when, w == winner);
        }
        for (std::size_t w : participants) {
            if (w == winner) {
                loss_streak[w] = 0; // a win restores interest before the exit draw
            } else {
                ++loss_streak[w];
            }
            const double hazard = std::min(
                1.0, config.base_hazard +
                         config.streak_hazard * static_cast<double>(loss_streak[w]));
            if (rng.bernoulli(hazard)) alive[w] = 0;
        }
    }

    std::sort(events.begin(), events.end(), event_order_less);
    return EventLog(std::move(events), 0, horizon_end);
}

} // namespace churnforge::synth
