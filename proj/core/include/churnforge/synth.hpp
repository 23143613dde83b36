#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "churnforge/model.hpp"

namespace churnforge::synth {

// Parameters of the synthetic contest market. All randomness downstream of
// `seed` flows through one generator with a fixed draw order, so a config is
// a complete recipe for its log.
struct MarketConfig {
    std::int64_t n_workers = 0;
    std::int64_t n_tasks = 0;
    std::int64_t horizon_days = 0;
    double task_rate = 0.0;            // mean task arrivals per day
    double worker_join_spread = 0.0;   // workers join uniformly in the first
                                       // worker_join_spread fraction of the horizon
    double skill_alpha = 1.0;          // skill ~ Beta(skill_alpha, skill_beta)
    double skill_beta = 1.0;
    double base_participation_prob = 0.0; // per-task entry chance of a live worker
    double streak_hazard = 0.0;        // added exit hazard per consecutive loss
    double base_hazard = 0.0;          // exit hazard after any participation
    std::uint64_t seed = 0;

    // Throws ConfigError on any violated range constraint.
    void validate() const;

    bool operator==(const MarketConfig&) const = default;
};

// The committed default calibration (a mid-sized market: 1,000 workers,
// 13,000 tasks, 600 days) with the given seed.
MarketConfig default_config(std::uint64_t seed);

// Overlays one `key=value` entry onto a config. Unknown key or malformed
// value → ConfigError.
void apply_config_entry(MarketConfig& config, std::string_view key, std::string_view value);

// Reads a flat key=value file ('#' starts a comment) over a base config.
MarketConfig read_config_file(const std::string& path, MarketConfig base);

// Simulates the market and returns its validated event log.
//
// Draw order (fixed; this is the reproducibility contract): task arrival
// times as a Poisson process truncated at n_tasks and the horizon; worker
// join times; worker skills; then per task in arrival order — one entry draw
// per live, joined worker in worker order, one skill-proportional winner
// draw, and one exit draw per participant in worker order (a win resets the
// loss streak before its exit draw). A task nobody enters leaves no events.
EventLog generate_market(const MarketConfig& config);

} // namespace churnforge::synth
