#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "churnforge/model.hpp"

namespace churnforge::network {

// One bipartite edge: (worker_id, task_id).
using Edge = std::pair<std::string, std::string>;

// The participation network and its winner subnetwork, kept as sorted,
// duplicate-free edge lists.
class MarketNetworks {
public:
    // Throws ValidationError unless both edge lists are strictly sorted
    // (hence duplicate-free), winner edges form a subset of participation
    // edges, and no task carries more than one winner edge.
    MarketNetworks(std::vector<Edge> participation, std::vector<Edge> winner);

    const std::vector<Edge>& participation_edges() const noexcept { return participation_; }
    const std::vector<Edge>& winner_edges() const noexcept { return winner_; }

    bool operator==(const MarketNetworks&) const = default;

private:
    std::vector<Edge> participation_;
    std::vector<Edge> winner_;
};

// Projects a log onto its two bipartite networks. Edge multiplicity is moot:
// EventLog already guarantees unique (worker, task) pairs.
MarketNetworks build_networks(const EventLog& log);

// One record per worker present in the participation network, sorted by
// worker_id. participation_degree >= 1 by construction.
std::vector<WorkerFeatures> worker_features(const MarketNetworks& nets);

// CSV dump: worker_id,participation_degree,winning_degree,success_rate.
void write_features(std::ostream& out, const std::vector<WorkerFeatures>& features);
void write_features_file(const std::string& path, const std::vector<WorkerFeatures>& features);

} // namespace churnforge::network
