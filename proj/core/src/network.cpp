#include "churnforge/network.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "churnforge/errors.hpp"
#include "text.hpp"

namespace churnforge::network {

namespace {

void require_strictly_sorted(const std::vector<Edge>& edges, const char* which) {
    const auto bad = std::adjacent_find(
        edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return !(a < b); });
    if (bad != edges.end()) {
        throw ValidationError(std::string(which) + " edges must be sorted and duplicate-free");
    }
}

} // namespace

MarketNetworks::MarketNetworks(std::vector<Edge> participation, std::vector<Edge> winner)
    : participation_(std::move(participation)), winner_(std::move(winner)) {
    require_strictly_sorted(participation_, "participation");
    require_strictly_sorted(winner_, "winner");
    if (!std::includes(participation_.begin(), participation_.end(), winner_.begin(),
                       winner_.end())) {
        throw ValidationError("winner edges must be a subset of participation edges");
    }
    std::unordered_set<std::string> winning_tasks;
    winning_tasks.reserve(winner_.size());
    for (const Edge& e : winner_) {
        if (!winning_tasks.insert(e.second).second) {
            throw ValidationError("task '" + e.second + "' has more than one winner edge");
        }
    }
}

MarketNetworks build_networks(const EventLog& log) {
    std::vector<Edge> participation;
    std::vector<Edge> winner;
    participation.reserve(log.events().size());
    for (const ArrivalEvent& e : log.events()) {
        participation.emplace_back(e.worker_id, e.task_id);
        if (e.is_winner) winner.emplace_back(e.worker_id, e.task_id);
    }
    std::sort(participation.begin(), participation.end());
    std::sort(winner.begin(), winner.end());
    return MarketNetworks(std::move(participation), std::move(winner));
}

std::vector<WorkerFeatures> worker_features(const MarketNetworks& nets) {
    std::unordered_map<std::string, std::int64_t> wins;
    wins.reserve(nets.winner_edges().size());
    for (const Edge& e : nets.winner_edges()) ++wins[e.first];

    std::vector<WorkerFeatures> features;
    const auto& edges = nets.participation_edges();
    for (std::size_t i = 0; i < edges.size();) {
        const std::string& worker = edges[i].first;
        std::size_t j = i;
        while (j < edges.size() && edges[j].first == worker) ++j;
        const auto win = wins.find(worker);
        features.emplace_back(worker, static_cast<std::int64_t>(j - i),
                              win == wins.end() ? 0 : win->second);
        i = j;
    }
    // Participation edges are sorted by worker already; records inherit that.
    return features;
}

void write_features(std::ostream& out, const std::vector<WorkerFeatures>& features) {
    out << "worker_id,participation_degree,winning_degree,success_rate\n";
    for (const WorkerFeatures& f : features) {
        out << f.worker_id << ',' << f.participation_degree << ',' << f.winning_degree << ','
            << detail::format_double(f.success_rate) << '\n';
    }
    if (!out) throw IoError("failed writing features stream");
}

void write_features_file(const std::string& path, const std::vector<WorkerFeatures>& features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_features(out, features);
}

} // namespace churnforge::network
