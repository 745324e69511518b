#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "smm/point_process.hpp"

namespace smm {

/// An edge between vertex indices a < b (indices into the configuration's
/// position order), created in round `round` (1-based).
struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t round = 0;
    double distance = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Final graph of a matching run.
struct Matching {
    std::vector<Edge> edges;
    std::vector<Degree> leftover;  // remaining stubs per vertex index
    std::size_t rounds_run = 0;
    bool truncated = false;  // stopped by max_rounds with pairs still pending

    std::size_t leftover_total() const noexcept;
};

/// Mutable per-run state: free stubs and adjacency, advanced round by round.
/// Used by the literal round API below; the optimized engine keeps its own
/// bookkeeping.
class MatchState {
  public:
    explicit MatchState(PointConfiguration config);

    const PointConfiguration& config() const noexcept { return config_; }
    std::size_t size() const noexcept { return config_.size(); }
    Degree free_stubs(std::size_t x) const { return free_[x]; }
    bool adjacent(std::size_t x, std::size_t y) const;
    std::span<const std::size_t> neighbors(std::size_t x) const { return adjacency_[x]; }
    std::size_t round() const noexcept { return round_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Adds edge xy in the current round, consuming one stub at each end.
    /// Throws InvariantViolation if the pair is not compatible.
    void add_edge(std::size_t x, std::size_t y);
    void advance_round() noexcept { ++round_; }

    Matching to_matching() const;

  private:
    PointConfiguration config_;
    std::vector<Degree> free_;
    std::vector<std::vector<std::size_t>> adjacency_;  // sorted
    std::vector<Edge> edges_;
    std::size_t round_ = 0;
};

/// free[x] > 0, free[y] > 0 and xy not already an edge. Throws
/// std::invalid_argument when x == y.
bool compatible(const MatchState& state, std::size_t x, std::size_t y);

/// Compatible vertex closest to x; ties go to the smaller position, then the
/// smaller id. Linear scan over all vertices.
std::optional<std::size_t> nearest_compatible(const MatchState& state, std::size_t x);

/// Unordered pairs (x < y) that are each other's nearest compatible vertex,
/// ordered by (distance, left position).
std::vector<std::pair<std::size_t, std::size_t>> mutually_closest_pairs(const MatchState& state);

/// One synchronous round: every mutually closest pair becomes an edge.
/// Returns the edges formed (possibly none). The round counter always
/// advances.
std::vector<Edge> run_round(MatchState& state);

/// Bound on the number of productive rounds: every round that forms no edge
/// ends the run, so rounds never exceed the number of possible edges.
std::size_t default_max_rounds(const PointConfiguration& config);

/// Optimized stable multi-matching. Degrees must be assigned.
Matching run_to_completion(const PointConfiguration& config, std::optional<std::size_t> max_rounds = std::nullopt);

/// Literal transcription of the round scheme on MatchState (O(n^2) per
/// round). Intended for cross-checking on small inputs.
Matching naive_round_oracle(const PointConfiguration& config, std::optional<std::size_t> max_rounds = std::nullopt);

/// Sequential oracle: repeatedly joins the globally closest compatible pair.
/// Edges carry round = creation step (1-based), not a round number.
Matching greedy_reference(const PointConfiguration& config);

/// Sorted unordered id pairs of the matching's edges.
std::vector<std::pair<VertexId, VertexId>> edge_id_set(const PointConfiguration& config, const Matching& matching);

/// Some non-adjacent pair with spare stubs on both ends, if any remains.
std::optional<std::pair<std::size_t, std::size_t>> find_stability_violation(const PointConfiguration& config,
                                                                             const Matching& matching);

/// Per-vertex sorted neighbor lists for a matching.
std::vector<std::vector<std::size_t>> adjacency_lists(std::size_t n, const Matching& matching);

/// CSV `id_a,id_b,round,distance` and `id,leftover_stubs`.
void write_edges_csv(std::ostream& out, const PointConfiguration& config, const Matching& matching);
void write_leftover_csv(std::ostream& out, const PointConfiguration& config, const Matching& matching);

}  // namespace smm
