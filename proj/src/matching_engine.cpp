#include "smm/matching_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "smm/errors.hpp"

namespace smm {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void require_degrees(const PointConfiguration& config) {
    if (!config.has_degrees()) throw std::invalid_argument("matching requires assigned degrees");
}

// Candidate y is preferred over z as x's partner.
bool closer(const PointConfiguration& config, std::size_t x, std::size_t y, std::size_t z) {
    const Window& w = config.window();
    const double dy = pair_distance(w, config.position(x), config.position(y));
    const double dz = pair_distance(w, config.position(x), config.position(z));
    if (dy != dz) return dy < dz;
    if (config.position(y) != config.position(z)) return config.position(y) < config.position(z);
    return config.id(y) < config.id(z);
}

Edge make_edge(const PointConfiguration& config, std::size_t x, std::size_t y, std::size_t round) {
    return Edge{std::min(x, y), std::max(x, y), round,
                pair_distance(config.window(), config.position(x), config.position(y))};
}

// Order in which a round's pairs are applied: (distance, left position).
void sort_round_pairs(const PointConfiguration& config, std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
        const double dp = pair_distance(config.window(), config.position(p.first), config.position(p.second));
        const double dq = pair_distance(config.window(), config.position(q.first), config.position(q.second));
        if (dp != dq) return dp < dq;
        return std::min(config.position(p.first), config.position(p.second)) <
               std::min(config.position(q.first), config.position(q.second));
    });
}

std::vector<Edge> apply_round(MatchState& state, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    state.advance_round();
    std::vector<Edge> formed;
    for (const auto& [x, y] : pairs) {
        if (!compatible(state, x, y)) continue;
        state.add_edge(x, y);
        formed.push_back(state.edges().back());
    }
    return formed;
}

}  // namespace

std::size_t Matching::leftover_total() const noexcept {
    return std::accumulate(leftover.begin(), leftover.end(), std::size_t{0});
}

// ---------------------------------------------------------------------------
// MatchState and the literal round API

MatchState::MatchState(PointConfiguration config) : config_(std::move(config)) {
    require_degrees(config_);
    free_.assign(config_.degrees().begin(), config_.degrees().end());
    adjacency_.resize(config_.size());
}

bool MatchState::adjacent(std::size_t x, std::size_t y) const {
    const auto& nb = adjacency_[x];
    return std::binary_search(nb.begin(), nb.end(), y);
}

void MatchState::add_edge(std::size_t x, std::size_t y) {
    if (x == y || x >= size() || y >= size()) throw InvariantViolation("invalid edge endpoints");
    if (free_[x] == 0 || free_[y] == 0) throw InvariantViolation("edge would drive a stub count negative");
    if (adjacent(x, y)) throw InvariantViolation("duplicate edge");
    auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t k) {
        v.insert(std::upper_bound(v.begin(), v.end(), k), k);
    };
    insert_sorted(adjacency_[x], y);
    insert_sorted(adjacency_[y], x);
    --free_[x];
    --free_[y];
    edges_.push_back(make_edge(config_, x, y, round_));
}

Matching MatchState::to_matching() const {
    Matching m;
    m.edges = edges_;
    m.leftover = free_;
    m.rounds_run = edges_.empty() ? 0 : edges_.back().round;
    return m;
}

bool compatible(const MatchState& state, std::size_t x, std::size_t y) {
    if (x == y) throw std::invalid_argument("compatibility of a vertex with itself is undefined");
    return state.free_stubs(x) > 0 && state.free_stubs(y) > 0 && !state.adjacent(x, y);
}

std::optional<std::size_t> nearest_compatible(const MatchState& state, std::size_t x) {
    if (x >= state.size()) throw std::out_of_range("vertex index out of range");
    std::optional<std::size_t> best;
    if (state.free_stubs(x) == 0) return best;
    for (std::size_t y = 0; y < state.size(); ++y) {
        if (y == x || !compatible(state, x, y)) continue;
        if (!best || closer(state.config(), x, y, *best)) best = y;
    }
    return best;
}

std::vector<std::pair<std::size_t, std::size_t>> mutually_closest_pairs(const MatchState& state) {
    const std::size_t n = state.size();
    std::vector<std::size_t> nearest(n, kNone);
    for (std::size_t x = 0; x < n; ++x)
        if (auto y = nearest_compatible(state, x)) nearest[x] = *y;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t x = 0; x < n; ++x) {
        const std::size_t y = nearest[x];
        if (y != kNone && x < y && nearest[y] == x) pairs.emplace_back(x, y);
    }
    sort_round_pairs(state.config(), pairs);
    return pairs;
}

std::vector<Edge> run_round(MatchState& state) { return apply_round(state, mutually_closest_pairs(state)); }

std::size_t default_max_rounds(const PointConfiguration& config) {
    const std::size_t n = config.size();
    std::size_t stubs = 0;
    for (Degree d : config.degrees()) stubs += d;
    const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
    return std::min(stubs / 2, pairs) + 1;
}

Matching naive_round_oracle(const PointConfiguration& config, std::optional<std::size_t> max_rounds) {
    MatchState state(config);
    const std::size_t cap = max_rounds.value_or(default_max_rounds(config));
    bool truncated = false;
    for (;;) {
        auto pairs = mutually_closest_pairs(state);
        if (pairs.empty()) break;
        if (state.round() >= cap) {
            truncated = true;
            break;
        }
        apply_round(state, pairs);
    }
    Matching m = state.to_matching();
    m.rounds_run = state.round();
    m.truncated = truncated;
    return m;
}

// ---------------------------------------------------------------------------
// Optimized round engine
//
// A vertex's set of compatible partners only shrinks, so the distance to its
// nearest compatible vertex never decreases and it only ever joins the vertex
// currently under one of its two scan cursors. Hence everything strictly
// between a vertex's cursors is permanently incompatible, cursors only move
// outward, and vertices beyond the cursors are never adjacent to it. A cached
// nearest partner stays valid until that partner runs out of stubs or the
// vertex itself gains an edge, so each round only rescans invalidated
// vertices.

namespace {

class RoundEngine {
  public:
    explicit RoundEngine(const PointConfiguration& config)
        : config_(config),
          n_(config.size()),
          torus_(config.window().boundary == Boundary::torus),
          free_(config.degrees().begin(), config.degrees().end()),
          left_(n_),
          right_(n_),
          remaining_(n_, n_ == 0 ? 0 : n_ - 1),
          nearest_(n_, kNone),
          nearest_left_(n_, 0),
          dirty_(n_, 0),
          watchers_(n_) {
        for (std::size_t x = 0; x < n_; ++x) {
            left_[x] = step_left(x);
            right_[x] = step_right(x);
            if (free_[x] > 0) mark_dirty(x);
        }
    }

    Matching run(std::size_t max_rounds) {
        Matching result;
        std::vector<std::size_t> changed;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        std::size_t round = 0;
        for (;;) {
            changed.clear();
            for (std::size_t x : dirty_list_) {
                dirty_[x] = 0;
                if (free_[x] == 0) continue;
                scan(x);
                if (nearest_[x] != kNone) {
                    watchers_[nearest_[x]].push_back(x);
                    changed.push_back(x);
                }
            }
            dirty_list_.clear();

            pairs.clear();
            for (std::size_t x : changed) {
                const std::size_t y = nearest_[x];
                if (nearest_[y] == x && free_[y] > 0) pairs.emplace_back(std::min(x, y), std::max(x, y));
            }
            std::sort(pairs.begin(), pairs.end());
            pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
            if (pairs.empty()) break;
            if (round >= max_rounds) {
                result.truncated = true;
                // Leave the pending vertices marked so the state is consistent.
                break;
            }
            ++round;
            sort_round_pairs(config_, pairs);
            for (const auto& [x, y] : pairs) join(x, y, round, result.edges);
        }
        result.leftover = free_;
        result.rounds_run = round;
        return result;
    }

  private:
    std::size_t step_left(std::size_t i) const {
        if (i == 0) return torus_ ? n_ - 1 : kNone;
        return i - 1;
    }
    std::size_t step_right(std::size_t i) const {
        if (i + 1 == n_) return torus_ ? 0 : kNone;
        return i + 1;
    }
    bool has_left(std::size_t x) const { return torus_ ? remaining_[x] > 0 : left_[x] != kNone; }
    bool has_right(std::size_t x) const { return torus_ ? remaining_[x] > 0 : right_[x] != kNone; }
    void pass_left(std::size_t x) {
        left_[x] = step_left(left_[x]);
        --remaining_[x];
    }
    void pass_right(std::size_t x) {
        right_[x] = step_right(right_[x]);
        --remaining_[x];
    }

    void mark_dirty(std::size_t x) {
        if (!dirty_[x]) {
            dirty_[x] = 1;
            dirty_list_.push_back(x);
        }
    }

    void scan(std::size_t x) {
        while (has_left(x) && free_[left_[x]] == 0) pass_left(x);
        while (has_right(x) && free_[right_[x]] == 0) pass_right(x);
        const bool l = has_left(x);
        const bool r = has_right(x);
        if (!l && !r) {
            nearest_[x] = kNone;
        } else if (l && (!r || left_[x] == right_[x] || closer(config_, x, left_[x], right_[x]))) {
            nearest_[x] = left_[x];
            nearest_left_[x] = 1;
        } else {
            nearest_[x] = right_[x];
            nearest_left_[x] = 0;
        }
    }

    // Moves x's cursor past its partner y, which now sits on x's cursor.
    void pass_partner(std::size_t x, std::size_t y) {
        if (nearest_left_[x]) {
            if (left_[x] != y) throw InvariantViolation("engine cursor out of sync");
            pass_left(x);
        } else {
            if (right_[x] != y) throw InvariantViolation("engine cursor out of sync");
            pass_right(x);
        }
    }

    void release(std::size_t x) {
        if (free_[x] > 0) {
            mark_dirty(x);
            return;
        }
        for (std::size_t z : watchers_[x])
            if (free_[z] > 0 && nearest_[z] == x) mark_dirty(z);
        std::vector<std::size_t>().swap(watchers_[x]);
    }

    void join(std::size_t x, std::size_t y, std::size_t round, std::vector<Edge>& edges) {
        if (free_[x] == 0 || free_[y] == 0) throw InvariantViolation("edge would drive a stub count negative");
        if (nearest_[x] != y || nearest_[y] != x) throw InvariantViolation("round pairs overlap");
        --free_[x];
        --free_[y];
        pass_partner(x, y);
        pass_partner(y, x);
        edges.push_back(make_edge(config_, x, y, round));
        release(x);
        release(y);
    }

    const PointConfiguration& config_;
    std::size_t n_;
    bool torus_;
    std::vector<Degree> free_;
    std::vector<std::size_t> left_, right_;  // next unexamined candidate on each side
    std::vector<std::size_t> remaining_;     // unexamined candidates (both sides)
    std::vector<std::size_t> nearest_;
    std::vector<char> nearest_left_;
    std::vector<char> dirty_;
    std::vector<std::size_t> dirty_list_;
    std::vector<std::vector<std::size_t>> watchers_;  // vertices whose cached nearest was this one
};

}  // namespace

Matching run_to_completion(const PointConfiguration& config, std::optional<std::size_t> max_rounds) {
    require_degrees(config);
    RoundEngine engine(config);
    return engine.run(max_rounds.value_or(default_max_rounds(config)));
}

// ---------------------------------------------------------------------------
// Greedy reference

Matching greedy_reference(const PointConfiguration& config) {
    require_degrees(config);
    const std::size_t n = config.size();
    struct Candidate {
        double distance;
        double left;
        double right;
        std::size_t a;
        std::size_t b;
    };
    std::vector<Candidate> all;
    all.reserve(n < 2 ? 0 : n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            all.push_back({pair_distance(config.window(), config.position(a), config.position(b)),
                           config.position(a), config.position(b), a, b});
    std::sort(all.begin(), all.end(), [](const Candidate& p, const Candidate& q) {
        if (p.distance != q.distance) return p.distance < q.distance;
        if (p.left != q.left) return p.left < q.left;
        return p.right < q.right;
    });

    Matching m;
    m.leftover.assign(config.degrees().begin(), config.degrees().end());
    for (const auto& c : all) {
        if (m.leftover[c.a] == 0 || m.leftover[c.b] == 0) continue;
        --m.leftover[c.a];
        --m.leftover[c.b];
        m.edges.push_back(Edge{c.a, c.b, m.edges.size() + 1, c.distance});
    }
    m.rounds_run = m.edges.size();
    return m;
}

// ---------------------------------------------------------------------------
// Inspection and output

std::vector<std::pair<VertexId, VertexId>> edge_id_set(const PointConfiguration& config, const Matching& matching) {
    std::vector<std::pair<VertexId, VertexId>> out;
    out.reserve(matching.edges.size());
    for (const auto& e : matching.edges) {
        const VertexId p = config.id(e.a), q = config.id(e.b);
        out.emplace_back(std::min(p, q), std::max(p, q));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<std::size_t>> adjacency_lists(std::size_t n, const Matching& matching) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : matching.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
    return adj;
}

std::optional<std::pair<std::size_t, std::size_t>> find_stability_violation(const PointConfiguration& config,
                                                                             const Matching& matching) {
    const std::size_t n = config.size();
    if (matching.leftover.size() != n) throw std::invalid_argument("matching does not belong to configuration");
    const auto adj = adjacency_lists(n, matching);
    std::vector<std::size_t> spare;
    for (std::size_t x = 0; x < n; ++x)
        if (matching.leftover[x] > 0) spare.push_back(x);
    for (std::size_t i = 0; i < spare.size(); ++i)
        for (std::size_t j = i + 1; j < spare.size(); ++j) {
            const auto& nb = adj[spare[i]];
            if (!std::binary_search(nb.begin(), nb.end(), spare[j])) return std::make_pair(spare[i], spare[j]);
        }
    return std::nullopt;
}

void write_edges_csv(std::ostream& out, const PointConfiguration& config, const Matching& matching) {
    out << "id_a,id_b,round,distance\n";
    char buf[64];
    for (const auto& e : matching.edges) {
        std::snprintf(buf, sizeof buf, "%.15g", e.distance);
        out << config.id(e.a) << ',' << config.id(e.b) << ',' << e.round << ',' << buf << '\n';
    }
}

void write_leftover_csv(std::ostream& out, const PointConfiguration& config, const Matching& matching) {
    out << "id,leftover_stubs\n";
    for (std::size_t i = 0; i < config.size(); ++i) out << config.id(i) << ',' << matching.leftover[i] << '\n';
}

}  // namespace smm
