#include "smm/graph_analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "smm/disjoint_set.hpp"

namespace smm {

ComponentReport components(const PointConfiguration& config, const Matching& matching) {
    const std::size_t n = config.size();
    const Window& w = config.window();
    DisjointSet dsu(n);
    for (const auto& e : matching.edges) dsu.unite(e.a, e.b);

    struct Acc {
        std::size_t size = 0;
        std::size_t interior = 0;
        double lo = 0.0;
        double hi = 0.0;
        bool touches_left = false;
        bool touches_right = false;
    };
    std::vector<Acc> acc(n);
    ComponentReport r;
    r.n = n;
    r.n_edges = matching.edges.size();
    r.leftover_total = matching.leftover_total();
    for (std::size_t i = 0; i < n; ++i) {
        Acc& a = acc[dsu.find(i)];
        const double x = config.position(i);
        if (a.size == 0) {
            a.lo = a.hi = x;
            ++r.n_components;
        }
        ++a.size;
        a.lo = std::min(a.lo, x);
        a.hi = std::max(a.hi, x);
        if (w.interior(x)) {
            ++a.interior;
            ++r.interior_count;
        }
        a.touches_left |= x <= w.lo() + w.margin;
        a.touches_right |= x >= w.hi() - w.margin;
    }
    std::size_t best_interior = 0;
    for (const auto& a : acc) {
        if (a.size == 0) continue;
        r.largest_size = std::max(r.largest_size, a.size);
        best_interior = std::max(best_interior, a.interior);
        r.largest_extent = std::max(r.largest_extent, a.hi - a.lo);
        r.spans |= a.touches_left && a.touches_right;
    }
    r.largest_fraction = r.interior_count == 0 ? 0.0 : static_cast<double>(best_interior) / r.interior_count;
    return r;
}

bool is_strongly_connected_pair(const PointConfiguration& config, std::size_t x, std::size_t y) {
    if (x == y) throw std::invalid_argument("strong connection needs two distinct vertices");
    const double r = pair_distance(config.window(), config.position(x), config.position(y));
    return count_in_ball(config, config.position(x), r) <= config.degree(x) &&
           count_in_ball(config, config.position(y), r) <= config.degree(y);
}

std::vector<std::pair<std::size_t, std::size_t>> strong_pairs(const PointConfiguration& config, double max_radius,
                                                              bool interior_only) {
    const std::size_t n = config.size();
    const Window& w = config.window();
    const bool torus = w.boundary == Boundary::torus;
    const double reach = torus ? std::min(max_radius, 0.5 * w.length) : max_radius;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t x = 0; x < n; ++x) {
        const double px = config.position(x);
        if (interior_only && !w.interior(px)) continue;
        // Walk rightward (cyclically on the torus) by forward gap; the ball
        // count around x grows with the gap, so stop once x's own condition
        // fails. Pairs reached more cheaply leftward are found from the
        // other endpoint.
        for (std::size_t step = 1; step < n; ++step) {
            const std::size_t y = torus ? (x + step) % n : x + step;
            if (!torus && y >= n) break;
            const double py = config.position(y);
            const double gap = torus ? (py > px ? py - px : py - px + w.length) : py - px;
            if (gap > reach) break;
            const double r = pair_distance(w, px, py);
            if (count_in_ball(config, px, r) > config.degree(x)) break;
            if (torus && r < gap) continue;  // shorter the other way round
            if (interior_only && !w.interior(py)) continue;
            if (count_in_ball(config, py, r) <= config.degree(y)) out.emplace_back(std::min(x, y), std::max(x, y));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> strong_pair_violations(const PointConfiguration& config,
                                                                        const Matching& matching,
                                                                        double max_radius) {
    const auto adj = adjacency_lists(config.size(), matching);
    std::vector<std::pair<std::size_t, std::size_t>> missing;
    for (const auto& [x, y] : strong_pairs(config, max_radius, true))
        if (!std::binary_search(adj[x].begin(), adj[x].end(), y)) missing.emplace_back(x, y);
    return missing;
}

bool dominance_preservation_check(const PointConfiguration& config, std::span<const Degree> degrees_low,
                                  std::span<const Degree> degrees_high) {
    if (degrees_low.size() != config.size() || degrees_high.size() != config.size())
        throw std::invalid_argument("degree vectors must match the configuration size");
    for (std::size_t i = 0; i < config.size(); ++i)
        if (degrees_high[i] < degrees_low[i])
            throw std::invalid_argument("degrees_high must dominate degrees_low pointwise");
    const auto low = config.with_degrees({degrees_low.begin(), degrees_low.end()});
    const auto high = config.with_degrees({degrees_high.begin(), degrees_high.end()});
    for (const auto& [x, y] : strong_pairs(low, std::numeric_limits<double>::infinity(), false))
        if (!is_strongly_connected_pair(high, x, y)) return false;
    return true;
}

void write_component_header(std::ostream& out) {
    out << "seed,n,n_edges,leftover_total,n_components,largest_size,largest_fraction,spans\n";
}

void write_component_row(std::ostream& out, Seed seed, const ComponentReport& r) {
    char frac[64];
    std::snprintf(frac, sizeof frac, "%.15g", r.largest_fraction);
    out << seed << ',' << r.n << ',' << r.n_edges << ',' << r.leftover_total << ',' << r.n_components << ','
        << r.largest_size << ',' << frac << ',' << (r.spans ? 1 : 0) << '\n';
}

}  // namespace smm
