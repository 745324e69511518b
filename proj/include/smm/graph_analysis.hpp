#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "smm/matching_engine.hpp"
#include "smm/point_process.hpp"
#include "smm/random.hpp"

namespace smm {

/// Component statistics of a finished matching. Interior statistics skip
/// vertices within the window margin (open mode only).
struct ComponentReport {
    std::size_t n = 0;
    std::size_t n_edges = 0;
    std::size_t leftover_total = 0;
    std::size_t n_components = 0;
    std::size_t largest_size = 0;
    std::size_t interior_count = 0;
    double largest_fraction = 0.0;  // max interior vertices of one component / interior vertices
    bool spans = false;             // a component touches both margin strips
    double largest_extent = 0.0;    // max position spread within a component
};

ComponentReport components(const PointConfiguration& config, const Matching& matching);

/// |B(x, r)| <= D_x and |B(y, r)| <= D_y with r = pair_distance(x, y), balls
/// closed and center-inclusive.
bool is_strongly_connected_pair(const PointConfiguration& config, std::size_t x, std::size_t y);

/// All strongly connected pairs (x < y) at distance <= max_radius. With
/// interior_only, both endpoints must lie in the window interior.
std::vector<std::pair<std::size_t, std::size_t>> strong_pairs(
    const PointConfiguration& config, double max_radius = std::numeric_limits<double>::infinity(),
    bool interior_only = true);

/// Strongly connected interior pairs that the matching left non-adjacent.
std::vector<std::pair<std::size_t, std::size_t>> strong_pair_violations(
    const PointConfiguration& config, const Matching& matching,
    double max_radius = std::numeric_limits<double>::infinity());

/// Every pair strongly connected under degrees_low is still strongly
/// connected under degrees_high. Throws std::invalid_argument unless
/// degrees_high >= degrees_low pointwise.
bool dominance_preservation_check(const PointConfiguration& config, std::span<const Degree> degrees_low,
                                  std::span<const Degree> degrees_high);

/// `seed,n,n_edges,leftover_total,n_components,largest_size,largest_fraction,spans`
void write_component_header(std::ostream& out);
void write_component_row(std::ostream& out, Seed seed, const ComponentReport& report);

}  // namespace smm
