#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "smm/random.hpp"

namespace smm {

using Degree = std::uint32_t;
using VertexId = std::uint64_t;

/// Degree value meaning "not yet assigned".
inline constexpr Degree kUnsetDegree = 0;

enum class Boundary { open, torus };

/// Simulation window [-length/2, length/2]. `margin` marks the boundary strip
/// excluded from interior statistics.
struct Window {
    double length = 1.0;
    Boundary boundary = Boundary::open;
    double margin = 0.0;

    double lo() const noexcept { return -0.5 * length; }
    double hi() const noexcept { return 0.5 * length; }
    bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }

    /// True when x lies at least `margin` away from both ends (open mode);
    /// every point is interior on a torus.
    bool interior(double x) const noexcept {
        return boundary == Boundary::torus || (x >= lo() + margin && x <= hi() - margin);
    }

    /// Throws ConfigError unless length > 0 and 0 <= margin < length/2.
    void validate() const;
};

/// Sorted vertex positions with stable ids and (possibly unset) degrees.
/// Immutable once built; every constructor validates strict ordering.
class PointConfiguration {
  public:
    explicit PointConfiguration(Window window);
    PointConfiguration(Window window, std::vector<double> positions, std::vector<VertexId> ids,
                       std::vector<Degree> degrees, std::optional<std::size_t> palm_index = std::nullopt);

    const Window& window() const noexcept { return window_; }
    std::size_t size() const noexcept { return positions_.size(); }
    bool empty() const noexcept { return positions_.empty(); }

    std::span<const double> positions() const noexcept { return positions_; }
    std::span<const VertexId> ids() const noexcept { return ids_; }
    std::span<const Degree> degrees() const noexcept { return degrees_; }

    double position(std::size_t i) const { return positions_[i]; }
    VertexId id(std::size_t i) const { return ids_[i]; }
    Degree degree(std::size_t i) const { return degrees_[i]; }

    std::optional<std::size_t> palm_index() const noexcept { return palm_index_; }

    /// True when every vertex carries a degree >= 1.
    bool has_degrees() const noexcept;
    Degree max_degree() const noexcept;

    /// Copy with a replacement degree vector (same length, entries >= 1).
    PointConfiguration with_degrees(std::vector<Degree> degrees) const;

    /// Index of the vertex with the given id, if present.
    std::optional<std::size_t> index_of(VertexId id) const;

  private:
    Window window_;
    std::vector<double> positions_;
    std::vector<VertexId> ids_;
    std::vector<Degree> degrees_;
    std::optional<std::size_t> palm_index_;
};

/// Homogeneous Poisson process on the window: Poisson(intensity * length)
/// count, then uniform order statistics. Ids are 0..n-1 in position order,
/// degrees unset.
PointConfiguration sample_poisson(const Window& window, double intensity, Seed seed);

/// Palm version: the configuration with one extra point at x0 carrying
/// `degree`. Throws std::invalid_argument if x0 is outside the window or
/// duplicates an existing position.
PointConfiguration palm_insert(const PointConfiguration& config, double x0, Degree degree);

/// (points with degree == target, all other points). Ids partition the input.
std::pair<PointConfiguration, PointConfiguration> split_by_degree(const PointConfiguration& config,
                                                                  Degree target_degree);

/// Boundary-aware distance: |a-b| on the open window, wrapped on the torus.
double pair_distance(const Window& window, double a, double b) noexcept;

/// Number of points z with pair_distance(z, center) <= radius; a point at
/// the center itself counts.
std::size_t count_in_ball(const PointConfiguration& config, double center, double radius);

/// Number of points z with pair_distance(z, center) < radius.
std::size_t count_in_open_ball(const PointConfiguration& config, double center, double radius);

/// Number of points z with r_inner < pair_distance(z, center) < r_outer.
std::size_t count_in_annulus(const PointConfiguration& config, double center, double r_inner, double r_outer);

/// Half-open index ranges covering the points with pair_distance(z, center)
/// <= radius (inclusive) or < radius. At most three disjoint ranges.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};
std::vector<IndexRange> ball_ranges(const PointConfiguration& config, double center, double radius, bool inclusive);

/// CSV with header `id,position,degree`; positions written with 17
/// significant digits. Unset degrees are written as 0.
void write_points_csv(std::ostream& out, const PointConfiguration& config);
PointConfiguration read_points_csv(std::istream& in, const Window& window);

}  // namespace smm
