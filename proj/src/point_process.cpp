#include "smm/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "smm/errors.hpp"

namespace smm {

void Window::validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("window length must be positive");
    if (!(margin >= 0.0) || !(margin < 0.5 * length)) throw ConfigError("window margin must lie in [0, length/2)");
}

PointConfiguration::PointConfiguration(Window window) : window_(window) { window_.validate(); }

PointConfiguration::PointConfiguration(Window window, std::vector<double> positions, std::vector<VertexId> ids,
                                       std::vector<Degree> degrees, std::optional<std::size_t> palm_index)
    : window_(window),
      positions_(std::move(positions)),
      ids_(std::move(ids)),
      degrees_(std::move(degrees)),
      palm_index_(palm_index) {
    window_.validate();
    const std::size_t n = positions_.size();
    if (ids_.size() != n || degrees_.size() != n)
        throw std::invalid_argument("positions, ids and degrees must have equal length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!window_.contains(positions_[i])) throw std::invalid_argument("position outside window");
        if (i > 0 && !(positions_[i - 1] < positions_[i]))
            throw std::invalid_argument("positions must be strictly increasing");
    }
    if (palm_index_ && *palm_index_ >= n) throw std::invalid_argument("palm index out of range");
    std::vector<VertexId> sorted_ids(ids_);
    std::sort(sorted_ids.begin(), sorted_ids.end());
    if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end())
        throw std::invalid_argument("vertex ids must be unique");
}

bool PointConfiguration::has_degrees() const noexcept {
    return std::none_of(degrees_.begin(), degrees_.end(), [](Degree d) { return d == kUnsetDegree; });
}

Degree PointConfiguration::max_degree() const noexcept {
    return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

PointConfiguration PointConfiguration::with_degrees(std::vector<Degree> degrees) const {
    if (degrees.size() != size()) throw std::invalid_argument("degree vector length mismatch");
    if (std::any_of(degrees.begin(), degrees.end(), [](Degree d) { return d == kUnsetDegree; }))
        throw std::invalid_argument("degrees must be >= 1");
    PointConfiguration copy = *this;
    copy.degrees_ = std::move(degrees);
    return copy;
}

std::optional<std::size_t> PointConfiguration::index_of(VertexId id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return i;
    return std::nullopt;
}

PointConfiguration sample_poisson(const Window& window, double intensity, Seed seed) {
    window.validate();
    if (!(intensity > 0.0) || !std::isfinite(intensity)) throw ConfigError("intensity must be positive");
    Rng rng(seed);
    std::poisson_distribution<long long> count_dist(intensity * window.length);
    const auto n = static_cast<std::size_t>(count_dist(rng.engine()));

    // Order statistics of n uniforms: normalized partial sums of n+1
    // exponential spacings.
    std::vector<double> positions(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += rng.exponential();
        positions[i] = total;
    }
    total += rng.exponential();
    const double scale = window.length / total;
    for (std::size_t i = 0; i < n; ++i) {
        double x = window.lo() + positions[i] * scale;
        x = std::clamp(x, window.lo(), window.hi());
        if (i > 0 && x <= positions[i - 1]) x = std::nextafter(positions[i - 1], window.hi() + 1.0);
        positions[i] = x;
    }
    // Rounding can in principle push the tail past hi(); drop such points.
    while (!positions.empty() && positions.back() > window.hi()) positions.pop_back();

    std::vector<VertexId> ids(positions.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    std::vector<Degree> degrees(positions.size(), kUnsetDegree);
    return PointConfiguration(window, std::move(positions), std::move(ids), std::move(degrees));
}

PointConfiguration palm_insert(const PointConfiguration& config, double x0, Degree degree) {
    const Window& w = config.window();
    if (!w.contains(x0)) throw std::invalid_argument("palm point outside window");
    if (degree == kUnsetDegree) throw std::invalid_argument("palm degree must be >= 1");
    auto pos = config.positions();
    const auto at = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), x0) - pos.begin());
    if (at < pos.size() && pos[at] == x0) throw std::invalid_argument("palm point duplicates an existing position");

    std::vector<double> positions(pos.begin(), pos.end());
    std::vector<VertexId> ids(config.ids().begin(), config.ids().end());
    std::vector<Degree> degrees(config.degrees().begin(), config.degrees().end());
    VertexId new_id = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
    positions.insert(positions.begin() + static_cast<std::ptrdiff_t>(at), x0);
    ids.insert(ids.begin() + static_cast<std::ptrdiff_t>(at), new_id);
    degrees.insert(degrees.begin() + static_cast<std::ptrdiff_t>(at), degree);
    return PointConfiguration(w, std::move(positions), std::move(ids), std::move(degrees), at);
}

std::pair<PointConfiguration, PointConfiguration> split_by_degree(const PointConfiguration& config,
                                                                  Degree target_degree) {
    struct Part {
        std::vector<double> positions;
        std::vector<VertexId> ids;
        std::vector<Degree> degrees;
        std::optional<std::size_t> palm;
    };
    Part hit, rest;
    for (std::size_t i = 0; i < config.size(); ++i) {
        Part& p = config.degree(i) == target_degree ? hit : rest;
        if (config.palm_index() == i) p.palm = p.positions.size();
        p.positions.push_back(config.position(i));
        p.ids.push_back(config.id(i));
        p.degrees.push_back(config.degree(i));
    }
    auto build = [&](Part& p) {
        return PointConfiguration(config.window(), std::move(p.positions), std::move(p.ids), std::move(p.degrees),
                                  p.palm);
    };
    return {build(hit), build(rest)};
}

double pair_distance(const Window& window, double a, double b) noexcept {
    const double d = std::fabs(a - b);
    if (window.boundary == Boundary::torus) return std::min(d, window.length - d);
    return d;
}

namespace {

// First index in [lo, hi) where pred flips from false to true (pred monotone).
template <class Pred>
std::size_t first_true(std::size_t lo, std::size_t hi, Pred pred) {
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (pred(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

}  // namespace

std::vector<IndexRange> ball_ranges(const PointConfiguration& config, double center, double radius,
                                    bool inclusive) {
    const auto pos = config.positions();
    const std::size_t n = pos.size();
    const double length = config.window().length;
    const bool torus = config.window().boundary == Boundary::torus;
    auto within = [&](double d) { return inclusive ? d <= radius : d < radius; };

    if (torus && (inclusive ? radius >= 0.5 * length : radius > 0.5 * length)) return {{0, n}};

    // Points left of the center: [0, split_lo); at or right: [split_lo, n).
    const auto split_lo = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), center) - pos.begin());
    const auto split_hi = static_cast<std::size_t>(std::upper_bound(pos.begin(), pos.end(), center) - pos.begin());

    // Direct distances: suffix of the left part, prefix of the right part.
    const std::size_t left_begin = first_true(0, split_lo, [&](std::size_t i) { return within(center - pos[i]); });
    const std::size_t right_end =
        first_true(split_hi, n, [&](std::size_t i) { return !within(pos[i] - center); });
    std::vector<IndexRange> ranges;
    if (torus) {
        // Wrapped distances: prefix of the left part, suffix of the right part.
        const std::size_t wrap_left_end =
            first_true(0, left_begin, [&](std::size_t i) { return !within(length - (center - pos[i])); });
        const std::size_t wrap_right_begin =
            first_true(right_end, n, [&](std::size_t i) { return within(length - (pos[i] - center)); });
        if (wrap_left_end > 0) ranges.push_back({0, wrap_left_end});
        if (right_end > left_begin) ranges.push_back({left_begin, right_end});
        if (wrap_right_begin < n) ranges.push_back({wrap_right_begin, n});
    } else if (right_end > left_begin) {
        ranges.push_back({left_begin, right_end});
    }
    // The center itself has distance 0, which `within` rejects only for an
    // empty open ball.
    if (!within(0.0) && split_hi > split_lo) {
        std::vector<IndexRange> cut;
        for (const auto& r : ranges) {
            if (r.end <= split_lo || r.begin >= split_hi) {
                cut.push_back(r);
                continue;
            }
            if (r.begin < split_lo) cut.push_back({r.begin, split_lo});
            if (split_hi < r.end) cut.push_back({split_hi, r.end});
        }
        ranges = std::move(cut);
    }
    return ranges;
}

namespace {
std::size_t total_size(const std::vector<IndexRange>& ranges) {
    std::size_t s = 0;
    for (const auto& r : ranges) s += r.size();
    return s;
}
}  // namespace

std::size_t count_in_ball(const PointConfiguration& config, double center, double radius) {
    return total_size(ball_ranges(config, center, radius, true));
}

std::size_t count_in_open_ball(const PointConfiguration& config, double center, double radius) {
    return total_size(ball_ranges(config, center, radius, false));
}

std::size_t count_in_annulus(const PointConfiguration& config, double center, double r_inner, double r_outer) {
    if (!(r_inner >= 0.0) || !(r_inner < r_outer)) throw std::invalid_argument("annulus requires 0 <= r_inner < r_outer");
    const std::size_t outer = count_in_open_ball(config, center, r_outer);
    const std::size_t inner = count_in_ball(config, center, r_inner);
    return outer - inner;
}

void write_points_csv(std::ostream& out, const PointConfiguration& config) {
    out << "id,position,degree\n";
    char buf[64];
    for (std::size_t i = 0; i < config.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", config.position(i));
        out << config.id(i) << ',' << buf << ',' << config.degree(i) << '\n';
    }
}

PointConfiguration read_points_csv(std::istream& in, const Window& window) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("points csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,position,degree") throw ConfigError("points csv: expected header 'id,position,degree'");

    struct Row {
        double position;
        VertexId id;
        Degree degree;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string id_s, pos_s, deg_s;
        if (!std::getline(fields, id_s, ',') || !std::getline(fields, pos_s, ',') || !std::getline(fields, deg_s))
            throw ConfigError("points csv: malformed row at line " + std::to_string(line_no));
        try {
            std::size_t used = 0;
            Row r{};
            r.id = std::stoull(id_s, &used);
            if (used != id_s.size()) throw std::invalid_argument("id");
            r.position = std::stod(pos_s, &used);
            if (used != pos_s.size()) throw std::invalid_argument("position");
            const unsigned long deg = std::stoul(deg_s, &used);
            if (used != deg_s.size()) throw std::invalid_argument("degree");
            r.degree = static_cast<Degree>(deg);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw ConfigError("points csv: malformed value at line " + std::to_string(line_no));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.position < b.position; });
    std::vector<double> positions;
    std::vector<VertexId> ids;
    std::vector<Degree> degrees;
    for (const auto& r : rows) {
        positions.push_back(r.position);
        ids.push_back(r.id);
        degrees.push_back(r.degree);
    }
    try {
        return PointConfiguration(window, std::move(positions), std::move(ids), std::move(degrees));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("points csv: ") + e.what());
    }
}

}  // namespace smm
