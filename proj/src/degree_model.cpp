#include "smm/degree_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "smm/errors.hpp"

namespace smm {

namespace {
constexpr double kMassTolerance = 1e-12;
}

Degree dyadic_degree(int i) {
    if (i < 1 || i > 14) throw ConfigError("dyadic stage index must lie in [1, 14]");
    Degree d = 10;
    for (int k = 0; k < i; ++k) d *= 4;
    return d;
}

double DegreeDistribution::pmf(Degree k) const noexcept {
    auto it = std::lower_bound(support_.begin(), support_.end(), k);
    if (it == support_.end() || *it != k) return 0.0;
    return masses_[static_cast<std::size_t>(it - support_.begin())];
}

double DegreeDistribution::cdf(Degree k) const noexcept {
    auto it = std::upper_bound(support_.begin(), support_.end(), k);
    if (it == support_.begin()) return 0.0;
    if (it == support_.end()) return 1.0;
    return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double DegreeDistribution::mean() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) m += masses_[i] * support_[i];
    return m;
}

Degree DegreeDistribution::quantile(double u) const noexcept {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) return support_.back();
    return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

std::string DegreeDistribution::describe() const {
    std::string s = "{";
    char buf[64];
    for (std::size_t i = 0; i < support_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%u:%.6g", i ? " " : "", support_[i], masses_[i]);
        s += buf;
    }
    return s + "}";
}

DegreeDistribution build_categorical(std::vector<std::pair<Degree, double>> pairs) {
    if (pairs.empty()) throw ConfigError("distribution needs at least one atom");
    std::sort(pairs.begin(), pairs.end());
    double total = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first == 0) throw ConfigError("degrees must be >= 1");
        if (i > 0 && pairs[i].first == pairs[i - 1].first) throw ConfigError("degrees must be distinct");
        if (!(pairs[i].second > 0.0) || !std::isfinite(pairs[i].second)) throw ConfigError("masses must be positive");
        total += pairs[i].second;
    }
    if (std::fabs(total - 1.0) > kMassTolerance) throw ConfigError("masses must sum to 1");

    DegreeDistribution dist;
    double running = 0.0;
    for (const auto& [degree, mass] : pairs) {
        running += mass;
        dist.support_.push_back(degree);
        dist.masses_.push_back(mass);
        dist.cumulative_.push_back(running);
    }
    dist.cumulative_.back() = 1.0;
    return dist;
}

DegreeDistribution constant_law(Degree degree) { return build_categorical({{degree, 1.0}}); }

DegreeDistribution dyadic_mu(int i_min, int i_max, int parity_shift, bool mass_at_one) {
    if (i_min < 1) throw ConfigError("dyadic i_min must be >= 1");
    if (i_max < i_min) throw ConfigError("dyadic i_max must be >= i_min");
    if (parity_shift != 0 && parity_shift != 1) throw ConfigError("parity_shift must be 0 or 1");
    if (!mass_at_one && i_min != 1)
        throw ConfigError("dyadic law with i_min > 1 leaves mass 1 - 2^(1-i_min) unassigned; set mass_at_one");

    std::vector<std::pair<Degree, double>> pairs;
    if (mass_at_one && i_min > 1) pairs.emplace_back(1, 1.0 - std::ldexp(1.0, 1 - i_min));
    for (int i = i_min; i <= i_max; ++i) {
        double mass = std::ldexp(1.0, -i);
        if (i == i_max) mass *= 2.0;  // residual tail 2^-i_max
        pairs.emplace_back(dyadic_degree(i) + static_cast<Degree>(parity_shift), mass);
    }
    return build_categorical(std::move(pairs));
}

bool dominates(const DegreeDistribution& high, const DegreeDistribution& low) {
    std::set<Degree> points(high.support().begin(), high.support().end());
    points.insert(low.support().begin(), low.support().end());
    return std::all_of(points.begin(), points.end(),
                       [&](Degree k) { return high.cdf(k) <= low.cdf(k) + kMassTolerance; });
}

PointConfiguration sample_degrees(const DegreeDistribution& dist, const PointConfiguration& config, Seed seed,
                                  std::optional<Degree> palm_override) {
    Rng rng(seed);
    std::vector<Degree> degrees(config.degrees().begin(), config.degrees().end());
    for (auto& d : degrees)
        if (d == kUnsetDegree) d = dist.quantile(rng.uniform());
    if (palm_override && config.palm_index()) degrees[*config.palm_index()] = *palm_override;
    return config.with_degrees(std::move(degrees));
}

}  // namespace smm
