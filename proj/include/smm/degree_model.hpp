#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smm/point_process.hpp"
#include "smm/random.hpp"

namespace smm {

/// Degree of the i-th atom of the dyadic construction: 10 * 4^i.
Degree dyadic_degree(int i);

/// Finite-support law on the positive integers. Support is strictly
/// increasing; masses are positive and sum to 1 within 1e-12.
class DegreeDistribution {
  public:
    std::span<const Degree> support() const noexcept { return support_; }
    std::span<const double> masses() const noexcept { return masses_; }

    double pmf(Degree k) const noexcept;
    double cdf(Degree k) const noexcept;
    Degree max_degree() const noexcept { return support_.back(); }
    double mean() const noexcept;

    /// Inverse-CDF draw from a uniform u in [0, 1).
    Degree quantile(double u) const noexcept;

    std::string describe() const;

    friend bool operator==(const DegreeDistribution&, const DegreeDistribution&) = default;

  private:
    friend DegreeDistribution build_categorical(std::vector<std::pair<Degree, double>> pairs);
    std::vector<Degree> support_;
    std::vector<double> masses_;
    std::vector<double> cumulative_;
};

/// Throws ConfigError on non-positive masses, repeated or zero degrees, or
/// masses not summing to 1.
DegreeDistribution build_categorical(std::vector<std::pair<Degree, double>> pairs);

DegreeDistribution constant_law(Degree degree);

/// Truncated dyadic law: atoms 10*4^i + parity_shift with mass 2^-i for
/// i_min <= i <= i_max, the residual 2^-i_max folded into the top atom.
/// With mass_at_one an atom at degree 1 carries 1 - 2^(1 - i_min).
/// Without it i_min must be 1, otherwise the masses cannot sum to 1.
DegreeDistribution dyadic_mu(int i_min, int i_max, int parity_shift, bool mass_at_one);

/// First-order stochastic dominance of `high` over `low`:
/// cdf_high(k) <= cdf_low(k) for every k.
bool dominates(const DegreeDistribution& high, const DegreeDistribution& low);

/// Fills every unset degree with an i.i.d. draw; entries already set are kept
/// unless `palm_override` forces the palm point's degree.
PointConfiguration sample_degrees(const DegreeDistribution& dist, const PointConfiguration& config, Seed seed,
                                  std::optional<Degree> palm_override = std::nullopt);

}  // namespace smm
