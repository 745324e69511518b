#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smm/degree_model.hpp"
#include "smm/point_process.hpp"
#include "smm/random.hpp"

namespace smm {

/// Stage-i geometry of the strong-connection chain. All radii and count
/// thresholds derive from the stage degree d = 10*4^i + parity_shift; count
/// thresholds are floored ("at most 0.3 d" over the integers).
struct ChainParams {
    int stage = 1;
    int parity_shift = 0;
    Degree degree = 0;       // d_i
    Degree next_degree = 0;  // d_{i+1}
    double near_radius = 0;  // 0.1 d: half-width of the F interval, inner annulus radius
    double hop_radius = 0;   // 0.2 d: outer annulus radius
    double far_radius = 0;   // 0.4 d: ball around the next vertex
    std::size_t near_limit = 0;  // floor(0.3 d), for F and B
    std::size_t far_limit = 0;   // floor(0.6 d), for C

    static ChainParams make(int stage, int parity_shift = 0);

    /// Farthest distance from x_i that the stage's events inspect (0.6 d).
    double reach() const noexcept { return hop_radius + far_radius; }
};

/// F: at most floor(0.3 d) points (x itself included) within 0.1 d of x.
bool check_F(const PointConfiguration& config, std::size_t x, const ChainParams& params);

/// Nearest vertex of degree d_{i+1} at distance >= 0.1 d from x.
std::optional<std::size_t> find_next(const PointConfiguration& config, std::size_t x, const ChainParams& params);

/// A: find_next exists and lies closer than 0.2 d.
bool check_A(const PointConfiguration& config, std::size_t x, std::optional<std::size_t> next,
             const ChainParams& params);

/// B: at most floor(0.3 d) points with 0.1 d < |z - x| < 0.2 d.
bool check_B(const PointConfiguration& config, std::size_t x, const ChainParams& params);

/// Points z with |z - x| >= 0.2 d and |z - y| <= 0.4 d; y need not be a point.
/// Throws std::invalid_argument unless 0.1 d < |y - x| < 0.2 d.
std::size_t count_C_region(const PointConfiguration& config, double x, double y, const ChainParams& params);

/// C: count_C_region <= floor(0.6 d).
bool check_C(const PointConfiguration& config, double x, double y, const ChainParams& params);

/// Lebesgue measure of the C region, computed from interval geometry.
double c_region_length(double x, double y, const ChainParams& params);

/// Outcome of one stage D_i = A ∩ B ∩ C(x, x_{i+1}).
struct StageOutcome {
    int stage = 0;
    bool a = false;
    bool b = false;
    bool c = false;
    std::optional<std::size_t> next;
    bool holds() const noexcept { return a && b && c; }
};

StageOutcome check_D(const PointConfiguration& config, std::size_t x, const ChainParams& params);

/// Deterministic consequence of F_i ∩ D_i: (x, next) strongly connected and
/// F_{i+1} at next.
bool inclusion_holds(const PointConfiguration& config, std::size_t x, std::size_t next, const ChainParams& params);

struct AnalyticBounds {
    double pA_fail_exact = 0;  // exp(-0.2 d / 2^{i+1}) = exp(-2^i) for the unshifted law
    double pB_fail_bound = 0;  // exp(-3 (ln 3/2 - 1/3) 4^i), O(i) factor dropped
    double pC_fail_bound = 0;  // exp(-6 (ln 3/2 - 1/3) 4^i), O(i) factor dropped
    double pD_lower_hint = 0;  // 1 - pA_fail_exact
    double chain_lower = 0;    // chain_lower(i)
};

AnalyticBounds analytic_bounds(int stage, int parity_shift = 0);

/// 1 - 2 * sum_{i >= i0} exp(-2^i), summed until terms fall below 1e-300.
double chain_lower(int i0);

enum class EventKind { F, A_fail, B_fail, C_fail, D };
enum class BoundKind { exact, upper_bound, lower_bound };

std::string_view event_name(EventKind kind);
std::optional<EventKind> parse_event_name(std::string_view name);
std::string_view bound_kind_name(BoundKind kind);

struct EventSpec {
    EventKind kind = EventKind::A_fail;
    int stage = 1;
    int parity_shift = 0;
    double intensity = 1.0;
    double c_offset = 0.15;  // C is evaluated at y = x + c_offset * d
};

struct McOptions {
    double min_acceptance = 1e-6;  // abort threshold for the F-conditioning
    unsigned threads = 0;          // 0 = hardware concurrency
};

struct EventReport {
    std::string event;
    int stage = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double estimate = 0;
    double standard_error = 0;
    double analytic = 0;
    BoundKind bound_kind = BoundKind::exact;
    std::size_t attempts = 0;  // palm windows drawn, including rejections
    std::size_t inclusion_checks = 0;
    std::size_t inclusion_violations = 0;
};

/// Degree law used for palm windows at a stage: dyadic atoms 1..stage+2 so
/// that d_i and d_{i+1} carry exactly 2^-i and 2^-(i+1).
DegreeDistribution stage_law(int stage, int parity_shift);

/// One palm window: Poisson points on [-0.7 d, 0.7 d] plus a palm point of
/// degree d at 0, degrees from stage_law. Deterministic per seed.
PointConfiguration palm_window(const EventSpec& spec, Seed seed);

/// Draws palm windows until F holds; nullopt after `max_attempts` failures.
struct ConditionedWindow {
    PointConfiguration config;
    std::size_t attempts;
};
std::optional<ConditionedWindow> conditioned_palm_window(const EventSpec& spec, Seed seed, std::size_t max_attempts);

/// Monte Carlo estimate of one event. F is estimated unconditionally; every
/// other event is conditioned on F by rejection. Throws MonteCarloAbort if
/// the acceptance rate falls below options.min_acceptance.
EventReport mc_estimate(const EventSpec& spec, std::size_t trials, Seed seed, const McOptions& options = {});

struct ChainSpec {
    int i0 = 2;
    int i_max = 4;
    int parity_shift = 0;
    double window_length = 0;  // 0 = minimum admissible length
    bool verify_matching = true;
};

/// 2 * (sum_{i0..i_max} 0.2 d_i + 0.4 d_{i_max}): the chain drifts at most
/// 0.2 d_i per stage and the last stage inspects 0.6 d_{i_max} around x_{i_max}.
double min_chain_window(int i0, int i_max, int parity_shift = 0);

struct ChainTrialResult {
    int depth_reached = 0;  // stages passed
    std::vector<StageOutcome> stages;
    bool success = false;
    std::size_t attempts = 0;
    std::size_t inclusion_violations = 0;
    std::optional<bool> matching_verified;  // set on full success when verification ran
};

ChainTrialResult run_chain_trial(const ChainSpec& spec, Seed seed, const McOptions& options = {});

struct ChainSummary {
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::vector<std::size_t> depth_counts;  // index = depth reached
    std::size_t matching_checks = 0;
    std::size_t matching_failures = 0;
    std::size_t inclusion_violations = 0;
    double lower_bound = 0;

    EventReport report(const ChainSpec& spec) const;
};

ChainSummary estimate_chain(const ChainSpec& spec, std::size_t trials, Seed seed, const McOptions& options = {});

/// `event,i,trials,successes,estimate,stderr,analytic,bound_kind`
void write_event_header(std::ostream& out);
void write_event_row(std::ostream& out, const EventReport& report);

}  // namespace smm
