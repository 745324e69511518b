#include "smm/event_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "smm/errors.hpp"
#include "smm/graph_analysis.hpp"
#include "smm/matching_engine.hpp"
#include "smm/parallel.hpp"

namespace smm {

ChainParams ChainParams::make(int stage, int parity_shift) {
    if (stage < 1) throw ConfigError("stage index must be >= 1");
    if (parity_shift != 0 && parity_shift != 1) throw ConfigError("parity_shift must be 0 or 1");
    ChainParams p;
    p.stage = stage;
    p.parity_shift = parity_shift;
    p.degree = dyadic_degree(stage) + static_cast<Degree>(parity_shift);
    p.next_degree = dyadic_degree(stage + 1) + static_cast<Degree>(parity_shift);
    const auto d = static_cast<double>(p.degree);
    p.near_radius = d / 10.0;
    p.hop_radius = 2.0 * d / 10.0;
    p.far_radius = 4.0 * d / 10.0;
    p.near_limit = 3 * static_cast<std::size_t>(p.degree) / 10;
    p.far_limit = 6 * static_cast<std::size_t>(p.degree) / 10;
    return p;
}

bool check_F(const PointConfiguration& config, std::size_t x, const ChainParams& params) {
    return count_in_ball(config, config.position(x), params.near_radius) <= params.near_limit;
}

std::optional<std::size_t> find_next(const PointConfiguration& config, std::size_t x, const ChainParams& params) {
    const Window& w = config.window();
    const double px = config.position(x);
    std::optional<std::size_t> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < config.size(); ++z) {
        if (z == x || config.degree(z) != params.next_degree) continue;
        const double d = pair_distance(w, px, config.position(z));
        if (d < params.near_radius) continue;
        if (d < best_distance || (d == best_distance && config.position(z) < config.position(*best))) {
            best = z;
            best_distance = d;
        }
    }
    return best;
}

bool check_A(const PointConfiguration& config, std::size_t x, std::optional<std::size_t> next,
             const ChainParams& params) {
    return next && pair_distance(config.window(), config.position(x), config.position(*next)) < params.hop_radius;
}

bool check_B(const PointConfiguration& config, std::size_t x, const ChainParams& params) {
    return count_in_annulus(config, config.position(x), params.near_radius, params.hop_radius) <= params.near_limit;
}

std::size_t count_C_region(const PointConfiguration& config, double x, double y, const ChainParams& params) {
    const Window& w = config.window();
    const double gap = pair_distance(w, x, y);
    if (!(gap > params.near_radius && gap < params.hop_radius))
        throw std::invalid_argument("C region needs 0.1 d < |y - x| < 0.2 d");
    std::size_t count = 0;
    for (const auto& range : ball_ranges(config, y, params.far_radius, true))
        for (std::size_t z = range.begin; z < range.end; ++z)
            if (pair_distance(w, config.position(z), x) >= params.hop_radius) ++count;
    return count;
}

bool check_C(const PointConfiguration& config, double x, double y, const ChainParams& params) {
    return count_C_region(config, x, y, params) <= params.far_limit;
}

double c_region_length(double x, double y, const ChainParams& params) {
    // [y - 0.4 d, y + 0.4 d] minus (x - 0.2 d, x + 0.2 d).
    const double lo = y - params.far_radius, hi = y + params.far_radius;
    const double cut_lo = std::max(lo, x - params.hop_radius);
    const double cut_hi = std::min(hi, x + params.hop_radius);
    return (hi - lo) - std::max(0.0, cut_hi - cut_lo);
}

StageOutcome check_D(const PointConfiguration& config, std::size_t x, const ChainParams& params) {
    StageOutcome out;
    out.stage = params.stage;
    const auto next = find_next(config, x, params);
    out.a = check_A(config, x, next, params);
    out.b = check_B(config, x, params);
    if (out.a) {
        out.next = next;
        out.c = check_C(config, config.position(x), config.position(*next), params);
    }
    return out;
}

bool inclusion_holds(const PointConfiguration& config, std::size_t x, std::size_t next, const ChainParams& params) {
    const ChainParams following = ChainParams::make(params.stage + 1, params.parity_shift);
    return is_strongly_connected_pair(config, x, next) && check_F(config, next, following);
}

double chain_lower(int i0) {
    if (i0 < 1) throw ConfigError("chain start stage must be >= 1");
    double sum = 0.0;
    for (int i = i0; i < 1100; ++i) {
        const double term = std::exp(-std::ldexp(1.0, i));
        if (term < 1e-300) break;
        sum += term;
    }
    return 1.0 - 2.0 * sum;
}

AnalyticBounds analytic_bounds(int stage, int parity_shift) {
    const ChainParams p = ChainParams::make(stage, parity_shift);
    AnalyticBounds b;
    // Annulus of total length 2 * 0.1 d, thinned to intensity 2^-(i+1).
    b.pA_fail_exact = std::exp(-static_cast<double>(p.degree) / (10.0 * std::ldexp(1.0, stage)));
    const double rate = std::log(1.5) - 1.0 / 3.0;
    const double four_i = std::ldexp(1.0, 2 * stage);
    b.pB_fail_bound = std::exp(-3.0 * rate * four_i);
    b.pC_fail_bound = std::exp(-6.0 * rate * four_i);
    b.pD_lower_hint = 1.0 - b.pA_fail_exact;
    b.chain_lower = chain_lower(stage);
    return b;
}

std::string_view event_name(EventKind kind) {
    switch (kind) {
        case EventKind::F: return "F";
        case EventKind::A_fail: return "A_fail";
        case EventKind::B_fail: return "B_fail";
        case EventKind::C_fail: return "C_fail";
        case EventKind::D: return "D";
    }
    return "?";
}

std::optional<EventKind> parse_event_name(std::string_view name) {
    for (EventKind k : {EventKind::F, EventKind::A_fail, EventKind::B_fail, EventKind::C_fail, EventKind::D})
        if (event_name(k) == name) return k;
    return std::nullopt;
}

std::string_view bound_kind_name(BoundKind kind) {
    switch (kind) {
        case BoundKind::exact: return "exact";
        case BoundKind::upper_bound: return "upper_bound";
        case BoundKind::lower_bound: return "lower_bound";
    }
    return "?";
}

DegreeDistribution stage_law(int stage, int parity_shift) { return dyadic_mu(1, stage + 2, parity_shift, false); }

namespace {

PointConfiguration planted_window(double length, double intensity, const DegreeDistribution& law, Degree palm_degree,
                                  Seed seed) {
    const Window window{length, Boundary::open, 0.0};
    const auto points = sample_poisson(window, intensity, derive_seed(seed, kPositionStream));
    const auto planted = palm_insert(points, 0.0, palm_degree);
    return sample_degrees(law, planted, derive_seed(seed, kDegreeStream));
}

std::size_t attempt_cap(const McOptions& options) {
    if (!(options.min_acceptance > 0.0 && options.min_acceptance <= 1.0))
        throw ConfigError("min_acceptance must lie in (0, 1]");
    return static_cast<std::size_t>(std::ceil(1.0 / options.min_acceptance));
}

[[noreturn]] void abort_conditioning(int stage, std::size_t cap) {
    throw MonteCarloAbort("F conditioning at stage " + std::to_string(stage) + " accepted none of " +
                          std::to_string(cap) + " palm windows (acceptance rate below threshold)");
}

}  // namespace

PointConfiguration palm_window(const EventSpec& spec, Seed seed) {
    const ChainParams p = ChainParams::make(spec.stage, spec.parity_shift);
    const double length = 2.0 * (p.reach() + p.near_radius);
    return planted_window(length, spec.intensity, stage_law(spec.stage, spec.parity_shift), p.degree, seed);
}

std::optional<ConditionedWindow> conditioned_palm_window(const EventSpec& spec, Seed seed, std::size_t max_attempts) {
    const ChainParams p = ChainParams::make(spec.stage, spec.parity_shift);
    for (std::size_t k = 0; k < max_attempts; ++k) {
        auto config = palm_window(spec, derive_seed(seed, k));
        if (check_F(config, *config.palm_index(), p)) return ConditionedWindow{std::move(config), k + 1};
    }
    return std::nullopt;
}

EventReport mc_estimate(const EventSpec& spec, std::size_t trials, Seed seed, const McOptions& options) {
    if (trials == 0) throw ConfigError("trials must be >= 1");
    const ChainParams p = ChainParams::make(spec.stage, spec.parity_shift);
    if (spec.kind == EventKind::C_fail && !(spec.c_offset > 0.1 && spec.c_offset < 0.2))
        throw ConfigError("C offset must lie strictly between 0.1 and 0.2 (fraction of d)");
    const std::size_t cap = attempt_cap(options);

    struct Trial {
        bool success = false;
        bool aborted = false;
        std::size_t attempts = 0;
        bool inclusion_checked = false;
        bool inclusion_ok = true;
    };
    std::vector<Trial> results(trials);
    parallel_for(
        trials,
        [&](std::size_t t) {
            Trial& r = results[t];
            const Seed trial_seed = derive_seed(seed, t);
            if (spec.kind == EventKind::F) {
                const auto config = palm_window(spec, trial_seed);
                r.attempts = 1;
                r.success = check_F(config, *config.palm_index(), p);
                return;
            }
            auto drawn = conditioned_palm_window(spec, trial_seed, cap);
            if (!drawn) {
                r.aborted = true;
                r.attempts = cap;
                return;
            }
            r.attempts = drawn->attempts;
            const auto& config = drawn->config;
            const std::size_t x = *config.palm_index();
            switch (spec.kind) {
                case EventKind::A_fail: r.success = !check_A(config, x, find_next(config, x, p), p); break;
                case EventKind::B_fail: r.success = !check_B(config, x, p); break;
                case EventKind::C_fail:
                    r.success = !check_C(config, config.position(x), config.position(x) + spec.c_offset * p.degree, p);
                    break;
                case EventKind::D: {
                    const auto outcome = check_D(config, x, p);
                    r.success = outcome.holds();
                    if (r.success) {
                        r.inclusion_checked = true;
                        r.inclusion_ok = inclusion_holds(config, x, *outcome.next, p);
                    }
                    break;
                }
                case EventKind::F: break;
            }
        },
        options.threads);

    EventReport report;
    report.event = std::string(event_name(spec.kind));
    report.stage = spec.stage;
    report.trials = trials;
    for (const auto& r : results) {
        if (r.aborted) abort_conditioning(spec.stage, cap);
        report.successes += r.success ? 1 : 0;
        report.attempts += r.attempts;
        report.inclusion_checks += r.inclusion_checked ? 1 : 0;
        report.inclusion_violations += r.inclusion_ok ? 0 : 1;
    }
    report.estimate = static_cast<double>(report.successes) / static_cast<double>(trials);
    report.standard_error = std::sqrt(report.estimate * (1.0 - report.estimate) / static_cast<double>(trials));

    const AnalyticBounds bounds = analytic_bounds(spec.stage, spec.parity_shift);
    switch (spec.kind) {
        case EventKind::F: {
            // P(Poisson(0.2 d) <= floor(0.3 d) - 1): the palm point fills one slot.
            const double mean = spec.intensity * 2.0 * p.near_radius;
            double term = std::exp(-mean), cdf = 0.0;
            for (std::size_t k = 0; k + 1 <= p.near_limit; ++k) {
                cdf += term;
                term *= mean / static_cast<double>(k + 1);
            }
            report.analytic = cdf;
            report.bound_kind = BoundKind::exact;
            break;
        }
        case EventKind::A_fail:
            report.analytic = bounds.pA_fail_exact;
            report.bound_kind = BoundKind::exact;
            break;
        case EventKind::B_fail:
            report.analytic = bounds.pB_fail_bound;
            report.bound_kind = BoundKind::upper_bound;
            break;
        case EventKind::C_fail:
            report.analytic = bounds.pC_fail_bound;
            report.bound_kind = BoundKind::upper_bound;
            break;
        case EventKind::D:
            report.analytic = bounds.pD_lower_hint;
            report.bound_kind = BoundKind::lower_bound;
            break;
    }
    return report;
}

double min_chain_window(int i0, int i_max, int parity_shift) {
    if (i0 < 1 || i_max < i0) throw ConfigError("chain needs 1 <= i0 <= i_max");
    double drift = 0.0;
    for (int i = i0; i <= i_max; ++i) drift += ChainParams::make(i, parity_shift).hop_radius;
    return 2.0 * (drift + ChainParams::make(i_max, parity_shift).far_radius);
}

ChainTrialResult run_chain_trial(const ChainSpec& spec, Seed seed, const McOptions& options) {
    const double required = min_chain_window(spec.i0, spec.i_max, spec.parity_shift);
    const double length = spec.window_length > 0 ? spec.window_length : required;
    if (length < required) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "chain window length %.15g is below the minimum %.15g for stages %d..%d",
                      length, required, spec.i0, spec.i_max);
        throw ConfigError(buf);
    }
    const auto law = dyadic_mu(1, spec.i_max + 2, spec.parity_shift, false);
    const ChainParams first = ChainParams::make(spec.i0, spec.parity_shift);
    const std::size_t cap = attempt_cap(options);

    ChainTrialResult result;
    std::optional<PointConfiguration> config;
    for (std::size_t k = 0; k < cap && !config; ++k) {
        auto drawn = planted_window(length, 1.0, law, first.degree, derive_seed(seed, k));
        result.attempts = k + 1;
        if (check_F(drawn, *drawn.palm_index(), first)) config = std::move(drawn);
    }
    if (!config) abort_conditioning(spec.i0, cap);

    std::vector<std::size_t> path{*config->palm_index()};
    for (int i = spec.i0; i <= spec.i_max; ++i) {
        const ChainParams p = ChainParams::make(i, spec.parity_shift);
        const auto outcome = check_D(*config, path.back(), p);
        result.stages.push_back(outcome);
        if (!outcome.holds()) break;
        if (!inclusion_holds(*config, path.back(), *outcome.next, p)) ++result.inclusion_violations;
        path.push_back(*outcome.next);
        ++result.depth_reached;
    }
    result.success = result.depth_reached == spec.i_max - spec.i0 + 1;

    if (result.success && spec.verify_matching) {
        const Matching m = run_to_completion(*config);
        const auto adj = adjacency_lists(config->size(), m);
        bool ok = true;
        for (std::size_t k = 0; k + 1 < path.size(); ++k)
            ok = ok && std::binary_search(adj[path[k]].begin(), adj[path[k]].end(), path[k + 1]);
        result.matching_verified = ok;
    }
    return result;
}

ChainSummary estimate_chain(const ChainSpec& spec, std::size_t trials, Seed seed, const McOptions& options) {
    if (trials == 0) throw ConfigError("trials must be >= 1");
    min_chain_window(spec.i0, spec.i_max, spec.parity_shift);
    std::vector<ChainTrialResult> results(trials);
    parallel_for(
        trials, [&](std::size_t t) { results[t] = run_chain_trial(spec, derive_seed(seed, t), options); },
        options.threads);

    ChainSummary s;
    s.trials = trials;
    s.depth_counts.assign(static_cast<std::size_t>(spec.i_max - spec.i0 + 2), 0);
    s.lower_bound = chain_lower(spec.i0);
    for (const auto& r : results) {
        s.successes += r.success ? 1 : 0;
        ++s.depth_counts[static_cast<std::size_t>(r.depth_reached)];
        s.inclusion_violations += r.inclusion_violations;
        if (r.matching_verified) {
            ++s.matching_checks;
            s.matching_failures += *r.matching_verified ? 0 : 1;
        }
    }
    return s;
}

EventReport ChainSummary::report(const ChainSpec& spec) const {
    EventReport r;
    r.event = "chain";
    r.stage = spec.i0;
    r.trials = trials;
    r.successes = successes;
    r.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    r.standard_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(trials));
    r.analytic = lower_bound;
    r.bound_kind = BoundKind::lower_bound;
    r.inclusion_checks = successes;
    r.inclusion_violations = inclusion_violations;
    return r;
}

void write_event_header(std::ostream& out) { out << "event,i,trials,successes,estimate,stderr,analytic,bound_kind\n"; }

void write_event_row(std::ostream& out, const EventReport& r) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "%s,%d,%zu,%zu,%.15g,%.15g,%.15g,%s\n", r.event.c_str(), r.stage, r.trials,
                  r.successes, r.estimate, r.standard_error, r.analytic, std::string(bound_kind_name(r.bound_kind)).c_str());
    out << buf;
}

}  // namespace smm
