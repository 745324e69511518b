#include "smm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "smm/errors.hpp"
#include "smm/graph_analysis.hpp"
#include "smm/matching_engine.hpp"
#include "smm/parallel.hpp"

namespace smm {

namespace {

constexpr std::string_view kCommandNames[] = {"simulate", "oracle-check", "event", "chain", "sweep"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    for (;;) {
        const auto cut = s.find(sep);
        out.emplace_back(trim(s.substr(0, cut)));
        if (cut == std::string_view::npos) return out;
        s.remove_prefix(cut + 1);
    }
}

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) : "command line"; }

// Value converters throw std::invalid_argument with a bare reason; Reader adds key and line.

double to_real(std::string_view s) {
    double v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("expected a real number, got '" + std::string(s) + "'");
    return v;
}

std::uint64_t to_count(std::string_view s) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (!s.empty() && ec == std::errc() && end == s.data() + s.size()) return v;
    // accept integral reals such as 1e5
    double d = 0;
    const auto [dend, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (!s.empty() && dec == std::errc() && dend == s.data() + s.size() && d >= 0 && d <= 9007199254740992.0 &&
        d == std::floor(d))
        return static_cast<std::uint64_t>(d);
    throw std::invalid_argument("expected a nonnegative integer, got '" + std::string(s) + "'");
}

int to_int(std::string_view s) {
    const std::uint64_t v = to_count(s);
    if (v > 1000000) throw std::invalid_argument("value " + std::string(s) + " is out of range");
    return static_cast<int>(v);
}

bool to_bool(std::string_view s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

std::vector<std::string> to_list(std::string_view s) {
    auto items = split(s, ',');
    for (const auto& item : items)
        if (item.empty()) throw std::invalid_argument("empty item in comma-separated list '" + std::string(s) + "'");
    return items;
}

enum KeyUse : unsigned {
    use_simulate = 1,
    use_oracle = 2,
    use_event = 4,
    use_chain = 8,
    use_sweep = 16,
    use_all = 31,
};

const std::map<std::string, unsigned, std::less<>>& key_table() {
    static const std::map<std::string, unsigned, std::less<>> table = {
        {"seed", use_all},
        {"threads", use_all},
        {"output.path", use_all},
        {"window.length", use_simulate | use_sweep},
        {"window.boundary", use_simulate | use_sweep},
        {"window.margin", use_simulate | use_sweep},
        {"intensity", use_simulate | use_sweep | use_event},
        {"distribution.kind", use_simulate | use_sweep | use_oracle},
        {"distribution.degree", use_simulate | use_sweep | use_oracle},
        {"distribution.degrees", use_simulate | use_sweep | use_oracle},
        {"distribution.masses", use_simulate | use_sweep | use_oracle},
        {"distribution.i_min", use_simulate | use_sweep | use_oracle},
        {"distribution.i_max", use_simulate | use_sweep | use_oracle},
        {"distribution.parity_shift", use_simulate | use_sweep | use_oracle},
        {"distribution.mass_at_one", use_simulate | use_sweep | use_oracle},
        {"seeds", use_simulate | use_sweep},
        {"max_rounds", use_simulate | use_sweep},
        {"check_strong_pairs", use_simulate | use_sweep},
        {"output.edges", use_simulate},
        {"output.leftover", use_simulate},
        {"output.points", use_simulate},
        {"trials", use_oracle | use_event | use_chain},
        {"oracle.n_max", use_oracle},
        {"event.names", use_event},
        {"event.i", use_event},
        {"event.parity_shift", use_event},
        {"event.c_offset", use_event},
        {"mc.min_acceptance", use_event | use_chain},
        {"chain.i0", use_chain},
        {"chain.i_max", use_chain},
        {"chain.parity_shift", use_chain},
        {"chain.window_length", use_chain},
        {"chain.verify_matching", use_chain},
    };
    return table;
}

unsigned command_bit(Command c) { return 1u << static_cast<unsigned>(c); }

bool sweepable(std::string_view key) {
    const auto it = key_table().find(key);
    return it != key_table().end() && (it->second & use_sweep) && key != "seed" && key != "output.path" &&
           key != "threads";
}

class Reader {
  public:
    Reader(const RawConfig& entries, Command command) : entries_(entries), command_(command) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    int line(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        if (!has(key)) throw ConfigError(key + ": " + what);
        throw ConfigError(where(line(key)) + ": " + key + ": " + what);
    }

    void require(const std::string& key) const {
        if (!has(key))
            throw ConfigError("missing required key '" + key + "' for command " +
                              std::string(command_name(command_)));
    }

    template <class Conv>
    auto get(const std::string& key, Conv conv) const -> std::optional<decltype(conv(std::string_view{}))> {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        try {
            return conv(it->second.value);
        } catch (const std::invalid_argument& e) {
            fail(key, e.what());
        }
    }

    template <class F>
    auto guarded(const std::string& key, F&& f) const -> decltype(f()) {
        try {
            return f();
        } catch (const ConfigError& e) {
            fail(key, e.what());
        }
    }

  private:
    const RawConfig& entries_;
    Command command_;
};

DegreeDistribution read_distribution(const Reader& r) {
    const std::string kind = *r.get("distribution.kind", [](std::string_view s) { return std::string(s); });
    const std::vector<std::string> by_kind[] = {
        {"distribution.degree"},
        {"distribution.degrees", "distribution.masses"},
        {"distribution.i_min", "distribution.i_max", "distribution.parity_shift", "distribution.mass_at_one"}};
    int slot = -1;
    if (kind == "constant") slot = 0;
    if (kind == "categorical") slot = 1;
    if (kind == "dyadic") slot = 2;
    if (slot < 0) r.fail("distribution.kind", "expected constant, categorical or dyadic, got '" + kind + "'");
    for (int other = 0; other < 3; ++other)
        if (other != slot)
            for (const auto& key : by_kind[other])
                if (r.has(key)) r.fail(key, "not used by distribution.kind = " + kind);

    if (slot == 0) {
        r.require("distribution.degree");
        const auto k = *r.get("distribution.degree", to_count);
        if (k < 1 || k > 0xffffffffu) r.fail("distribution.degree", "degree must be a positive 32-bit integer");
        return constant_law(static_cast<Degree>(k));
    }
    if (slot == 1) {
        r.require("distribution.degrees");
        r.require("distribution.masses");
        const auto degrees = *r.get("distribution.degrees", to_list);
        const auto masses = *r.get("distribution.masses", to_list);
        if (degrees.size() != masses.size())
            r.fail("distribution.masses", std::to_string(masses.size()) + " masses for " +
                                              std::to_string(degrees.size()) + " degrees");
        std::vector<std::pair<Degree, double>> atoms;
        for (std::size_t j = 0; j < degrees.size(); ++j) {
            std::uint64_t k = 0;
            double m = 0;
            try {
                k = to_count(degrees[j]);
            } catch (const std::invalid_argument& e) {
                r.fail("distribution.degrees", e.what());
            }
            if (k > 0xffffffffu) r.fail("distribution.degrees", "degree " + degrees[j] + " exceeds 32 bits");
            try {
                m = to_real(masses[j]);
            } catch (const std::invalid_argument& e) {
                r.fail("distribution.masses", e.what());
            }
            atoms.emplace_back(static_cast<Degree>(k), m);
        }
        return r.guarded("distribution.masses", [&] { return build_categorical(atoms); });
    }
    r.require("distribution.i_max");
    const int i_min = r.get("distribution.i_min", to_int).value_or(1);
    const int i_max = *r.get("distribution.i_max", to_int);
    const int shift = r.get("distribution.parity_shift", to_int).value_or(0);
    const bool at_one = r.get("distribution.mass_at_one", to_bool).value_or(false);
    return r.guarded(r.has("distribution.i_min") ? "distribution.i_min" : "distribution.i_max",
                     [&] { return dyadic_mu(i_min, i_max, shift, at_one); });
}

std::vector<SweepAxis> read_sweep_axes(const RawConfig& entries) {
    std::vector<SweepAxis> axes;
    for (const auto& [key, entry] : entries) {
        if (key.rfind("sweep.", 0) != 0) continue;
        SweepAxis axis{key.substr(6), split(entry.value, ';'), entry.line};
        if (entry.value.find_first_not_of(" \t;") == std::string::npos)
            throw ConfigError(where(entry.line) + ": " + key + ": empty sweep list");
        for (const auto& v : axis.values)
            if (v.empty()) throw ConfigError(where(entry.line) + ": " + key + ": empty value in sweep list");
        axes.push_back(std::move(axis));
    }
    std::stable_sort(axes.begin(), axes.end(), [](const SweepAxis& a, const SweepAxis& b) { return a.line < b.line; });
    return axes;
}

void check_keys(const RawConfig& entries, Command command) {
    for (const auto& [key, entry] : entries) {
        const std::string at = where(entry.line) + ": ";
        if (key.rfind("sweep.", 0) == 0) {
            if (command != Command::sweep)
                throw ConfigError(at + key + ": sweep lists are only valid for the sweep command");
            if (!sweepable(key.substr(6))) throw ConfigError(at + key + ": '" + key.substr(6) + "' cannot be swept");
            continue;
        }
        const auto it = key_table().find(key);
        if (it == key_table().end()) throw ConfigError(at + "unknown key '" + key + "'");
        if (!(it->second & command_bit(command)))
            throw ConfigError(at + key + ": not used by command " + std::string(command_name(command)));
    }
}

ExperimentConfig build_single(Command command, const RawConfig& entries) {
    const Reader r(entries, command);
    ExperimentConfig c;
    c.command = command;
    c.raw = entries;

    if (command == Command::simulate) {
        r.require("window.length");
        r.require("distribution.kind");
    }
    r.require("output.path");
    c.output_path = *r.get("output.path", [](std::string_view s) { return std::string(s); });
    if (c.output_path.empty()) r.fail("output.path", "path is empty");

    c.seed = r.get("seed", to_count).value_or(0);
    c.threads = static_cast<unsigned>(r.get("threads", to_int).value_or(0));

    if (r.has("window.length")) {
        Window w;
        w.length = *r.get("window.length", to_real);
        if (!(w.length > 0)) r.fail("window.length", "length must be positive");
        const auto boundary = r.get("window.boundary", [](std::string_view s) {
            if (s == "open") return Boundary::open;
            if (s == "torus") return Boundary::torus;
            throw std::invalid_argument("expected open or torus, got '" + std::string(s) + "'");
        });
        w.boundary = boundary.value_or(Boundary::open);
        w.margin = r.get("window.margin", to_real).value_or(0.05 * w.length);
        if (w.margin < 0) r.fail("window.margin", "margin must be nonnegative");
        r.guarded(r.has("window.margin") ? "window.margin" : "window.length", [&] { w.validate(); });
        c.window = w;
    } else {
        for (const char* key : {"window.boundary", "window.margin"})
            if (r.has(key)) r.fail(key, "requires window.length");
    }

    c.intensity = r.get("intensity", to_real).value_or(1.0);
    if (!(c.intensity > 0)) r.fail("intensity", "intensity must be positive");

    if (r.has("distribution.kind")) {
        c.distribution = read_distribution(r);
    } else {
        for (const auto& [key, entry] : entries)
            if (key.rfind("distribution.", 0) == 0) r.fail(key, "requires distribution.kind");
    }

    c.seeds = r.get("seeds", to_count).value_or(1);
    if (c.seeds < 1) r.fail("seeds", "need at least one replica");
    if (r.has("max_rounds")) {
        c.max_rounds = *r.get("max_rounds", to_count);
        if (*c.max_rounds < 1) r.fail("max_rounds", "must be at least 1");
    }
    c.check_strong_pairs = r.get("check_strong_pairs", to_bool).value_or(true);

    c.edges_path = r.get("output.edges", [](std::string_view s) { return std::string(s); }).value_or("");
    c.leftover_path = r.get("output.leftover", [](std::string_view s) { return std::string(s); }).value_or("");
    c.points_path = r.get("output.points", [](std::string_view s) { return std::string(s); }).value_or("");
    for (const char* key : {"output.edges", "output.leftover", "output.points"})
        if (r.has(key) && c.seeds != 1) r.fail(key, "dumps require seeds = 1");

    if (command == Command::oracle_check || command == Command::event || command == Command::chain) {
        r.require("trials");
        c.trials = *r.get("trials", to_count);
        if (c.trials < 1) r.fail("trials", "need at least one trial");
    }
    c.oracle_n_max = r.get("oracle.n_max", to_count).value_or(200);
    if (c.oracle_n_max < 2 || c.oracle_n_max > 5000) r.fail("oracle.n_max", "must lie in [2, 5000]");

    c.mc.threads = c.threads;
    c.mc.min_acceptance = r.get("mc.min_acceptance", to_real).value_or(1e-6);
    if (!(c.mc.min_acceptance > 0 && c.mc.min_acceptance <= 1))
        r.fail("mc.min_acceptance", "must lie in (0, 1]");

    if (command == Command::event) {
        r.require("event.names");
        r.require("event.i");
        const auto names = *r.get("event.names", to_list);
        for (const auto& name : names) {
            const auto kind = parse_event_name(name);
            if (!kind) r.fail("event.names", "unknown event '" + name + "' (expected F, A_fail, B_fail, C_fail or D)");
            c.events.push_back(*kind);
        }
        c.stage = *r.get("event.i", to_int);
        c.parity_shift = r.get("event.parity_shift", to_int).value_or(0);
        r.guarded("event.i", [&] { ChainParams::make(c.stage, c.parity_shift); });
        r.guarded("event.i", [&] { stage_law(c.stage, c.parity_shift); });
        c.c_offset = r.get("event.c_offset", to_real).value_or(0.15);
        if (!(c.c_offset > 0.1 && c.c_offset < 0.2)) r.fail("event.c_offset", "must lie strictly between 0.1 and 0.2");
    }

    if (command == Command::chain) {
        c.chain.i0 = r.get("chain.i0", to_int).value_or(2);
        c.chain.i_max = r.get("chain.i_max", to_int).value_or(4);
        c.chain.parity_shift = r.get("chain.parity_shift", to_int).value_or(0);
        c.chain.verify_matching = r.get("chain.verify_matching", to_bool).value_or(true);
        if (c.chain.i0 < 1) r.fail("chain.i0", "must be at least 1");
        if (c.chain.i_max < c.chain.i0) r.fail("chain.i_max", "must be at least chain.i0");
        const double min_length = r.guarded("chain.i_max", [&] {
            stage_law(c.chain.i_max, c.chain.parity_shift);
            return min_chain_window(c.chain.i0, c.chain.i_max, c.chain.parity_shift);
        });
        c.chain.window_length = r.get("chain.window_length", to_real).value_or(0.0);
        if (r.has("chain.window_length") && c.chain.window_length < min_length) {
            std::ostringstream msg;
            msg << "window length " << c.chain.window_length << " is shorter than the minimum chain window "
                << min_length << " for i0 = " << c.chain.i0 << ", i_max = " << c.chain.i_max;
            r.fail("chain.window_length", msg.str());
        }
    }
    return c;
}

std::vector<std::size_t> cell_indices(const ExperimentConfig& c, std::size_t cell) {
    std::vector<std::size_t> idx(c.sweep.size());
    for (std::size_t a = c.sweep.size(); a-- > 0;) {
        idx[a] = cell % c.sweep[a].values.size();
        cell /= c.sweep[a].values.size();
    }
    return idx;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream out(path, std::ios::binary | std::ios::out | mode);
    if (!out) throw ConfigError("output.path: cannot open '" + path + "' for writing");
    return out;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + '"';
}

// ---- simulate ----

struct ReplicaResult {
    ComponentReport report;
    bool truncated = false;
    std::optional<std::pair<VertexId, VertexId>> unstable;
    std::size_t strong_violations = 0;
    std::optional<std::pair<VertexId, VertexId>> strong_example;
};

using DumpFn = std::function<void(const PointConfiguration&, const Matching&)>;

ReplicaResult simulate_replica(const ExperimentConfig& c, Seed seed, const DumpFn& dump = {}) {
    const auto points = sample_poisson(*c.window, c.intensity, derive_seed(seed, kPositionStream));
    const auto config = sample_degrees(*c.distribution, points, derive_seed(seed, kDegreeStream));
    const auto matching = run_to_completion(config, c.max_rounds);
    ReplicaResult out;
    out.report = components(config, matching);
    out.truncated = matching.truncated;
    if (!matching.truncated) {
        if (const auto bad = find_stability_violation(config, matching))
            out.unstable = std::make_pair(config.id(bad->first), config.id(bad->second));
        if (c.check_strong_pairs) {
            const auto missing = strong_pair_violations(config, matching);
            out.strong_violations = missing.size();
            if (!missing.empty())
                out.strong_example = std::make_pair(config.id(missing[0].first), config.id(missing[0].second));
        }
    }
    if (dump) dump(config, matching);
    return out;
}

// Throws InvariantViolation for the first failing replica; returns whether any was truncated.
bool check_replicas(const std::vector<ReplicaResult>& results, Seed first_seed) {
    bool truncated = false;
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        const Seed seed = first_seed + r;
        if (res.unstable)
            throw InvariantViolation("replica seed " + std::to_string(seed) + ": vertices " +
                                     std::to_string(res.unstable->first) + " and " +
                                     std::to_string(res.unstable->second) +
                                     " are non-adjacent with free stubs after termination");
        if (res.strong_violations > 0)
            throw InvariantViolation("replica seed " + std::to_string(seed) + ": " +
                                     std::to_string(res.strong_violations) +
                                     " strongly connected interior pairs left unmatched, e.g. " +
                                     std::to_string(res.strong_example->first) + " and " +
                                     std::to_string(res.strong_example->second));
        truncated = truncated || res.truncated;
    }
    return truncated;
}

struct ReplicaStats {
    std::size_t replicas = 0, spanning = 0, truncated = 0;
    double fraction_sum = 0, fraction_max = 0, leftover_per_vertex = 0, vertices = 0;

    void add(const ReplicaResult& r) {
        ++replicas;
        spanning += r.report.spans;
        truncated += r.truncated;
        fraction_sum += r.report.largest_fraction;
        fraction_max = std::max(fraction_max, r.report.largest_fraction);
        vertices += static_cast<double>(r.report.n);
        leftover_per_vertex += r.report.n ? static_cast<double>(r.report.leftover_total) / r.report.n : 0.0;
    }
    std::string describe() const {
        std::ostringstream s;
        s << "spanning in " << spanning << " of " << replicas << " replicas, mean largest fraction "
          << format_real(fraction_sum / replicas) << " (max " << format_real(fraction_max) << "), mean "
          << format_real(vertices / replicas) << " vertices with "
          << format_real(leftover_per_vertex / replicas) << " leftover stubs per vertex";
        return s.str();
    }
};

std::string window_text(const Window& w) {
    return std::string(w.boundary == Boundary::torus ? "torus" : "open") + " window of length " +
           format_real(w.length);
}

int run_simulate(const ExperimentConfig& c, std::ostream& summary, std::ostream& diagnostics) {
    std::vector<ReplicaResult> results(c.seeds);
    const bool dumping = !c.edges_path.empty() || !c.leftover_path.empty() || !c.points_path.empty();
    DumpFn dump;
    if (dumping) dump = [&](const PointConfiguration& config, const Matching& matching) {
        if (!c.points_path.empty()) {
            auto out = open_output(c.points_path);
            write_points_csv(out, config);
        }
        if (!c.edges_path.empty()) {
            auto out = open_output(c.edges_path);
            write_edges_csv(out, config, matching);
        }
        if (!c.leftover_path.empty()) {
            auto out = open_output(c.leftover_path);
            write_leftover_csv(out, config, matching);
        }
    };
    auto out = open_output(c.output_path);
    parallel_for(
        c.seeds,
        [&](std::size_t r) {
            results[r] = simulate_replica(c, c.seed + r, dump);
        },
        c.threads);
    write_component_header(out);
    ReplicaStats stats;
    for (std::size_t r = 0; r < c.seeds; ++r) {
        write_component_row(out, c.seed + r, results[r].report);
        stats.add(results[r]);
    }
    out.flush();
    summary << "simulate: " << c.seeds << " replicas from seed " << c.seed << " on an " << window_text(*c.window)
            << ", intensity " << format_real(c.intensity) << ", degree law " << c.distribution->describe() << "; "
            << stats.describe() << ". Rows written to " << c.output_path << ".\n";
    if (check_replicas(results, c.seed)) {
        diagnostics << "truncated: " << stats.truncated << " replicas hit max_rounds\n";
        return exit_truncated;
    }
    return exit_ok;
}

// ---- sweep ----

std::string sweep_header(const ExperimentConfig& c) {
    std::string h = "cell";
    for (const auto& axis : c.sweep) h += "," + csv_field(axis.key);
    return h + ",seed,n,n_edges,leftover_total,n_components,largest_size,largest_fraction,spans\n";
}

std::string sweep_cell_prefix(const ExperimentConfig& c, std::size_t cell) {
    std::string p = std::to_string(cell);
    const auto idx = cell_indices(c, cell);
    for (std::size_t a = 0; a < c.sweep.size(); ++a) p += "," + csv_field(c.sweep[a].values[idx[a]]);
    return p + ",";
}

std::string sweep_row_prefix(const ExperimentConfig& c, std::size_t cell, Seed seed) {
    return sweep_cell_prefix(c, cell) + std::to_string(seed) + ",";
}

// Length of the valid canonical prefix of an existing sweep file, and the row count it holds.
std::pair<std::size_t, std::size_t> resumable_prefix(const ExperimentConfig& c, const std::string& text,
                                                     std::size_t total_rows) {
    const std::string header = sweep_header(c);
    if (text.empty()) return {0, 0};
    if (text.compare(0, header.size(), header) != 0) {
        if (header.compare(0, text.size(), text) == 0) return {0, 0};  // interrupted inside the header
        throw ConfigError("output.path: existing file does not start with this sweep's header; remove it or "
                          "choose another path");
    }
    std::size_t pos = header.size(), rows = 0;
    while (rows < total_rows) {
        const auto end = text.find('\n', pos);
        if (end == std::string::npos) break;
        const std::string prefix = sweep_row_prefix(c, rows / c.seeds, c.seed + rows % c.seeds);
        if (text.compare(pos, prefix.size(), prefix) != 0) break;
        pos = end + 1;
        ++rows;
    }
    return {pos, rows};
}

int run_sweep(const ExperimentConfig& c, std::ostream& summary, std::ostream& diagnostics) {
    const std::size_t cells = sweep_cell_count(c);
    std::vector<ExperimentConfig> cell_configs;
    for (std::size_t k = 0; k < cells; ++k) cell_configs.push_back(sweep_cell(c, cell_indices(c, k)));

    std::string existing;
    if (std::ifstream in{c.output_path, std::ios::binary}) existing.assign(std::istreambuf_iterator<char>(in), {});
    const auto [keep_bytes, kept_rows] = resumable_prefix(c, existing, cells * c.seeds);
    if (!existing.empty()) std::filesystem::resize_file(c.output_path, keep_bytes);
    auto out = open_output(c.output_path, keep_bytes == 0 ? std::ios::trunc : std::ios::app);
    if (keep_bytes == 0) out << sweep_header(c);
    out.flush();
    if (kept_rows > 0) diagnostics << "resuming sweep after " << kept_rows << " existing rows\n";

    std::ostringstream cell_text;
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < cells; ++k) {
        const std::size_t first = k * c.seeds;
        const std::size_t done = kept_rows > first ? std::min(kept_rows - first, c.seeds) : 0;
        if (done == c.seeds) {
            ++skipped;
            continue;
        }
        const auto& cell = cell_configs[k];
        std::vector<ReplicaResult> results(c.seeds - done);
        parallel_for(
            results.size(), [&](std::size_t j) { results[j] = simulate_replica(cell, c.seed + done + j); },
            c.threads);
        if (check_replicas(results, c.seed + done)) {
            diagnostics << "truncated: cell " << k << " hit max_rounds; sweep stopped before writing it\n";
            return exit_truncated;
        }
        ReplicaStats stats;
        for (std::size_t j = 0; j < results.size(); ++j) {
            out << sweep_cell_prefix(c, k);
            write_component_row(out, c.seed + done + j, results[j].report);
            stats.add(results[j]);
        }
        out.flush();
        const auto idx = cell_indices(c, k);
        cell_text << " Cell " << k << " (";
        for (std::size_t a = 0; a < c.sweep.size(); ++a)
            cell_text << (a ? ", " : "") << c.sweep[a].key << " = " << c.sweep[a].values[idx[a]];
        cell_text << "): " << stats.describe() << (done ? " (partial rerun)" : "") << '.';
    }
    summary << "sweep: " << cells << " cells x " << c.seeds << " replicas from seed " << c.seed << ", " << skipped
            << " cells already present." << cell_text.str() << " Rows written to " << c.output_path << ".\n";
    return exit_ok;
}

// ---- oracle-check ----

PointConfiguration oracle_instance(const ExperimentConfig& c, Seed seed, std::size_t k) {
    static const std::vector<DegreeDistribution> pool = {
        build_categorical({{1, 0.5}, {2, 0.5}}), constant_law(2), constant_law(3),
        build_categorical({{1, 0.3}, {2, 0.2}, {4, 0.3}, {7, 0.2}}), dyadic_mu(1, 2, 0, false)};
    Rng rng(seed);
    const Boundary boundary = k % 2 ? Boundary::torus : Boundary::open;
    const double length = 2.0 + rng.uniform() * 0.9 * static_cast<double>(c.oracle_n_max);
    for (;;) {
        auto points = sample_poisson(Window{length, boundary, 0.0}, 1.0, rng.bits());
        if (points.size() > c.oracle_n_max) continue;
        const auto& law = c.distribution ? *c.distribution : pool[rng.below(pool.size())];
        return sample_degrees(law, points, rng.bits());
    }
}

int run_oracle_check(const ExperimentConfig& c, std::ostream& summary, std::ostream&) {
    struct Row {
        std::size_t n = 0, edges = 0, rounds = 0;
        bool agree = false, stable = false;
    };
    std::vector<Row> rows(c.trials);
    parallel_for(
        c.trials,
        [&](std::size_t k) {
            const auto config = oracle_instance(c, c.seed + k, k);
            const auto fast = run_to_completion(config);
            const auto naive = naive_round_oracle(config);
            const auto greedy = greedy_reference(config);
            const auto ids = edge_id_set(config, fast);
            Row& row = rows[k];
            row.n = config.size();
            row.edges = fast.edges.size();
            row.rounds = fast.rounds_run;
            row.agree = !fast.truncated && fast.edges == naive.edges && fast.leftover == naive.leftover &&
                        ids == edge_id_set(config, greedy) && fast.leftover == greedy.leftover;
            row.stable = !find_stability_violation(config, fast).has_value();
        },
        c.threads);
    auto out = open_output(c.output_path);
    out << "seed,n,n_edges,rounds,agree,stable\n";
    std::size_t disagree = 0, unstable = 0, max_n = 0;
    for (std::size_t k = 0; k < c.trials; ++k) {
        const Row& r = rows[k];
        out << c.seed + k << ',' << r.n << ',' << r.edges << ',' << r.rounds << ',' << r.agree << ',' << r.stable
            << '\n';
        disagree += !r.agree;
        unstable += !r.stable;
        max_n = std::max(max_n, r.n);
    }
    out.flush();
    summary << "oracle-check: " << c.trials << " instances from seed " << c.seed << " with at most "
            << c.oracle_n_max << " points (largest " << max_n << "); the round engine, the literal round oracle and "
            << "the greedy reference disagreed on " << disagree << " and " << unstable
            << " final graphs were unstable. Rows written to " << c.output_path << ".\n";
    if (disagree > 0 || unstable > 0)
        throw InvariantViolation(std::to_string(disagree) + " oracle disagreements, " + std::to_string(unstable) +
                                 " unstable results");
    return exit_ok;
}

// ---- event / chain ----

std::string report_text(const EventReport& r) {
    std::ostringstream s;
    s << r.event << " at i = " << r.stage << ": " << format_real(r.estimate) << " +- "
      << format_real(r.standard_error) << " over " << r.trials << " trials (" << bound_kind_name(r.bound_kind)
      << " reference " << format_real(r.analytic) << ")";
    return s.str();
}

int run_event(const ExperimentConfig& c, std::ostream& summary, std::ostream&) {
    std::vector<EventReport> reports;
    for (const EventKind kind : c.events) {
        EventSpec spec{kind, c.stage, c.parity_shift, c.intensity, c.c_offset};
        reports.push_back(mc_estimate(spec, c.trials, c.seed, c.mc));
    }
    auto out = open_output(c.output_path);
    write_event_header(out);
    for (const auto& r : reports) write_event_row(out, r);
    out.flush();
    summary << "event:";
    std::size_t violations = 0;
    for (const auto& r : reports) {
        summary << ' ' << report_text(r);
        if (r.attempts > r.trials)
            summary << ", F acceptance " << format_real(static_cast<double>(r.trials) / r.attempts);
        if (r.inclusion_checks > 0)
            summary << ", inclusion checked " << r.inclusion_checks << " times with " << r.inclusion_violations
                    << " violations";
        summary << '.';
        violations += r.inclusion_violations;
    }
    summary << " Rows written to " << c.output_path << ".\n";
    if (violations > 0) throw InvariantViolation(std::to_string(violations) + " inclusion violations");
    return exit_ok;
}

int run_chain(const ExperimentConfig& c, std::ostream& summary, std::ostream&) {
    const auto result = estimate_chain(c.chain, c.trials, c.seed, c.mc);
    const auto report = result.report(c.chain);
    auto out = open_output(c.output_path);
    write_event_header(out);
    write_event_row(out, report);
    out.flush();
    summary << "chain from i0 = " << c.chain.i0 << " to i_max = " << c.chain.i_max << ": success "
            << format_real(report.estimate) << " +- " << format_real(report.standard_error) << " over " << c.trials
            << " trials against the lower bound " << format_real(result.lower_bound) << "; depth counts";
    for (std::size_t d = 0; d < result.depth_counts.size(); ++d)
        summary << (d ? ", " : " ") << d << ':' << result.depth_counts[d];
    summary << "; " << result.matching_checks << " matchings verified with " << result.matching_failures
            << " failures and " << result.inclusion_violations << " inclusion violations. Rows written to "
            << c.output_path << ".\n";
    if (result.matching_failures > 0 || result.inclusion_violations > 0)
        throw InvariantViolation(std::to_string(result.matching_failures) + " chain matching failures, " +
                                 std::to_string(result.inclusion_violations) + " inclusion violations");
    return exit_ok;
}

}  // namespace

std::string_view command_name(Command command) { return kCommandNames[static_cast<int>(command)]; }

std::optional<Command> parse_command(std::string_view name) {
    for (int k = 0; k < 5; ++k)
        if (kCommandNames[k] == name) return static_cast<Command>(k);
    return std::nullopt;
}

RawConfig parse_entries(std::string_view text) {
    RawConfig entries;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto cut = text.find('\n');
        std::string_view line = text.substr(0, cut);
        text.remove_prefix(cut == std::string_view::npos ? text.size() : cut + 1);
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where(line_no) + ": expected 'key = value', got '" + std::string(line) + "'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty() || key.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_.") != std::string::npos)
            throw ConfigError(where(line_no) + ": malformed key '" + key + "'");
        const auto [it, inserted] = entries.emplace(key, RawEntry{std::string(trim(line.substr(eq + 1))), line_no});
        if (!inserted)
            throw ConfigError(where(line_no) + ": duplicate key '" + key + "' (first set on " +
                              where(it->second.line) + ")");
    }
    return entries;
}

ExperimentConfig build_config(Command command, const RawConfig& entries) {
    check_keys(entries, command);
    if (command != Command::sweep) return build_single(command, entries);

    ExperimentConfig base;
    base.command = Command::sweep;
    base.sweep = read_sweep_axes(entries);
    if (base.sweep.empty()) throw ConfigError("sweep needs at least one 'sweep.<key> = v1; v2; ...' list");
    for (const auto& [key, entry] : entries)
        if (key.rfind("sweep.", 0) != 0) base.raw.emplace(key, entry);
    for (const auto& axis : base.sweep)
        if (base.raw.count(axis.key))
            throw ConfigError(where(axis.line) + ": sweep." + axis.key + ": '" + axis.key +
                              "' is also set directly (" + where(base.raw.at(axis.key).line) + ")");

    const std::size_t cells = sweep_cell_count(base);
    ExperimentConfig first;
    for (std::size_t k = 0; k < cells; ++k) {
        auto cell = sweep_cell(base, cell_indices(base, k));
        if (k == 0) first = std::move(cell);
    }
    first.command = Command::sweep;
    first.sweep = std::move(base.sweep);
    first.raw = std::move(base.raw);
    return first;
}

ExperimentConfig parse_config(std::string_view text, Command command, const RawConfig& overrides) {
    RawConfig entries = parse_entries(text);
    for (const auto& [key, entry] : overrides) entries[key] = entry;
    return build_config(command, entries);
}

std::size_t sweep_cell_count(const ExperimentConfig& config) {
    std::size_t cells = config.sweep.empty() ? 0 : 1;
    for (const auto& axis : config.sweep) cells *= axis.values.size();
    return cells;
}

ExperimentConfig sweep_cell(const ExperimentConfig& base, const std::vector<std::size_t>& value_index) {
    RawConfig merged = base.raw;
    for (std::size_t a = 0; a < base.sweep.size(); ++a)
        merged[base.sweep[a].key] = RawEntry{base.sweep[a].values.at(value_index.at(a)), base.sweep[a].line};
    check_keys(merged, Command::simulate);
    return build_single(Command::simulate, merged);
}

int run(const ExperimentConfig& config, std::ostream& summary, std::ostream& diagnostics) {
    try {
        switch (config.command) {
            case Command::simulate: return run_simulate(config, summary, diagnostics);
            case Command::sweep: return run_sweep(config, summary, diagnostics);
            case Command::oracle_check: return run_oracle_check(config, summary, diagnostics);
            case Command::event: return run_event(config, summary, diagnostics);
            case Command::chain: return run_chain(config, summary, diagnostics);
        }
    } catch (const ConfigError& e) {
        diagnostics << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvariantViolation& e) {
        diagnostics << "invariant violation: " << e.what() << '\n';
        return exit_invariant;
    } catch (const MonteCarloAbort& e) {
        diagnostics << "aborted: " << e.what() << '\n';
        return exit_truncated;
    } catch (const std::filesystem::filesystem_error& e) {
        diagnostics << "config error: output.path: " << e.what() << '\n';
        return exit_config;
    }
    return exit_config;
}

}  // namespace smm
