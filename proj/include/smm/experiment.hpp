#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smm/degree_model.hpp"
#include "smm/event_estimator.hpp"
#include "smm/point_process.hpp"
#include "smm/random.hpp"

namespace smm {

enum class Command { simulate, oracle_check, event, chain, sweep };

std::string_view command_name(Command command);
std::optional<Command> parse_command(std::string_view name);

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_invariant = 2, exit_truncated = 3 };

/// One `key = value` line. line == 0 marks a command-line override.
struct RawEntry {
    std::string value;
    int line = 0;
};
using RawConfig = std::map<std::string, RawEntry>;

struct SweepAxis {
    std::string key;  // the swept key, without the `sweep.` prefix
    std::vector<std::string> values;
    int line = 0;
};

struct ExperimentConfig {
    Command command = Command::simulate;
    std::optional<Window> window;
    double intensity = 1.0;
    std::optional<DegreeDistribution> distribution;
    Seed seed = 0;
    std::size_t seeds = 1;   // replicas; replica r uses seed + r
    std::size_t trials = 0;  // event / chain trials, oracle-check instances
    std::optional<std::size_t> max_rounds;
    bool check_strong_pairs = true;
    unsigned threads = 0;

    std::vector<EventKind> events;
    int stage = 1;
    int parity_shift = 0;
    double c_offset = 0.15;
    McOptions mc;

    ChainSpec chain;
    std::size_t oracle_n_max = 200;

    std::string output_path;
    std::string edges_path;
    std::string leftover_path;
    std::string points_path;

    std::vector<SweepAxis> sweep;  // in declaration order; the last axis varies fastest
    RawConfig raw;                 // validated entries, kept so sweep cells can be rebuilt
};

/// Line-level parse: comments, `key = value`, duplicate keys. Keys are not
/// checked here. Throws ConfigError naming the line.
RawConfig parse_entries(std::string_view text);

/// Fully validated config. `overrides` replace file entries (for --seed and
/// --out). Throws ConfigError naming the offending key and line.
ExperimentConfig parse_config(std::string_view text, Command command, const RawConfig& overrides = {});
ExperimentConfig build_config(Command command, const RawConfig& entries);

/// Config of one sweep cell: the base entries with one value per axis.
ExperimentConfig sweep_cell(const ExperimentConfig& base, const std::vector<std::size_t>& value_index);
std::size_t sweep_cell_count(const ExperimentConfig& config);

/// Dispatches the command, writes CSV to output_path and a one-paragraph
/// summary to `summary`. Diagnostics go to `diagnostics`. Never throws for
/// config, invariant, or abort failures; they map to the exit code.
int run(const ExperimentConfig& config, std::ostream& summary, std::ostream& diagnostics);

}  // namespace smm
