#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "smm/errors.hpp"
#include "smm/experiment.hpp"

using namespace smm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("smm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string error_of(std::string_view text, Command command) {
    try {
        parse_config(text, command);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_quiet(const ExperimentConfig& c, std::string* summary = nullptr, std::string* diag = nullptr) {
    std::ostringstream s, d;
    const int code = run(c, s, d);
    if (summary) *summary = s.str();
    if (diag) *diag = d.str();
    return code;
}

const char* kSimulate =
    "# two-point law\n"
    "window.length = 2000\n"
    "distribution.kind = categorical\n"
    "distribution.degrees = 1, 2\n"
    "distribution.masses = 0.5, 0.5\n"
    "seeds = 3\n";

}  // namespace

TEST_CASE("parse_entries") {
    const auto e = parse_entries("a.b = 1  # trailing\n\n  # only a comment\nc=x y\n");
    REQUIRE(e.size() == 2);
    CHECK(e.at("a.b").value == "1");
    CHECK(e.at("a.b").line == 1);
    CHECK(e.at("c").value == "x y");
    CHECK(e.at("c").line == 4);
    CHECK_THROWS_WITH_AS(parse_entries("a = 1\nno equals sign\n"), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_entries("a = 1\na = 2\n"), doctest::Contains("duplicate key 'a'"), ConfigError);
    CHECK_THROWS_AS(parse_entries("Bad-Key = 1\n"), ConfigError);
}

TEST_CASE("minimal simulate config fills defaults") {
    const auto c = parse_config(std::string(kSimulate) + "output.path = x.csv\n", Command::simulate);
    REQUIRE(c.window.has_value());
    CHECK(c.window->length == 2000.0);
    CHECK(c.window->boundary == Boundary::open);
    CHECK(c.window->margin == doctest::Approx(100.0));
    CHECK(c.intensity == 1.0);
    CHECK(c.seed == 0);
    CHECK(c.seeds == 3);
    CHECK(c.distribution->pmf(2) == 0.5);
    CHECK(c.check_strong_pairs);

    const auto overridden =
        parse_config(std::string(kSimulate) + "output.path = x.csv\n", Command::simulate,
                     {{"seed", {"17", 0}}, {"output.path", {"y.csv", 0}}});
    CHECK(overridden.seed == 17);
    CHECK(overridden.output_path == "y.csv");
}

TEST_CASE("config diagnostics name the key and line") {
    const std::string sim = std::string(kSimulate) + "output.path = x.csv\n";
    CHECK(error_of(sim + "colour = red\n", Command::simulate).find("line 8: unknown key 'colour'") !=
          std::string::npos);
    CHECK(error_of("window.length = 10\noutput.path = x\n", Command::simulate).find("distribution.kind") !=
          std::string::npos);
    CHECK(error_of(sim + "trials = 5\n", Command::simulate).find("not used by command simulate") !=
          std::string::npos);
    CHECK(error_of("window.length = ten\ndistribution.kind = constant\ndistribution.degree = 2\noutput.path = x\n",
                   Command::simulate)
              .find("line 1: window.length: expected a real number") != std::string::npos);

    const auto masses = error_of(
        "window.length = 100\ndistribution.kind = categorical\ndistribution.degrees = 1, 2\n"
        "distribution.masses = 0.5, 0.4\noutput.path = x\n",
        Command::simulate);
    CHECK(masses.find("line 4: distribution.masses") != std::string::npos);

    CHECK(error_of("window.length = 100\ndistribution.kind = constant\ndistribution.degree = 2\n"
                   "distribution.i_max = 3\noutput.path = x\n",
                   Command::simulate)
              .find("distribution.i_max: not used by distribution.kind = constant") != std::string::npos);
    CHECK(error_of("window.length = 100\ndistribution.kind = dyadic\ndistribution.i_min = 2\n"
                   "distribution.i_max = 3\noutput.path = x\n",
                   Command::simulate)
              .find("distribution.i_min") != std::string::npos);
    CHECK(error_of(sim + "output.edges = e.csv\n", Command::simulate).find("seeds = 1") != std::string::npos);
    CHECK(error_of("event.names = A_fail, Q\nevent.i = 1\ntrials = 3\noutput.path = x\n", Command::event)
              .find("unknown event 'Q'") != std::string::npos);
    CHECK(error_of("event.names = A_fail\nevent.i = 1\nevent.c_offset = 0.25\ntrials = 3\noutput.path = x\n",
                   Command::event)
              .find("event.c_offset") != std::string::npos);
}

TEST_CASE("chain window diagnostic cites the minimum length") {
    const auto msg = error_of("chain.i0 = 2\nchain.i_max = 4\nchain.window_length = 1000\ntrials = 3\noutput.path = x\n",
                              Command::chain);
    CHECK(msg.find("line 3: chain.window_length") != std::string::npos);
    CHECK(msg.find("3392") != std::string::npos);
    CHECK(error_of("chain.window_length = 3392\ntrials = 3\noutput.path = x\n", Command::chain).empty());
    CHECK(error_of("chain.i0 = 3\nchain.i_max = 2\ntrials = 3\noutput.path = x\n", Command::chain)
              .find("chain.i_max") != std::string::npos);
}

TEST_CASE("sweep diagnostics") {
    const std::string base = "distribution.kind = constant\ndistribution.degree = 2\noutput.path = x\n";
    CHECK(error_of(base + "sweep.window.length = \n", Command::sweep).find("empty sweep list") != std::string::npos);
    CHECK(error_of(base + "sweep.window.length = 10;;20\n", Command::sweep).find("empty value") != std::string::npos);
    CHECK(error_of(base, Command::sweep).find("at least one") != std::string::npos);
    CHECK(error_of(base + "sweep.seed = 1; 2\n", Command::sweep).find("cannot be swept") != std::string::npos);
    CHECK(error_of(base + "window.length = 5\nsweep.window.length = 10; 20\n", Command::sweep)
              .find("also set directly") != std::string::npos);
    CHECK(error_of(base + "sweep.window.length = 100; -3\n", Command::sweep).find("window.length") !=
          std::string::npos);
    CHECK(error_of(base + "window.length = 100\nsweep.window.length = 100\n", Command::simulate)
              .find("only valid for the sweep command") != std::string::npos);

    const auto c = parse_config(base + "sweep.window.length = 100; 200\nsweep.intensity = 1; 2; 3\n", Command::sweep);
    CHECK(sweep_cell_count(c) == 6);
    const auto cell = sweep_cell(c, {1, 2});
    CHECK(cell.window->length == 200.0);
    CHECK(cell.intensity == 3.0);
}

TEST_CASE("simulate is byte-deterministic and checks invariants") {
    TempDir dir;
    const auto c = parse_config(std::string(kSimulate) + "output.path = " + dir.file("a.csv") + "\n", Command::simulate);
    std::string summary;
    CHECK(run_quiet(c) == exit_ok);
    const auto first = slurp(dir.file("a.csv"));
    CHECK(run_quiet(c, &summary) == exit_ok);
    CHECK(slurp(dir.file("a.csv")) == first);
    CHECK(summary.find("simulate: 3 replicas") != std::string::npos);
    CHECK(first.rfind("seed,n,n_edges,leftover_total,n_components,largest_size,largest_fraction,spans\n0,", 0) == 0);

    auto threaded = c;
    threaded.threads = 3;
    CHECK(run_quiet(threaded) == exit_ok);
    CHECK(slurp(dir.file("a.csv")) == first);

    auto other = c;
    other.seed = 1;
    CHECK(run_quiet(other) == exit_ok);
    CHECK(slurp(dir.file("a.csv")) != first);
}

TEST_CASE("simulate dumps and truncation") {
    TempDir dir;
    const std::string text = "window.length = 200\ndistribution.kind = constant\ndistribution.degree = 3\n"
                             "output.path = " + dir.file("r.csv") + "\noutput.edges = " + dir.file("e.csv") +
                             "\noutput.leftover = " + dir.file("l.csv") + "\noutput.points = " + dir.file("p.csv") + "\n";
    CHECK(run_quiet(parse_config(text, Command::simulate)) == exit_ok);
    CHECK(slurp(dir.file("e.csv")).rfind("id_a,id_b,round,distance\n", 0) == 0);
    CHECK(slurp(dir.file("l.csv")).rfind("id,leftover_stubs\n", 0) == 0);
    CHECK(slurp(dir.file("p.csv")).rfind("id,position,degree\n", 0) == 0);

    std::string diag;
    CHECK(run_quiet(parse_config(text + "max_rounds = 1\n", Command::simulate), nullptr, &diag) == exit_truncated);
    CHECK(diag.find("max_rounds") != std::string::npos);

    auto bad_path = parse_config(text, Command::simulate);
    bad_path.output_path = dir.file("missing/dir/r.csv");
    CHECK(run_quiet(bad_path) == exit_config);
}

TEST_CASE("sweep resumes to the same bytes") {
    TempDir dir;
    const std::string text = "distribution.kind = categorical\ndistribution.degrees = 1, 2\n"
                             "seeds = 3\nsweep.window.length = 300; 600\n"
                             "sweep.distribution.masses = 0.5, 0.5; 0.25, 0.75\n"
                             "output.path = " + dir.file("s.csv") + "\n";
    const auto c = parse_config(text, Command::sweep);
    CHECK(run_quiet(c) == exit_ok);
    const auto full = slurp(dir.file("s.csv"));
    CHECK(full.rfind("cell,window.length,distribution.masses,seed,", 0) == 0);
    CHECK(full.find("\n3,600,\"0.25, 0.75\",2,") != std::string::npos);
    CHECK(std::count(full.begin(), full.end(), '\n') == 1 + 4 * 3);

    for (std::size_t cut : {std::size_t{0}, std::size_t{10}, full.find('\n') + 1, full.size() / 2, full.size() - 3,
                            full.size()}) {
        {
            std::ofstream out(dir.file("s.csv"), std::ios::binary | std::ios::trunc);
            out << full.substr(0, cut);
        }
        std::string diag;
        CHECK(run_quiet(c, nullptr, &diag) == exit_ok);
        CHECK(slurp(dir.file("s.csv")) == full);
    }

    SUBCASE("a foreign file is refused") {
        {
            std::ofstream out(dir.file("s.csv"), std::ios::binary | std::ios::trunc);
            out << "something,else\n";
        }
        CHECK(run_quiet(c) == exit_config);
        CHECK(slurp(dir.file("s.csv")) == "something,else\n");
    }
    SUBCASE("a corrupted row is recomputed") {
        std::string broken = full;
        broken[full.find("\n1,") + 1] = '7';
        {
            std::ofstream out(dir.file("s.csv"), std::ios::binary | std::ios::trunc);
            out << broken;
        }
        CHECK(run_quiet(c) == exit_ok);
        CHECK(slurp(dir.file("s.csv")) == full);
    }
}

TEST_CASE("event, chain and oracle-check commands") {
    TempDir dir;
    const auto out = "output.path = " + dir.file("o.csv") + "\n";

    std::string summary;
    const auto ev = parse_config("event.names = A_fail, D\nevent.i = 1\ntrials = 300\nseed = 4\n" + out, Command::event);
    CHECK(run_quiet(ev, &summary) == exit_ok);
    const auto events = slurp(dir.file("o.csv"));
    CHECK(events.rfind("event,i,trials,successes,estimate,stderr,analytic,bound_kind\nA_fail,1,300,", 0) == 0);
    CHECK(events.find("0.135335283236613,exact\nD,1,300,") != std::string::npos);
    CHECK(run_quiet(ev) == exit_ok);
    CHECK(slurp(dir.file("o.csv")) == events);

    const auto abort = parse_config("event.names = A_fail\nevent.i = 1\nintensity = 5\nmc.min_acceptance = 1e-3\n"
                                    "trials = 3\n" + out, Command::event);
    CHECK(run_quiet(abort) == exit_truncated);

    const auto chain = parse_config("chain.i0 = 1\nchain.i_max = 2\ntrials = 30\n" + out, Command::chain);
    CHECK(run_quiet(chain, &summary) == exit_ok);
    CHECK(slurp(dir.file("o.csv")).find("\nchain,1,30,") != std::string::npos);
    CHECK(summary.find("depth counts") != std::string::npos);

    const auto oracle = parse_config("trials = 40\noracle.n_max = 60\n" + out, Command::oracle_check);
    CHECK(run_quiet(oracle, &summary) == exit_ok);
    const auto rows = slurp(dir.file("o.csv"));
    CHECK(rows.rfind("seed,n,n_edges,rounds,agree,stable\n", 0) == 0);
    std::size_t clean = 0;
    for (std::size_t pos = rows.find(",1,1\n"); pos != std::string::npos; pos = rows.find(",1,1\n", pos + 1)) ++clean;
    CHECK(clean == 40);
    CHECK(summary.find("disagreed on 0") != std::string::npos);
}

TEST_CASE("command names round trip") {
    for (Command c : {Command::simulate, Command::oracle_check, Command::event, Command::chain, Command::sweep})
        CHECK(parse_command(command_name(c)) == c);
    CHECK_FALSE(parse_command("simulation").has_value());
}
