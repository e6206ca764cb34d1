#include "ctxnet/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ctxnet/activity_library.hpp"
#include "ctxnet/bench.hpp"
#include "ctxnet/dsl.hpp"

namespace fs = std::filesystem;

namespace ctxnet::cli {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Validation failed; diagnostics are already printed.
struct Rejected {};

constexpr const char* kDefaultStart = "2018-11-20T08:00";

double parse_number(std::string_view text) {
    double v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw ConfigError("not a number: '" + std::string(text) + "'");
    return v;
}

std::size_t parse_count(std::string_view text) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end)
        throw ConfigError("not a model count: '" + std::string(text) + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError(path + ": read error");
    return buf.str();
}

std::ofstream open_out(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    return out;
}

std::string default_out_dir() {
    if (const char* env = std::getenv("CTXNET_OUT"); env && *env) return env;
    return "out";
}

Mode parse_mode(const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "cae") return Mode::CAE;
    if (t == "pae") return Mode::PAE;
    throw ConfigError("unknown mode '" + text + "', expected cae or pae");
}

double parse_scale(const std::string& text) {
    if (text == "inf" || text == "unpaced") return kUnpaced;
    return parse_number(text);
}

NetworkGraph load_network(const std::string& path, Mode mode, std::ostream& err) {
    if (path.empty()) return build_home_network(mode);
    const auto source = read_file(path);
    auto result = dsl::load(source, IntervalTable::standard(), mode);
    if (!result.ok()) {
        for (const auto& d : result.diagnostics) err << d.format(path) << '\n';
        throw Rejected{};
    }
    return std::move(*result.graph);
}

struct ScenarioOptions {
    std::string scenario = "fig4";
    std::string start;
    double duration_s = 0;
    long long jitter_ms = 0;
    std::uint64_t seed = 1;
};

Scenario load_scenario(const ScenarioOptions& o) {
    const auto [date, start] = parse_datetime(o.start.empty() ? kDefaultStart : o.start);
    Scenario sc;
    if (o.scenario == "fig4") {
        sc = fig4_scenario(date, start);
    } else if (o.scenario == "empty") {
        sc = empty_scenario(date, start, std::chrono::minutes(8));
    } else {
        const std::string text = read_file(o.scenario);
        try {
            // Without an explicit start a recorded scenario begins at its
            // first reading.
            Instant begin = start;
            if (o.start.empty()) {
                std::istringstream peek(text);
                std::string line;
                while (std::getline(peek, line))
                    if (line.find_first_not_of(" \t\r") != std::string::npos) {
                        begin = instant_ms(nlohmann::json::parse(line).at("t_ms").get<std::int64_t>());
                        break;
                    }
            }
            std::istringstream is(text);
            sc = read_scenario(is, date, begin, std::nullopt);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(o.scenario + ": malformed scenario line: " + e.what());
        } catch (const ModelError& e) {
            throw ConfigError(o.scenario + ": " + e.what());
        }
        // Leave room for dwell-based rules after the final reading.
        sc.duration = std::chrono::minutes(8);
        if (!sc.steps.empty()) sc.duration = sc.steps.back().offset + kDefaultDwell;
    }
    if (o.duration_s > 0) {
        sc.duration = Duration(std::llround(o.duration_s * 1000.0));
        sc.validate();
    }
    if (o.jitter_ms > 0) sc = jittered(sc, Duration(o.jitter_ms), o.seed);
    return sc;
}

void add_scenario_flags(CLI::App* cmd, ScenarioOptions& o) {
    cmd->add_option("--scenario", o.scenario, "built-in scenario (fig4, empty) or a JSONL path")
        ->capture_default_str();
    cmd->add_option("--start", o.start, "scenario start, YYYY-MM-DDTHH:MM[:SS] (default 2018-11-20T08:00)");
    cmd->add_option("--duration", o.duration_s, "scenario length in seconds (default: built-in length)");
    cmd->add_option("--jitter-ms", o.jitter_ms, "uniform sensor timestamp jitter bound")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", o.seed, "jitter seed")->capture_default_str();
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
    int status = kOk;
    for (const auto& path : paths) {
        std::string source;
        try {
            source = read_file(path);
        } catch (const IoError& e) {
            err << e.what() << '\n';
            status = kIo;
            continue;
        }
        const auto result = dsl::load(source);
        if (result.ok()) {
            out << path << ": ok\n";
            continue;
        }
        for (const auto& d : result.diagnostics) err << d.format(path) << '\n';
        if (status == kOk) status = kUsage;
    }
    return status;
}

struct RunOptions {
    std::string network;
    ScenarioOptions scenario;
    std::string mode = "cae";
    std::string fo = "2";
    std::string fs = "2";
    std::string out_dir;
    bool trace = false;
    std::string clock_scale = "inf";
};

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
    SchedulerConfig cfg;
    cfg.reasoning_hz = parse_frequency(o.fo);
    cfg.ingestion_hz = parse_frequency(o.fs);
    cfg.clock_scale = parse_scale(o.clock_scale);
    cfg.validate();
    NetworkGraph graph = load_network(o.network, parse_mode(o.mode), err);
    const Scenario sc = load_scenario(o.scenario);

    const fs::path dir = o.out_dir.empty() ? default_out_dir() : o.out_dir;
    auto asds = open_out(dir / "asds.jsonl");
    auto ias = open_out(dir / "ias.jsonl");
    std::ofstream ticks;
    if (o.trace) ticks = open_out(dir / "ticks.jsonl");

    StatementStore store;
    store.set_retain_asds(false);
    store.attach_sinks(&asds, &ias);
    std::function<void(const TickReport&)> on_tick;
    if (o.trace) on_tick = [&](const TickReport& r) { ticks << to_json_line(r) << '\n'; };

    const auto wall_start = std::chrono::steady_clock::now();
    const auto result = simulate(graph, sc, cfg, &store, on_tick);
    const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    store.attach_sinks(nullptr, nullptr);
    asds.flush();
    ias.flush();
    if (o.trace) ticks.flush();
    if (!asds || !ias || (o.trace && !ticks)) throw IoError(dir.string() + ": write error");

    std::size_t overruns = 0;
    for (const auto& r : result.reports) overruns += r.overrun ? 1 : 0;
    const VirtualClock clock(sc.date);

    out << "network " << graph.name() << ", mode " << to_string(graph.mode()) << ", f_o " << format_hz(cfg.reasoning_hz)
        << " Hz, f_s " << format_hz(cfg.ingestion_hz) << " Hz, start " << clock.iso(sc.start) << "\n\n";
    out << std::left << std::setw(24) << "activity" << std::setw(8) << "node" << std::setw(7) << "count"
        << "first" << '\n';
    std::map<std::string, std::pair<std::string, std::vector<Instant>>> by_name;
    std::vector<std::string> order;
    for (const auto& s : result.activities) {
        auto& slot = by_name[s.name];
        if (slot.second.empty()) order.push_back(s.name);
        slot.first = s.source.value_or("");
        slot.second.push_back(s.timestamp);
    }
    for (const auto& name : order) {
        const auto& [node, times] = by_name[name];
        out << std::left << std::setw(24) << name << std::setw(8) << node << std::setw(7) << times.size()
            << format_instant(times.front()) << '\n';
    }
    if (order.empty()) out << "(no activities)\n";
    out << '\n'
        << result.activities.size() << " activities, " << result.reports.size() << " ticks, " << overruns
        << " overruns, " << result.ingested << " statements ingested, " << std::fixed << std::setprecision(3) << wall
        << " s wall\n";
    out.unsetf(std::ios::fixed);
    out << "wrote " << (dir / "asds.jsonl").string() << ", " << (dir / "ias.jsonl").string();
    if (o.trace) out << ", " << (dir / "ticks.jsonl").string();
    out << '\n';
    return kOk;
}

struct BenchOptions {
    std::string network;
    ScenarioOptions scenario;
    std::string modes = "cae,pae";
    std::string fo = "2,1/3";
    std::string fs = "2";
    std::string models = "1..5";
    int reps = 10;
    std::string out;
    bool no_realtime = false;
};

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
    std::vector<Mode> modes;
    for (const auto& m : split(o.modes, ',')) modes.push_back(parse_mode(m));
    if (modes.empty()) throw ConfigError("no mode given");
    std::vector<double> fos;
    for (const auto& f : split(o.fo, ',')) fos.push_back(parse_frequency(f));
    if (fos.empty()) throw ConfigError("no reasoning frequency given");
    const auto counts = parse_model_range(o.models);
    if (o.reps < 1) throw ConfigError("at least one repetition required");
    const double fs_hz = parse_frequency(o.fs);

    const NetworkGraph network = load_network(o.network, Mode::CAE, err);
    const Scenario sc = load_scenario(o.scenario);

    const fs::path csv_path = o.out.empty() ? fs::path(default_out_dir()) / "bench.csv" : fs::path(o.out);
    fs::path svg_path = csv_path;
    svg_path.replace_extension(".svg");
    auto csv = open_out(csv_path);
    write_csv_header(csv);

    std::vector<BenchResult> all;
    for (const Mode mode : modes) {
        for (const double fo : fos) {
            ExperimentSpec spec;
            spec.mode = mode;
            spec.fo_hz = fo;
            spec.fs_hz = fs_hz;
            spec.model_counts = counts;
            spec.reps = o.reps;
            spec.realtime_priority = !o.no_realtime;
            const auto rows = run_experiment(network, sc, spec);
            write_csv_rows(csv, rows);
            all.insert(all.end(), rows.begin(), rows.end());
        }
    }
    csv.flush();
    if (!csv) throw IoError(csv_path.string() + ": write error");
    const auto cells = summarize(all);
    auto svg = open_out(svg_path);
    svg << render_svg(cells);
    if (!svg.flush()) throw IoError(svg_path.string() + ": write error");

    write_summary(out, cells);
    out << "\n" << all.size() << " rows written to " << csv_path.string() << ", chart " << svg_path.string() << '\n';
    return kOk;
}

struct ScenarioCmdOptions {
    ScenarioOptions scenario;
    int loops = 1;
    std::string out = "-";
};

int cmd_scenario(const ScenarioCmdOptions& o, std::ostream& out) {
    Scenario sc = load_scenario(o.scenario);
    if (o.loops < 1) throw ConfigError("loops must be at least 1");
    if (o.loops > 1) sc = looped(sc, o.loops);
    if (o.out == "-") {
        write_scenario(out, sc);
        return kOk;
    }
    auto file = open_out(o.out);
    write_scenario(file, sc);
    if (!file.flush()) throw IoError(o.out + ": write error");
    return kOk;
}

}  // namespace

double parse_frequency(const std::string& text) {
    double hz = 0;
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const double num = parse_number(std::string_view(text).substr(0, slash));
        const double den = parse_number(std::string_view(text).substr(slash + 1));
        if (den == 0) throw ConfigError("frequency must be positive");
        hz = num / den;
    } else {
        hz = parse_number(text);
    }
    if (!(hz > 0) || !std::isfinite(hz)) throw ConfigError("frequency must be positive");
    return hz;
}

std::vector<std::size_t> parse_model_range(const std::string& text) {
    std::vector<std::size_t> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const auto lo = parse_count(std::string_view(text).substr(0, dots));
        const auto hi = parse_count(std::string_view(text).substr(dots + 2));
        if (hi < lo) throw ConfigError("empty model range '" + text + "'");
        for (auto k = lo; k <= hi; ++k) out.push_back(k);
    } else {
        for (const auto& part : split(text, ',')) out.push_back(parse_count(part));
    }
    if (out.empty() || std::find(out.begin(), out.end(), 0u) != out.end())
        throw ConfigError("at least one activity model required");
    return out;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Contextualized activity recognition over a network of knowledge nodes", "ctxnet"};
    app.require_subcommand(1);

    std::vector<std::string> validate_paths;
    auto* validate = app.add_subcommand("validate", "check .ctxnet network files");
    validate->add_option("paths", validate_paths, "files to check")->required();

    RunOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "run a network over a scenario");
    run_cmd->add_option("--network", run_opts.network, ".ctxnet file (default: the built-in home network)");
    add_scenario_flags(run_cmd, run_opts.scenario);
    run_cmd->add_option("--mode", run_opts.mode, "cae or pae")->capture_default_str();
    run_cmd->add_option("--fo", run_opts.fo, "reasoning frequency in Hz (a/b allowed)")->capture_default_str();
    run_cmd->add_option("--fs", run_opts.fs, "ingestion frequency in Hz (a/b allowed)")->capture_default_str();
    run_cmd->add_option("--out-dir", run_opts.out_dir, "output directory (default $CTXNET_OUT or ./out)");
    run_cmd->add_flag("--trace", run_opts.trace, "also write ticks.jsonl");
    run_cmd->add_option("--clock-scale", run_opts.clock_scale, "virtual seconds per wall second, or inf")
        ->capture_default_str();

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "run the CAE/PAE reasoning-time experiments");
    bench->add_option("--network", bench_opts.network, ".ctxnet file (default: the built-in home network)");
    add_scenario_flags(bench, bench_opts.scenario);
    bench->add_option("--modes", bench_opts.modes, "comma-separated modes")->capture_default_str();
    bench->add_option("--fo", bench_opts.fo, "comma-separated reasoning frequencies")->capture_default_str();
    bench->add_option("--fs", bench_opts.fs, "ingestion frequency")->capture_default_str();
    bench->add_option("--models", bench_opts.models, "activity model counts, e.g. 1..5")->capture_default_str();
    bench->add_option("--reps", bench_opts.reps, "repetitions per cell")->capture_default_str();
    bench->add_option("--out", bench_opts.out, "CSV path; the SVG chart is written beside it");
    bench->add_flag("--no-realtime", bench_opts.no_realtime, "do not try real-time scheduling while measuring");

    ScenarioCmdOptions scen_opts;
    auto* scen = app.add_subcommand("scenario", "emit a scenario dataset as JSON lines");
    add_scenario_flags(scen, scen_opts.scenario);
    scen->add_option("--loops", scen_opts.loops, "back-to-back repetitions")->capture_default_str();
    scen->add_option("--out", scen_opts.out, "output path, - for stdout")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_paths, out, err);
        if (run_cmd->parsed()) return cmd_run(run_opts, out, err);
        if (bench->parsed()) return cmd_bench(bench_opts, out, err);
        if (scen->parsed()) return cmd_scenario(scen_opts, out);
    } catch (const Rejected&) {
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const CorrectnessFailure& e) {
        err << "correctness failure: " << e.what() << '\n';
        return kCorrectness;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const TickError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace ctxnet::cli
