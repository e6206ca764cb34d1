#include "ctxnet/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <tuple>

#include <pthread.h>
#include <sched.h>

namespace ctxnet {

std::string format_hz(double hz) {
    char buf[32];
    // Four significant digits: 1/3 Hz prints as 0.3333.
    const auto res = std::to_chars(buf, buf + sizeof buf, hz, std::chars_format::general, 4);
    return std::string(buf, res.ptr);
}

ScopedRealtimePriority::ScopedRealtimePriority() {
    sched_param old{};
    if (pthread_getschedparam(pthread_self(), &old_policy_, &old) != 0) return;
    old_priority_ = old.sched_priority;
    // Low real-time priority; the kernel's RT throttling still leaves other
    // tasks a share of the CPU.
    sched_param p{};
    p.sched_priority = sched_get_priority_min(SCHED_FIFO) + 9;
    active_ = pthread_setschedparam(pthread_self(), SCHED_FIFO, &p) == 0;
}

ScopedRealtimePriority::~ScopedRealtimePriority() {
    if (!active_) return;
    sched_param old{};
    old.sched_priority = old_priority_;
    pthread_setschedparam(pthread_self(), old_policy_, &old);
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

BenchResult summarize_run(Mode mode, double fo_hz, std::size_t model_count, int rep,
                          const std::vector<TickReport>& reports) {
    BenchResult r;
    r.mode = mode;
    r.fo_hz = fo_hz;
    r.model_count = model_count;
    r.rep = rep;
    r.ticks = reports.size();
    if (reports.empty()) return r;
    std::chrono::nanoseconds total{0};
    auto lo = std::chrono::nanoseconds::max();
    auto hi = std::chrono::nanoseconds::min();
    for (const auto& t : reports) {
        const auto rt = t.reasoning_time();
        total += rt;
        lo = std::min(lo, rt);
        hi = std::max(hi, rt);
        if (t.overrun) ++r.overruns;
    }
    r.total_reason_ms = std::chrono::duration<double, std::milli>(total).count();
    r.avg_tick_us = std::chrono::duration<double, std::micro>(total).count() / static_cast<double>(reports.size());
    r.min_tick_us = std::chrono::duration<double, std::micro>(lo).count();
    r.max_tick_us = std::chrono::duration<double, std::micro>(hi).count();
    return r;
}

std::vector<BenchResult> run_experiment(const NetworkGraph& network, const Scenario& scenario,
                                        const ExperimentSpec& spec) {
    if (spec.reps < 1) throw ConfigError("at least one repetition required");
    if (spec.model_counts.empty()) throw ConfigError("at least one activity model required");
    const std::size_t available = network.nodes().empty() ? 0 : network.nodes().size() - 1;
    for (auto k : spec.model_counts) {
        if (k < 1) throw ConfigError("at least one activity model required");
        if (k > available)
            throw ConfigError("network has only " + std::to_string(available) + " activity models");
    }
    SchedulerConfig cfg;
    cfg.reasoning_hz = spec.fo_hz;
    cfg.ingestion_hz = spec.fs_hz;
    cfg.validate();
    const Duration tolerance = period_of(spec.fo_hz);

    struct Cell {
        std::size_t k;
        NetworkGraph graph;
        std::vector<ExpectedActivity> expected;
        std::string label;
        std::vector<Statement> first;
        std::vector<BenchResult> rows;
    };
    std::vector<Cell> cells;
    for (auto k : spec.model_counts) {
        NetworkGraph graph = network.restricted(k);
        graph.set_mode(spec.mode);
        if (const auto issues = graph.validate(); !issues.empty())
            throw ConfigError(issues.front().item + ": " + issues.front().message);
        auto expected = replay_oracle(scenario, graph);
        std::string label = std::string(to_string(spec.mode)) + " f_o=" + format_hz(spec.fo_hz) +
                            " k=" + std::to_string(k);
        cells.push_back({k, std::move(graph), std::move(expected), std::move(label), {}, {}});
    }
    std::optional<ScopedRealtimePriority> priority;
    if (spec.realtime_priority) priority.emplace();
    if (spec.warmup)
        for (auto& c : cells) simulate(c.graph, scenario, cfg);

    // Reps run round-robin over the cells so slow phases of the machine hit
    // every k alike instead of biasing whichever cell was running.
    for (int rep = 1; rep <= spec.reps; ++rep) {
        for (auto& c : cells) {
            StatementStore store;
            store.set_retain_asds(false);
            auto result = simulate(c.graph, scenario, cfg, &store);
            if (auto diff = compare_with_oracle(result.activities, c.expected, tolerance))
                throw CorrectnessFailure(c.label + " rep " + std::to_string(rep) + ": " + *diff);
            if (rep == 1)
                c.first = result.activities;
            else if (result.activities != c.first)
                throw CorrectnessFailure(c.label + " rep " + std::to_string(rep) +
                                         ": emission log differs from rep 1");
            auto row = summarize_run(spec.mode, spec.fo_hz, c.k, rep, result.reports);
            row.emissions = result.activities.size();
            c.rows.push_back(row);
        }
    }
    std::vector<BenchResult> rows;
    for (const auto& c : cells) rows.insert(rows.end(), c.rows.begin(), c.rows.end());
    return rows;
}

std::vector<CellSummary> summarize(const std::vector<BenchResult>& rows) {
    using Key = std::tuple<int, double, std::size_t>;
    std::map<Key, std::vector<const BenchResult*>> cells;
    std::vector<Key> order;
    for (const auto& r : rows) {
        Key key{static_cast<int>(r.mode), r.fo_hz, r.model_count};
        auto [it, inserted] = cells.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }
    std::vector<CellSummary> out;
    for (const auto& key : order) {
        const auto& group = cells[key];
        CellSummary s;
        s.mode = static_cast<Mode>(std::get<0>(key));
        s.fo_hz = std::get<1>(key);
        s.model_count = std::get<2>(key);
        s.reps = group.size();
        std::vector<double> totals;
        double ticks = 0;
        for (const auto* r : group) {
            totals.push_back(r->total_reason_ms);
            ticks += static_cast<double>(r->ticks);
            s.overruns += r->overruns;
        }
        s.mean_total_ms = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(totals.size());
        s.median_total_ms = median(totals);
        s.max_dev_ms = *std::max_element(totals.begin(), totals.end()) - s.mean_total_ms;
        s.min_dev_ms = s.mean_total_ms - *std::min_element(totals.begin(), totals.end());
        s.mean_ticks = ticks / static_cast<double>(group.size());
        out.push_back(s);
    }
    return out;
}

void write_csv_header(std::ostream& os) {
    os << "mode,models,rep,total_reason_ms,avg_tick_us,max_tick_us,min_tick_us,overruns,fo_hz\n";
}

void write_csv_rows(std::ostream& os, const std::vector<BenchResult>& rows) {
    std::ostringstream line;
    line << std::fixed;
    for (const auto& r : rows) {
        line.str("");
        line << lower(to_string(r.mode)) << ',' << r.model_count << ',' << r.rep << ',' << std::setprecision(3)
             << r.total_reason_ms << ',' << r.avg_tick_us << ',' << r.max_tick_us << ',' << r.min_tick_us << ','
             << r.overruns << ',' << format_hz(r.fo_hz) << '\n';
        os << line.str();
    }
}

void write_summary(std::ostream& os, const std::vector<CellSummary>& cells) {
    os << "mode  f_o(Hz)  models  reps  mean_total_ms  +max_dev_ms  -min_dev_ms  ticks  overruns\n";
    std::ostringstream line;
    line << std::fixed << std::setprecision(3);
    for (const auto& c : cells) {
        line.str("");
        line << std::left << std::setw(6) << lower(to_string(c.mode)) << std::setw(9) << format_hz(c.fo_hz)
             << std::setw(8) << c.model_count << std::setw(6) << c.reps << std::right << std::setw(13)
             << c.mean_total_ms << std::setw(13) << c.max_dev_ms << std::setw(13) << c.min_dev_ms
             << std::setw(7) << static_cast<long long>(std::llround(c.mean_ticks)) << std::setw(10)
             << c.overruns << '\n';
        os << line.str();
    }
}

std::string render_svg(const std::vector<CellSummary>& cells) {
    constexpr double W = 640, H = 400, L = 70, R = 170, T = 30, B = 50;
    std::map<std::string, std::vector<const CellSummary*>> series;
    std::vector<std::string> names;
    std::size_t kmax = 1;
    double ymax = 0;
    for (const auto& c : cells) {
        const std::string name = lower(to_string(c.mode)) + " @ " + format_hz(c.fo_hz) + " Hz";
        if (!series.count(name)) names.push_back(name);
        series[name].push_back(&c);
        kmax = std::max(kmax, c.model_count);
        ymax = std::max(ymax, c.mean_total_ms + c.max_dev_ms);
    }
    if (ymax <= 0) ymax = 1;
    ymax *= 1.1;
    const auto x = [&](double k) { return L + (W - L - R) * (kmax == 1 ? 0.5 : (k - 1) / double(kmax - 1)); };
    const auto y = [&](double v) { return H - B - (H - T - B) * v / ymax; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream s;
    s << std::fixed << std::setprecision(1);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (std::size_t k = 1; k <= kmax; ++k)
        s << "<text x=\"" << x(double(k)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << k
          << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = ymax * i / 4;
        s << "<text x=\"" << L - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
    }
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">activity models</text>\n";
    s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
      << ")\" text-anchor=\"middle\">mean total reasoning time (ms)</text>\n";

    for (std::size_t i = 0; i < names.size(); ++i) {
        const char* color = colors[i % 6];
        const auto& pts = series[names[i]];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto* c : pts) s << x(double(c->model_count)) << ',' << y(c->mean_total_ms) << ' ';
        s << "\"/>\n";
        for (const auto* c : pts) {
            const double px = x(double(c->model_count));
            s << "<line x1=\"" << px << "\" y1=\"" << y(c->mean_total_ms + c->max_dev_ms) << "\" x2=\"" << px
              << "\" y2=\"" << y(c->mean_total_ms - c->min_dev_ms) << "\" stroke=\"" << color << "\"/>\n";
            s << "<circle cx=\"" << px << "\" cy=\"" << y(c->mean_total_ms) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
        }
        const double ly = T + 10 + 20 * double(i);
        s << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\">" << names[i] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace ctxnet
