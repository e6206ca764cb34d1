#pragma once

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxnet/simulator.hpp"

namespace ctxnet {

struct BenchResult {
    Mode mode = Mode::CAE;
    double fo_hz = 2.0;
    std::size_t model_count = 0;
    int rep = 1;
    // Sum over ticks of per-node evaluate time.
    double total_reason_ms = 0.0;
    double avg_tick_us = 0.0;
    double max_tick_us = 0.0;
    double min_tick_us = 0.0;
    std::size_t overruns = 0;
    std::size_t ticks = 0;
    std::size_t emissions = 0;  // activity statements, set by run_experiment
};

struct ExperimentSpec {
    Mode mode = Mode::CAE;
    double fo_hz = 2.0;
    double fs_hz = 2.0;
    std::vector<std::size_t> model_counts{1, 2, 3, 4, 5};
    int reps = 10;
    // One unrecorded run per cell before the measured reps, so the first rep
    // does not pay for cold caches and allocator growth.
    bool warmup = true;
    // Measure under real-time scheduling when the process may, so other
    // processes on the machine cannot preempt a timed evaluation.
    bool realtime_priority = true;
};

// Best effort: switches the calling thread to SCHED_FIFO for its lifetime
// and restores the previous policy afterwards. Does nothing without the
// privilege.
class ScopedRealtimePriority {
public:
    ScopedRealtimePriority();
    ~ScopedRealtimePriority();
    ScopedRealtimePriority(const ScopedRealtimePriority&) = delete;
    ScopedRealtimePriority& operator=(const ScopedRealtimePriority&) = delete;

    bool active() const { return active_; }

private:
    bool active_ = false;
    int old_policy_ = 0;
    int old_priority_ = 0;
};

// Engine output disagreed with the replay oracle (or with an earlier rep).
class CorrectnessFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// For each k, runs the scenario through the contextualizer plus the first k
// activity nodes of `network`, resetting all state between reps. Throws
// ConfigError for an unusable spec and CorrectnessFailure on a mismatch.
std::vector<BenchResult> run_experiment(const NetworkGraph& network, const Scenario& scenario,
                                        const ExperimentSpec& spec);

BenchResult summarize_run(Mode mode, double fo_hz, std::size_t model_count, int rep,
                          const std::vector<TickReport>& reports);

// Per (mode, f_o, k) cell.
struct CellSummary {
    Mode mode = Mode::CAE;
    double fo_hz = 0.0;
    std::size_t model_count = 0;
    std::size_t reps = 0;
    double mean_total_ms = 0.0;
    double median_total_ms = 0.0;
    // Max and min deviation from the mean, both non-negative.
    double max_dev_ms = 0.0;
    double min_dev_ms = 0.0;
    double mean_ticks = 0.0;
    std::size_t overruns = 0;
};

std::vector<CellSummary> summarize(const std::vector<BenchResult>& rows);

void write_csv_header(std::ostream& os);
void write_csv_rows(std::ostream& os, const std::vector<BenchResult>& rows);
void write_summary(std::ostream& os, const std::vector<CellSummary>& cells);
// Models on x, mean total reasoning time on y, one series per (mode, f_o).
std::string render_svg(const std::vector<CellSummary>& cells);

std::string format_hz(double hz);

}  // namespace ctxnet
