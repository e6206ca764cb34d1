#pragma once

#include <cmath>
#include <limits>

#include "ctxnet/time.hpp"

namespace ctxnet {

inline constexpr double kUnpaced = std::numeric_limits<double>::infinity();

// Reasoning (f_o) and ingestion (f_s) frequencies are independent knobs.
// clock_scale is virtual seconds per wall second; kUnpaced runs ticks
// back-to-back without sleeping.
struct SchedulerConfig {
    double reasoning_hz = 2.0;
    double ingestion_hz = 2.0;
    double clock_scale = kUnpaced;

    // Throws ConfigError unless both frequencies are positive and the scale
    // is at least 1.
    void validate() const;
};

// Rounds 1000 / hz to whole milliseconds; 1/3 Hz gives exactly 3000 ms.
Duration period_of(double hz);

}  // namespace ctxnet
