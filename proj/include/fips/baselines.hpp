#pragma once

#include "fips/scheduler.hpp"

namespace fips {

// Non-robust baselines: STI-shaped schedules where every wireless budget is
// the degenerate interval [s, s], and no policing at runtime.
ScheduleResult schedule_scalar(const NetworkGraph& g, const std::vector<Stream>& streams, ScalarMode mode);

// Dispatches fips/sti to schedule() and med/max to schedule_scalar().
ScheduleResult schedule_any(const NetworkGraph& g, const std::vector<Stream>& streams, Mode mode);

}  // namespace fips
