#pragma once

// Replays an EventLog into infected-fraction values on a time grid. Works
// for both simulators since they share the log format; only Infection and
// Recovery events change the infected set.

#include <vector>

#include "genesis/simulate.hpp"

namespace testsupport {

inline std::vector<double> prevalence_from_log(const genesis::EventLog& log,
                                               int node_count,
                                               const std::vector<int>& initial,
                                               const std::vector<double>& grid) {
  std::vector<char> infected(static_cast<size_t>(node_count), 0);
  int count = 0;
  for (int i : initial) {
    if (!infected[static_cast<size_t>(i)]) ++count;
    infected[static_cast<size_t>(i)] = 1;
  }
  std::vector<double> out;
  out.reserve(grid.size());
  size_t gi = 0;
  const auto record_until = [&](double next) {
    while (gi < grid.size() && grid[gi] < next) {
      out.push_back(static_cast<double>(count) / node_count);
      ++gi;
    }
  };
  for (const genesis::Event& e : log.events) {
    record_until(e.time);
    if (e.kind == genesis::EventKind::Infection) {
      if (!infected[static_cast<size_t>(e.dst)]) ++count;
      infected[static_cast<size_t>(e.dst)] = 1;
    } else if (e.kind == genesis::EventKind::Recovery) {
      if (infected[static_cast<size_t>(e.src)]) --count;
      infected[static_cast<size_t>(e.src)] = 0;
    }
  }
  record_until(log.end_time + 1.0);
  while (out.size() < grid.size())
    out.push_back(static_cast<double>(count) / node_count);
  return out;
}

}  // namespace testsupport
