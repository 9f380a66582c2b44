#pragma once

#include <chrono>

#include "qkdnar/solvers.hpp"

namespace qkdnar::detail {

// Settles the slot, appends its realizations and summary to `result`, then
// advances the state.
void close_slot(const Scenario& scenario, NetworkState& state, const SlotPlan& plan,
                SolveResult& result);

// Computes the NAR report, per-slot metric columns and module averages once
// every slot has been closed.
void finalize(const Scenario& scenario, const NetworkState& state, const SolveOptions& opts,
              SolveResult& result);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace qkdnar::detail
