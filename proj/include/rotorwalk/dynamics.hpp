#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rotorwalk/lattice.hpp"
#include "rotorwalk/medium.hpp"

namespace rotorwalk {

/// Particle state. dir is the velocity immediately after the step at `time`.
struct SimState {
  SiteCoord site = kOrigin;
  Direction dir{0};
  std::int64_t time = 0;

  friend bool operator==(const SimState&, const SimState&) = default;
};

constexpr SimState initial_state() { return SimState{}; }

/// Moves to the neighbor along dir, turns by the scatterer found there
/// (orientation before the flip), then flips that scatterer.
SimState step(const SimState& state, Medium& medium);

/// Exact inverse of step().
SimState reverse_step(const SimState& state, Medium& medium);

inline std::int64_t displacement_sq(const SimState& state) { return squared_norm(state.site); }

enum class OutcomeKind { Periodic, StepCapReached, HaltedByCallback };

const char* to_string(OutcomeKind kind);

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::StepCapReached;
  /// Period for Periodic; steps taken otherwise.
  std::int64_t steps = 0;
  std::vector<std::int64_t> origin_returns;
  std::int64_t max_displacement_sq = 0;

  bool periodic() const { return kind == OutcomeKind::Periodic; }
};

/// Streaming consumer of a run. on_step sees every state from time 1 onward;
/// returning false halts the run.
class TrajectoryObserver {
 public:
  virtual ~TrajectoryObserver() = default;
  virtual void on_start(const SimState& /*initial*/) {}
  virtual bool on_step(const SimState& state) = 0;
  virtual void on_finish(const RunOutcome& /*outcome*/) {}
};

struct RunOptions {
  std::int64_t step_cap = 100'000'000;
  /// When false the run continues past a detected period until the cap;
  /// the outcome still reports the first period.
  bool stop_on_period = true;
};

/// Advances from the initial state until the full state (site, dir,
/// configuration) first recurs, or the step cap is reached.
RunOutcome run(Medium& medium, const RunOptions& options,
               std::span<TrajectoryObserver* const> observers = {});

inline RunOutcome run(Medium& medium, std::int64_t step_cap,
                      std::span<TrajectoryObserver* const> observers = {}) {
  return run(medium, RunOptions{step_cap, true}, observers);
}

/// Observer that stores every position, indexed by time (index 0 = origin).
class PositionRecorder : public TrajectoryObserver {
 public:
  void on_start(const SimState& initial) override;
  bool on_step(const SimState& state) override;

  const std::vector<SiteCoord>& positions() const { return positions_; }

 private:
  std::vector<SiteCoord> positions_;
};

}  // namespace rotorwalk
