#include "rotorwalk/dynamics.hpp"

#include <algorithm>

namespace rotorwalk {

SimState step(const SimState& state, Medium& medium) {
  const SiteCoord next = neighbor(state.site, state.dir);
  const Orientation before = medium.record_visit(next);
  return SimState{next, rotate(state.dir, before), state.time + 1};
}

SimState reverse_step(const SimState& state, Medium& medium) {
  // The scatterer at the current site already holds the flipped orientation,
  // and R[-z] = R[z]^-1, so turning by it recovers the incoming velocity.
  const Direction prev_dir = rotate(state.dir, medium.current_orientation(state.site));
  const SiteCoord prev = neighbor(state.site, prev_dir.opposite());
  medium.retract_visit(state.site);
  return SimState{prev, prev_dir, state.time - 1};
}

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Periodic: return "periodic";
    case OutcomeKind::StepCapReached: return "cap-reached";
    case OutcomeKind::HaltedByCallback: return "halted";
  }
  return "unknown";
}

RunOutcome run(Medium& medium, const RunOptions& options,
               std::span<TrajectoryObserver* const> observers) {
  RunOutcome outcome;
  SimState state = initial_state();
  for (auto* obs : observers) obs->on_start(state);

  bool found_period = false;
  bool halted = false;
  while (state.time < options.step_cap) {
    const SiteCoord next = neighbor_unchecked(state.site, state.dir);
    const Orientation before = medium.record_visit(next);
    state = SimState{next, rotate(state.dir, before), state.time + 1};

    outcome.max_displacement_sq = std::max(outcome.max_displacement_sq, squared_norm(next));
    for (auto* obs : observers) {
      if (!obs->on_step(state)) halted = true;
    }
    if (next == kOrigin) {
      if (!found_period) outcome.origin_returns.push_back(state.time);
      if (!found_period && state.dir.k == 0 && medium.dirty_count() == 0) {
        found_period = true;
        outcome.kind = OutcomeKind::Periodic;
        outcome.steps = state.time;
        if (options.stop_on_period) break;
      }
    }
    if (halted) break;
  }
  if (!found_period) {
    outcome.kind = halted ? OutcomeKind::HaltedByCallback : OutcomeKind::StepCapReached;
    outcome.steps = state.time;
  }
  for (auto* obs : observers) obs->on_finish(outcome);
  return outcome;
}

void PositionRecorder::on_start(const SimState& initial) {
  positions_.clear();
  positions_.push_back(initial.site);
}

bool PositionRecorder::on_step(const SimState& state) {
  positions_.push_back(state.site);
  return true;
}

}  // namespace rotorwalk
