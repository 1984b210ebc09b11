#pragma once

// Online trajectory analysis: reflecting and semi-reflecting structures,
// their transforms and annihilations.
//
// A structure T[t1,t2] is built from three consecutive visits t1 < t* < t2 of
// one base site such that each of the loops T[t1,t*] and T[t*,t2] passes
// r(t1+1) and r(t2-1) exactly once. It is reflecting when none of its sites
// was visited during [1, t1-1], and semi-reflecting otherwise, with tau the
// latest such earlier visit. The launch position r(0) is not counted as an
// earlier visit when t1 >= 2: the origin's scatterer is never consulted on the
// way back. Candidates whose entry site r(t1-1) lies inside the structure are
// discarded.
//
// Detection is retrospective: a structure encountered at t1 is confirmed at t2.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "rotorwalk/dynamics.hpp"
#include "rotorwalk/lattice.hpp"

namespace rotorwalk {

/// Dense position log indexed by time.
class TrajectoryLog {
 public:
  TrajectoryLog() = default;
  explicit TrajectoryLog(std::span<const SiteCoord> positions);

  void push_back(SiteCoord s) { keys_.push_back(pack(s)); }
  SiteCoord at(std::int64_t t) const { return unpack(keys_[static_cast<std::size_t>(t)]); }
  std::uint64_t key_at(std::int64_t t) const { return keys_[static_cast<std::size_t>(t)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(keys_.size()); }
  void reserve(std::size_t n) { keys_.reserve(n); }

 private:
  std::vector<std::uint64_t> keys_;
};

enum class StructureKind { Reflecting, SemiReflecting };

enum class ReflectorStatus { Active, Transformed, Annihilated, RetiredByPeriodicity };

const char* to_string(ReflectorStatus status);

struct ReflectorRecord {
  std::size_t id = 0;
  SiteCoord base;
  std::int64_t t1 = 0;
  std::int64_t t_star = 0;
  std::int64_t t2 = 0;
  StructureKind kind = StructureKind::Reflecting;
  /// Latest earlier visit into the structure (semi-reflecting only).
  std::optional<std::int64_t> tau;
  /// Active: the original was traversed last (its transform now awaits).
  /// Transformed: the transform was traversed last (the original is restored).
  ReflectorStatus status = ReflectorStatus::Active;
  std::optional<std::int64_t> annihilated_at;
  /// [start, end] of each later traversal of the transform or the original.
  std::vector<std::pair<std::int64_t, std::int64_t>> traversals;
};

struct LoopRecord {
  SiteCoord base;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
};

enum class EventKind {
  LoopClosed,
  ReflectorConfirmed,
  SemiReflectorConfirmed,
  TransformTraversed,
  Annihilation,
  OriginReturn,
  PeriodDetected,
};

const char* to_string(EventKind kind);

/// time is the confirmation time; events are emitted in nondecreasing time.
struct StructureEvent {
  std::int64_t time = 0;
  EventKind kind = EventKind::OriginReturn;
  std::optional<std::size_t> record;
  SiteCoord base;
  std::optional<std::int64_t> t1;
  std::optional<std::int64_t> t_star;
  std::optional<std::int64_t> t2;
  /// Semi-reflector tau, or the annihilation time for Annihilation events.
  std::optional<std::int64_t> tau;
  std::optional<ReflectorStatus> status;
  std::optional<std::int64_t> period;

  friend bool operator==(const StructureEvent&, const StructureEvent&) = default;
};

class OutOfOrderInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientLog : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PreconditionUnmet : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct AnalyzerOptions {
  bool emit_loops = false;
  bool emit_origin_returns = true;
};

class TrajectoryAnalyzer : public TrajectoryObserver {
 public:
  explicit TrajectoryAnalyzer(AnalyzerOptions options = {});

  /// Feeds r(time); time must equal the number of positions fed so far.
  /// Returns the events confirmed at this step.
  std::vector<StructureEvent> feed(SiteCoord position, std::int64_t time);

  void on_start(const SimState& initial) override;
  bool on_step(const SimState& state) override;
  void on_finish(const RunOutcome& outcome) override;

  const TrajectoryLog& log() const { return log_; }
  const std::vector<StructureEvent>& events() const { return events_; }
  const std::vector<ReflectorRecord>& records() const { return records_; }

  /// Reflecting structures (original or transformed) not yet annihilated.
  std::size_t live_count() const { return live_.size(); }
  std::size_t max_live_count() const { return max_live_; }

  std::size_t reflector_count() const;
  std::size_t semi_reflector_count() const;
  std::size_t annihilation_count() const;

 private:
  struct LiveStructure {
    std::size_t record = 0;
    absl::flat_hash_set<std::uint64_t> sites;
    std::int64_t window_start = 0;  // end of the latest traversal
    std::optional<std::int64_t> pending_start;
  };

  void update_live_structures(std::uint64_t key, std::int64_t time,
                              std::vector<StructureEvent>& out);
  void detect_transform(LiveStructure& live, std::uint64_t key, std::int64_t time, bool& gone,
                        std::vector<StructureEvent>& out);
  void detect_annihilation(LiveStructure& live, std::int64_t entry_time, std::int64_t time,
                           bool& gone, std::vector<StructureEvent>& out);
  void detect_structure(std::uint64_t key, std::int64_t time, std::vector<StructureEvent>& out);
  std::int64_t count_visits_between(std::uint64_t key, std::int64_t lo, std::int64_t hi,
                                    std::int64_t stop_after) const;

  StructureEvent record_event(EventKind kind, std::int64_t time, const ReflectorRecord& rec) const;

  static constexpr std::uint32_t kNone = 0xffffffffu;

  AnalyzerOptions options_;
  TrajectoryLog log_;
  std::vector<std::uint32_t> prev_visit_;
  absl::flat_hash_map<std::uint64_t, std::uint32_t> last_visit_;
  std::vector<ReflectorRecord> records_;
  std::vector<LiveStructure> live_;
  std::vector<StructureEvent> events_;
  std::int64_t last_encounter_ = -1;
  std::optional<std::pair<std::int64_t, std::int64_t>> completed_traversal_;
  std::size_t max_live_ = 0;
};

/// r(t2+t) == r(t1-t) for every t in [0, t1] (reflecting) or [0, t1-tau]
/// (semi-reflecting).
bool check_reflecting_property(const ReflectorRecord& record, const TrajectoryLog& log);

/// The reversal equality over an explicit range [0, max_t].
bool check_reversal(const ReflectorRecord& record, const TrajectoryLog& log, std::int64_t max_t);

/// 2(t4 + t3 - t2 - t1).
constexpr std::int64_t two_reflector_period(std::int64_t t1, std::int64_t t2, std::int64_t t3,
                                            std::int64_t t4) {
  return 2 * (t4 + t3 - t2 - t1);
}

struct TwoReflectorPattern {
  std::int64_t t1 = 0, t2 = 0, t3 = 0, t4 = 0;
};

/// First reflector followed by the next newly confirmed reflector while the
/// first is not annihilated; nullopt when the log has no such pair.
std::optional<TwoReflectorPattern> find_two_reflector_pattern(
    std::span<const StructureEvent> events);

/// Measured period equals 2(t4+t3-t2-t1). Throws PreconditionUnmet when the
/// run is not periodic or the events lack the two-reflector pattern.
bool period_consistency(std::span<const StructureEvent> events, const RunOutcome& outcome);

struct CycleInfo {
  std::int64_t start = 0;
  std::int64_t end = 0;
  bool self_avoiding = false;
  /// Site set invariant under reflection across x = 1/2.
  bool symmetric = false;
};

/// Splits the log at the origin-return times. Only complete segments are
/// reported.
std::vector<CycleInfo> cycle_decomposition(const TrajectoryLog& log,
                                           std::span<const std::int64_t> origin_returns);

/// Positions after the last origin return are pairwise distinct.
bool tail_self_avoiding(const TrajectoryLog& log, std::span<const std::int64_t> origin_returns);

/// One JSON object per line, fields in the order
/// time, kind, id, base{a,b,sub}, t1, tStar, t2, tau, status, period.
void write_events_jsonl(std::ostream& out, std::span<const StructureEvent> events);

}  // namespace rotorwalk
