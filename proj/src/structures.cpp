#include "rotorwalk/structures.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "json.hpp"

namespace rotorwalk {

TrajectoryLog::TrajectoryLog(std::span<const SiteCoord> positions) {
  keys_.reserve(positions.size());
  for (const SiteCoord& s : positions) keys_.push_back(pack(s));
}

const char* to_string(ReflectorStatus status) {
  switch (status) {
    case ReflectorStatus::Active: return "active";
    case ReflectorStatus::Transformed: return "transformed";
    case ReflectorStatus::Annihilated: return "annihilated";
    case ReflectorStatus::RetiredByPeriodicity: return "retired";
  }
  return "unknown";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::LoopClosed: return "loop";
    case EventKind::ReflectorConfirmed: return "reflector";
    case EventKind::SemiReflectorConfirmed: return "semi_reflector";
    case EventKind::TransformTraversed: return "transform";
    case EventKind::Annihilation: return "annihilation";
    case EventKind::OriginReturn: return "origin_return";
    case EventKind::PeriodDetected: return "period";
  }
  return "unknown";
}

TrajectoryAnalyzer::TrajectoryAnalyzer(AnalyzerOptions options) : options_(options) {}

void TrajectoryAnalyzer::on_start(const SimState& initial) { feed(initial.site, initial.time); }

bool TrajectoryAnalyzer::on_step(const SimState& state) {
  feed(state.site, state.time);
  return true;
}

void TrajectoryAnalyzer::on_finish(const RunOutcome& outcome) {
  if (!outcome.periodic()) return;
  StructureEvent ev;
  ev.time = outcome.steps;
  ev.kind = EventKind::PeriodDetected;
  ev.base = kOrigin;
  ev.period = outcome.steps;
  events_.push_back(ev);
  for (const LiveStructure& live : live_) {
    records_[live.record].status = ReflectorStatus::RetiredByPeriodicity;
  }
}

StructureEvent TrajectoryAnalyzer::record_event(EventKind kind, std::int64_t time,
                                                const ReflectorRecord& rec) const {
  StructureEvent ev;
  ev.time = time;
  ev.kind = kind;
  ev.record = rec.id;
  ev.base = rec.base;
  ev.t1 = rec.t1;
  ev.t_star = rec.t_star;
  ev.t2 = rec.t2;
  ev.tau = rec.tau;
  ev.status = rec.status;
  return ev;
}

std::vector<StructureEvent> TrajectoryAnalyzer::feed(SiteCoord position, std::int64_t time) {
  if (time != log_.size()) {
    throw OutOfOrderInput(fmt::format("expected time {}, got {}", log_.size(), time));
  }
  if (time >= static_cast<std::int64_t>(kNone)) {
    throw std::length_error("trajectory too long for the analyzer");
  }
  const std::uint64_t key = pack(position);
  log_.push_back(position);
  auto [it, inserted] = last_visit_.try_emplace(key, static_cast<std::uint32_t>(time));
  if (inserted) {
    prev_visit_.push_back(kNone);
  } else {
    prev_visit_.push_back(it->second);
    it->second = static_cast<std::uint32_t>(time);
  }

  std::vector<StructureEvent> out;
  if (time > 0 && position == kOrigin && options_.emit_origin_returns) {
    StructureEvent ev;
    ev.time = time;
    ev.kind = EventKind::OriginReturn;
    ev.base = kOrigin;
    out.push_back(ev);
  }
  if (options_.emit_loops && !inserted) {
    StructureEvent ev;
    ev.time = time;
    ev.kind = EventKind::LoopClosed;
    ev.base = position;
    ev.t1 = prev_visit_.back();
    ev.t2 = time;
    out.push_back(ev);
  }

  completed_traversal_.reset();
  if (!live_.empty()) update_live_structures(key, time, out);
  if (!inserted) detect_structure(key, time, out);

  max_live_ = std::max(max_live_, live_.size());
  events_.insert(events_.end(), out.begin(), out.end());
  return out;
}

void TrajectoryAnalyzer::update_live_structures(std::uint64_t key, std::int64_t time,
                                                std::vector<StructureEvent>& out) {
  for (std::size_t i = 0; i < live_.size();) {
    bool gone = false;
    detect_transform(live_[i], key, time, gone, out);
    if (gone) {
      live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
}

// A re-entry through the base that replays the structure's sites in the
// order dictated by its current form is a transform traversal. Any other
// re-entry is handed to detect_annihilation.
void TrajectoryAnalyzer::detect_transform(LiveStructure& live, std::uint64_t key,
                                          std::int64_t time, bool& gone,
                                          std::vector<StructureEvent>& out) {
  ReflectorRecord& rec = records_[live.record];
  const std::int64_t length = rec.t2 - rec.t1;

  if (live.pending_start) {
    const std::int64_t start = *live.pending_start;
    const std::int64_t k = time - start;
    const bool reverse = rec.status == ReflectorStatus::Active;
    const std::uint64_t expected = reverse ? log_.key_at(rec.t2 - k) : log_.key_at(rec.t1 + k);
    if (key == expected) {
      if (k == length) {
        live.pending_start.reset();
        live.window_start = time;
        rec.traversals.emplace_back(start, time);
        rec.status = reverse ? ReflectorStatus::Transformed : ReflectorStatus::Active;
        last_encounter_ = std::max(last_encounter_, start);
        completed_traversal_ = std::make_pair(start, time);

        StructureEvent ev = record_event(EventKind::TransformTraversed, time, rec);
        ev.t1 = start;
        ev.t_star = start + (reverse ? rec.t2 - rec.t_star : rec.t_star - rec.t1);
        ev.t2 = time;
        out.push_back(ev);
      }
      return;
    }
    live.pending_start.reset();
    detect_annihilation(live, start, time, gone, out);
    if (gone) return;
  }

  if (!live.sites.contains(key)) return;
  if (key == pack(rec.base)) {
    live.pending_start = time;
    return;
  }
  detect_annihilation(live, time, time, gone, out);
}

// Annihilation at entry_time requires that no reflecting structure (original
// or transform) was encountered since the structure was last traversed.
void TrajectoryAnalyzer::detect_annihilation(LiveStructure& live, std::int64_t entry_time,
                                             std::int64_t time, bool& gone,
                                             std::vector<StructureEvent>& out) {
  ReflectorRecord& rec = records_[live.record];
  if (last_encounter_ > live.window_start) {
    live.window_start = time;
    return;
  }
  rec.status = ReflectorStatus::Annihilated;
  rec.annihilated_at = entry_time;
  StructureEvent ev = record_event(EventKind::Annihilation, time, rec);
  ev.tau = entry_time;
  out.push_back(ev);
  gone = true;
}

std::int64_t TrajectoryAnalyzer::count_visits_between(std::uint64_t key, std::int64_t lo,
                                                      std::int64_t hi,
                                                      std::int64_t stop_after) const {
  const auto it = last_visit_.find(key);
  if (it == last_visit_.end()) return 0;
  std::int64_t count = 0;
  for (std::uint32_t t = it->second; t != kNone && static_cast<std::int64_t>(t) >= lo;
       t = prev_visit_[t]) {
    if (static_cast<std::int64_t>(t) <= hi && ++count > stop_after) break;
  }
  return count;
}

void TrajectoryAnalyzer::detect_structure(std::uint64_t key, std::int64_t time,
                                          std::vector<StructureEvent>& out) {
  const std::int64_t c = time;
  const std::uint32_t b32 = prev_visit_[static_cast<std::size_t>(c)];
  if (b32 == kNone) return;
  const std::uint32_t a32 = prev_visit_[b32];
  if (a32 == kNone || a32 == 0) return;
  const std::int64_t a = a32;
  const std::int64_t b = b32;

  // Each loop must pass r(t1+1) and r(t2-1) exactly once.
  for (const std::uint64_t adj : {log_.key_at(a + 1), log_.key_at(c - 1)}) {
    if (count_visits_between(adj, a, b, 1) != 1) return;
    if (count_visits_between(adj, b, c, 1) != 1) return;
  }

  if (completed_traversal_ && completed_traversal_->first == a &&
      completed_traversal_->second == c) {
    return;
  }

  // The first visit of each structure site within [a, c] links back to its
  // latest visit before a.
  std::int64_t tau = -1;
  for (std::int64_t t = a; t <= c; ++t) {
    const std::uint32_t p = prev_visit_[static_cast<std::size_t>(t)];
    if (p != kNone && static_cast<std::int64_t>(p) < a) tau = std::max<std::int64_t>(tau, p);
  }

  // A structure entered from one of its own sites has no well-defined
  // reversal: r(t1-1) must lie outside it.
  if (tau == a - 1) return;

  ReflectorRecord rec;
  rec.id = records_.size();
  rec.base = unpack(key);
  rec.t1 = a;
  rec.t_star = b;
  rec.t2 = c;
  if (tau > 0) {
    rec.kind = StructureKind::SemiReflecting;
    rec.tau = tau;
    records_.push_back(rec);
    out.push_back(record_event(EventKind::SemiReflectorConfirmed, time, records_.back()));
    return;
  }

  rec.kind = StructureKind::Reflecting;
  records_.push_back(rec);
  LiveStructure live;
  live.record = rec.id;
  live.window_start = c;
  live.sites.reserve(static_cast<std::size_t>(c - a + 1));
  for (std::int64_t t = a; t <= c; ++t) live.sites.insert(log_.key_at(t));
  live_.push_back(std::move(live));
  last_encounter_ = std::max(last_encounter_, a);
  out.push_back(record_event(EventKind::ReflectorConfirmed, time, records_.back()));
}

std::size_t TrajectoryAnalyzer::reflector_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) {
    return r.kind == StructureKind::Reflecting;
  }));
}

std::size_t TrajectoryAnalyzer::semi_reflector_count() const {
  return records_.size() - reflector_count();
}

std::size_t TrajectoryAnalyzer::annihilation_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) {
    return r.annihilated_at.has_value();
  }));
}

// --- verification passes --------------------------------------------------

bool check_reversal(const ReflectorRecord& record, const TrajectoryLog& log, std::int64_t max_t) {
  if (max_t < 0 || max_t > record.t1) {
    throw std::invalid_argument(fmt::format("reversal range {} outside [0, t1={}]", max_t, record.t1));
  }
  if (log.size() <= record.t2 + max_t) {
    throw InsufficientLog(fmt::format("log of length {} does not reach t2+{}={}", log.size(), max_t,
                                      record.t2 + max_t));
  }
  for (std::int64_t t = 0; t <= max_t; ++t) {
    if (log.key_at(record.t2 + t) != log.key_at(record.t1 - t)) return false;
  }
  return true;
}

bool check_reflecting_property(const ReflectorRecord& record, const TrajectoryLog& log) {
  const std::int64_t max_t =
      record.kind == StructureKind::Reflecting ? record.t1 : record.t1 - record.tau.value_or(0);
  return check_reversal(record, log, max_t);
}

std::optional<TwoReflectorPattern> find_two_reflector_pattern(
    std::span<const StructureEvent> events) {
  std::optional<StructureEvent> first;
  for (const StructureEvent& ev : events) {
    switch (ev.kind) {
      case EventKind::ReflectorConfirmed:
        if (!first) {
          first = ev;
        } else {
          return TwoReflectorPattern{*first->t1, *first->t2, *ev.t1, *ev.t2};
        }
        break;
      case EventKind::Annihilation:
        if (first && ev.record == first->record) first.reset();
        break;
      default:
        break;
    }
  }
  return std::nullopt;
}

bool period_consistency(std::span<const StructureEvent> events, const RunOutcome& outcome) {
  if (!outcome.periodic()) throw PreconditionUnmet("run did not terminate periodic");
  const auto pattern = find_two_reflector_pattern(events);
  if (!pattern) throw PreconditionUnmet("event log lacks the two-reflector pattern");
  return outcome.steps == two_reflector_period(pattern->t1, pattern->t2, pattern->t3, pattern->t4);
}

std::vector<CycleInfo> cycle_decomposition(const TrajectoryLog& log,
                                           std::span<const std::int64_t> origin_returns) {
  std::vector<CycleInfo> cycles;
  std::int64_t start = 0;
  absl::flat_hash_set<std::uint64_t> seen;
  for (const std::int64_t end : origin_returns) {
    if (end <= start || end >= log.size()) break;
    CycleInfo info{start, end, true, true};
    seen.clear();
    for (std::int64_t t = start; t < end; ++t) {
      if (!seen.insert(log.key_at(t)).second) info.self_avoiding = false;
    }
    seen.insert(log.key_at(end));
    for (const std::uint64_t k : seen) {
      if (!seen.contains(pack(mirror_half(unpack(k))))) {
        info.symmetric = false;
        break;
      }
    }
    cycles.push_back(info);
    start = end;
  }
  return cycles;
}

bool tail_self_avoiding(const TrajectoryLog& log, std::span<const std::int64_t> origin_returns) {
  const std::int64_t start = origin_returns.empty() ? 0 : origin_returns.back();
  absl::flat_hash_set<std::uint64_t> seen;
  for (std::int64_t t = start; t < log.size(); ++t) {
    if (!seen.insert(log.key_at(t)).second) return false;
  }
  return true;
}

void write_events_jsonl(std::ostream& out, std::span<const StructureEvent> events) {
  using nlohmann::ordered_json;
  auto opt = [](const auto& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  for (const StructureEvent& ev : events) {
    ordered_json j;
    j["time"] = ev.time;
    j["kind"] = to_string(ev.kind);
    j["id"] = opt(ev.record);
    j["base"] = ordered_json{{"a", ev.base.a},
                             {"b", ev.base.b},
                             {"sub", ev.base.sub == Sublattice::A ? "A" : "B"}};
    j["t1"] = opt(ev.t1);
    j["tStar"] = opt(ev.t_star);
    j["t2"] = opt(ev.t2);
    j["tau"] = opt(ev.tau);
    j["status"] = ev.status ? ordered_json(to_string(*ev.status)) : ordered_json(nullptr);
    j["period"] = opt(ev.period);
    out << j.dump() << '\n';
  }
}

}  // namespace rotorwalk
