#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "rotorwalk/structures.hpp"

using namespace rotorwalk;

namespace {

struct Analyzed {
  RunOutcome outcome;
  TrajectoryAnalyzer analyzer;
};

Analyzed analyze(const MediumSpec& spec, std::int64_t cap) {
  Analyzed a;
  Medium m(spec);
  TrajectoryObserver* obs[] = {&a.analyzer};
  a.outcome = run(m, cap, obs);
  return a;
}

MediumSpec load_snapshot(const std::string& name) {
  std::ifstream in(std::string(ROTORWALK_TEST_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  return Snapshot::read(in).restore();
}

std::vector<StructureEvent> of_kind(const std::vector<StructureEvent>& events, EventKind kind) {
  std::vector<StructureEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [kind](const StructureEvent& e) { return e.kind == kind; });
  return out;
}

// Feeds abstract positions; the analyzer never inspects adjacency.
std::vector<StructureEvent> feed_all(TrajectoryAnalyzer& an, const std::vector<SiteCoord>& path) {
  std::vector<StructureEvent> out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    auto ev = an.feed(path[t], static_cast<std::int64_t>(t));
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

const SiteCoord O = kOrigin, X = site_a(10, 0), Y1 = site_a(11, 0), P = site_a(12, 0),
                Y2 = site_a(13, 0), Q = site_a(14, 0), Z1 = site_a(15, 0), Z2 = site_a(16, 0);

// T[1,9] = X Y1 P Y2 X Y1 Q Y2 X is a reflecting structure based at X.
const std::vector<SiteCoord> kReflector = {O, X, Y1, P, Y2, X, Y1, Q, Y2, X};

}  // namespace

TEST_CASE("reflector formation with return to the origin at t2 + t1") {
  auto a = analyze(MediumSpec::iid(0.5, 19676), 200);
  const auto confirmed = of_kind(a.analyzer.events(), EventKind::ReflectorConfirmed);
  REQUIRE_FALSE(confirmed.empty());
  const StructureEvent& e = confirmed.front();
  CHECK(*e.t1 == 5);
  CHECK(*e.t2 == 27);
  CHECK(e.time == 27);
  CHECK(a.outcome.origin_returns.front() == 32);
  const ReflectorRecord& rec = a.analyzer.records()[*e.record];
  CHECK(check_reflecting_property(rec, a.analyzer.log()));
  CHECK(a.analyzer.log().at(27 + 5) == kOrigin);
}

TEST_CASE("semi-reflector reverses only back to tau") {
  auto a = analyze(MediumSpec::iid(0.5, 420824), 200);
  const auto semis = of_kind(a.analyzer.events(), EventKind::SemiReflectorConfirmed);
  REQUIRE_FALSE(semis.empty());
  const ReflectorRecord& rec = a.analyzer.records()[*semis.front().record];
  CHECK(rec.t1 == 7);
  CHECK(rec.t2 == 31);
  CHECK(rec.tau == 2);
  CHECK(rec.kind == StructureKind::SemiReflecting);
  CHECK(check_reflecting_property(rec, a.analyzer.log()));
  CHECK(check_reversal(rec, a.analyzer.log(), 7 - 2));
  CHECK_FALSE(check_reversal(rec, a.analyzer.log(), 7));
}

TEST_CASE("two reflectors and their transforms give period 92") {
  auto a = analyze(load_snapshot("example3.snapshot"), 1000);
  REQUIRE(a.outcome.periodic());
  CHECK(a.outcome.steps == 92);
  std::vector<std::tuple<EventKind, std::size_t, std::int64_t, std::int64_t>> seq;
  for (const auto& e : a.analyzer.events()) {
    if (e.kind == EventKind::ReflectorConfirmed || e.kind == EventKind::TransformTraversed) {
      seq.emplace_back(e.kind, *e.record, *e.t1, *e.t2);
    }
  }
  const decltype(seq) expected = {
      {EventKind::ReflectorConfirmed, 0, 1, 23},
      {EventKind::ReflectorConfirmed, 1, 24, 46},
      {EventKind::TransformTraversed, 0, 47, 69},
      {EventKind::TransformTraversed, 1, 70, 92},
  };
  CHECK(seq == expected);
  CHECK(a.analyzer.events().back().kind == EventKind::PeriodDetected);
  CHECK(a.analyzer.events().back().period == 92);
  CHECK(a.analyzer.annihilation_count() == 0);
  const auto pattern = find_two_reflector_pattern(a.analyzer.events());
  REQUIRE(pattern);
  CHECK(pattern->t1 == 1);
  CHECK(pattern->t2 == 23);
  CHECK(pattern->t3 == 24);
  CHECK(pattern->t4 == 46);
  CHECK(period_consistency(a.analyzer.events(), a.outcome));
  for (const auto& rec : a.analyzer.records()) {
    CHECK(rec.status == ReflectorStatus::RetiredByPeriodicity);
    CHECK(check_reflecting_property(rec, a.analyzer.log()));
  }
}

TEST_CASE("period formula arithmetic") {
  CHECK(two_reflector_period(1, 23, 24, 46) == 92);
  CHECK(two_reflector_period(944, 998, 3602, 3704) == 10728);

  std::vector<StructureEvent> events(2);
  events[0].kind = events[1].kind = EventKind::ReflectorConfirmed;
  events[0].record = 0;
  events[1].record = 1;
  events[0].t1 = 944;
  events[0].t2 = 998;
  events[1].t1 = 3602;
  events[1].t2 = 3704;
  RunOutcome out;
  out.kind = OutcomeKind::Periodic;
  out.steps = 10728;
  CHECK(period_consistency(events, out));
  out.steps = 10729;
  CHECK_FALSE(period_consistency(events, out));
  out.kind = OutcomeKind::StepCapReached;
  CHECK_THROWS_AS(period_consistency(events, out), PreconditionUnmet);
  out.kind = OutcomeKind::Periodic;
  CHECK_THROWS_AS(period_consistency(std::span(events).first(1), out), PreconditionUnmet);
}

TEST_CASE("an annihilated first reflector does not start the pattern") {
  std::vector<StructureEvent> events(4);
  events[0].kind = EventKind::ReflectorConfirmed;
  events[0].record = 0;
  events[0].t1 = 1;
  events[0].t2 = 23;
  events[1].kind = EventKind::Annihilation;
  events[1].record = 0;
  events[2] = events[0];
  events[2].record = 1;
  events[2].t1 = 60;
  events[2].t2 = 80;
  events[3] = events[0];
  events[3].record = 2;
  events[3].t1 = 100;
  events[3].t2 = 130;
  const auto pattern = find_two_reflector_pattern(events);
  REQUIRE(pattern);
  CHECK(pattern->t1 == 60);
  CHECK(pattern->t3 == 100);
}

TEST_CASE("synthetic reflector is confirmed at its closing visit") {
  TrajectoryAnalyzer an;
  const auto events = feed_all(an, kReflector);
  const auto confirmed = of_kind(events, EventKind::ReflectorConfirmed);
  REQUIRE(confirmed.size() == 1);
  CHECK(confirmed[0].time == 9);
  CHECK(*confirmed[0].t1 == 1);
  CHECK(*confirmed[0].t_star == 5);
  CHECK(*confirmed[0].t2 == 9);
  CHECK(confirmed[0].base == X);
  CHECK(an.live_count() == 1);
}

TEST_CASE("entering a reflector away from its base annihilates it") {
  TrajectoryAnalyzer an;
  auto path = kReflector;
  path.insert(path.end(), {Z1, Z2, P});
  const auto events = feed_all(an, path);
  const auto ann = of_kind(events, EventKind::Annihilation);
  REQUIRE(ann.size() == 1);
  CHECK(ann[0].tau == 12);
  CHECK(ann[0].record == 0);
  CHECK(an.records()[0].status == ReflectorStatus::Annihilated);
  CHECK(an.records()[0].annihilated_at == 12);
  CHECK(an.live_count() == 0);
}

TEST_CASE("reverse traversal through the base is a transform") {
  TrajectoryAnalyzer an;
  auto path = kReflector;
  path.push_back(Z1);
  for (int k = 0; k <= 8; ++k) path.push_back(kReflector[9 - k]);
  path.push_back(Z2);
  for (int k = 0; k <= 8; ++k) path.push_back(kReflector[1 + k]);
  const auto events = feed_all(an, path);
  const auto tr = of_kind(events, EventKind::TransformTraversed);
  REQUIRE(tr.size() == 2);
  CHECK(*tr[0].t1 == 11);
  CHECK(*tr[0].t2 == 19);
  CHECK(tr[0].status == ReflectorStatus::Transformed);
  CHECK(*tr[1].t1 == 21);
  CHECK(*tr[1].t2 == 29);
  CHECK(tr[1].status == ReflectorStatus::Active);
  CHECK(of_kind(events, EventKind::Annihilation).empty());
  CHECK(of_kind(events, EventKind::ReflectorConfirmed).size() == 1);
  CHECK(of_kind(events, EventKind::SemiReflectorConfirmed).empty());
}

TEST_CASE("a forward pass through an untransformed reflector annihilates it") {
  TrajectoryAnalyzer an;
  auto path = kReflector;
  path.push_back(Z1);
  path.push_back(X);
  path.push_back(Y1);
  const auto events = feed_all(an, path);
  const auto ann = of_kind(events, EventKind::Annihilation);
  REQUIRE(ann.size() == 1);
  CHECK(ann[0].tau == 11);
  CHECK(ann[0].time == 12);
}

TEST_CASE("an intervening reflector encounter prevents annihilation") {
  TrajectoryAnalyzer an;
  auto path = kReflector;
  const SiteCoord W = site_a(20, 0), V1 = site_a(21, 0), R = site_a(22, 0), V2 = site_a(23, 0),
                  S = site_a(24, 0);
  path.insert(path.end(), {Z1, W, V1, R, V2, W, V1, S, V2, W, Z2, P});
  const auto events = feed_all(an, path);
  CHECK(of_kind(events, EventKind::ReflectorConfirmed).size() == 2);
  CHECK(of_kind(events, EventKind::Annihilation).empty());
  CHECK(an.max_live_count() == 2);
}

TEST_CASE("launch-point and entry-site rules") {
  SUBCASE("origin inside a structure with t1 >= 2 is still reflecting") {
    TrajectoryAnalyzer an;
    feed_all(an, {O, Z1, X, Y1, O, Y2, X, Y1, Q, Y2, X});
    REQUIRE(an.records().size() == 1);
    CHECK(an.records()[0].kind == StructureKind::Reflecting);
  }
  SUBCASE("structure containing its entry site is discarded") {
    TrajectoryAnalyzer an;
    feed_all(an, {O, Z1, X, Y1, Z1, Y2, X, Y1, Q, Y2, X});
    CHECK(an.records().empty());
  }
  SUBCASE("earlier intersection makes a semi-reflector") {
    TrajectoryAnalyzer an;
    feed_all(an, {O, Z1, Q, Z2, X, Y1, P, Y2, X, Y1, Q, Y2, X});
    REQUIRE(an.records().size() == 1);
    CHECK(an.records()[0].kind == StructureKind::SemiReflecting);
    CHECK(an.records()[0].tau == 2);
  }
}

TEST_CASE("analyzer agrees with a naive scan of the definitions") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto a = analyze(MediumSpec::iid(0.5, seed), 600);
    const auto& events = a.analyzer.events();
    std::int64_t horizon = a.analyzer.log().size() - 1;
    for (const auto& e : events) {
      if (e.kind == EventKind::TransformTraversed) {
        horizon = std::min(horizon, e.time - 1);
        break;
      }
    }
    std::vector<oracle::XY> log;
    for (std::int64_t t = 0; t <= horizon; ++t) log.push_back(oracle::to_xy(a.analyzer.log().at(t)));
    std::vector<oracle::NaiveStructure> mine;
    for (const auto& r : a.analyzer.records()) {
      if (r.t2 > horizon) continue;
      mine.push_back({r.t1, r.t_star, r.t2, r.kind == StructureKind::Reflecting, r.tau.value_or(-1)});
    }
    auto naive = oracle::naive_structures(log);
    std::sort(mine.begin(), mine.end());
    std::sort(naive.begin(), naive.end());
    CHECK(mine == naive);
    compared += !naive.empty();
  }
  CHECK(compared > 10);
}

TEST_CASE("reflecting and semi-reflecting properties hold on random runs") {
  std::size_t reflectors = 0, semis = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    for (const double p : {0.3, 0.5, 0.7}) {
      auto a = analyze(MediumSpec::iid(p, seed), 200000);
      CHECK(a.analyzer.max_live_count() <= 2);
      for (const auto& rec : a.analyzer.records()) {
        const std::int64_t range = rec.kind == StructureKind::Reflecting ? rec.t1 : rec.t1 - *rec.tau;
        if (a.analyzer.log().size() <= rec.t2 + range) {
          CHECK_THROWS_AS(check_reflecting_property(rec, a.analyzer.log()), InsufficientLog);
          continue;
        }
        CHECK(check_reflecting_property(rec, a.analyzer.log()));
        (rec.kind == StructureKind::Reflecting ? reflectors : semis)++;
      }
      if (a.outcome.periodic() && find_two_reflector_pattern(a.analyzer.events())) {
        CHECK(period_consistency(a.analyzer.events(), a.outcome));
      }
    }
  }
  CHECK(reflectors > 50);
  CHECK(semis > 50);
}

TEST_CASE("homogeneous media never form reflectors and cycles are symmetric") {
  for (const auto o : {Orientation::Left, Orientation::Right}) {
    auto a = analyze(MediumSpec::homogeneous(o), 100000);
    CHECK(a.outcome.kind == OutcomeKind::StepCapReached);
    CHECK(a.analyzer.reflector_count() == 0);
    const auto cycles = cycle_decomposition(a.analyzer.log(), a.outcome.origin_returns);
    CHECK(cycles.size() == a.outcome.origin_returns.size());
    for (const auto& c : cycles) {
      CHECK(c.self_avoiding);
      CHECK(c.symmetric);
    }
    CHECK(tail_self_avoiding(a.analyzer.log(), a.outcome.origin_returns));
  }
}

TEST_CASE("admissible media never form reflectors") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = analyze(MediumSpec::admissible_hex(0.5, static_cast<int>(seed % 3), seed), 100000);
    CHECK(a.analyzer.reflector_count() == 0);
    for (const auto& c : cycle_decomposition(a.analyzer.log(), a.outcome.origin_returns)) {
      CHECK(c.self_avoiding);
    }
  }
}

TEST_CASE("iid cycles are generally not self-avoiding") {
  int broken = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto a = analyze(MediumSpec::iid(0.5, seed), 100000);
    for (const auto& c : cycle_decomposition(a.analyzer.log(), a.outcome.origin_returns)) {
      broken += !c.self_avoiding;
    }
  }
  CHECK(broken > 0);
}

TEST_CASE("feeding rules and determinism") {
  TrajectoryAnalyzer an;
  an.feed(kOrigin, 0);
  CHECK_THROWS_AS(an.feed(site_b(0, 0), 2), OutOfOrderInput);

  auto a1 = analyze(MediumSpec::iid(0.6, 8), 50000);
  auto a2 = analyze(MediumSpec::iid(0.6, 8), 50000);
  CHECK(a1.analyzer.events() == a2.analyzer.events());

  TrajectoryAnalyzer replay;
  for (std::int64_t t = 0; t < a1.analyzer.log().size(); ++t) replay.feed(a1.analyzer.log().at(t), t);
  replay.on_finish(a1.outcome);
  CHECK(replay.events() == a1.analyzer.events());

  ReflectorRecord fake;
  fake.t1 = 3;
  fake.t2 = 10;
  TrajectoryLog short_log;
  for (int t = 0; t < 11; ++t) short_log.push_back(kOrigin);
  CHECK_THROWS_AS(check_reversal(fake, short_log, 3), InsufficientLog);
}

TEST_CASE("loop events are optional") {
  TrajectoryAnalyzer an(AnalyzerOptions{true, true});
  const auto events = feed_all(an, kReflector);
  CHECK(of_kind(events, EventKind::LoopClosed).size() == 4);
}

TEST_CASE("events serialize as JSON lines with stable field order") {
  TrajectoryAnalyzer an;
  feed_all(an, kReflector);
  std::ostringstream out;
  write_events_jsonl(out, an.events());
  CHECK(out.str() ==
        "{\"time\":9,\"kind\":\"reflector\",\"id\":0,\"base\":{\"a\":10,\"b\":0,\"sub\":\"A\"},"
        "\"t1\":1,\"tStar\":5,\"t2\":9,\"tau\":null,\"status\":\"active\",\"period\":null}\n");
}
