#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rotorwalk/lattice.hpp"
#include "rotorwalk/medium.hpp"

using namespace rotorwalk;

namespace {

double right_fraction(const MediumSpec& spec, Sublattice only, int r) {
  std::size_t right = 0, total = 0;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      const SiteCoord s{a, b, only};
      right += spec.initial_orientation(s) == Orientation::Right;
      ++total;
    }
  }
  return static_cast<double>(right) / static_cast<double>(total);
}

std::size_t recount_dirty(const Medium& m, const std::vector<SiteCoord>& sites) {
  std::size_t n = 0;
  for (const auto& s : sites) n += m.current_orientation(s) != m.initial_orientation(s);
  return n;
}

}  // namespace

TEST_CASE("iid orientations have the requested frequency") {
  for (const double p : {0.1, 0.5, 0.83}) {
    const double f = right_fraction(MediumSpec::iid(p, 42), Sublattice::A, 150);
    const double sigma = std::sqrt(p * (1 - p) / (301.0 * 301.0));
    CHECK(std::abs(f - p) < 4 * sigma);
  }
  CHECK(right_fraction(MediumSpec::iid(0.0, 1), Sublattice::B, 40) == 0.0);
  CHECK(right_fraction(MediumSpec::iid(1.0, 1), Sublattice::B, 40) == 1.0);
  CHECK_THROWS_AS(MediumSpec::iid(1.5, 0), std::invalid_argument);
}

TEST_CASE("iid media are deterministic in the seed") {
  const auto s1 = MediumSpec::iid(0.5, 9);
  const auto s2 = MediumSpec::iid(0.5, 9);
  const auto s3 = MediumSpec::iid(0.5, 10);
  int differ = 0;
  for (int a = -20; a <= 20; ++a) {
    const SiteCoord s = site_b(a, -a);
    CHECK(s1.initial_orientation(s) == s2.initial_orientation(s));
    differ += s1.initial_orientation(s) != s3.initial_orientation(s);
  }
  CHECK(differ > 0);
}

TEST_CASE("a family with f(p) = p is identical to iid") {
  FamilySpec f;
  f.name = "identity";
  f.functions.emplace_back([](double p) { return p; });
  f.assignment = {0, 0};
  for (const double p : {0.2, 0.5, 0.9}) {
    const auto fam = MediumSpec::family(f, p, 77);
    const auto iid = MediumSpec::iid(p, 77);
    for (int a = -30; a <= 30; ++a) {
      for (int b = -30; b <= 30; ++b) {
        CHECK(fam.initial_orientation(site_a(a, b)) == iid.initial_orientation(site_a(a, b)));
        CHECK(fam.initial_orientation(site_b(a, b)) == iid.initial_orientation(site_b(a, b)));
      }
    }
  }
}

TEST_CASE("example family assigns per-class probabilities") {
  const double p = 0.4;
  const auto spec = MediumSpec::family(example_family(), p, 5);
  const double f1 = 0.5 * std::cos(M_PI * p / 2);
  CHECK(spec.family_probability(site_b(3, 1)) == doctest::Approx(f1));
  CHECK(spec.family_probability(site_a(3, 1)) == doctest::Approx(1 - f1));
  CHECK(family_probability(spec, site_b(0, 0)) == doctest::Approx(f1));
  const double sigma = 0.5 / 201.0;
  CHECK(std::abs(right_fraction(spec, Sublattice::B, 100) - f1) < 4 * sigma);
  CHECK(std::abs(right_fraction(spec, Sublattice::A, 100) - (1 - f1)) < 4 * sigma);
  CHECK_THROWS_AS(MediumSpec::iid(0.5, 0).family_probability(kOrigin), std::invalid_argument);
}

TEST_CASE("unassigned site class is an error") {
  FamilySpec f;
  f.functions.emplace_back([](double p) { return p; });
  f.assignment = {0, std::nullopt};
  const auto spec = MediumSpec::family(f, 0.5, 1);
  CHECK_NOTHROW(spec.initial_orientation(site_a(1, 1)));
  CHECK_THROWS_AS(spec.initial_orientation(site_b(1, 1)), UnknownClass);
}

TEST_CASE("admissible media are constant on shaded faces") {
  for (int color = 0; color < 3; ++color) {
    const auto spec = MediumSpec::admissible_hex(0.5, color, 11);
    std::size_t right = 0, faces = 0;
    for (int i = -30; i <= 30; ++i) {
      for (int j = -30; j <= 30; ++j) {
        if (face_color({i, j}) != color) continue;
        const auto v = face_vertices({i, j});
        const Orientation o = spec.initial_orientation(v[0]);
        for (const auto& s : v) CHECK(spec.initial_orientation(s) == o);
        right += o == Orientation::Right;
        ++faces;
      }
    }
    const double f = static_cast<double>(right) / static_cast<double>(faces);
    CHECK(std::abs(f - 0.5) < 4 * 0.5 / std::sqrt(static_cast<double>(faces)));
  }
  CHECK_THROWS_AS(MediumSpec::admissible_hex(0.5, 3, 0), std::invalid_argument);
}

TEST_CASE("homogeneous and explicit media") {
  const auto left = MediumSpec::homogeneous(Orientation::Left);
  CHECK(left.initial_orientation(site_b(5, -7)) == Orientation::Left);
  ExplicitTable table;
  table[pack(site_b(1, 1))] = Orientation::Right;
  const auto ex = MediumSpec::explicit_table(table, Orientation::Left);
  CHECK(ex.initial_orientation(site_b(1, 1)) == Orientation::Right);
  CHECK(ex.initial_orientation(site_a(1, 1)) == Orientation::Left);
}

TEST_CASE("visits flip orientations and the dirty count matches a recount") {
  Medium m(MediumSpec::iid(0.5, 3));
  std::mt19937_64 rng(7);
  std::vector<SiteCoord> sites;
  for (int a = -3; a <= 3; ++a) {
    for (int b = -3; b <= 3; ++b) {
      sites.push_back(site_a(a, b));
      sites.push_back(site_b(a, b));
    }
  }
  for (int i = 0; i < 5000; ++i) {
    const SiteCoord s = sites[rng() % sites.size()];
    const Orientation before = m.current_orientation(s);
    if (rng() % 3 == 0) {
      m.retract_visit(s);
    } else {
      CHECK(m.record_visit(s) == before);
    }
    CHECK(m.current_orientation(s) == flip(before));
    if (i % 97 == 0) CHECK(m.dirty_count() == recount_dirty(m, sites));
  }
  CHECK(m.dirty_count() == recount_dirty(m, sites));
  CHECK(m.flipped_sites().size() == m.dirty_count());
}

TEST_CASE("retracting below zero visits stays consistent") {
  Medium m(MediumSpec::homogeneous(Orientation::Left));
  const SiteCoord s = site_b(2, 2);
  CHECK(m.retract_visit(s) == Orientation::Right);
  CHECK(m.visit_count(s) == -1);
  CHECK(m.dirty_count() == 1);
  CHECK(m.record_visit(s) == Orientation::Right);
  CHECK(m.visit_count(s) == 0);
  CHECK(m.dirty_count() == 0);
  CHECK(m.touched_count() == 0);
}

TEST_CASE("snapshots round-trip") {
  Medium m(MediumSpec::iid(0.3, 99));
  std::vector<SiteCoord> region;
  for (int a = -2; a <= 2; ++a) {
    region.push_back(site_a(a, 1));
    region.push_back(site_b(a, -1));
  }
  m.record_visit(region[3]);
  m.record_visit(region[4]);
  const Snapshot snap = m.snapshot(region);
  std::stringstream ss;
  snap.write(ss);
  const Snapshot back = Snapshot::read(ss);
  CHECK(back == snap);
  CHECK(back.kind == "iid");
  CHECK(back.seed == 99);
  const MediumSpec restored = back.restore();
  for (const auto& s : region) CHECK(restored.initial_orientation(s) == m.current_orientation(s));

  std::istringstream bad1("not a snapshot\n");
  CHECK_THROWS_AS(Snapshot::read(bad1), SnapshotFormatError);
  std::istringstream bad2("# medium-snapshot v1 seed=1 kind=iid p=0.5\n1 2 C L\n");
  CHECK_THROWS_AS(Snapshot::read(bad2), SnapshotFormatError);
}

TEST_CASE("threshold edges") {
  CHECK_FALSE(Threshold::from_probability(0.0).right(0));
  CHECK(Threshold::from_probability(1.0).right(~0ULL));
  CHECK(Threshold::from_probability(0.5).value == (1ULL << 63));
}
