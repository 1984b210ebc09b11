#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rotorwalk/lattice.hpp"

using namespace rotorwalk;

namespace {

std::vector<SiteCoord> patch(int r) {
  std::vector<SiteCoord> out;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      out.push_back(site_a(a, b));
      out.push_back(site_b(a, b));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("neighbors match a brute-force distance search") {
  for (const SiteCoord s : patch(6)) {
    std::vector<SiteCoord> mine;
    for (int k = 0; k < 6; ++k) {
      const Direction d(k);
      if (!is_legal(s, d)) {
        CHECK_THROWS_AS(neighbor(s, d), IllegalDirection);
        continue;
      }
      const SiteCoord n = neighbor(s, d);
      CHECK(n == neighbor_unchecked(s, d));
      CHECK(oracle::step_direction(oracle::to_xy(s), oracle::to_xy(n)) == k);
      mine.push_back(n);
    }
    auto brute = oracle::brute_neighbors(s);
    std::sort(mine.begin(), mine.end());
    std::sort(brute.begin(), brute.end());
    CHECK(mine == brute);
  }
}

TEST_CASE("legal directions alternate by sublattice") {
  CHECK(is_legal(kOrigin, Direction(0)));
  CHECK_FALSE(is_legal(kOrigin, Direction(1)));
  CHECK(is_legal(site_b(0, 0), Direction(3)));
  CHECK_FALSE(is_legal(site_b(0, 0), Direction(0)));
  CHECK(neighbor(kOrigin, Direction(0)) == site_b(0, 0));
}

TEST_CASE("stepping along a direction and back is the identity") {
  for (const SiteCoord s : patch(4)) {
    for (int k = 0; k < 6; ++k) {
      const Direction d(k);
      if (!is_legal(s, d)) continue;
      CHECK(neighbor(neighbor(s, d), d.opposite()) == s);
    }
  }
}

TEST_CASE("rotation turns by sixty degrees") {
  CHECK(rotate(Direction(0), Orientation::Right).k == 5);
  CHECK(rotate(Direction(0), Orientation::Left).k == 1);
  CHECK(rotate(Direction(5), Orientation::Left).k == 0);
  for (int k = 0; k < 6; ++k) {
    CHECK(rotate(rotate(Direction(k), Orientation::Left), Orientation::Right).k == k);
  }
}

TEST_CASE("squared norm is exact") {
  for (const SiteCoord s : patch(8)) {
    CHECK(squared_norm(s) == oracle::norm2(s));
    const Point p = embed(s);
    CHECK(std::abs(p.x * p.x + p.y * p.y - static_cast<double>(squared_norm(s))) < 1e-9);
  }
  CHECK(squared_norm(kOrigin) == 0);
  CHECK(squared_norm(site_b(0, 0)) == 1);
}

TEST_CASE("mirror across x = 1/2") {
  for (const SiteCoord s : patch(5)) {
    const Point p = embed(s);
    const Point m = embed(mirror_half(s));
    CHECK(m.x == doctest::Approx(1.0 - p.x));
    CHECK(m.y == doctest::Approx(p.y));
    CHECK(mirror_half(mirror_half(s)) == s);
  }
  CHECK(mirror_half(kOrigin) == site_b(0, 0));
}

TEST_CASE("faces are hexagons of adjacent vertices") {
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      const auto v = face_vertices({i, j});
      CHECK(v[0] == site_a(i, j));
      double cx = 0, cy = 0;
      for (const auto& s : v) {
        cx += embed(s).x / 6;
        cy += embed(s).y / 6;
      }
      double prev_angle = -10;
      for (int k = 0; k < 6; ++k) {
        const auto a = oracle::to_xy(v[k]);
        const auto b = oracle::to_xy(v[(k + 1) % 6]);
        CHECK(oracle::dist2x4(a, b) == 4);
        const Point p = embed(v[k]);
        CHECK((p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy) == doctest::Approx(1.0));
        double ang = std::atan2(p.y - cy, p.x - cx);
        if (k > 0) {
          while (ang < prev_angle) ang += 2 * M_PI;
          CHECK(ang - prev_angle == doctest::Approx(M_PI / 3));
        }
        prev_angle = ang;
      }
    }
  }
}

TEST_CASE("each site has one incident face of each color") {
  for (const SiteCoord s : patch(5)) {
    const auto faces = incident_faces(s);
    std::set<int> colors;
    for (const FaceCoord f : faces) {
      colors.insert(face_color(f));
      const auto v = face_vertices(f);
      CHECK(std::count(v.begin(), v.end(), s) == 1);
    }
    CHECK(colors.size() == 3);
    for (int c = 0; c < 3; ++c) CHECK(face_color(shaded_face_of(s, c)) == c);
  }
  CHECK_THROWS_AS(shaded_face_of(kOrigin, 3), std::invalid_argument);
}

TEST_CASE("faces of one color partition the sites") {
  for (int c = 0; c < 3; ++c) {
    std::set<SiteCoord> covered;
    std::size_t count = 0;
    for (int i = -8; i <= 8; ++i) {
      for (int j = -8; j <= 8; ++j) {
        if (face_color({i, j}) != c) continue;
        for (const auto& s : face_vertices({i, j})) {
          covered.insert(s);
          ++count;
        }
      }
    }
    CHECK(covered.size() == count);
  }
}

TEST_CASE("pack round-trips") {
  for (const SiteCoord s : patch(7)) CHECK(unpack(pack(s)) == s);
  const SiteCoord far{-2000000, 1999999, Sublattice::B};
  CHECK(unpack(pack(far)) == far);
  CHECK(to_string(site_b(-1, 2)) == "B(-1,2)");
}
