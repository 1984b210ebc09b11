#include "rotorwalk/lattice.hpp"

#include <cmath>

#include <fmt/format.h>

namespace rotorwalk {

SiteCoord neighbor(SiteCoord s, Direction d) {
  if (!is_legal(s, d)) {
    throw IllegalDirection(fmt::format("direction {} is not legal at {}", d.k, to_string(s)));
  }
  return neighbor_unchecked(s, d);
}

Point embed(SiteCoord s) {
  static const double kHalfRoot3 = std::sqrt(3.0) / 2.0;
  Point p{1.5 * (s.a + s.b), kHalfRoot3 * (s.a - s.b)};
  if (s.sub == Sublattice::B) p.x += 1.0;
  return p;
}

std::array<SiteCoord, 6> face_vertices(FaceCoord f) {
  return {site_a(f.i, f.j),         site_b(f.i, f.j),     site_a(f.i + 1, f.j),
          site_b(f.i + 1, f.j - 1), site_a(f.i + 1, f.j - 1), site_b(f.i, f.j - 1)};
}

std::array<FaceCoord, 3> incident_faces(SiteCoord s) {
  if (s.sub == Sublattice::A) {
    return {FaceCoord{s.a, s.b}, FaceCoord{s.a - 1, s.b}, FaceCoord{s.a - 1, s.b + 1}};
  }
  return {FaceCoord{s.a, s.b}, FaceCoord{s.a, s.b + 1}, FaceCoord{s.a - 1, s.b + 1}};
}

FaceCoord shaded_face_of(SiteCoord s, int color_class) {
  if (color_class < 0 || color_class > 2) {
    throw std::invalid_argument(fmt::format("color class {} not in 0..2", color_class));
  }
  for (const FaceCoord& f : incident_faces(s)) {
    if (face_color(f) == color_class) return f;
  }
  throw std::logic_error("incident faces do not cover all colors");
}

std::string to_string(SiteCoord s) {
  return fmt::format("{}({},{})", s.sub == Sublattice::A ? 'A' : 'B', s.a, s.b);
}

std::string to_string(FaceCoord f) { return fmt::format("F({},{})", f.i, f.j); }

}  // namespace rotorwalk
