#pragma once

// Honeycomb lattice geometry.
//
// Sites are addressed as A(a,b) or B(a,b). With lattice vectors
// u = (3/2, sqrt(3)/2) and w = (3/2, -sqrt(3)/2):
//
//   embed(A(a,b)) = a*u + b*w
//   embed(B(a,b)) = embed(A(a,b)) + (1, 0)
//
// so every A(a,b)-B(a,b) pair is a horizontal bond. Directions are the six
// unit vectors at k*60 degrees; A-sites emit along even k, B-sites along odd k.

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace rotorwalk {

enum class Sublattice : std::uint8_t { A = 0, B = 1 };

struct SiteCoord {
  std::int32_t a = 0;
  std::int32_t b = 0;
  Sublattice sub = Sublattice::A;

  friend constexpr bool operator==(const SiteCoord&, const SiteCoord&) = default;
  friend constexpr auto operator<=>(const SiteCoord&, const SiteCoord&) = default;
};

constexpr SiteCoord site_a(std::int32_t a, std::int32_t b) { return {a, b, Sublattice::A}; }
constexpr SiteCoord site_b(std::int32_t a, std::int32_t b) { return {a, b, Sublattice::B}; }

/// The particle's starting site, embedded at (0,0).
inline constexpr SiteCoord kOrigin = site_a(0, 0);

/// Packs a site into a 64-bit key: a in bits 32..63, b in bits 1..31, sub in bit 0.
/// Valid while |b| < 2^30.
constexpr std::uint64_t pack(SiteCoord s) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.a)) << 32) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.b) & 0x7fffffffu) << 1) |
         static_cast<std::uint64_t>(s.sub);
}

constexpr SiteCoord unpack(std::uint64_t key) {
  const auto a = static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 32));
  auto b31 = static_cast<std::uint32_t>((key >> 1) & 0x7fffffffu);
  if (b31 & 0x40000000u) b31 |= 0x80000000u;  // sign-extend
  return {a, static_cast<std::int32_t>(b31), static_cast<Sublattice>(key & 1u)};
}

/// Scatterer orientation: -1 rotates the particle to its left, +1 to its right.
enum class Orientation : std::int8_t { Left = -1, Right = 1 };

constexpr Orientation flip(Orientation o) {
  return o == Orientation::Left ? Orientation::Right : Orientation::Left;
}
constexpr char to_char(Orientation o) { return o == Orientation::Left ? 'L' : 'R'; }

class IllegalDirection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unit velocity at angle k*60 degrees, k in 0..5.
struct Direction {
  std::uint8_t k = 0;

  constexpr Direction() = default;
  constexpr explicit Direction(int value) : k(static_cast<std::uint8_t>(((value % 6) + 6) % 6)) {}

  constexpr Direction opposite() const { return Direction(k + 3); }
  friend constexpr bool operator==(Direction, Direction) = default;
};

/// Right (+1) turns clockwise by 60 degrees, left (-1) counterclockwise.
constexpr Direction rotate(Direction d, Orientation o) {
  return o == Orientation::Right ? Direction(d.k + 5) : Direction(d.k + 1);
}

constexpr bool is_legal(SiteCoord s, Direction d) {
  return (d.k & 1u) == static_cast<unsigned>(s.sub);
}

SiteCoord neighbor(SiteCoord s, Direction d);

/// neighbor() without the legality check; for the simulation hot loop.
constexpr SiteCoord neighbor_unchecked(SiteCoord s, Direction d) {
  switch (d.k) {
    case 0: return site_b(s.a, s.b);
    case 2: return site_b(s.a, s.b - 1);
    case 4: return site_b(s.a - 1, s.b);
    case 1: return site_a(s.a + 1, s.b);
    case 3: return site_a(s.a, s.b);
    default: return site_a(s.a, s.b + 1);
  }
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

Point embed(SiteCoord s);

/// Squared Euclidean distance of embed(s) from the origin. It is always an
/// integer: 3(a^2+ab+b^2) for A-sites, plus 3(a+b)+1 for B-sites.
constexpr std::int64_t squared_norm(SiteCoord s) {
  const std::int64_t a = s.a;
  const std::int64_t b = s.b;
  std::int64_t r = 3 * (a * a + a * b + b * b);
  if (s.sub == Sublattice::B) r += 3 * (a + b) + 1;
  return r;
}

/// Reflection across the line x = 1/2 (the perpendicular bisector of the
/// origin's horizontal bond): A(a,b) <-> B(-b,-a).
constexpr SiteCoord mirror_half(SiteCoord s) {
  return s.sub == Sublattice::A ? site_b(-s.b, -s.a) : site_a(-s.b, -s.a);
}

/// Horizontal-bond site classes: A-sites are the left end (H-), B-sites the right end (H+).
enum class SiteClass : std::uint8_t { HMinus = 0, HPlus = 1 };

constexpr SiteClass site_class(SiteCoord s) {
  return s.sub == Sublattice::A ? SiteClass::HMinus : SiteClass::HPlus;
}

/// Hexagon F(i,j) with vertices, counterclockwise from A(i,j):
/// A(i,j), B(i,j), A(i+1,j), B(i+1,j-1), A(i+1,j-1), B(i,j-1).
struct FaceCoord {
  std::int32_t i = 0;
  std::int32_t j = 0;

  friend constexpr bool operator==(const FaceCoord&, const FaceCoord&) = default;
  friend constexpr auto operator<=>(const FaceCoord&, const FaceCoord&) = default;
};

constexpr int face_color(FaceCoord f) { return (((f.i - f.j) % 3) + 3) % 3; }

std::array<SiteCoord, 6> face_vertices(FaceCoord f);
std::array<FaceCoord, 3> incident_faces(SiteCoord s);

/// The unique incident face whose color is color_class (0, 1 or 2).
FaceCoord shaded_face_of(SiteCoord s, int color_class);

std::string to_string(SiteCoord s);
std::string to_string(FaceCoord f);

}  // namespace rotorwalk

template <>
struct std::hash<rotorwalk::SiteCoord> {
  std::size_t operator()(const rotorwalk::SiteCoord& s) const noexcept {
    return std::hash<std::uint64_t>{}(rotorwalk::pack(s));
  }
};
