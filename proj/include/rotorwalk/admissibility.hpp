#pragma once

// Hexagon configurations up to rotation and reflection, and admissible
// class tables.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rotorwalk/lattice.hpp"
#include "rotorwalk/medium.hpp"

namespace rotorwalk {

/// Orientations of a face's six vertices, counterclockwise from its A(i,j)
/// vertex. Bit v is set when vertex v holds a right rotator.
struct HexConfig {
  std::uint8_t bits = 0;

  static constexpr int kCount = 64;

  /// Parses six L/R characters; throws std::invalid_argument otherwise.
  static HexConfig parse(std::string_view text);

  constexpr Orientation at(int v) const {
    return (bits >> v) & 1u ? Orientation::Right : Orientation::Left;
  }
  constexpr int right_count() const { return __builtin_popcount(bits); }
  constexpr HexConfig swapped() const { return {static_cast<std::uint8_t>(~bits & 0x3fu)}; }

  friend constexpr bool operator==(HexConfig, HexConfig) = default;
};

std::string to_string(HexConfig config);

inline constexpr int kClassCount = 13;

/// The 12 images under rotations and reflections; index g < 6 is rotation by
/// g vertices, g >= 6 is the reflection v -> -v followed by rotation g-6.
std::array<HexConfig, 12> dihedral_images(HexConfig config);

/// Lexicographically smallest L/R string among the dihedral images.
HexConfig canonical_form(HexConfig config);

/// Canonical representatives in lexicographic order; classId is the index.
const std::array<HexConfig, kClassCount>& class_representatives();

int canonicalize(HexConfig config);

int orbit_size(int class_id);

class TableFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ClassTable {
 public:
  /// "adjacent" (default) or "meta": which six-element two-right orbit joins
  /// the opposite-pair orbit.
  static ClassTable builtin(std::string_view name = "adjacent");

  /// One line per canonical representative: `<LLRRLR> <admissible|nonadmissible>`.
  /// Blank lines and lines starting with '#' are ignored.
  static ClassTable read(std::istream& in, std::string name = "custom");
  static ClassTable load(const std::filesystem::path& path);

  void write(std::ostream& out) const;

  const std::string& name() const { return name_; }
  bool admissible_class(int class_id) const { return admissible_[static_cast<std::size_t>(class_id)]; }
  bool admissible(HexConfig config) const { return admissible_class(canonicalize(config)); }
  int admissible_class_count() const;

  /// Admissible configurations grouped by number of right rotators.
  std::array<int, 7> counts_by_right() const;

 private:
  std::string name_;
  std::array<bool, kClassCount> admissible_{};
};

HexConfig face_config(const Medium& medium, FaceCoord face);
HexConfig face_config(const MediumSpec& spec, FaceCoord face);

struct RegionCheck {
  bool admissible = true;
  std::optional<FaceCoord> offending;
};

/// Checks faces in the given order and stops at the first non-admissible one.
RegionCheck is_admissible_region(const Medium& medium, std::span<const FaceCoord> faces,
                                 const ClassTable& table);

double admissible_probability(double p, const ClassTable& table);

/// Integer coefficients c[0..6] with admissible_probability(p) = sum c[k] p^k.
std::array<std::int64_t, 7> admissible_polynomial(const ClassTable& table);

}  // namespace rotorwalk
