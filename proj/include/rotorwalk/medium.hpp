#pragma once

// Scatterer configurations over the infinite honeycomb lattice.
//
// Initial orientations are never stored: they are a pure function of the
// master seed and the site (or, for the correlated hexagon model, the shaded
// face containing the site). A Medium only keeps per-site visit counts for
// the sites the particle has touched.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "rotorwalk/lattice.hpp"

namespace rotorwalk {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// A right-probability converted to a comparison threshold on a 64-bit hash:
/// right iff hash < floor(p * 2^64), with p >= 1 always right.
struct Threshold {
  std::uint64_t value = 0;
  bool always = false;

  static Threshold from_probability(double p);
  constexpr bool right(std::uint64_t hash) const { return always || hash < value; }
};

enum class MediumKind { IID, Family, AdmissibleHex, Homogeneous, Explicit };

std::string to_string(MediumKind kind);

using ProbabilityFunction = std::function<double(double)>;

/// A finite family of probability functions plus the rule assigning each
/// site class to one of them.
struct FamilySpec {
  std::string name;
  std::vector<ProbabilityFunction> functions;
  /// Index into functions for H- and H+ respectively; nullopt = unassigned.
  std::array<std::optional<std::size_t>, 2> assignment;
};

/// f1(p) = cos(pi p / 2) / 2 on H+, f2(p) = 1 - f1(p) on H-.
FamilySpec example_family();

class UnknownClass : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using ExplicitTable = absl::flat_hash_map<std::uint64_t, Orientation>;

/// Immutable description of how initial orientations are generated.
class MediumSpec {
 public:
  static MediumSpec iid(double p, std::uint64_t seed);
  static MediumSpec family(FamilySpec family, double p, std::uint64_t seed);
  static MediumSpec admissible_hex(double p, int color_class, std::uint64_t seed);
  static MediumSpec homogeneous(Orientation orientation);
  /// Sites missing from the table take the fallback orientation.
  static MediumSpec explicit_table(ExplicitTable table, Orientation fallback = Orientation::Left,
                                   std::uint64_t seed = 0, double p = 0.0);

  MediumKind kind() const { return kind_; }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  int color_class() const { return color_class_; }
  const FamilySpec* family_spec() const { return family_.get(); }

  Orientation initial_orientation(SiteCoord site) const;

  /// Right-probability of the site under a Family spec.
  double family_probability(SiteCoord site) const;

  /// Same spec with a different seed (used for ensemble realizations).
  MediumSpec with_seed(std::uint64_t seed) const;

 private:
  MediumSpec() = default;

  MediumKind kind_ = MediumKind::Homogeneous;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
  int color_class_ = 0;
  Orientation fixed_ = Orientation::Left;
  Threshold threshold_;
  std::array<std::optional<Threshold>, 2> class_thresholds_;
  std::shared_ptr<const FamilySpec> family_;
  std::shared_ptr<const ExplicitTable> table_;
};

Orientation initial_orientation(const MediumSpec& spec, SiteCoord site);
double family_probability(const MediumSpec& spec, SiteCoord site);

/// Current orientations of a finite region, as written by `snapshot`.
struct Snapshot {
  std::uint64_t seed = 0;
  std::string kind;
  double p = 0.0;
  std::vector<std::pair<SiteCoord, Orientation>> entries;  // sorted by site

  void write(std::ostream& out) const;
  static Snapshot read(std::istream& in);

  /// An Explicit spec reproducing these orientations on the region.
  MediumSpec restore(Orientation fallback = Orientation::Left) const;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

class SnapshotFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Live configuration C(t): the spec plus visit counts of touched sites.
/// current(h) = initial(h) * (-1)^visits(h).
class Medium {
 public:
  explicit Medium(MediumSpec spec);

  const MediumSpec& spec() const { return spec_; }

  Orientation initial_orientation(SiteCoord site) const { return spec_.initial_orientation(site); }
  Orientation current_orientation(SiteCoord site) const;

  /// Flips the scatterer at site and returns its orientation before the flip.
  Orientation record_visit(SiteCoord site);
  /// Undoes one record_visit; returns the orientation after un-flipping.
  Orientation retract_visit(SiteCoord site);

  std::int64_t visit_count(SiteCoord site) const;
  /// Number of sites whose current orientation differs from the initial one.
  std::size_t dirty_count() const { return dirty_; }
  std::size_t touched_count() const { return cells_.size(); }
  /// Sorted list of sites with a nonzero visit count.
  std::vector<SiteCoord> touched_sites() const;

  /// Sorted list of sites currently flipped relative to the initial configuration.
  std::vector<SiteCoord> flipped_sites() const;

  Snapshot snapshot(std::span<const SiteCoord> region) const;

  /// Same spec-independent state: identical visit parity on every site.
  bool same_flips(const Medium& other) const;

 private:
  struct Cell {
    std::int32_t visits = 0;
    Orientation initial = Orientation::Left;
  };

  MediumSpec spec_;
  absl::flat_hash_map<std::uint64_t, Cell> cells_;
  std::size_t dirty_ = 0;
};

Orientation current_orientation(const Medium& medium, SiteCoord site);
void record_visit(Medium& medium, SiteCoord site);
Snapshot snapshot(const Medium& medium, std::span<const SiteCoord> region);

}  // namespace rotorwalk
