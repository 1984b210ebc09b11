#include "rotorwalk/medium.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace rotorwalk {

Threshold Threshold::from_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("probability {} outside [0,1]", p));
  }
  if (p >= 1.0) return {0, true};
  const long double scaled = std::floor(std::ldexp(static_cast<long double>(p), 64));
  return {static_cast<std::uint64_t>(scaled), false};
}

std::string to_string(MediumKind kind) {
  switch (kind) {
    case MediumKind::IID: return "iid";
    case MediumKind::Family: return "family";
    case MediumKind::AdmissibleHex: return "admissible";
    case MediumKind::Homogeneous: return "homogeneous";
    case MediumKind::Explicit: return "explicit";
  }
  return "unknown";
}

FamilySpec example_family() {
  FamilySpec f;
  f.name = "example";
  f.functions.emplace_back([](double p) { return 0.5 * std::cos(std::numbers::pi / 2.0 * p); });
  f.functions.emplace_back([](double p) { return 1.0 - 0.5 * std::cos(std::numbers::pi / 2.0 * p); });
  f.assignment[static_cast<std::size_t>(SiteClass::HMinus)] = 1;
  f.assignment[static_cast<std::size_t>(SiteClass::HPlus)] = 0;
  return f;
}

MediumSpec MediumSpec::iid(double p, std::uint64_t seed) {
  MediumSpec s;
  s.kind_ = MediumKind::IID;
  s.p_ = p;
  s.seed_ = seed;
  s.threshold_ = Threshold::from_probability(p);
  return s;
}

MediumSpec MediumSpec::family(FamilySpec family, double p, std::uint64_t seed) {
  MediumSpec s;
  s.kind_ = MediumKind::Family;
  s.p_ = p;
  s.seed_ = seed;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& idx = family.assignment[c];
    if (!idx) continue;
    if (*idx >= family.functions.size()) {
      throw std::invalid_argument(fmt::format("family assignment index {} out of range", *idx));
    }
    s.class_thresholds_[c] = Threshold::from_probability(family.functions[*idx](p));
  }
  s.family_ = std::make_shared<const FamilySpec>(std::move(family));
  return s;
}

MediumSpec MediumSpec::admissible_hex(double p, int color_class, std::uint64_t seed) {
  if (color_class < 0 || color_class > 2) {
    throw std::invalid_argument(fmt::format("color class {} not in 0..2", color_class));
  }
  MediumSpec s;
  s.kind_ = MediumKind::AdmissibleHex;
  s.p_ = p;
  s.seed_ = seed;
  s.color_class_ = color_class;
  s.threshold_ = Threshold::from_probability(p);
  return s;
}

MediumSpec MediumSpec::homogeneous(Orientation orientation) {
  MediumSpec s;
  s.kind_ = MediumKind::Homogeneous;
  s.fixed_ = orientation;
  s.p_ = orientation == Orientation::Right ? 1.0 : 0.0;
  return s;
}

MediumSpec MediumSpec::explicit_table(ExplicitTable table, Orientation fallback, std::uint64_t seed,
                                      double p) {
  MediumSpec s;
  s.kind_ = MediumKind::Explicit;
  s.fixed_ = fallback;
  s.seed_ = seed;
  s.p_ = p;
  s.table_ = std::make_shared<const ExplicitTable>(std::move(table));
  return s;
}

MediumSpec MediumSpec::with_seed(std::uint64_t seed) const {
  MediumSpec s = *this;
  s.seed_ = seed;
  return s;
}

Orientation MediumSpec::initial_orientation(SiteCoord site) const {
  switch (kind_) {
    case MediumKind::IID:
      return threshold_.right(mix64(seed_ ^ pack(site))) ? Orientation::Right : Orientation::Left;
    case MediumKind::Family: {
      const auto& t = class_thresholds_[static_cast<std::size_t>(site_class(site))];
      if (!t) throw UnknownClass(fmt::format("no probability function assigned to the class of {}",
                                             to_string(site)));
      return t->right(mix64(seed_ ^ pack(site))) ? Orientation::Right : Orientation::Left;
    }
    case MediumKind::AdmissibleHex: {
      const FaceCoord f = shaded_face_of(site, color_class_);
      return threshold_.right(mix64(seed_ ^ pack(site_a(f.i, f.j)))) ? Orientation::Right
                                                                     : Orientation::Left;
    }
    case MediumKind::Homogeneous:
      return fixed_;
    case MediumKind::Explicit: {
      const auto it = table_->find(pack(site));
      return it == table_->end() ? fixed_ : it->second;
    }
  }
  return fixed_;
}

double MediumSpec::family_probability(SiteCoord site) const {
  if (kind_ != MediumKind::Family) throw std::invalid_argument("medium spec is not a Family spec");
  const auto& idx = family_->assignment[static_cast<std::size_t>(site_class(site))];
  if (!idx) throw UnknownClass(fmt::format("no probability function assigned to the class of {}",
                                           to_string(site)));
  return family_->functions[*idx](p_);
}

Orientation initial_orientation(const MediumSpec& spec, SiteCoord site) {
  return spec.initial_orientation(site);
}

double family_probability(const MediumSpec& spec, SiteCoord site) {
  return spec.family_probability(site);
}

// --- Snapshot -------------------------------------------------------------

void Snapshot::write(std::ostream& out) const {
  fmt::print(out, "# medium-snapshot v1 seed={} kind={} p={}\n", seed, kind, p);
  for (const auto& [s, o] : entries) {
    fmt::print(out, "{} {} {} {}\n", s.a, s.b, s.sub == Sublattice::A ? 'A' : 'B', to_char(o));
  }
}

Snapshot Snapshot::read(std::istream& in) {
  Snapshot snap;
  std::string line;
  if (!std::getline(in, line)) throw SnapshotFormatError("empty snapshot");
  {
    std::istringstream hs(line);
    std::string hash, tag, version, seed_kv, kind_kv, p_kv;
    hs >> hash >> tag >> version >> seed_kv >> kind_kv >> p_kv;
    if (hash != "#" || tag != "medium-snapshot" || version != "v1" || !seed_kv.starts_with("seed=") ||
        !kind_kv.starts_with("kind=") || !p_kv.starts_with("p=")) {
      throw SnapshotFormatError("bad snapshot header: " + line);
    }
    try {
      snap.seed = std::stoull(seed_kv.substr(5));
      snap.kind = kind_kv.substr(5);
      snap.p = std::stod(p_kv.substr(2));
    } catch (const std::exception&) {
      throw SnapshotFormatError("bad snapshot header: " + line);
    }
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long a = 0, b = 0;
    std::string sub, orient, extra;
    if (!(ls >> a >> b >> sub >> orient) || (ls >> extra) || (sub != "A" && sub != "B") ||
        (orient != "L" && orient != "R")) {
      throw SnapshotFormatError(fmt::format("bad snapshot record at line {}: {}", lineno, line));
    }
    snap.entries.emplace_back(SiteCoord{static_cast<std::int32_t>(a), static_cast<std::int32_t>(b),
                                        sub == "A" ? Sublattice::A : Sublattice::B},
                              orient == "L" ? Orientation::Left : Orientation::Right);
  }
  std::sort(snap.entries.begin(), snap.entries.end());
  return snap;
}

MediumSpec Snapshot::restore(Orientation fallback) const {
  ExplicitTable table;
  table.reserve(entries.size());
  for (const auto& [s, o] : entries) table[pack(s)] = o;
  return MediumSpec::explicit_table(std::move(table), fallback, seed, p);
}

// --- Medium ---------------------------------------------------------------

Medium::Medium(MediumSpec spec) : spec_(std::move(spec)) {}

Orientation Medium::current_orientation(SiteCoord site) const {
  const auto it = cells_.find(pack(site));
  if (it == cells_.end()) return spec_.initial_orientation(site);
  return (it->second.visits & 1) ? flip(it->second.initial) : it->second.initial;
}

Orientation Medium::record_visit(SiteCoord site) {
  auto [it, inserted] = cells_.try_emplace(pack(site));
  Cell& cell = it->second;
  if (inserted) cell.initial = spec_.initial_orientation(site);
  const bool was_odd = cell.visits & 1;
  const Orientation before = was_odd ? flip(cell.initial) : cell.initial;
  ++cell.visits;
  if (was_odd) {
    --dirty_;
  } else {
    ++dirty_;
  }
  if (cell.visits == 0) cells_.erase(it);
  return before;
}

Orientation Medium::retract_visit(SiteCoord site) {
  auto [it, inserted] = cells_.try_emplace(pack(site));
  Cell& cell = it->second;
  if (inserted) cell.initial = spec_.initial_orientation(site);
  const bool was_odd = cell.visits & 1;
  --cell.visits;
  if (was_odd) {
    --dirty_;
  } else {
    ++dirty_;
  }
  const Orientation now = (cell.visits & 1) ? flip(cell.initial) : cell.initial;
  if (cell.visits == 0) cells_.erase(it);
  return now;
}

std::int64_t Medium::visit_count(SiteCoord site) const {
  const auto it = cells_.find(pack(site));
  return it == cells_.end() ? 0 : it->second.visits;
}

std::vector<SiteCoord> Medium::touched_sites() const {
  std::vector<SiteCoord> out;
  out.reserve(cells_.size());
  for (const auto& [key, cell] : cells_) out.push_back(unpack(key));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SiteCoord> Medium::flipped_sites() const {
  std::vector<SiteCoord> out;
  out.reserve(dirty_);
  for (const auto& [key, cell] : cells_) {
    if (cell.visits & 1) out.push_back(unpack(key));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Snapshot Medium::snapshot(std::span<const SiteCoord> region) const {
  Snapshot snap;
  snap.seed = spec_.seed();
  snap.kind = to_string(spec_.kind());
  snap.p = spec_.p();
  snap.entries.reserve(region.size());
  for (const SiteCoord& s : region) snap.entries.emplace_back(s, current_orientation(s));
  std::sort(snap.entries.begin(), snap.entries.end());
  snap.entries.erase(std::unique(snap.entries.begin(), snap.entries.end()), snap.entries.end());
  return snap;
}

bool Medium::same_flips(const Medium& other) const {
  if (dirty_ != other.dirty_) return false;
  return flipped_sites() == other.flipped_sites();
}

Orientation current_orientation(const Medium& medium, SiteCoord site) {
  return medium.current_orientation(site);
}

void record_visit(Medium& medium, SiteCoord site) { medium.record_visit(site); }

Snapshot snapshot(const Medium& medium, std::span<const SiteCoord> region) {
  return medium.snapshot(region);
}

}  // namespace rotorwalk
