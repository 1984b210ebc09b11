#include "rotorwalk/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace rotorwalk {

namespace {

constexpr HexConfig rotated(HexConfig c, int g) {
  const unsigned b = c.bits;
  return {static_cast<std::uint8_t>(((b << g) | (b >> (6 - g))) & 0x3fu)};
}

constexpr HexConfig reflected(HexConfig c) {
  std::uint8_t out = 0;
  for (int v = 0; v < 6; ++v) {
    if ((c.bits >> v) & 1u) out |= static_cast<std::uint8_t>(1u << ((6 - v) % 6));
  }
  return {out};
}

std::array<HexConfig, kClassCount> build_representatives() {
  std::array<HexConfig, kClassCount> reps{};
  std::vector<std::string> seen;
  for (int b = 0; b < HexConfig::kCount; ++b) {
    const std::string s = to_string(canonical_form({static_cast<std::uint8_t>(b)}));
    if (std::find(seen.begin(), seen.end(), s) == seen.end()) seen.push_back(s);
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < reps.size(); ++i) reps[i] = HexConfig::parse(seen.at(i));
  return reps;
}

std::array<int, HexConfig::kCount> build_class_index() {
  std::array<int, HexConfig::kCount> index{};
  const auto& reps = class_representatives();
  for (int b = 0; b < HexConfig::kCount; ++b) {
    const HexConfig canon = canonical_form({static_cast<std::uint8_t>(b)});
    index[static_cast<std::size_t>(b)] =
        static_cast<int>(std::find(reps.begin(), reps.end(), canon) - reps.begin());
  }
  return index;
}

const std::array<int, HexConfig::kCount>& class_index() {
  static const auto index = build_class_index();
  return index;
}

void validate_closure(const std::array<bool, kClassCount>& admissible) {
  const auto& reps = class_representatives();
  for (int c = 0; c < kClassCount; ++c) {
    const int mirror = canonicalize(reps[static_cast<std::size_t>(c)].swapped());
    if (admissible[static_cast<std::size_t>(c)] != admissible[static_cast<std::size_t>(mirror)]) {
      throw TableFormatError(fmt::format("table not closed under left/right exchange: {} vs {}",
                                         to_string(reps[static_cast<std::size_t>(c)]),
                                         to_string(reps[static_cast<std::size_t>(mirror)])));
    }
  }
}

}  // namespace

HexConfig HexConfig::parse(std::string_view text) {
  if (text.size() != 6) {
    throw std::invalid_argument(fmt::format("hex config '{}' must have 6 characters", text));
  }
  HexConfig c;
  for (int v = 0; v < 6; ++v) {
    const char ch = text[static_cast<std::size_t>(v)];
    if (ch == 'R') {
      c.bits |= static_cast<std::uint8_t>(1u << v);
    } else if (ch != 'L') {
      throw std::invalid_argument(fmt::format("hex config '{}' contains '{}'", text, ch));
    }
  }
  return c;
}

std::string to_string(HexConfig config) {
  std::string s(6, 'L');
  for (int v = 0; v < 6; ++v) s[static_cast<std::size_t>(v)] = to_char(config.at(v));
  return s;
}

std::array<HexConfig, 12> dihedral_images(HexConfig config) {
  std::array<HexConfig, 12> out{};
  const HexConfig mirrored = reflected(config);
  for (int g = 0; g < 6; ++g) {
    out[static_cast<std::size_t>(g)] = rotated(config, g);
    out[static_cast<std::size_t>(g + 6)] = rotated(mirrored, g);
  }
  return out;
}

HexConfig canonical_form(HexConfig config) {
  const auto images = dihedral_images(config);
  return *std::min_element(images.begin(), images.end(), [](HexConfig x, HexConfig y) {
    return to_string(x) < to_string(y);
  });
}

const std::array<HexConfig, kClassCount>& class_representatives() {
  static const auto reps = build_representatives();
  return reps;
}

int canonicalize(HexConfig config) { return class_index()[config.bits & 0x3fu]; }

int orbit_size(int class_id) {
  if (class_id < 0 || class_id >= kClassCount) {
    throw std::out_of_range(fmt::format("class id {} out of range", class_id));
  }
  const auto& index = class_index();
  return static_cast<int>(std::count(index.begin(), index.end(), class_id));
}

// --- ClassTable -------------------------------------------------------------

ClassTable ClassTable::builtin(std::string_view name) {
  std::vector<std::string_view> members;
  if (name == "adjacent") {
    members = {"LLLLLL", "LLLLRR", "LLRLLR", "LRLRLR", "LLRRRR", "LRRLRR", "RRRRRR"};
  } else if (name == "meta") {
    members = {"LLLLLL", "LLLRLR", "LLRLLR", "LRLRLR", "LRLRRR", "LRRLRR", "RRRRRR"};
  } else {
    throw std::invalid_argument(fmt::format("unknown builtin table '{}'", name));
  }
  ClassTable t;
  t.name_ = std::string(name);
  for (const auto m : members) t.admissible_[static_cast<std::size_t>(canonicalize(HexConfig::parse(m)))] = true;
  return t;
}

ClassTable ClassTable::read(std::istream& in, std::string name) {
  ClassTable t;
  t.name_ = std::move(name);
  std::array<bool, kClassCount> seen{};
  const auto& reps = class_representatives();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string config, verdict, extra;
    if (!(ls >> config >> verdict) || (ls >> extra)) {
      throw TableFormatError(fmt::format("line {}: expected '<config> <verdict>'", lineno));
    }
    HexConfig c;
    try {
      c = HexConfig::parse(config);
    } catch (const std::invalid_argument& e) {
      throw TableFormatError(fmt::format("line {}: {}", lineno, e.what()));
    }
    const int id = canonicalize(c);
    if (reps[static_cast<std::size_t>(id)] != c) {
      throw TableFormatError(fmt::format("line {}: {} is not canonical (use {})", lineno, config,
                                         to_string(reps[static_cast<std::size_t>(id)])));
    }
    if (seen[static_cast<std::size_t>(id)]) {
      throw TableFormatError(fmt::format("line {}: duplicate class {}", lineno, config));
    }
    seen[static_cast<std::size_t>(id)] = true;
    if (verdict == "admissible") {
      t.admissible_[static_cast<std::size_t>(id)] = true;
    } else if (verdict != "nonadmissible") {
      throw TableFormatError(fmt::format("line {}: unknown verdict '{}'", lineno, verdict));
    }
  }
  for (int c = 0; c < kClassCount; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw TableFormatError(fmt::format("missing class {}", to_string(reps[static_cast<std::size_t>(c)])));
    }
  }
  validate_closure(t.admissible_);
  return t;
}

ClassTable ClassTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure(fmt::format("cannot open table file {}", path.string()));
  return read(in, path.stem().string());
}

void ClassTable::write(std::ostream& out) const {
  for (int c = 0; c < kClassCount; ++c) {
    out << to_string(class_representatives()[static_cast<std::size_t>(c)]) << ' '
        << (admissible_class(c) ? "admissible" : "nonadmissible") << '\n';
  }
}

int ClassTable::admissible_class_count() const {
  return static_cast<int>(std::count(admissible_.begin(), admissible_.end(), true));
}

std::array<int, 7> ClassTable::counts_by_right() const {
  std::array<int, 7> counts{};
  for (int b = 0; b < HexConfig::kCount; ++b) {
    const HexConfig c{static_cast<std::uint8_t>(b)};
    if (admissible(c)) ++counts[static_cast<std::size_t>(c.right_count())];
  }
  return counts;
}

// --- media ------------------------------------------------------------------

HexConfig face_config(const Medium& medium, FaceCoord face) {
  HexConfig c;
  const auto verts = face_vertices(face);
  for (int v = 0; v < 6; ++v) {
    if (medium.current_orientation(verts[static_cast<std::size_t>(v)]) == Orientation::Right) {
      c.bits |= static_cast<std::uint8_t>(1u << v);
    }
  }
  return c;
}

HexConfig face_config(const MediumSpec& spec, FaceCoord face) {
  HexConfig c;
  const auto verts = face_vertices(face);
  for (int v = 0; v < 6; ++v) {
    if (spec.initial_orientation(verts[static_cast<std::size_t>(v)]) == Orientation::Right) {
      c.bits |= static_cast<std::uint8_t>(1u << v);
    }
  }
  return c;
}

RegionCheck is_admissible_region(const Medium& medium, std::span<const FaceCoord> faces,
                                 const ClassTable& table) {
  for (const FaceCoord& f : faces) {
    if (!table.admissible(face_config(medium, f))) return {false, f};
  }
  return {};
}

double admissible_probability(double p, const ClassTable& table) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("p={} outside [0,1]", p));
  const auto counts = table.counts_by_right();
  double total = 0.0;
  for (int k = 0; k <= 6; ++k) {
    total += counts[static_cast<std::size_t>(k)] * std::pow(p, k) * std::pow(1.0 - p, 6 - k);
  }
  return total;
}

std::array<std::int64_t, 7> admissible_polynomial(const ClassTable& table) {
  // n_k p^k (1-p)^(6-k) = n_k sum_j C(6-k, j) (-1)^j p^(k+j)
  constexpr std::array<std::array<std::int64_t, 7>, 7> binom = {{
      {1, 0, 0, 0, 0, 0, 0},
      {1, 1, 0, 0, 0, 0, 0},
      {1, 2, 1, 0, 0, 0, 0},
      {1, 3, 3, 1, 0, 0, 0},
      {1, 4, 6, 4, 1, 0, 0},
      {1, 5, 10, 10, 5, 1, 0},
      {1, 6, 15, 20, 15, 6, 1},
  }};
  const auto counts = table.counts_by_right();
  std::array<std::int64_t, 7> coeff{};
  for (int k = 0; k <= 6; ++k) {
    for (int j = 0; j <= 6 - k; ++j) {
      const std::int64_t sign = (j % 2 == 0) ? 1 : -1;
      coeff[static_cast<std::size_t>(k + j)] +=
          sign * counts[static_cast<std::size_t>(k)] * binom[static_cast<std::size_t>(6 - k)][static_cast<std::size_t>(j)];
    }
  }
  return coeff;
}

}  // namespace rotorwalk
