#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <glom/core.hpp>

namespace glom {

// The 9 glomerulus phenotype classes. The index order is fixed and shared by
// label vectors, frequency vectors and reports; never reorder.
enum class GlomerulusClass : int {
  Normal = 0,
  Sclerosed = 1,
  EndocapillaryHypercellularity = 2,
  MesangialHypercellularity = 3,
  ThickGBM = 4,
  Wireloops = 5,
  HyalineThrombi = 6,
  Crescent = 7,
  SegmentalAdhesion = 8,
};

inline constexpr int kGlomerulusClassCount = 9;

inline const char* to_string(GlomerulusClass c) {
  static const char* names[kGlomerulusClassCount] = {
      "Normal",
      "Sclerosed",
      "Endocapillary Hypercellularity",
      "Mesangial Hypercellularity",
      "ThickGBM",
      "Wireloops",
      "Hyaline Thrombi",
      "Crescent",
      "Segmental Adhesion",
  };
  return names[static_cast<int>(c)];
}

// Short codes used in overlays and tables.
inline const char* short_code(GlomerulusClass c) {
  static const char* codes[kGlomerulusClassCount] = {"NOR", "SCL", "EHC", "MHC", "GBM",
                                                     "WL",  "HT",  "CRE", "SA"};
  return codes[static_cast<int>(c)];
}

// Set of glomerulus classes as a 9-bit mask.
struct LabelSet {
  std::uint16_t bits = 0;

  LabelSet() = default;
  LabelSet(std::initializer_list<GlomerulusClass> cs) {
    for (auto c : cs) insert(c);
  }

  void insert(GlomerulusClass c) { bits |= static_cast<std::uint16_t>(1u << static_cast<int>(c)); }
  bool contains(GlomerulusClass c) const { return (bits >> static_cast<int>(c)) & 1u; }
  bool empty() const { return bits == 0; }
  int size() const {
    int n = 0;
    for (int i = 0; i < kGlomerulusClassCount; ++i) n += (bits >> i) & 1u;
    return n;
  }
  LabelSet operator&(LabelSet o) const { return from_bits(bits & o.bits); }
  LabelSet operator|(LabelSet o) const { return from_bits(bits | o.bits); }
  bool operator==(const LabelSet& o) const { return bits == o.bits; }

  static LabelSet from_bits(std::uint16_t b) {
    LabelSet s;
    s.bits = b;
    return s;
  }

  std::vector<GlomerulusClass> classes() const {
    std::vector<GlomerulusClass> out;
    for (int i = 0; i < kGlomerulusClassCount; ++i)
      if ((bits >> i) & 1u) out.push_back(static_cast<GlomerulusClass>(i));
    return out;
  }
};

// Per-class activation in [0, 1]. Binary for annotated crops, fractional for
// CircleMix outputs.
using LabelVector = std::array<double, kGlomerulusClassCount>;

inline LabelVector label_vector(LabelSet s) {
  LabelVector v{};
  for (int i = 0; i < kGlomerulusClassCount; ++i)
    v[i] = s.contains(static_cast<GlomerulusClass>(i)) ? 1.0 : 0.0;
  return v;
}

// Classes with activation >= 0.5. Used when fractional labels are reduced to
// sets for evaluation and sampling.
inline LabelSet binarize(const LabelVector& v) {
  LabelSet s;
  for (int i = 0; i < kGlomerulusClassCount; ++i)
    if (v[i] >= 0.5) s.insert(static_cast<GlomerulusClass>(i));
  return s;
}

// Lupus Nephritis stage per ISN/RPS.
enum class LNClass : int { I = 0, II = 1, III = 2, IV = 3, V = 4, VI = 5 };

inline constexpr int kLNClassCount = 6;

inline const char* to_string(LNClass c) {
  static const char* names[kLNClassCount] = {"I", "II", "III", "IV", "V", "VI"};
  return names[static_cast<int>(c)];
}

inline std::optional<LNClass> ln_class_from_string(const std::string& s) {
  for (int i = 0; i < kLNClassCount; ++i)
    if (s == to_string(static_cast<LNClass>(i))) return static_cast<LNClass>(i);
  return std::nullopt;
}

namespace detail {
// Lowercase and strip separators so spelling variants collapse to one key.
inline std::string alias_key(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == ' ' || ch == '_' || ch == '-' || ch == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}
}  // namespace detail

// Maps annotation label strings to classes. Ships with the canonical names
// plus spelling variants seen in annotation exports ("Messangial",
// "Cresent", "Hyaline Trombi").
class LabelAliasTable {
public:
  LabelAliasTable() {
    for (int i = 0; i < kGlomerulusClassCount; ++i) {
      const auto c = static_cast<GlomerulusClass>(i);
      add(to_string(c), c);
      add(short_code(c), c);
    }
    add("EndocapillaryHypercellularity", GlomerulusClass::EndocapillaryHypercellularity);
    add("MesangialHypercellularity", GlomerulusClass::MesangialHypercellularity);
    add("Messangial Hypercellularity", GlomerulusClass::MesangialHypercellularity);
    add("Thick GBM", GlomerulusClass::ThickGBM);
    add("Thickened GBM", GlomerulusClass::ThickGBM);
    add("Wire loops", GlomerulusClass::Wireloops);
    add("Wireloop", GlomerulusClass::Wireloops);
    add("HyalineThrombi", GlomerulusClass::HyalineThrombi);
    add("Hyaline Trombi", GlomerulusClass::HyalineThrombi);
    add("Cresent", GlomerulusClass::Crescent);
    add("SegmentalAdhesion", GlomerulusClass::SegmentalAdhesion);
  }

  void add(const std::string& alias, GlomerulusClass c) { table_[detail::alias_key(alias)] = c; }

  std::optional<GlomerulusClass> lookup(const std::string& label) const {
    const auto it = table_.find(detail::alias_key(label));
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  // Resolves or throws a DataError naming the known aliases.
  GlomerulusClass resolve(const std::string& label) const {
    if (auto c = lookup(label)) return *c;
    std::string msg = "unknown glomerulus label \"" + label + "\"; known aliases:";
    for (const auto& [k, v] : table_) msg += " " + k;
    throw DataError(msg);
  }

private:
  std::map<std::string, GlomerulusClass> table_;
};

}  // namespace glom
