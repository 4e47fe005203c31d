#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <glom/augment.hpp>
#include <glom/geometry.hpp>
#include <glom/image.hpp>
#include <glom/labels.hpp>
#include <glom/rng.hpp>
#include <glom/stain.hpp>

namespace glom {

// Rendering recipe for one glomerulus class, expressed as stain
// concentrations (pas = magenta PAS stain, hem = blue-purple nuclear stain).
struct GlomerulusStyle {
  double base_pas = 0.45, base_hem = 0.18;  // interior wash
  double ring_thickness = 0.045;            // capsule ring, fraction of radius
  double ring_pas = 0.85, ring_hem = 0.30;
  double dot_density = 0.06;  // fraction of interior covered by nuclei dots
  double dot_pas = 0.35, dot_hem = 1.10;
  double dot_radius_limit = 1.0;   // dots allowed inside this normalized radius
  double inner_ring_radius = 0.0;  // 0 = none
  double inner_thickness = 0.07;
  double inner_pas = 1.25, inner_hem = 0.35;
  int blob_count = 0;  // large bright blobs
  double blob_pas = 1.35, blob_hem = 0.15;
  bool crescent = false;
  double cres_pas = 0.55, cres_hem = 1.25;
  bool adhesion = false;
  double adh_pas = 1.10, adh_hem = 0.90;
  double eccentricity = 0.12;

  bool operator==(const GlomerulusStyle&) const = default;
};

inline std::array<GlomerulusStyle, kGlomerulusClassCount> default_class_styles() {
  std::array<GlomerulusStyle, kGlomerulusClassCount> styles{};
  // Normal: defaults.
  styles[1].base_pas = 0.55;  // Sclerosed: dense dark interior
  styles[1].base_hem = 1.05;
  styles[1].ring_pas = 0.60;
  styles[1].ring_hem = 0.95;
  styles[1].dot_density = 0.0;
  styles[2].dot_density = 0.55;  // Endocapillary: dense nuclei everywhere
  styles[2].dot_pas = 0.35;
  styles[2].dot_hem = 1.30;
  styles[3].dot_density = 0.50;  // Mesangial: central magenta blobs
  styles[3].dot_pas = 1.00;
  styles[3].dot_hem = 0.85;
  styles[3].dot_radius_limit = 0.55;
  styles[4].ring_thickness = 0.16;  // ThickGBM
  styles[4].ring_pas = 1.30;
  styles[4].ring_hem = 0.25;
  styles[5].inner_ring_radius = 0.55;  // Wireloops
  styles[6].blob_count = 4;            // Hyaline thrombi
  styles[7].crescent = true;           // Crescent
  styles[8].adhesion = true;           // Segmental adhesion
  return styles;
}

struct SynthSpec {
  int slide_width = 1024;
  int slide_height = 512;
  int min_glomeruli = 6;
  int max_glomeruli = 10;
  double min_radius = 36.0;
  double max_radius = 58.0;
  double placement_margin = 3.0;  // blank pixels required between boxes
  int placement_retries = 300;
  double background_pas = 0.16;
  double background_hem = 0.05;
  double background_noise = 0.04;
  double basis_jitter = 0.05;      // per-slide stain matrix perturbation
  double multilabel_prob = 0.0;    // chance of one extra class per glomerulus
  std::array<GlomerulusStyle, kGlomerulusClassCount> class_styles = default_class_styles();
  std::uint64_t seed = 1;

  void validate() const {
    if (slide_width <= 0 || slide_height <= 0) throw InvalidArgument("SynthSpec: bad slide size");
    if (min_glomeruli < 0 || max_glomeruli < min_glomeruli)
      throw InvalidArgument("SynthSpec: bad glomerulus count range");
    if (min_radius <= 2.0 || max_radius < min_radius)
      throw InvalidArgument("SynthSpec: bad radius range");
    if (2.0 * max_radius * 1.3 > std::min(slide_width, slide_height))
      throw InvalidArgument("SynthSpec: glomeruli cannot fit within slide bounds");
    for (int i = 0; i < kGlomerulusClassCount; ++i)
      for (int j = i + 1; j < kGlomerulusClassCount; ++j)
        if (class_styles[i] == class_styles[j])
          throw InvalidArgument("SynthSpec: class styles must be pairwise distinct");
  }
};

struct SlideAnnotation {
  BoundingBox box;
  LabelSet labels;
};

struct SyntheticSlide {
  RGBImage image;
  std::vector<SlideAnnotation> annotations;
};

namespace detail {

// Concentration canvas the renderer draws into; converted to RGB once.
struct ConcCanvas {
  int width = 0, height = 0;
  std::vector<float> pas, hem;

  ConcCanvas(int w, int h)
      : width(w), height(h), pas(static_cast<std::size_t>(w) * h, 0.f),
        hem(static_cast<std::size_t>(w) * h, 0.f) {}

  void set(int x, int y, double p, double h) {
    const std::size_t i = static_cast<std::size_t>(y) * width + x;
    pas[i] = static_cast<float>(p);
    hem[i] = static_cast<float>(h);
  }
};

inline void fill_background(ConcCanvas& canvas, const SynthSpec& spec, Rng& rng) {
  const double px = rng.uniform(0.0, 6.283185307179586);
  const double py = rng.uniform(0.0, 6.283185307179586);
  const double fx = rng.uniform(0.004, 0.012);
  const double fy = rng.uniform(0.004, 0.012);
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      const double wash = 0.03 * std::sin(fx * x + px) * std::sin(fy * y + py);
      const double noise_p = rng.uniform(-spec.background_noise, spec.background_noise);
      const double noise_h = rng.uniform(-spec.background_noise * 0.5, spec.background_noise * 0.5);
      canvas.set(x, y, std::max(0.0, spec.background_pas + wash + noise_p),
                 std::max(0.0, spec.background_hem + noise_h));
    }
  }
}

struct EllipseFrame {
  double cx, cy;      // center
  double a, b;        // semi-axes
  double cosr, sinr;  // rotation

  // Normalized disc coordinates: |(u,v)| <= 1 inside the ellipse.
  void disc_coords(double x, double y, double& u, double& v) const {
    const double dx = x - cx, dy = y - cy;
    u = (cosr * dx + sinr * dy) / a;
    v = (-sinr * dx + cosr * dy) / b;
  }

  BoundingBox bounds() const {
    const double wx = std::sqrt(a * a * cosr * cosr + b * b * sinr * sinr);
    const double wy = std::sqrt(a * a * sinr * sinr + b * b * cosr * cosr);
    return {cx - wx, cy - wy, cx + wx, cy + wy};
  }
};

// Stamps one glomerulus onto the canvas. Multi-label sets superimpose each
// class's features over a shared interior.
inline void draw_glomerulus(ConcCanvas& canvas, const SynthSpec& spec, const EllipseFrame& e,
                            LabelSet classes, Rng& rng) {
  const auto& styles = spec.class_styles;

  // Interior wash: Sclerosed wins, otherwise the first present class.
  double base_pas = styles[0].base_pas, base_hem = styles[0].base_hem;
  for (int c = 0; c < kGlomerulusClassCount; ++c)
    if (classes.contains(static_cast<GlomerulusClass>(c))) {
      base_pas = styles[c].base_pas;
      base_hem = styles[c].base_hem;
      break;
    }
  if (classes.contains(GlomerulusClass::Sclerosed)) {
    base_pas = styles[1].base_pas;
    base_hem = styles[1].base_hem;
  }

  // Outer ring: thickest present class wins.
  double ring_t = 0.0, ring_pas = 0.0, ring_hem = 0.0;
  for (int c = 0; c < kGlomerulusClassCount; ++c)
    if (classes.contains(static_cast<GlomerulusClass>(c)) &&
        styles[c].ring_thickness > ring_t) {
      ring_t = styles[c].ring_thickness;
      ring_pas = styles[c].ring_pas;
      ring_hem = styles[c].ring_hem;
    }

  const GlomerulusStyle* wire = nullptr;
  bool crescent = false, adhesion = false;
  double cres_pas = 0, cres_hem = 0, adh_pas = 0, adh_hem = 0;
  for (int c = 0; c < kGlomerulusClassCount; ++c) {
    if (!classes.contains(static_cast<GlomerulusClass>(c))) continue;
    if (styles[c].inner_ring_radius > 0.0) wire = &styles[c];
    if (styles[c].crescent) {
      crescent = true;
      cres_pas = styles[c].cres_pas;
      cres_hem = styles[c].cres_hem;
    }
    if (styles[c].adhesion) {
      adhesion = true;
      adh_pas = styles[c].adh_pas;
      adh_hem = styles[c].adh_hem;
    }
  }
  const double cres_theta = rng.uniform(0.0, 6.283185307179586);
  const double adh_psi = rng.uniform(0.0, 6.283185307179586);

  const BoundingBox bb = e.bounds();
  const int x0 = std::max(0, static_cast<int>(std::floor(bb.x_min)));
  const int y0 = std::max(0, static_cast<int>(std::floor(bb.y_min)));
  const int x1 = std::min(canvas.width - 1, static_cast<int>(std::ceil(bb.x_max)));
  const int y1 = std::min(canvas.height - 1, static_cast<int>(std::ceil(bb.y_max)));

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double u, v;
      e.disc_coords(x + 0.5, y + 0.5, u, v);
      const double rho = std::sqrt(u * u + v * v);
      if (rho > 1.0) continue;
      double p = base_pas, h = base_hem;
      if (ring_t > 0.0 && rho >= 1.0 - ring_t) {
        p = ring_pas;
        h = ring_hem;
      } else if (wire && std::abs(rho - wire->inner_ring_radius) <= wire->inner_thickness) {
        p = wire->inner_pas;
        h = wire->inner_hem;
      }
      if (crescent && rho >= 0.58 && rho < 1.0 - ring_t) {
        double ang = std::atan2(v, u) - cres_theta;
        ang = std::fmod(ang, 6.283185307179586);
        if (ang < 0) ang += 6.283185307179586;
        if (ang < 3.141592653589793) {
          p = cres_pas;
          h = cres_hem;
        }
      }
      if (adhesion) {
        const double s = u * std::cos(adh_psi) + v * std::sin(adh_psi);
        if (s > 0.62) {
          p = adh_pas;
          h = adh_hem;
        }
      }
      canvas.set(x, y, p, h);
    }
  }

  // Nuclei dots / mesangial blobs per present class.
  const double R = 0.5 * (e.a + e.b);
  for (int c = 0; c < kGlomerulusClassCount; ++c) {
    if (!classes.contains(static_cast<GlomerulusClass>(c))) continue;
    const auto& st = styles[c];
    if (st.dot_density <= 0.0) continue;
    const double dot_r = std::max(1.2, R * 0.05);
    const double region_area =
        3.141592653589793 * e.a * e.b * st.dot_radius_limit * st.dot_radius_limit;
    int n = static_cast<int>(st.dot_density * region_area / (3.141592653589793 * dot_r * dot_r));
    n = std::min(n, 500);
    for (int d = 0; d < n; ++d) {
      // Uniform point in the allowed disc region, mapped through the ellipse.
      const double ang = rng.uniform(0.0, 6.283185307179586);
      const double rad = st.dot_radius_limit * std::sqrt(rng.uniform()) * 0.96;
      const double du = rad * std::cos(ang), dv = rad * std::sin(ang);
      const double px = e.cx + e.cosr * du * e.a - e.sinr * dv * e.b;
      const double py = e.cy + e.sinr * du * e.a + e.cosr * dv * e.b;
      const int dx0 = std::max(0, static_cast<int>(px - dot_r - 1));
      const int dy0 = std::max(0, static_cast<int>(py - dot_r - 1));
      const int dx1 = std::min(canvas.width - 1, static_cast<int>(px + dot_r + 1));
      const int dy1 = std::min(canvas.height - 1, static_cast<int>(py + dot_r + 1));
      for (int yy = dy0; yy <= dy1; ++yy)
        for (int xx = dx0; xx <= dx1; ++xx) {
          const double ddx = xx + 0.5 - px, ddy = yy + 0.5 - py;
          if (ddx * ddx + ddy * ddy > dot_r * dot_r) continue;
          double uu, vv;
          e.disc_coords(xx + 0.5, yy + 0.5, uu, vv);
          if (uu * uu + vv * vv <= 0.96 * 0.96) canvas.set(xx, yy, st.dot_pas, st.dot_hem);
        }
    }
  }

  // Large bright blobs (thrombi).
  for (int c = 0; c < kGlomerulusClassCount; ++c) {
    if (!classes.contains(static_cast<GlomerulusClass>(c))) continue;
    const auto& st = styles[c];
    for (int k = 0; k < st.blob_count; ++k) {
      const double ang = rng.uniform(0.0, 6.283185307179586);
      const double rad = 0.65 * std::sqrt(rng.uniform());
      const double du = rad * std::cos(ang), dv = rad * std::sin(ang);
      const double px = e.cx + e.cosr * du * e.a - e.sinr * dv * e.b;
      const double py = e.cy + e.sinr * du * e.a + e.cosr * dv * e.b;
      const double br = R * rng.uniform(0.10, 0.15);
      const int dx0 = std::max(0, static_cast<int>(px - br - 1));
      const int dy0 = std::max(0, static_cast<int>(py - br - 1));
      const int dx1 = std::min(canvas.width - 1, static_cast<int>(px + br + 1));
      const int dy1 = std::min(canvas.height - 1, static_cast<int>(py + br + 1));
      for (int yy = dy0; yy <= dy1; ++yy)
        for (int xx = dx0; xx <= dx1; ++xx) {
          const double ddx = xx + 0.5 - px, ddy = yy + 0.5 - py;
          if (ddx * ddx + ddy * ddy > br * br) continue;
          double uu, vv;
          e.disc_coords(xx + 0.5, yy + 0.5, uu, vv);
          if (uu * uu + vv * vv <= 0.92 * 0.92) canvas.set(xx, yy, st.blob_pas, st.blob_hem);
        }
    }
  }
}

inline StainMatrix jittered_basis(double jitter, Rng& rng) {
  StainMatrix w = StainMatrix::canonical();
  for (int j = 0; j < 2; ++j) {
    auto col = w.column(j);
    for (int c = 0; c < 3; ++c) col[c] = std::max(0.01, col[c] + rng.uniform(-jitter, jitter));
    w.set_column(j, StainMatrix::normalized(col));
  }
  canonical_order(w);
  return w;
}

// Converts the concentration canvas through the slide's stain basis. Channel
// OD is capped at 1.45 so 8-bit quantization keeps the stain structure.
inline RGBImage develop(const ConcCanvas& canvas, const StainMatrix& w) {
  ODImage od(canvas.width, canvas.height);
  for (std::size_t p = 0; p < canvas.pas.size(); ++p) {
    std::array<double, 3> pix;
    double peak = 0.0;
    for (int c = 0; c < 3; ++c) {
      pix[c] = w(c, 0) * canvas.hem[p] + w(c, 1) * canvas.pas[p];
      peak = std::max(peak, pix[c]);
    }
    const double rescale = peak > 1.45 ? 1.45 / peak : 1.0;
    for (int c = 0; c < 3; ++c) od.values[3 * p + c] = static_cast<float>(pix[c] * rescale);
  }
  return od_to_rgb(od);
}

}  // namespace detail

// Renders a single glomerulus crop (tissue background, centered ellipse).
// Deterministic under (class_set, side, seed, spec).
inline RGBImage render_glomerulus(LabelSet class_set, int side, std::uint64_t seed,
                                  const SynthSpec& spec = {}) {
  if (class_set.empty()) throw InvalidArgument("render_glomerulus: empty class set");
  if (side < 16) throw InvalidArgument("render_glomerulus: side too small");
  Rng rng(derive_seed(seed, 0x91011));
  detail::ConcCanvas canvas(side, side);
  detail::fill_background(canvas, spec, rng);

  double ecc_max = 0.0;
  for (int c = 0; c < kGlomerulusClassCount; ++c)
    if (class_set.contains(static_cast<GlomerulusClass>(c)))
      ecc_max = std::max(ecc_max, spec.class_styles[c].eccentricity);
  const double ecc = rng.uniform(0.0, ecc_max);
  const double rot = rng.uniform(0.0, 3.141592653589793);
  const double R = side * rng.uniform(0.32, 0.38);
  detail::EllipseFrame frame{side * 0.5, side * 0.5, R * (1.0 + ecc), R / (1.0 + ecc),
                             std::cos(rot), std::sin(rot)};
  detail::draw_glomerulus(canvas, spec, frame, class_set, rng);
  const StainMatrix basis = detail::jittered_basis(spec.basis_jitter, rng);
  return detail::develop(canvas, basis);
}

// Renders a full slide containing the given glomerulus label sets, placed
// without overlap. Throws DataError("spec too dense") when placement fails.
inline SyntheticSlide render_slide(const SynthSpec& spec,
                                   const std::vector<LabelSet>& glomeruli, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, 0x510de));
  detail::ConcCanvas canvas(spec.slide_width, spec.slide_height);
  detail::fill_background(canvas, spec, rng);

  SyntheticSlide slide;
  std::vector<BoundingBox> placed;
  for (const LabelSet& classes : glomeruli) {
    if (classes.empty()) throw InvalidArgument("render_slide: empty class set");
    double ecc_max = 0.0;
    for (int c = 0; c < kGlomerulusClassCount; ++c)
      if (classes.contains(static_cast<GlomerulusClass>(c)))
        ecc_max = std::max(ecc_max, spec.class_styles[c].eccentricity);

    bool placed_ok = false;
    for (int attempt = 0; attempt < spec.placement_retries; ++attempt) {
      const double R = rng.uniform(spec.min_radius, spec.max_radius);
      const double ecc = rng.uniform(0.0, ecc_max);
      const double rot = rng.uniform(0.0, 3.141592653589793);
      detail::EllipseFrame frame{0, 0, R * (1.0 + ecc), R / (1.0 + ecc), std::cos(rot),
                                 std::sin(rot)};
      const BoundingBox local = frame.bounds();  // centered at origin
      const double wx = local.x_max, wy = local.y_max;
      frame.cx = rng.uniform(wx + spec.placement_margin + 1.0,
                             spec.slide_width - wx - spec.placement_margin - 1.0);
      frame.cy = rng.uniform(wy + spec.placement_margin + 1.0,
                             spec.slide_height - wy - spec.placement_margin - 1.0);
      const BoundingBox box = frame.bounds();
      bool collides = false;
      for (const auto& other : placed) {
        const BoundingBox grown{other.x_min - spec.placement_margin,
                                other.y_min - spec.placement_margin,
                                other.x_max + spec.placement_margin,
                                other.y_max + spec.placement_margin};
        if (box.x_min < grown.x_max && grown.x_min < box.x_max && box.y_min < grown.y_max &&
            grown.y_min < box.y_max) {
          collides = true;
          break;
        }
      }
      if (collides) continue;
      detail::draw_glomerulus(canvas, spec, frame, classes, rng);
      placed.push_back(box);
      slide.annotations.push_back({box, classes});
      placed_ok = true;
      break;
    }
    if (!placed_ok) throw DataError("spec too dense: glomerulus placement failed");
  }

  const StainMatrix basis = detail::jittered_basis(spec.basis_jitter, rng);
  slide.image = detail::develop(canvas, basis);
  return slide;
}

// Draws glomerulus count and classes from the spec, then renders the slide.
inline SyntheticSlide generate_slide(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, 0xd4a7));
  const int n = spec.min_glomeruli +
                static_cast<int>(rng.uniform_int(spec.max_glomeruli - spec.min_glomeruli + 1));
  std::vector<LabelSet> glomeruli;
  for (int i = 0; i < n; ++i) {
    LabelSet s{static_cast<GlomerulusClass>(rng.uniform_int(kGlomerulusClassCount))};
    if (rng.uniform() < spec.multilabel_prob) {
      const auto extra = static_cast<GlomerulusClass>(rng.uniform_int(kGlomerulusClassCount));
      s.insert(extra);
    }
    glomeruli.push_back(s);
  }
  return render_slide(spec, glomeruli, seed);
}

// ---------------------------------------------------------------------------
// Patient cohorts

struct PatientRecord {
  std::string patient_id;
  std::vector<std::string> slide_ids;
  std::vector<LabelSet> glomerulus_label_sets;
  std::optional<LNClass> ln_class;
};

using ClassSignature = std::array<double, kGlomerulusClassCount>;

// Default per-LN-class signatures over the 9 glomerulus classes. Class IV is
// proportional to the reference counts (18,25,19,10,41,10,5,14,2)/144.
inline std::array<ClassSignature, kLNClassCount> default_ln_signatures() {
  std::array<ClassSignature, kLNClassCount> sig{};
  sig[0] = {0.80, 0.02, 0.02, 0.06, 0.04, 0.02, 0.01, 0.02, 0.01};
  sig[1] = {0.30, 0.05, 0.05, 0.40, 0.10, 0.02, 0.02, 0.03, 0.03};
  sig[2] = {0.25, 0.08, 0.30, 0.05, 0.08, 0.06, 0.04, 0.10, 0.04};
  sig[3] = {18.0 / 144, 25.0 / 144, 19.0 / 144, 10.0 / 144, 41.0 / 144,
            10.0 / 144, 5.0 / 144,  14.0 / 144, 2.0 / 144};
  sig[4] = {0.20, 0.05, 0.03, 0.05, 0.55, 0.04, 0.03, 0.02, 0.03};
  sig[5] = {0.10, 0.70, 0.03, 0.04, 0.05, 0.02, 0.02, 0.02, 0.02};
  return sig;
}

struct CohortSpec {
  int patients_per_ln_class = 10;
  std::array<ClassSignature, kLNClassCount> signatures = default_ln_signatures();
  int min_glomeruli_per_patient = 20;
  int max_glomeruli_per_patient = 40;
  SynthSpec slide;
  std::uint64_t seed = 1;

  void validate() const {
    if (patients_per_ln_class <= 0) throw InvalidArgument("CohortSpec: no patients");
    if (min_glomeruli_per_patient < 1 ||
        max_glomeruli_per_patient < min_glomeruli_per_patient)
      throw InvalidArgument("CohortSpec: bad glomerulus range");
    for (const auto& s : signatures) {
      double sum = 0.0;
      for (double v : s) {
        if (v < 0.0) throw InvalidArgument("CohortSpec: negative signature entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("CohortSpec: signature must sum to 1");
    }
    for (int i = 0; i < kLNClassCount; ++i)
      for (int j = i + 1; j < kLNClassCount; ++j) {
        double l1 = 0.0;
        for (int c = 0; c < kGlomerulusClassCount; ++c)
          l1 += std::abs(signatures[i][c] - signatures[j][c]);
        if (l1 < 0.3) throw InvalidArgument("CohortSpec: signatures closer than L1 0.3");
      }
    slide.validate();
  }
};

struct CohortSlide {
  std::string slide_id;
  std::string patient_id;
  std::string magnification = "20x";
  RGBImage image;
  std::vector<SlideAnnotation> annotations;
};

struct SyntheticCohort {
  std::vector<PatientRecord> patients;
  std::vector<CohortSlide> slides;
};

// Generates a full cohort: per patient an LN class, glomerulus classes drawn
// from that class's signature, and rendered slides with annotations.
inline SyntheticCohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  SyntheticCohort cohort;
  int patient_counter = 0;
  for (int ln = 0; ln < kLNClassCount; ++ln) {
    const std::vector<double> weights(spec.signatures[ln].begin(), spec.signatures[ln].end());
    for (int p = 0; p < spec.patients_per_ln_class; ++p) {
      Rng rng(derive_seed(spec.seed, 0xabc000 + patient_counter));
      PatientRecord record;
      char buf[32];
      std::snprintf(buf, sizeof buf, "patient_%03d", patient_counter);
      record.patient_id = buf;
      record.ln_class = static_cast<LNClass>(ln);

      const int n_glom =
          spec.min_glomeruli_per_patient +
          static_cast<int>(rng.uniform_int(
              spec.max_glomeruli_per_patient - spec.min_glomeruli_per_patient + 1));
      std::vector<LabelSet> sets;
      for (int g = 0; g < n_glom; ++g) {
        Rng draw(derive_seed(spec.seed, 0xdef000 + patient_counter * 1000 + g));
        LabelSet s{static_cast<GlomerulusClass>(draw.discrete(weights))};
        if (draw.uniform() < spec.slide.multilabel_prob)
          s.insert(static_cast<GlomerulusClass>(draw.uniform_int(kGlomerulusClassCount)));
        sets.push_back(s);
      }

      // Split the patient's glomeruli across as many slides as capacity needs.
      const int cap = std::max(1, spec.slide.max_glomeruli);
      const int n_slides = (n_glom + cap - 1) / cap;
      int offset = 0;
      for (int s = 0; s < n_slides; ++s) {
        const int take = std::min(cap, n_glom - offset);
        std::vector<LabelSet> chunk(sets.begin() + offset, sets.begin() + offset + take);
        offset += take;
        CohortSlide slide;
        slide.patient_id = record.patient_id;
        std::snprintf(buf, sizeof buf, "%s_s%02d", record.patient_id.c_str(), s);
        slide.slide_id = buf;
        auto rendered =
            render_slide(spec.slide, chunk, derive_seed(spec.seed, 0x511000 + patient_counter * 100 + s));
        slide.image = std::move(rendered.image);
        slide.annotations = std::move(rendered.annotations);
        record.slide_ids.push_back(slide.slide_id);
        for (const auto& ann : slide.annotations) record.glomerulus_label_sets.push_back(ann.labels);
        cohort.slides.push_back(std::move(slide));
      }
      cohort.patients.push_back(std::move(record));
      ++patient_counter;
    }
  }
  return cohort;
}

}  // namespace glom
