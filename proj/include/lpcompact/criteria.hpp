#ifndef LPCOMPACT_CRITERIA_HPP_
#define LPCOMPACT_CRITERIA_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpcompact/bochner.hpp"
#include "lpcompact/errors.hpp"
#include "lpcompact/grid.hpp"
#include "lpcompact/group.hpp"
#include "lpcompact/identities.hpp"
#include "lpcompact/operators.hpp"
#include "lpcompact/oracle.hpp"

namespace lpcompact {

struct TailValue {
  double value = 0.0;     // max_f ||f||_{p; box \ S}
  double box_edge = 0.0;  // max_f ||f||_p on the outermost cell layer of the box
  bool truncated = false;
};

inline TailValue tail_energy(const FunctionFamily& family, const Region& s, double p) {
  check_exponent(p);
  const QuadratureGrid& g = family.grid();
  const Region outside = s.complement();
  TailValue t;
  const Region edge("box-edge", [&g](const GroupElement& x) { return g.on_box_edge(g.nearest_node(x)); });
  for (const auto& f : family.members) {
    t.value = std::max(t.value, lp_norm(f, outside, p));
    t.box_edge = std::max(t.box_edge, lp_norm(f, edge, p));
    t.truncated = t.truncated || f.truncated();
  }
  return t;
}

namespace detail {

// Radical inverse of i in the given prime base.
inline double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

inline GroupElement chart_offset(const GroupModel& m, const std::vector<double>& v) {
  GroupElement h = m.identity();
  for (std::size_t k = 0; k < v.size(); ++k) h[k] += v[k];
  if (m.kind() == GroupKind::Torus)
    for (std::size_t k = 0; k < v.size(); ++k) h[k] -= std::floor(h[k]);
  return h;
}

}  // namespace detail

/// Deterministic sample of the chart ball {h : d(h, e) <= r}: the 2n axis
/// boundary points first, then Halton interior points. The lattice ball is
/// enumerated exactly.
inline std::vector<GroupElement> translation_samples(const GroupModel& model, double radius, std::size_t count) {
  if (!(radius > 0.0)) throw ConfigError("translation sample radius must be positive");
  const std::size_t n = model.dimension();
  std::vector<GroupElement> out;
  if (model.is_discrete()) {
    const long reach = static_cast<long>(std::floor(radius + 1e-12));
    std::vector<long> idx(n, -reach);
    while (true) {
      GroupElement h = GroupElement::zeros(n);
      double r2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        h[k] = static_cast<double>(idx[k]);
        r2 += h[k] * h[k];
      }
      if (r2 > 0.0 && std::sqrt(r2) <= radius * (1.0 + 1e-12)) out.push_back(h);
      std::size_t k = n;
      while (k-- > 0) {
        if (++idx[k] <= reach) break;
        idx[k] = -reach;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    return out;
  }
  // Keep affine samples inside a > 0 and torus offsets within half a period.
  double r = radius;
  if (model.kind() == GroupKind::AffineGroup) r = std::min(r, 0.95);
  if (model.kind() == GroupKind::Torus) r = std::min(r, 0.5);
  for (std::size_t k = 0; k < n && out.size() < count; ++k)
    for (double sgn : {1.0, -1.0}) {
      if (out.size() >= count) break;
      std::vector<double> v(n, 0.0);
      v[k] = sgn * r;
      out.push_back(detail::chart_offset(model, v));
    }
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7};
  for (std::size_t i = 1; out.size() < count && i < 64 * count; ++i) {
    std::vector<double> v(n);
    double r2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = r * (2.0 * detail::radical_inverse(i, kPrimes[k]) - 1.0);
      r2 += v[k] * v[k];
    }
    if (std::sqrt(r2) > r) continue;
    out.push_back(detail::chart_offset(model, v));
  }
  return out;
}

inline constexpr std::size_t kDefaultTranslationSamples = 24;

/// max over members and sampled h with d(h, e) <= r of ||T^h f - f||_{p; S}.
inline ModulusValue translation_modulus(const FunctionFamily& family, double radius, const Region& s, double p,
                                        std::size_t samples = kDefaultTranslationSamples) {
  check_exponent(p);
  const QuadratureGrid& g = family.grid();
  const GroupModel& model = g.model();
  ModulusValue out;
  out.under_resolved = radius < g.mesh();
  const std::vector<GroupElement> hs = translation_samples(model, radius, samples);
  std::vector<double> per_h(hs.size(), 0.0);
  parallel_for(hs.size(), [&](std::size_t t) {
    for (const auto& f : family.members) {
      const GridFunction d = translate(model, hs[t], f) - f;
      per_h[t] = std::max(per_h[t], lp_norm(d, s, p));
    }
  });
  for (double v : per_h) out.value = std::max(out.value, v);
  return out;
}

struct DefectValue {
  double value = 0.0;
  bool truncated = false;
};

/// max_f ||f - j*f||_{p; S}.
inline DefectValue convolution_defect(const FunctionFamily& family, const Kernel& j, const Region& s, double p,
                                      ConvolutionFormula formula = ConvolutionFormula::Alt) {
  check_exponent(p);
  const std::vector<GridFunction> conv = convolve_all(j, family.members, formula);
  DefectValue out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    out.value = std::max(out.value, lp_norm(family[i] - conv[i], s, p));
    out.truncated = out.truncated || conv[i].truncated();
  }
  return out;
}

/// The uniform kernel mu(Theta')^-1 chi_Theta' on the symmetric ball of
/// radius r. Same construction as mollifier().
inline Kernel theta_kernel(const GridPtr& grid, double radius, double p = 2.0) {
  return detail::uniform_ball_kernel(grid, radius, p, "theta");
}

/// Uniform integrability modulus of Gamma^- on S at each delta: for every
/// member, cells of S sorted by L^1 mass of f^- (descending) are taken while
/// the accumulated Haar measure stays below delta, skipping cells that do
/// not fit. The value is the largest accumulated mass. With equal cell
/// weights this is the exact discrete worst case.
inline std::vector<ModulusValue> uniform_integrability_table(const FunctionFamily& family, const Region& s,
                                                             const std::vector<double>& deltas) {
  const QuadratureGrid& g = family.grid();
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (s(g.node(i))) cells.push_back(i);
  std::vector<ModulusValue> out(deltas.size());
  std::vector<double> mass(g.size());
  std::vector<std::size_t> order;
  for (const auto& f : family.members) {
    const GridFunction inv = pullback_inverse(f);
    for (auto i : cells) mass[i] = g.weight(i) * inv.norm_at(i);
    order = cells;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      const double delta = deltas[t];
      if (!(delta > 0.0)) continue;
      const double limit = delta * (1.0 - 1e-12);
      std::vector<double> taken;
      double weight = 0.0;
      for (auto i : order) {
        if (weight + g.weight(i) >= limit) continue;
        weight += g.weight(i);
        taken.push_back(mass[i]);
      }
      double value = pairwise_sum(taken);
      if (taken.empty() && !order.empty()) {
        value = mass[order.front()];
        out[t].under_resolved = true;
      }
      out[t].value = std::max(out[t].value, value);
    }
  }
  return out;
}

inline ModulusValue uniform_integrability_modulus(const FunctionFamily& family, const Region& s, double delta) {
  return uniform_integrability_table(family, s, {delta}).front();
}

struct SetIntegralRow {
  std::string label;
  std::size_t covering_number = 0;
  double diameter = 0.0;
  bool truncated = false;
};

/// Covering number at eps of {int_A f^- : f in Gamma} in the B-norm, per A.
inline std::vector<SetIntegralRow> set_integral_family(const FunctionFamily& family, const std::vector<Region>& sets,
                                                       double eps) {
  std::vector<SetIntegralRow> rows;
  const BanachSpace& b = family.space();
  std::vector<GridFunction> inverted;
  for (const auto& f : family.members) inverted.push_back(pullback_inverse(f));
  for (const Region& a : sets) {
    SetIntegralRow row{a.label(), 0, 0.0, false};
    std::vector<BanachPoint> pts;
    for (const auto& inv : inverted) {
      pts.push_back(integrate(family.grid(), inv, a));
      row.truncated = row.truncated || inv.truncated();
    }
    DistanceMatrix d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t k = i + 1; k < pts.size(); ++k) d.set(i, k, b.norm((pts[i] - pts[k]).span()));
    row.diameter = d.max();
    row.covering_number = covering_number(d, eps);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// certify

enum class KernelType { Mollifier, Theta, Bump, Buldygin };

inline std::string_view to_string(KernelType k) {
  switch (k) {
    case KernelType::Mollifier: return "mollifier";
    case KernelType::Theta: return "theta";
    case KernelType::Bump: return "bump";
    case KernelType::Buldygin: return "buldygin";
  }
  return "?";
}

inline KernelType kernel_type_from_string(std::string_view s) {
  if (s == "mollifier") return KernelType::Mollifier;
  if (s == "theta") return KernelType::Theta;
  if (s == "bump") return KernelType::Bump;
  if (s == "buldygin") return KernelType::Buldygin;
  throw ConfigError("unknown kernel type '" + std::string(s) + "'");
}

struct KernelSpec {
  KernelType type = KernelType::Mollifier;
  double parameter = 0.1;  // radius, or width for buldygin
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline Kernel make_kernel(const GridPtr& grid, const KernelSpec& spec, double p) {
  switch (spec.type) {
    case KernelType::Mollifier: return mollifier(grid, spec.parameter, p);
    case KernelType::Theta: return theta_kernel(grid, spec.parameter, p);
    case KernelType::Bump: return bump_kernel(grid, spec.parameter, p);
    case KernelType::Buldygin: return buldygin_kernel(grid, spec.parameter, p);
  }
  throw ConfigError("unknown kernel type");
}

struct CertifyConfig {
  double p = 2.0;
  std::vector<ChartBox> s_ladder;       // growing; each contains the identity
  std::vector<double> radius_ladder;    // shrinking
  std::vector<KernelSpec> kernels;      // ordered from coarse to fine
  std::vector<double> delta_ladder;     // shrinking
  std::vector<double> eps_ladder;       // oracle scales; empty = relative default
  double set_integral_eps = 0.0;        // 0 = a tenth of the set-integral diameter over the largest S
  std::optional<double> threshold;      // relative; default 3 x measured noise
  std::size_t translation_samples = kDefaultTranslationSamples;
  ConvolutionFormula formula = ConvolutionFormula::Alt;
  double equicontinuity_kernel_radius = 0.0;  // 0 = first kernel's parameter
};

struct LadderRow {
  double parameter = 0.0;
  std::string label;
  double value = 0.0;
  bool flagged = false;
};

struct CriterionTable {
  std::string name;
  std::vector<LadderRow> rows;
  double scale = 1.0;     // normalisation used by the verdict
  bool vanishes = false;  // normalised final entry <= threshold and no growth along the ladder
};

enum class Verdict { ConsistentWithCompact, ConsistentWithNoncompact, Inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ConsistentWithCompact: return "consistent-with-compact";
    case Verdict::ConsistentWithNoncompact: return "consistent-with-noncompact";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct CriterionReport {
  std::string family;
  std::string model;
  double p = 2.0;
  double resolution = 0.0;
  double mesh = 0.0;
  double noise = 0.0;
  double threshold = 0.0;
  double sup_norm = 0.0;  // max_f ||f||_p
  CriterionTable tail_energy;
  CriterionTable box_edge;
  CriterionTable translation_modulus;
  CriterionTable convolution_defect;
  CriterionTable uniform_integrability;
  CriterionTable equicontinuity_modulus;
  double set_integral_eps = 0.0;
  std::vector<SetIntegralRow> set_integral_covering;
  CoveringProfile oracle_covering;
  std::optional<CoveringProfile> reference_covering;
  double separation_eps = 0.0;
  bool separated = false;
  bool stabilized = false;
  std::vector<std::string> truncation_flags;
  std::vector<std::string> notes;
  Verdict verdict = Verdict::Inconclusive;
};

namespace detail {

inline void judge(CriterionTable& t, double threshold) {
  if (t.rows.empty()) {
    t.vanishes = true;
    return;
  }
  const double s = t.scale > 0.0 ? t.scale : 1.0;
  bool grows = false;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.rows[i].value / s > t.rows[i - 1].value / s + threshold) grows = true;
  t.vanishes = !grows && t.rows.back().value / s <= threshold;
}

inline void add_flag(CriterionReport& r, const std::string& f) {
  if (std::find(r.truncation_flags.begin(), r.truncation_flags.end(), f) == r.truncation_flags.end())
    r.truncation_flags.push_back(f);
}

inline std::vector<double> default_eps_ladder(double sup_norm) {
  return {0.125 * sup_norm, 0.25 * sup_norm, 0.5 * sup_norm};
}

}  // namespace detail

/// Fills every criterion table for Gamma and the oracle covering profile,
/// then classifies. `reference` is the same family sampled on a coarser
/// grid; its covering profile decides whether covering numbers have
/// stabilised under refinement.
inline CriterionReport certify(const FunctionFamily& family, const CertifyConfig& cfg,
                               const FunctionFamily* reference = nullptr) {
  family.validate();
  check_exponent(cfg.p);
  if (cfg.s_ladder.empty()) throw ConfigError("certify: S ladder is empty");
  const QuadratureGrid& g = family.grid();
  const GroupModel& model = g.model();
  const double p = cfg.p;

  CriterionReport r;
  r.family = family.label;
  r.model = model.name();
  r.p = p;
  r.resolution = g.resolution();
  r.mesh = g.mesh();
  r.noise = std::max(left_invariance_noise(model, g.resolution()), 1e-12);
  r.threshold = cfg.threshold.value_or(3.0 * r.noise);

  double sup_l1 = 0.0;
  for (const auto& f : family.members) {
    r.sup_norm = std::max(r.sup_norm, lp_norm(f, p));
    sup_l1 = std::max(sup_l1, lp_norm(pullback_inverse(f), 1.0));
    if (f.truncated()) detail::add_flag(r, "family: member truncated at the box");
  }

  std::vector<Region> s_regions;
  for (const auto& b : cfg.s_ladder) {
    if (!b.contains(model.identity())) throw ConfigError("certify: every S must contain the identity");
    s_regions.push_back(Region::box(b));
  }
  const Region& s_max = s_regions.back();

  r.tail_energy = {"tail_energy", {}, r.sup_norm, false};
  r.box_edge = {"box_edge", {}, r.sup_norm, false};
  for (std::size_t i = 0; i < s_regions.size(); ++i) {
    const TailValue t = tail_energy(family, s_regions[i], p);
    r.tail_energy.rows.push_back({static_cast<double>(i), s_regions[i].label(), t.value, t.truncated});
    r.box_edge.rows.push_back({static_cast<double>(i), s_regions[i].label(), t.box_edge, false});
  }
  if (!r.box_edge.rows.empty() && r.box_edge.rows.back().value > r.threshold * r.sup_norm)
    detail::add_flag(r, "tail: nonzero mass on the truncation box edge");

  r.translation_modulus = {"translation_modulus", {}, r.sup_norm, false};
  for (double rad : cfg.radius_ladder) {
    const ModulusValue m = translation_modulus(family, rad, s_max, p, cfg.translation_samples);
    r.translation_modulus.rows.push_back({rad, "r=" + detail::fmt_real(rad), m.value, m.under_resolved});
    if (m.under_resolved) detail::add_flag(r, "translation_modulus: radius below mesh");
  }

  r.convolution_defect = {"convolution_defect", {}, r.sup_norm, false};
  for (const auto& spec : cfg.kernels) {
    const Kernel j = make_kernel(family.grid_ptr(), spec, p);
    const DefectValue d = convolution_defect(family, j, s_max, p, cfg.formula);
    r.convolution_defect.rows.push_back({spec.parameter, j.descriptor, d.value, !j.flags.empty()});
    for (const auto& f : j.flags) detail::add_flag(r, f);
    if (d.truncated) detail::add_flag(r, "convolution_defect: " + j.descriptor + " reads outside the box");
  }

  r.uniform_integrability = {"uniform_integrability", {}, sup_l1, false};
  {
    const auto ui = uniform_integrability_table(family, s_max, cfg.delta_ladder);
    for (std::size_t t = 0; t < ui.size(); ++t) {
      r.uniform_integrability.rows.push_back(
          {cfg.delta_ladder[t], "delta=" + detail::fmt_real(cfg.delta_ladder[t]), ui[t].value, ui[t].under_resolved});
      if (ui[t].under_resolved) detail::add_flag(r, "uniform_integrability: delta below one cell");
    }
  }

  // Equicontinuity of j*Gamma on the largest S.
  r.equicontinuity_modulus = {"equicontinuity_modulus", {}, 1.0, false};
  if (!cfg.radius_ladder.empty() && (cfg.equicontinuity_kernel_radius > 0.0 || !cfg.kernels.empty())) {
    const double jr =
        cfg.equicontinuity_kernel_radius > 0.0 ? cfg.equicontinuity_kernel_radius : cfg.kernels.front().parameter;
    const Kernel j = bump_kernel(family.grid_ptr(), jr, p);
    const std::vector<GridFunction> k = convolve_all(j, family.members, ConvolutionFormula::Xy);
    double scale = 0.0;
    for (const auto& f : k)
      for (std::size_t i = 0; i < g.size(); ++i)
        if (s_max(g.node(i))) scale = std::max(scale, f.norm_at(i));
    r.equicontinuity_modulus.scale = scale;
    for (double rad : cfg.radius_ladder) {
      const ModulusValue m = equicontinuity_modulus(k, s_max, rad);
      r.equicontinuity_modulus.rows.push_back({rad, "r=" + detail::fmt_real(rad), m.value, m.under_resolved});
    }
  }

  // Criterion 1: set integrals over the S ladder.
  {
    double eps = cfg.set_integral_eps;
    if (!(eps > 0.0)) {
      const auto probe = set_integral_family(family, {s_max}, 1.0);
      eps = std::max(0.1 * probe.front().diameter, 1e-12);
    }
    r.set_integral_eps = eps;
    r.set_integral_covering = set_integral_family(family, s_regions, eps);
  }

  // Oracle.
  const std::vector<double> eps =
      cfg.eps_ladder.empty() ? detail::default_eps_ladder(r.sup_norm) : cfg.eps_ladder;
  const DistanceMatrix dm = lp_distance_matrix(family, p);
  r.oracle_covering = covering_profile(dm, eps);
  r.separation_eps = 0.25 * r.sup_norm;
  r.separated = r.separation_eps > 0.0 && covering_number(dm, r.separation_eps) == family.size();
  if (reference) {
    r.reference_covering = covering_profile(lp_distance_matrix(*reference, p), eps);
    r.stabilized = r.reference_covering->covering_numbers == r.oracle_covering.covering_numbers;
  } else {
    r.notes.push_back("no reference family: covering stabilisation not assessed");
  }

  for (CriterionTable* t : {&r.tail_energy, &r.translation_modulus, &r.convolution_defect, &r.uniform_integrability})
    detail::judge(*t, r.threshold);
  detail::judge(r.equicontinuity_modulus, r.threshold);

  const bool all_vanish = r.tail_energy.vanishes && r.translation_modulus.vanishes &&
                          r.convolution_defect.vanishes && r.uniform_integrability.vanishes;
  if (all_vanish && r.stabilized && !r.separated) r.verdict = Verdict::ConsistentWithCompact;
  else if (!all_vanish && r.separated) r.verdict = Verdict::ConsistentWithNoncompact;
  else r.verdict = Verdict::Inconclusive;

  for (const CriterionTable* t : {&r.tail_energy, &r.translation_modulus, &r.convolution_defect,
                                  &r.uniform_integrability})
    if (!t->vanishes) r.notes.push_back(t->name + " bounded below along its ladder");
  if (r.separated) r.notes.push_back("oracle: members pairwise separated at eps = sup norm / 4");
  return r;
}

}  // namespace lpcompact

#endif  // LPCOMPACT_CRITERIA_HPP_
