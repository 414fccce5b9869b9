#ifndef LPCOMPACT_OPERATORS_HPP_
#define LPCOMPACT_OPERATORS_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpcompact/bochner.hpp"
#include "lpcompact/errors.hpp"
#include "lpcompact/grid.hpp"
#include "lpcompact/group.hpp"
#include "lpcompact/reduce.hpp"

namespace lpcompact {

inline double conjugate_exponent(double p) {
  check_exponent(p);
  if (p == 1.0) return kInfinity;
  if (p == kInfinity) return 1.0;
  return p / (p - 1.0);
}

/// Scalar convolution kernel j in L^{p'}, paired with the ambient exponent p
/// of the functions it acts on.
struct Kernel {
  GridFunction j;
  double p = 2.0;
  bool compact_support = true;
  double support_radius = 0.0;
  std::string descriptor;
  std::vector<std::string> flags;

  double conjugate() const { return conjugate_exponent(p); }
  const QuadratureGrid& grid() const { return j.grid(); }
};

enum class ConvolutionFormula {
  Xy,   // (j*f)(x) = sum_y w_y j(xy) f(y^-1)
  Alt,  // (j*f)(x) = sum_y w_y j(y) f(y^-1 x)
};

namespace detail {

inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Uniform kernel mu(V)^-1 chi_V on the symmetric ball V of radius r. When
// no node falls in V the kernel sits on the identity's cell.
inline Kernel uniform_ball_kernel(const GridPtr& grid, double radius, double p, const std::string& name) {
  if (!(radius > 0.0)) throw ConfigError(name + ": radius must be positive");
  check_exponent(p);
  const GroupModel model = grid->model();
  const Region ball = Region::symmetric_ball(model, radius);
  const double mass = measure(*grid, ball);
  Kernel k{GridFunction::zero(BanachSpace(1), grid), p, true, radius,
           name + "(r=" + fmt_real(radius) + ")", {}};
  if (mass > 0.0) {
    const double height = 1.0 / mass;
    k.j = GridFunction::sample(BanachSpace(1), grid,
                               [ball, height](const GroupElement& x, std::span<double> out) {
                                 out[0] = ball(x) ? height : 0.0;
                               });
    return k;
  }
  const std::size_t cell = grid->nearest_node(model.identity());
  const GroupElement centre = grid->node(cell);
  const double height = 1.0 / grid->weight(cell);
  std::vector<double> steps = grid->steps();
  k.j = GridFunction::sample(BanachSpace(1), grid,
                             [centre, steps, height](const GroupElement& x, std::span<double> out) {
                               bool inside = true;
                               for (std::size_t d = 0; d < steps.size(); ++d)
                                 inside = inside && std::abs(x[d] - centre[d]) <= 0.5 * steps[d];
                               out[0] = inside ? height : 0.0;
                             });
  // Ties on cell faces can admit a neighbour node; keep only the centre cell.
  std::vector<double> v(grid->size(), 0.0);
  v[cell] = height;
  auto eval = k.j.evaluator();
  k.j = GridFunction(BanachSpace(1), grid, std::move(v));
  k.j.set_evaluator(std::move(eval));
  k.flags.push_back(name + ": radius below one cell, kernel concentrated on the identity's cell");
  return k;
}

}  // namespace detail

/// u_V = mu(V)^-1 chi_V for the symmetric chart ball V of radius r around the
/// identity. Unit L^1 mass on the grid by construction.
inline Kernel mollifier(const GridPtr& grid, double radius, double p = 2.0) {
  return detail::uniform_ball_kernel(grid, radius, p, "mollifier");
}

/// Smooth compactly supported bump exp(-1/(1 - (d/r)^2)) in the chart
/// distance to the identity, normalised to unit L^1 mass on the grid.
inline Kernel bump_kernel(const GridPtr& grid, double radius, double p = 2.0) {
  if (!(radius > 0.0)) throw ConfigError("bump_kernel: radius must be positive");
  check_exponent(p);
  const GroupModel model = grid->model();
  auto shape = [model, radius](const GroupElement& x) {
    const double t = model.distance_to_identity(x) / radius;
    return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
  };
  std::vector<double> terms;
  for (std::size_t i = 0; i < grid->size(); ++i) terms.push_back(grid->weight(i) * shape(grid->node(i)));
  const double mass = pairwise_sum(terms);
  if (!(mass > 0.0)) throw ConfigError("bump_kernel: radius too small for the grid");
  const double c = 1.0 / mass;
  Kernel k{GridFunction::sample(BanachSpace(1), grid,
                                [shape, c](const GroupElement& x, std::span<double> out) {
                                  out[0] = c * shape(x);
                                }),
           p, true, radius, "bump(r=" + detail::fmt_real(radius) + ")", {}};
  if (radius < 2.0 * grid->mesh()) k.flags.push_back("bump: radius under-resolved by the grid");
  return k;
}

/// Gaussian approximate identity of width h on R^n, cut at 8h and
/// renormalised to unit L^1 mass on the grid. The cut is numerical only, so
/// the kernel counts as not compactly supported.
inline Kernel buldygin_kernel(const GridPtr& grid, double width, double p = 2.0) {
  if (grid->model().kind() != GroupKind::RealLine)
    throw ConfigError("buldygin_kernel: defined on the real line model only");
  if (!(width > 0.0)) throw ConfigError("buldygin_kernel: width must be positive");
  check_exponent(p);
  const double cutoff = 8.0 * width;
  auto shape = [width, cutoff](const GroupElement& x) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.dim(); ++k) r2 += x[k] * x[k];
    return r2 <= cutoff * cutoff ? std::exp(-0.5 * r2 / (width * width)) : 0.0;
  };
  std::vector<double> terms;
  for (std::size_t i = 0; i < grid->size(); ++i) terms.push_back(grid->weight(i) * shape(grid->node(i)));
  const double mass = pairwise_sum(terms);
  if (!(mass > 0.0)) throw ConfigError("buldygin_kernel: no mass on the grid");
  const double c = 1.0 / mass;
  Kernel k{GridFunction::sample(BanachSpace(1), grid,
                                [shape, c](const GroupElement& x, std::span<double> out) {
                                  out[0] = c * shape(x);
                                }),
           p, false, cutoff, "buldygin(h=" + detail::fmt_real(width) + ")", {}};
  if (width < grid->mesh()) k.flags.push_back("buldygin: width below mesh, under-resolved");
  return k;
}

/// (T^h f)(x) = f(h^-1 x) at every node.
inline GridFunction translate(const GroupModel& model, const GroupElement& h, const GridFunction& f) {
  model.validate(h);
  const QuadratureGrid& g = f.grid();
  const GroupElement hinv = model.inv_unchecked(h);
  const std::size_t d = f.dim();
  std::vector<double> values(g.size() * d);
  bool lost = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const GroupElement y = model.mul_unchecked(hinv, g.node(i));
    const bool outside = f.evaluate_into(y, std::span<double>(values).subspan(i * d, d));
    if (outside && !lost && f.loses_mass_at(y)) lost = true;
  }
  GridFunction out(f.space(), f.grid_ptr(), std::move(values));
  if (f.has_evaluator()) {
    out.set_evaluator([e = f.evaluator(), model, hinv](const GroupElement& x, std::span<double> o) {
      e(model.mul_unchecked(hinv, x), o);
    });
  }
  out.mark_truncated(lost || f.truncated());
  return out;
}

inline void check_kernel_side_condition(const GroupModel& model, const Kernel& j) {
  if ((!model.is_abelian() || j.p == 1.0) && !j.compact_support)
    throw ConfigError(
        "kernel " + j.descriptor +
        " violates the side condition: j has compact support if either G is nonabelian or p = 1");
}

/// Convolves every member with j. Output nodes are independent, so the loop
/// runs in parallel; each inner sum uses pairwise reduction in node order.
inline std::vector<GridFunction> convolve_all(const Kernel& j, std::span<const GridFunction> fs,
                                              ConvolutionFormula formula = ConvolutionFormula::Alt) {
  if (fs.empty()) return {};
  const QuadratureGrid& g = fs.front().grid();
  const GroupModel& model = g.model();
  check_kernel_side_condition(model, j);
  if (!same_grid(j.grid(), g)) throw ContractViolation("convolve: kernel and function grids differ");
  for (const auto& f : fs) fs.front().check_compatible(f);

  const std::size_t n = g.size();
  const std::size_t m = fs.size();
  const std::size_t d = fs.front().dim();
  std::vector<std::vector<double>> out(m, std::vector<double>(n * d, 0.0));
  std::vector<char> lost(n, 0);

  if (formula == ConvolutionFormula::Alt) {
    std::vector<std::size_t> supp;
    for (std::size_t i = 0; i < n; ++i)
      if (j.j.value(i)[0] != 0.0) supp.push_back(i);
    std::vector<GroupElement> supp_inv;
    for (auto i : supp) supp_inv.push_back(model.inv_unchecked(g.node(i)));
    parallel_for(n, [&](std::size_t x) {
      thread_local std::vector<double> terms;
      thread_local std::vector<double> val;
      const std::size_t t_count = supp.size();
      terms.assign(m * d * t_count, 0.0);
      val.resize(d);
      for (std::size_t t = 0; t < t_count; ++t) {
        const std::size_t y = supp[t];
        const double c = g.weight(y) * j.j.value(y)[0];
        const GroupElement z = model.mul_unchecked(supp_inv[t], g.node(x));
        for (std::size_t f = 0; f < m; ++f) {
          const bool outside = fs[f].evaluate_into(z, val);
          if (outside && !lost[x] && fs[f].loses_mass_at(z)) lost[x] = 1;
          for (std::size_t k = 0; k < d; ++k) terms[(f * d + k) * t_count + t] = c * val[k];
        }
      }
      for (std::size_t f = 0; f < m; ++f)
        for (std::size_t k = 0; k < d; ++k)
          out[f][x * d + k] = pairwise_sum(std::span<const double>(terms).subspan((f * d + k) * t_count, t_count));
    });
  } else {
    std::vector<GridFunction> inverted;
    inverted.reserve(m);
    for (const auto& f : fs) inverted.push_back(pullback_inverse(f));
    for (std::size_t f = 0; f < m; ++f)
      if (inverted[f].truncated()) lost[0] = 1;
    parallel_for(n, [&](std::size_t x) {
      thread_local std::vector<double> coef;
      thread_local std::vector<std::size_t> ys;
      thread_local std::vector<double> terms;
      double jv = 0.0;
      coef.clear();
      ys.clear();
      for (std::size_t y = 0; y < n; ++y) {
        const GroupElement xy = model.mul_unchecked(g.node(x), g.node(y));
        j.j.evaluate_into(xy, std::span<double>(&jv, 1));
        if (jv == 0.0) continue;
        coef.push_back(g.weight(y) * jv);
        ys.push_back(y);
      }
      const std::size_t t_count = ys.size();
      terms.resize(t_count);
      for (std::size_t f = 0; f < m; ++f)
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t t = 0; t < t_count; ++t) terms[t] = coef[t] * inverted[f].value(ys[t])[k];
          out[f][x * d + k] = pairwise_sum(std::span<const double>(terms.data(), t_count));
        }
    });
  }

  bool any_lost = false;
  for (char c : lost) any_lost = any_lost || c;
  std::vector<GridFunction> result;
  result.reserve(m);
  for (std::size_t f = 0; f < m; ++f) {
    GridFunction r(fs[f].space(), fs[f].grid_ptr(), std::move(out[f]));
    r.mark_truncated(any_lost || fs[f].truncated());
    result.push_back(std::move(r));
  }
  return result;
}

inline GridFunction convolve(const Kernel& j, const GridFunction& f,
                             ConvolutionFormula formula = ConvolutionFormula::Alt) {
  return std::move(convolve_all(j, std::span<const GridFunction>(&f, 1), formula).front());
}

}  // namespace lpcompact

#endif  // LPCOMPACT_OPERATORS_HPP_
