#ifndef LPCOMPACT_ORACLE_HPP_
#define LPCOMPACT_ORACLE_HPP_

// Total-boundedness ground truth for finite families: pairwise distances,
// covering numbers, and the two Ascoli conditions in C_B(S). Nothing here
// consults the criterion moduli in criteria.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpcompact/bochner.hpp"
#include "lpcompact/errors.hpp"
#include "lpcompact/grid.hpp"
#include "lpcompact/operators.hpp"

namespace lpcompact {

class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n = 0) : n_(n), d_(n * n, 0.0) {}
  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }
  double max() const { return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end()); }
  /// Principal submatrix on the first k members.
  DistanceMatrix leading(std::size_t k) const {
    DistanceMatrix s(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) s.d_[i * k + j] = d_[i * n_ + j];
    return s;
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

/// Pairwise ||f_i - f_j||_{p; region}.
inline DistanceMatrix lp_distance_matrix(const FunctionFamily& family, double p,
                                         const Region& region = Region::all()) {
  check_exponent(p);
  const std::size_t n = family.size();
  DistanceMatrix m(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, lp_norm(family[i] - family[j], region, p));
  });
  return m;
}

/// Pairwise sup over the nodes of S of ||f_i(x) - f_j(x)||_B: the metric of
/// C_B(S) on grid-restricted functions.
inline DistanceMatrix sup_distance_matrix(std::span<const GridFunction> k, const Region& s) {
  const std::size_t n = k.size();
  DistanceMatrix m(n);
  if (n == 0) return m;
  const QuadratureGrid& g = k.front().grid();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (s(g.node(i))) nodes.push_back(i);
  std::vector<double> diff(k.front().dim());
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double best = 0.0;
      for (auto x : nodes) {
        auto u = k[a].value(x);
        auto v = k[b].value(x);
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = u[c] - v[c];
        best = std::max(best, k[a].space().norm(diff));
      }
      m.set(a, b, best);
    }
  return m;
}

enum class CoveringMethod { Greedy, Exact };

inline std::string_view to_string(CoveringMethod m) {
  return m == CoveringMethod::Greedy ? "greedy-2approx" : "exact-small";
}

inline constexpr std::size_t kExactCoverLimit = 12;

/// Number of closed eps-balls centred at members needed to cover the family.
///
/// Greedy: farthest-point traversal seeded at member 0, ties to the lowest
/// index; the count is the shortest prefix whose covering radius is <= eps.
/// The traversal order does not depend on eps, so the count is
/// nonincreasing in eps. Exact: smallest covering subset by exhaustive
/// search, families of at most 12 members only.
inline std::size_t covering_number(const DistanceMatrix& d, double eps,
                                   CoveringMethod method = CoveringMethod::Greedy) {
  if (!(eps > 0.0)) throw ConfigError("covering_number: eps must be positive");
  const std::size_t n = d.size();
  if (n == 0) return 0;
  if (method == CoveringMethod::Exact) {
    if (n > kExactCoverLimit)
      throw ConfigError("covering_number: exact-small is limited to " + std::to_string(kExactCoverLimit) +
                        " members");
    std::vector<unsigned> ball(n, 0);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t i = 0; i < n; ++i)
        if (d(c, i) <= eps) ball[c] |= 1U << i;
    const unsigned full = (1U << n) - 1U;
    std::size_t best = n;
    for (unsigned subset = 1; subset <= full; ++subset) {
      const auto size = static_cast<std::size_t>(__builtin_popcount(subset));
      if (size >= best) continue;
      unsigned covered = 0;
      for (std::size_t c = 0; c < n; ++c)
        if (subset & (1U << c)) covered |= ball[c];
      if (covered == full) best = size;
    }
    return best;
  }
  std::vector<double> reach(n);
  for (std::size_t i = 0; i < n; ++i) reach[i] = d(0, i);
  std::size_t centres = 1;
  while (true) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (reach[i] > reach[far]) far = i;
    if (reach[far] <= eps) return centres;
    ++centres;
    for (std::size_t i = 0; i < n; ++i) reach[i] = std::min(reach[i], d(far, i));
  }
}

struct CoveringProfile {
  std::vector<double> eps_ladder;
  std::vector<std::size_t> covering_numbers;
  CoveringMethod method = CoveringMethod::Greedy;
};

inline CoveringProfile covering_profile(const DistanceMatrix& d, std::vector<double> eps_ladder,
                                        CoveringMethod method = CoveringMethod::Greedy) {
  std::sort(eps_ladder.begin(), eps_ladder.end());
  CoveringProfile prof{eps_ladder, {}, method};
  for (double e : eps_ladder) prof.covering_numbers.push_back(covering_number(d, e, method));
  return prof;
}

struct ModulusValue {
  double value = 0.0;
  bool under_resolved = false;
};

/// max over members and node pairs x, x' in S with d(x, x') <= r of
/// ||f(x) - f(x')||_B.
inline ModulusValue equicontinuity_modulus(std::span<const GridFunction> k, const Region& s, double radius) {
  ModulusValue out;
  if (k.empty()) return out;
  const QuadratureGrid& g = k.front().grid();
  const GroupModel& model = g.model();
  const std::size_t dim = g.counts().size();
  out.under_resolved = radius < g.mesh() && radius < *std::min_element(g.steps().begin(), g.steps().end());

  std::vector<char> in_s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) in_s[i] = s(g.node(i)) ? 1 : 0;

  // Index-space neighbourhood large enough to contain the chart r-ball.
  std::vector<long> reach(dim);
  for (std::size_t a = 0; a < dim; ++a)
    reach[a] = static_cast<long>(std::floor(radius / g.steps()[a] + 1e-9));
  std::vector<std::vector<long>> offsets;
  std::vector<long> off(dim);
  std::function<void(std::size_t)> gen = [&](std::size_t a) {
    if (a == dim) {
      bool forward = false;
      for (long o : off)
        if (o != 0) {
          forward = o > 0;
          break;
        }
      if (forward) offsets.push_back(off);
      return;
    }
    for (long o = -reach[a]; o <= reach[a]; ++o) {
      off[a] = o;
      gen(a + 1);
    }
  };
  gen(0);

  std::vector<double> diff(k.front().dim());
  std::vector<long> idx(dim);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!in_s[i]) continue;
    std::size_t rem = i;
    for (std::size_t a = dim; a-- > 0;) {
      idx[a] = static_cast<long>(rem % g.counts()[a]);
      rem /= g.counts()[a];
    }
    for (const auto& o : offsets) {
      std::size_t flat = 0;
      bool valid = true;
      for (std::size_t a = 0; a < dim && valid; ++a) {
        long c = idx[a] + o[a];
        const long n = static_cast<long>(g.counts()[a]);
        if (g.periodic(a)) c = ((c % n) + n) % n;
        else if (c < 0 || c >= n) valid = false;
        flat = flat * g.counts()[a] + static_cast<std::size_t>(std::max(0L, c));
      }
      if (!valid || !in_s[flat]) continue;
      if (model.distance(g.node(i), g.node(flat)) > radius * (1.0 + 1e-12)) continue;
      for (const auto& f : k) {
        auto u = f.value(i);
        auto v = f.value(flat);
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = u[c] - v[c];
        out.value = std::max(out.value, f.space().norm(diff));
      }
    }
  }
  return out;
}

struct AscoliEvidence {
  bool pass = false;
  std::vector<double> radii;
  std::vector<double> equicontinuity;
  double scale = 0.0;      // max sup-norm of the family over S
  double threshold = 0.0;  // absolute threshold applied to the last radius
  std::vector<std::size_t> sample_nodes;
  std::vector<double> eps_ladder;
  // pointwise[s][e]: covering number of {f(x_s)} at eps_ladder[e]
  std::vector<std::vector<std::size_t>> pointwise;
  std::string reason;
};

/// Ascoli check in C_B(S): the equicontinuity table must be nonincreasing
/// as r shrinks and end at or below rel_threshold * scale, and at a fixed
/// sample of nodes the value sets must have covering numbers within the
/// volumetric bound (1 + 2 diam / eps)^d of a bounded set in R^d.
inline AscoliEvidence ascoli_check(std::span<const GridFunction> k, const Region& s,
                                   std::vector<double> r_ladder, std::vector<double> eps_ladder,
                                   double rel_threshold, std::size_t node_samples = 8) {
  AscoliEvidence ev;
  if (k.empty()) {
    ev.pass = true;
    return ev;
  }
  std::sort(r_ladder.rbegin(), r_ladder.rend());
  std::sort(eps_ladder.begin(), eps_ladder.end());
  ev.radii = r_ladder;
  ev.eps_ladder = eps_ladder;
  const QuadratureGrid& g = k.front().grid();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (s(g.node(i))) nodes.push_back(i);
  for (const auto& f : k)
    for (auto x : nodes) ev.scale = std::max(ev.scale, f.norm_at(x));
  ev.threshold = rel_threshold * ev.scale;

  bool ok = true;
  for (double r : r_ladder) ev.equicontinuity.push_back(equicontinuity_modulus(k, s, r).value);
  for (std::size_t i = 1; i < ev.equicontinuity.size(); ++i)
    if (ev.equicontinuity[i] > ev.equicontinuity[i - 1] * (1.0 + 1e-12) + 1e-300) {
      ok = false;
      ev.reason = "equicontinuity modulus increases as r shrinks";
    }
  if (!ev.equicontinuity.empty() && ev.equicontinuity.back() > ev.threshold) {
    ok = false;
    ev.reason = "equicontinuity modulus does not fall below threshold";
  }

  const std::size_t d = k.front().dim();
  const std::size_t count = std::min(node_samples, nodes.size());
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t x = nodes[(t * nodes.size()) / count + (nodes.size() / count) / 2];
    ev.sample_nodes.push_back(x);
    DistanceMatrix pm(k.size());
    std::vector<double> diff(d);
    for (std::size_t a = 0; a < k.size(); ++a)
      for (std::size_t b = a + 1; b < k.size(); ++b) {
        auto u = k[a].value(x);
        auto v = k[b].value(x);
        for (std::size_t c = 0; c < d; ++c) diff[c] = u[c] - v[c];
        pm.set(a, b, k[a].space().norm(diff));
      }
    std::vector<std::size_t> row;
    for (double e : eps_ladder) {
      const std::size_t n = covering_number(pm, e);
      const double bound = std::pow(1.0 + 2.0 * pm.max() / e, static_cast<double>(d));
      if (static_cast<double>(n) > bound + 1e-9) {
        ok = false;
        ev.reason = "pointwise value set exceeds the bounded-set covering bound";
      }
      row.push_back(n);
    }
    ev.pointwise.push_back(std::move(row));
  }
  ev.pass = ok;
  return ev;
}

/// Simple-function approximations q * floor(j / q) of a kernel, q running
/// over max(j) / 2^levels[i]. Each is a finite sum of scaled indicators.
inline std::vector<Kernel> simple_function_ladder(const Kernel& j, const std::vector<int>& levels) {
  double top = 0.0;
  for (double v : j.j.values()) top = std::max(top, std::abs(v));
  std::vector<Kernel> out;
  for (int level : levels) {
    const double q = top / std::ldexp(1.0, level);
    std::vector<double> v = j.j.values();
    for (double& x : v) x = q * std::floor(x / q);
    Kernel k = j;
    k.j = GridFunction(j.j.space(), j.j.grid_ptr(), std::move(v));
    if (j.j.has_evaluator()) {
      k.j.set_evaluator([e = j.j.evaluator(), q](const GroupElement& x, std::span<double> o) {
        e(x, o);
        o[0] = q * std::floor(o[0] / q);
      });
    }
    k.descriptor = j.descriptor + "/simple(2^-" + std::to_string(level) + ")";
    out.push_back(std::move(k));
  }
  return out;
}

struct StabilityRow {
  std::string descriptor;
  double kernel_error = 0.0;  // ||j_n - j||_{p'} on the grid
  double value = 0.0;         // max_f max_{x in S} ||(j_n*f)(x) - (j*f)(x)||_B
};

/// Uniform-in-Gamma convergence of j_n * f to j * f on S along a ladder of
/// kernel approximations.
inline std::vector<StabilityRow> kernel_approx_stability(const FunctionFamily& family, const Kernel& j,
                                                         const std::vector<Kernel>& ladder, const Region& s,
                                                         ConvolutionFormula formula = ConvolutionFormula::Alt) {
  const std::vector<GridFunction> base = convolve_all(j, family.members, formula);
  const QuadratureGrid& g = family.grid();
  std::vector<StabilityRow> rows;
  for (const Kernel& jn : ladder) {
    StabilityRow row{jn.descriptor, lp_norm(jn.j - j.j, j.conjugate()), 0.0};
    const std::vector<GridFunction> approx = convolve_all(jn, family.members, formula);
    std::vector<double> diff(family.space().dim());
    for (std::size_t f = 0; f < family.size(); ++f)
      for (std::size_t x = 0; x < g.size(); ++x) {
        if (!s(g.node(x))) continue;
        auto u = approx[f].value(x);
        auto v = base[f].value(x);
        for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = u[c] - v[c];
        row.value = std::max(row.value, family.space().norm(diff));
      }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lpcompact

#endif  // LPCOMPACT_ORACLE_HPP_
