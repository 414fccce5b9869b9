#ifndef LPCOMPACT_BOCHNER_HPP_
#define LPCOMPACT_BOCHNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpcompact/errors.hpp"
#include "lpcompact/grid.hpp"
#include "lpcompact/group.hpp"
#include "lpcompact/reduce.hpp"

namespace lpcompact {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// R^d with the p_B-norm, standing in for the Banach space B. A d = 32
/// space with p_B = 2 is the usual truncated l^2 surrogate.
class BanachSpace {
 public:
  BanachSpace(std::size_t dim = 1, double norm_exponent = 2.0) : dim_(dim), p_(norm_exponent) {
    if (dim == 0) throw ConfigError("Banach space dimension must be >= 1");
    if (!(norm_exponent >= 1.0)) throw ConfigError("Banach norm exponent must be >= 1");
  }

  std::size_t dim() const { return dim_; }
  double norm_exponent() const { return p_; }

  double norm(std::span<const double> v) const {
    if (p_ == kInfinity) {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    if (dim_ == 1) return std::abs(v[0]);
    if (p_ == 1.0) {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    if (p_ == 2.0) {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p_);
    return std::pow(s, 1.0 / p_);
  }

  friend bool operator==(const BanachSpace&, const BanachSpace&) = default;

 private:
  std::size_t dim_;
  double p_;
};

/// A point of B: its d components.
struct BanachPoint {
  std::vector<double> components;

  BanachPoint() = default;
  explicit BanachPoint(std::size_t dim) : components(dim, 0.0) {}
  BanachPoint(std::initializer_list<double> c) : components(c) {}
  explicit BanachPoint(std::vector<double> c) : components(std::move(c)) {}

  std::size_t size() const { return components.size(); }
  double operator[](std::size_t k) const { return components[k]; }
  double& operator[](std::size_t k) { return components[k]; }
  std::span<const double> span() const { return components; }

  BanachPoint& operator+=(const BanachPoint& o) {
    for (std::size_t k = 0; k < size(); ++k) components[k] += o[k];
    return *this;
  }
  BanachPoint& operator-=(const BanachPoint& o) {
    for (std::size_t k = 0; k < size(); ++k) components[k] -= o[k];
    return *this;
  }
  friend BanachPoint operator+(BanachPoint a, const BanachPoint& b) { return a += b; }
  friend BanachPoint operator-(BanachPoint a, const BanachPoint& b) { return a -= b; }
  friend BanachPoint operator*(double s, BanachPoint a) {
    for (double& c : a.components) c *= s;
    return a;
  }
  friend bool operator==(const BanachPoint&, const BanachPoint&) = default;
};

/// Value of a function at a point, with the truncation-box flag.
struct Evaluation {
  BanachPoint value;
  bool truncated = false;
};

/// A B-valued function sampled at the nodes of a quadrature grid.
///
/// An optional closed-form evaluator is used for off-grid points; without it
/// evaluation falls back to multilinear interpolation in chart coordinates.
/// Outside the truncation box the function is taken to be zero.
class GridFunction {
 public:
  /// Writes f(x) into out (length d).
  using Evaluator = std::function<void(const GroupElement&, std::span<double>)>;

  GridFunction(BanachSpace space, GridPtr grid, std::vector<double> values)
      : space_(space), grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ContractViolation("GridFunction: null grid");
    if (values_.size() != grid_->size() * space_.dim())
      throw ContractViolation("GridFunction: values length must equal nodes * dim");
  }

  /// Samples a closed-form function at the nodes and keeps it as evaluator.
  static GridFunction sample(BanachSpace space, GridPtr grid, Evaluator eval) {
    const std::size_t d = space.dim();
    std::vector<double> values(grid->size() * d);
    for (std::size_t i = 0; i < grid->size(); ++i)
      eval(grid->node(i), std::span<double>(values).subspan(i * d, d));
    GridFunction f(space, std::move(grid), std::move(values));
    f.evaluator_ = std::move(eval);
    return f;
  }

  static GridFunction zero(BanachSpace space, GridPtr grid) {
    const std::size_t n = grid->size() * space.dim();
    return GridFunction(space, std::move(grid), std::vector<double>(n, 0.0));
  }

  const BanachSpace& space() const { return space_; }
  const QuadratureGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t dim() const { return space_.dim(); }
  std::size_t size() const { return grid_->size(); }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> value(std::size_t node) const {
    return std::span<const double>(values_).subspan(node * dim(), dim());
  }
  double norm_at(std::size_t node) const { return space_.norm(value(node)); }

  bool has_evaluator() const { return static_cast<bool>(evaluator_); }
  const Evaluator& evaluator() const { return evaluator_; }
  void set_evaluator(Evaluator e) { evaluator_ = std::move(e); }

  /// True when some operation that produced this function dropped nonzero
  /// values at the truncation box.
  bool truncated() const { return truncated_; }
  void mark_truncated(bool t = true) { truncated_ = truncated_ || t; }

  /// f(x) written into out; returns true when x lies outside the box.
  bool evaluate_into(const GroupElement& x, std::span<double> out) const {
    const QuadratureGrid& g = *grid_;
    if (!g.box().contains(x) && !all_periodic()) {
      std::fill(out.begin(), out.end(), 0.0);
      return true;
    }
    if (evaluator_) {
      evaluator_(x, out);
      return false;
    }
    Stencil st;
    if (!g.stencil(x, st)) {
      std::fill(out.begin(), out.end(), 0.0);
      return true;
    }
    const std::size_t d = dim();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t s = 0; s < st.size; ++s) {
      const double* v = values_.data() + st.index[s] * d;
      for (std::size_t k = 0; k < d; ++k) out[k] += st.weight[s] * v[k];
    }
    return false;
  }

  /// Nonzero value that would be cut off at an outside point x: the
  /// closed-form value if known, else the nearest edge value.
  bool loses_mass_at(const GroupElement& x) const {
    std::vector<double> tmp(dim());
    if (evaluator_) {
      evaluator_(x, tmp);
      return space_.norm(tmp) > 0.0;
    }
    return norm_at(grid_->nearest_node(x)) > 0.0;
  }

  GridFunction& operator+=(const GridFunction& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    evaluator_ = nullptr;
    truncated_ = truncated_ || o.truncated_;
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    evaluator_ = nullptr;
    truncated_ = truncated_ || o.truncated_;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) {
    for (double& v : a.values_) v *= s;
    if (a.evaluator_) {
      a.evaluator_ = [e = a.evaluator_, s](const GroupElement& x, std::span<double> out) {
        e(x, out);
        for (double& v : out) v *= s;
      };
    }
    return a;
  }

  void check_compatible(const GridFunction& o) const {
    if (!same_grid(*grid_, *o.grid_)) throw ContractViolation("GridFunction: grid mismatch");
    if (!(space_ == o.space_)) throw ContractViolation("GridFunction: Banach space mismatch");
  }

 private:
  bool all_periodic() const {
    for (std::size_t k = 0; k < grid_->counts().size(); ++k)
      if (!grid_->periodic(k)) return false;
    return true;
  }

  BanachSpace space_;
  GridPtr grid_;
  std::vector<double> values_;
  Evaluator evaluator_;
  bool truncated_ = false;
};

/// A finite family Gamma of functions on a common grid and Banach space.
struct FunctionFamily {
  std::vector<GridFunction> members;
  std::string label;

  FunctionFamily() = default;
  FunctionFamily(std::vector<GridFunction> m, std::string l) : members(std::move(m)), label(std::move(l)) {
    validate();
  }

  void validate() const {
    if (members.empty()) throw ConfigError("function family is empty");
    for (const auto& f : members) members.front().check_compatible(f);
  }
  std::size_t size() const { return members.size(); }
  const GridFunction& operator[](std::size_t i) const { return members[i]; }
  const QuadratureGrid& grid() const { return members.front().grid(); }
  const GridPtr& grid_ptr() const { return members.front().grid_ptr(); }
  const BanachSpace& space() const { return members.front().space(); }
};

inline Evaluation evaluate(const GridFunction& f, const GroupElement& x) {
  Evaluation e{BanachPoint(f.dim()), false};
  e.truncated = f.evaluate_into(x, e.value.components);
  return e;
}

inline void check_exponent(double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p exponent must satisfy p >= 1");
}

/// (sum over nodes in region of weight * ||f||_B^p)^(1/p); max for p = inf.
inline double lp_norm(const GridFunction& f, const Region& region, double p) {
  check_exponent(p);
  const QuadratureGrid& g = f.grid();
  if (p == kInfinity) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (region(g.node(i))) m = std::max(m, f.norm_at(i));
    return m;
  }
  std::vector<double> terms;
  terms.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!region(g.node(i))) continue;
    const double n = f.norm_at(i);
    terms.push_back(g.weight(i) * (p == 1.0 ? n : p == 2.0 ? n * n : std::pow(n, p)));
  }
  const double s = pairwise_sum(terms);
  return p == 1.0 ? s : p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

inline double lp_norm(const GridFunction& f, double p) { return lp_norm(f, Region::all(), p); }

/// Bochner integral over the nodes of `region`: sum of weight * f(node).
inline BanachPoint integrate(const QuadratureGrid& grid, const GridFunction& f,
                             const Region& region = Region::all()) {
  if (!same_grid(grid, f.grid())) throw ContractViolation("integrate: grid mismatch");
  const std::size_t d = f.dim();
  std::vector<std::size_t> idx;
  idx.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (region(grid.node(i))) idx.push_back(i);
  BanachPoint out(d);
  std::vector<double> terms(idx.size());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t t = 0; t < idx.size(); ++t) terms[t] = grid.weight(idx[t]) * f.value(idx[t])[k];
    out[k] = pairwise_sum(terms);
  }
  return out;
}

/// f^-(x) = f(x^-1), sampled at the nodes. The closed-form evaluator is used
/// when present, else chart interpolation; inverse points outside the box
/// carrying nonzero values set the truncation flag.
inline GridFunction pullback_inverse(const GridFunction& f) {
  const QuadratureGrid& g = f.grid();
  const GroupModel& model = g.model();
  const std::size_t d = f.dim();
  std::vector<double> values(g.size() * d);
  bool lost = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const GroupElement xi = model.inv_unchecked(g.node(i));
    const bool outside = f.evaluate_into(xi, std::span<double>(values).subspan(i * d, d));
    if (outside && f.loses_mass_at(xi)) lost = true;
  }
  GridFunction out(f.space(), f.grid_ptr(), std::move(values));
  if (f.has_evaluator()) {
    out.set_evaluator([e = f.evaluator(), model](const GroupElement& x, std::span<double> o) {
      e(model.inv_unchecked(x), o);
    });
  }
  out.mark_truncated(lost || f.truncated());
  return out;
}

/// Bochner integral of f^- over A.
inline Evaluation set_integral(const GridFunction& f, const Region& a) {
  const GridFunction inv = pullback_inverse(f);
  return {integrate(f.grid(), inv, a), inv.truncated()};
}

}  // namespace lpcompact

#endif  // LPCOMPACT_BOCHNER_HPP_
