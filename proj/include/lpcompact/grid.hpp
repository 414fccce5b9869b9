#ifndef LPCOMPACT_GRID_HPP_
#define LPCOMPACT_GRID_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lpcompact/errors.hpp"
#include "lpcompact/group.hpp"
#include "lpcompact/reduce.hpp"

namespace lpcompact {

/// Axis-aligned box in chart coordinates. For the integer lattice the bounds
/// are inclusive integer ranges.
struct ChartBox {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const GroupElement& x, double tol = 1e-12) const {
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const double slack = tol * std::max(1.0, std::abs(hi[k] - lo[k]));
      if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
    }
    return true;
  }
  friend bool operator==(const ChartBox&, const ChartBox&) = default;
};

/// A measurable subset of the group, given by a membership predicate on
/// group elements. The label is carried into reports.
class Region {
 public:
  using Predicate = std::function<bool(const GroupElement&)>;

  Region(std::string label, Predicate pred) : label_(std::move(label)), pred_(std::move(pred)) {}

  static Region all() {
    return {"G", [](const GroupElement&) { return true; }};
  }
  static Region none() {
    return {"empty", [](const GroupElement&) { return false; }};
  }
  static Region box(ChartBox b) {
    std::string label = "box[";
    for (std::size_t k = 0; k < b.dim(); ++k) {
      if (k) label += " x ";
      label += format_bound(b.lo[k]) + "," + format_bound(b.hi[k]);
    }
    label += "]";
    return {label, [b = std::move(b)](const GroupElement& x) { return b.contains(x); }};
  }
  /// Symmetric chart ball {x : d(x,e) <= r and d(x^-1,e) <= r}.
  static Region symmetric_ball(const GroupModel& model, double radius) {
    return {"ball(r=" + format_bound(radius) + ")", [model, radius](const GroupElement& x) {
              return model.distance_to_identity(x) <= radius &&
                     model.distance_to_identity(model.inv_unchecked(x)) <= radius;
            }};
  }

  bool operator()(const GroupElement& x) const { return pred_(x); }
  const std::string& label() const { return label_; }

  Region complement() const {
    return {"G\\" + label_, [p = pred_](const GroupElement& x) { return !p(x); }};
  }
  Region intersect(const Region& other) const {
    return {label_ + "&" + other.label_,
            [p = pred_, q = other.pred_](const GroupElement& x) { return p(x) && q(x); }};
  }

 private:
  static std::string format_bound(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }

  std::string label_;
  Predicate pred_;
};

/// Interpolation stencil: up to 2^dim (node index, weight) pairs.
struct Stencil {
  std::array<std::size_t, 16> index{};
  std::array<double, 16> weight{};
  std::size_t size = 0;
};

/// Finite cell decomposition of a chart box with positive Haar weights.
/// Continuous models use uniform cells with nodes at cell midpoints and
/// weight = cell volume * Haar density at the node; the lattice uses
/// counting measure (one node per point, weight 1).
class QuadratureGrid {
 public:
  QuadratureGrid(GroupModel model, ChartBox box, double resolution)
      : model_(model), box_(std::move(box)), resolution_(resolution) {
    const std::size_t dim = model_.dimension();
    if (box_.lo.size() != dim || box_.hi.size() != dim)
      throw ConfigError("grid box dimension does not match the model");
    if (!(resolution > 0.0) || !std::isfinite(resolution))
      throw ConfigError("grid resolution must be positive");
    counts_.resize(dim);
    steps_.resize(dim);
    first_.resize(dim);
    periodic_.assign(dim, false);
    double mesh2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double lo = box_.lo[k];
      const double hi = box_.hi[k];
      if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("grid box must be finite");
      if (model_.is_discrete()) {
        if (lo != std::round(lo) || hi != std::round(hi))
          throw ConfigError("lattice box bounds must be integers");
        if (hi < lo) throw ConfigError("empty grid region");
        counts_[k] = static_cast<std::size_t>(hi - lo) + 1;
        steps_[k] = 1.0;
        first_[k] = lo;
      } else {
        if (!(hi > lo)) throw ConfigError("empty grid region");
        if (model_.kind() == GroupKind::Torus) {
          if (lo < 0.0 || hi > 1.0) throw ConfigError("torus box must lie in [0,1]");
          periodic_[k] = (lo == 0.0 && hi == 1.0);
        }
        if (model_.kind() == GroupKind::AffineGroup && k == 0 && !(lo > 0.0))
          throw ConfigError("affine grid box needs a > 0");
        const double cells = std::ceil((hi - lo) / resolution - 1e-9);
        counts_[k] = static_cast<std::size_t>(std::max(1.0, cells));
        steps_[k] = (hi - lo) / static_cast<double>(counts_[k]);
        first_[k] = lo + 0.5 * steps_[k];
        mesh2 += steps_[k] * steps_[k];
      }
    }
    mesh_ = model_.is_discrete() ? 1.0 : std::sqrt(mesh2);

    std::size_t n = 1;
    for (auto c : counts_) n *= c;
    if (n > 50'000'000) throw ConfigError("grid too large");
    nodes_.reserve(n);
    weights_.reserve(n);
    double cell_volume = 1.0;
    if (!model_.is_discrete())
      for (double s : steps_) cell_volume *= s;
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t i = 0; i < n; ++i) {
      GroupElement x = GroupElement::zeros(dim);
      for (std::size_t k = 0; k < dim; ++k) x[k] = first_[k] + static_cast<double>(idx[k]) * steps_[k];
      nodes_.push_back(x);
      weights_.push_back(model_.is_discrete() ? 1.0 : cell_volume * model_.haar_density(x));
      for (std::size_t k = dim; k-- > 0;) {
        if (++idx[k] < counts_[k]) break;
        idx[k] = 0;
      }
    }
  }

  const GroupModel& model() const { return model_; }
  const ChartBox& box() const { return box_; }
  double resolution() const { return resolution_; }
  /// Largest cell diameter in the chart metric (1 for the lattice).
  double mesh() const { return mesh_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<GroupElement>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const GroupElement& node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const std::vector<double>& steps() const { return steps_; }
  bool periodic(std::size_t k) const { return periodic_[k]; }

  double total_weight() const { return pairwise_sum(weights_); }

  /// Index of the node whose cell contains x (clamped to the box).
  std::size_t nearest_node(const GroupElement& x) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      double t = std::round((x[k] - first_[k]) / steps_[k]);
      const double n = static_cast<double>(counts_[k]);
      if (periodic_[k]) t = t - n * std::floor(t / n);
      t = std::clamp(t, 0.0, n - 1.0);
      flat = flat * counts_[k] + static_cast<std::size_t>(t);
    }
    return flat;
  }

  /// Multilinear interpolation stencil over node centres. Points between the
  /// outermost nodes and the box boundary use the edge value; periodic torus
  /// axes wrap. Returns false when x lies outside the box.
  bool stencil(const GroupElement& x, Stencil& out) const {
    const std::size_t dim = counts_.size();
    std::array<std::size_t, kMaxChartDim> i0{}, i1{};
    std::array<double, kMaxChartDim> frac{};
    for (std::size_t k = 0; k < dim; ++k) {
      const double n = static_cast<double>(counts_[k]);
      double t = (x[k] - first_[k]) / steps_[k];
      if (std::abs(t - std::round(t)) < 1e-9) t = std::round(t);  // on a node
      if (periodic_[k]) {
        t = t - n * std::floor(t / n);
        double f = std::floor(t);
        frac[k] = t - f;
        i0[k] = static_cast<std::size_t>(f) % counts_[k];
        i1[k] = (i0[k] + 1) % counts_[k];
        continue;
      }
      const double tol = 1e-9;
      if (t < -0.5 - tol || t > n - 0.5 + tol) return false;
      if (t <= 0.0) {
        i0[k] = i1[k] = 0;
        frac[k] = 0.0;
      } else if (t >= n - 1.0) {
        i0[k] = i1[k] = counts_[k] - 1;
        frac[k] = 0.0;
      } else {
        const double f = std::floor(t);
        i0[k] = static_cast<std::size_t>(f);
        i1[k] = i0[k] + 1;
        frac[k] = t - f;
      }
    }
    out.size = 0;
    const std::size_t corners = std::size_t{1} << dim;
    for (std::size_t c = 0; c < corners; ++c) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < dim; ++k) {
        const bool upper = (c >> (dim - 1 - k)) & 1U;
        w *= upper ? frac[k] : 1.0 - frac[k];
        flat = flat * counts_[k] + (upper ? i1[k] : i0[k]);
      }
      if (w == 0.0) continue;
      out.index[out.size] = flat;
      out.weight[out.size] = w;
      ++out.size;
    }
    return true;
  }

  /// Index of the outermost layer of cells (boundary of the truncation box).
  bool on_box_edge(std::size_t flat) const {
    for (std::size_t k = counts_.size(); k-- > 0;) {
      const std::size_t i = flat % counts_[k];
      flat /= counts_[k];
      if (!periodic_[k] && (i == 0 || i + 1 == counts_[k])) return true;
    }
    return false;
  }

 private:
  GroupModel model_;
  ChartBox box_;
  double resolution_;
  double mesh_ = 0.0;
  std::vector<std::size_t> counts_;
  std::vector<double> steps_;
  std::vector<double> first_;
  std::vector<bool> periodic_;
  std::vector<GroupElement> nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

inline GridPtr build_grid(const GroupModel& model, const ChartBox& box, double resolution) {
  return std::make_shared<const QuadratureGrid>(model, box, resolution);
}

inline bool same_grid(const QuadratureGrid& a, const QuadratureGrid& b) {
  return &a == &b || (a.model() == b.model() && a.box() == b.box() && a.counts() == b.counts());
}

/// Haar measure of the nodes of `grid` that satisfy `subset`.
inline double measure(const QuadratureGrid& grid, const Region& subset) {
  std::vector<double> terms;
  terms.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (subset(grid.node(i))) terms.push_back(grid.weight(i));
  return pairwise_sum(terms);
}

}  // namespace lpcompact

#endif  // LPCOMPACT_GRID_HPP_
