#ifndef LPCOMPACT_GROUP_HPP_
#define LPCOMPACT_GROUP_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lpcompact/errors.hpp"

namespace lpcompact {

inline constexpr std::size_t kMaxChartDim = 4;

/// A point of a group in chart coordinates. Capacity is fixed so the O(N^2)
/// convolution loops never allocate.
class GroupElement {
 public:
  GroupElement() = default;
  GroupElement(std::initializer_list<double> coords) {
    if (coords.size() == 0 || coords.size() > kMaxChartDim)
      throw ContractViolation("GroupElement: chart dimension must be in [1, 4]");
    dim_ = coords.size();
    std::size_t k = 0;
    for (double c : coords) c_[k++] = c;
  }
  explicit GroupElement(std::span<const double> coords) {
    if (coords.empty() || coords.size() > kMaxChartDim)
      throw ContractViolation("GroupElement: chart dimension must be in [1, 4]");
    dim_ = coords.size();
    for (std::size_t k = 0; k < dim_; ++k) c_[k] = coords[k];
  }
  static GroupElement zeros(std::size_t dim) {
    GroupElement e;
    e.dim_ = dim;
    return e;
  }

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t k) const { return c_[k]; }
  double& operator[](std::size_t k) { return c_[k]; }
  std::span<const double> coords() const { return {c_.data(), dim_}; }

  friend bool operator==(const GroupElement& x, const GroupElement& y) {
    if (x.dim_ != y.dim_) return false;
    for (std::size_t k = 0; k < x.dim_; ++k)
      if (x.c_[k] != y.c_[k]) return false;
    return true;
  }

 private:
  std::array<double, kMaxChartDim> c_{};
  std::size_t dim_ = 0;
};

enum class GroupKind { RealLine, Torus, IntegerLattice, AffineGroup };

inline std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::RealLine: return "RealLine";
    case GroupKind::Torus: return "Torus";
    case GroupKind::IntegerLattice: return "IntegerLattice";
    case GroupKind::AffineGroup: return "AffineGroup";
  }
  return "?";
}

inline GroupKind group_kind_from_string(std::string_view name) {
  if (name == "RealLine") return GroupKind::RealLine;
  if (name == "Torus") return GroupKind::Torus;
  if (name == "IntegerLattice") return GroupKind::IntegerLattice;
  if (name == "AffineGroup") return GroupKind::AffineGroup;
  throw ConfigError("unknown group model '" + std::string(name) + "'");
}

/// Concrete locally compact groups with closed-form laws.
///
///   RealLine(n)       R^n under addition, Lebesgue measure.
///   Torus(n)          (R/Z)^n, chart [0,1)^n, wraparound metric.
///   IntegerLattice(n) Z^n, counting measure.
///   AffineGroup       {(a,b) : a > 0} with (a,b)(a',b') = (aa', ab' + b),
///                     left Haar density a^-2 and modular function a.
///
/// The abelian models are unimodular. For the affine group, right
/// translation by (a0,b0) has chart Jacobian a0, so mu(A x) = mu(A) / a0 and
/// the identity Delta(x) mu(A) = mu(A x^-1) gives Delta(a,b) = a.
class GroupModel {
 public:
  static GroupModel real_line(std::size_t dim = 1) { return {GroupKind::RealLine, dim}; }
  static GroupModel torus(std::size_t dim = 1) { return {GroupKind::Torus, dim}; }
  static GroupModel integer_lattice(std::size_t dim = 1) { return {GroupKind::IntegerLattice, dim}; }
  static GroupModel affine() { return {GroupKind::AffineGroup, 2}; }

  static GroupModel make(GroupKind kind, std::size_t dim = 1) {
    if (kind == GroupKind::AffineGroup) return affine();
    return {kind, dim};
  }

  GroupKind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  bool is_abelian() const { return kind_ != GroupKind::AffineGroup; }
  bool is_unimodular() const { return kind_ != GroupKind::AffineGroup; }
  bool is_discrete() const { return kind_ == GroupKind::IntegerLattice; }
  std::string name() const {
    std::string n(to_string(kind_));
    if (kind_ != GroupKind::AffineGroup && dim_ > 1) n += "^" + std::to_string(dim_);
    return n;
  }

  GroupElement identity() const {
    GroupElement e = GroupElement::zeros(dim_);
    if (kind_ == GroupKind::AffineGroup) e[0] = 1.0;
    return e;
  }

  bool in_domain(const GroupElement& x) const {
    if (x.dim() != dim_) return false;
    for (std::size_t k = 0; k < dim_; ++k)
      if (!std::isfinite(x[k])) return false;
    switch (kind_) {
      case GroupKind::RealLine: return true;
      case GroupKind::Torus:
        for (std::size_t k = 0; k < dim_; ++k)
          if (x[k] < 0.0 || x[k] >= 1.0) return false;
        return true;
      case GroupKind::IntegerLattice:
        for (std::size_t k = 0; k < dim_; ++k)
          if (x[k] != std::round(x[k])) return false;
        return true;
      case GroupKind::AffineGroup: return x[0] > 0.0;
    }
    return false;
  }

  void validate(const GroupElement& x) const {
    if (x.dim() != dim_)
      throw DomainError(name() + ": element has chart dimension " + std::to_string(x.dim()) +
                        ", expected " + std::to_string(dim_));
    if (!in_domain(x)) throw DomainError(name() + ": element outside chart domain");
  }

  GroupElement mul(const GroupElement& x, const GroupElement& y) const {
    validate(x);
    validate(y);
    return mul_unchecked(x, y);
  }

  GroupElement inv(const GroupElement& x) const {
    validate(x);
    return inv_unchecked(x);
  }

  /// Closed-form law without domain checks, for inner loops over grid nodes.
  GroupElement mul_unchecked(const GroupElement& x, const GroupElement& y) const {
    GroupElement r = GroupElement::zeros(dim_);
    switch (kind_) {
      case GroupKind::RealLine:
      case GroupKind::IntegerLattice:
        for (std::size_t k = 0; k < dim_; ++k) r[k] = x[k] + y[k];
        break;
      case GroupKind::Torus:
        for (std::size_t k = 0; k < dim_; ++k) r[k] = wrap_unit(x[k] + y[k]);
        break;
      case GroupKind::AffineGroup:
        r[0] = x[0] * y[0];
        r[1] = x[0] * y[1] + x[1];
        break;
    }
    return r;
  }

  GroupElement inv_unchecked(const GroupElement& x) const {
    GroupElement r = GroupElement::zeros(dim_);
    switch (kind_) {
      case GroupKind::RealLine:
      case GroupKind::IntegerLattice:
        for (std::size_t k = 0; k < dim_; ++k) r[k] = -x[k] + 0.0;
        break;
      case GroupKind::Torus:
        for (std::size_t k = 0; k < dim_; ++k) r[k] = x[k] == 0.0 ? 0.0 : wrap_unit(1.0 - x[k]);
        break;
      case GroupKind::AffineGroup:
        r[0] = 1.0 / x[0];
        r[1] = -x[1] / x[0] + 0.0;
        break;
    }
    return r;
  }

  double modular(const GroupElement& x) const {
    validate(x);
    return modular_unchecked(x);
  }
  double modular_unchecked(const GroupElement& x) const {
    return kind_ == GroupKind::AffineGroup ? x[0] : 1.0;
  }

  /// Left Haar density with respect to chart Lebesgue measure (counting
  /// measure for the lattice).
  double haar_density(const GroupElement& x) const {
    return kind_ == GroupKind::AffineGroup ? 1.0 / (x[0] * x[0]) : 1.0;
  }

  double distance(const GroupElement& x, const GroupElement& y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      double d = std::abs(x[k] - y[k]);
      if (kind_ == GroupKind::Torus) d = std::min(d, 1.0 - d);
      s += d * d;
    }
    return std::sqrt(s);
  }

  double distance_to_identity(const GroupElement& x) const { return distance(x, identity()); }

  friend bool operator==(const GroupModel& a, const GroupModel& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_;
  }

 private:
  GroupModel(GroupKind kind, std::size_t dim) : kind_(kind), dim_(dim) {
    if (dim == 0 || dim > kMaxChartDim) throw ConfigError("chart dimension must be in [1, 4]");
  }

  // Maps to [0,1); values within round-off below 1 snap to 0 so that
  // x + (1 - x) is the identity.
  static double wrap_unit(double u) {
    double r = u - std::floor(u);
    if (r >= 1.0 - 0x1p-50) r = 0.0;
    return r;
  }

  GroupKind kind_;
  std::size_t dim_;
};

enum class GroupOp { Mul, Inv, Identity };

inline GroupElement group_op(const GroupModel& model, GroupOp op, const GroupElement& x,
                             const std::optional<GroupElement>& y = std::nullopt) {
  if ((op == GroupOp::Mul) != y.has_value())
    throw ContractViolation("group_op: second operand is required for mul and only for mul");
  switch (op) {
    case GroupOp::Mul: return model.mul(x, *y);
    case GroupOp::Inv: return model.inv(x);
    case GroupOp::Identity: model.validate(x); return model.identity();
  }
  return model.identity();
}

}  // namespace lpcompact

#endif  // LPCOMPACT_GROUP_HPP_
