#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lpcompact/identities.hpp"
#include "lpcompact/operators.hpp"

using namespace lpcompact;

namespace {

GridFunction scalar(const GridPtr& g, std::function<double(const GroupElement&)> f) {
  return GridFunction::sample(BanachSpace(1), g, [f](const GroupElement& x, std::span<double> o) { o[0] = f(x); });
}

double bump(double t) { return t * t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST(Translate, IdentityUnchanged) {
  for (auto [m, box] : {std::pair{GroupModel::real_line(), ChartBox{{-1.0}, {1.0}}},
                        std::pair{GroupModel::affine(), ChartBox{{0.5, -1.0}, {2.0, 1.0}}}}) {
    const auto g = build_grid(m, box, 0.05);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<double> v(g->size() * 2);
    for (double& x : v) x = n(rng);
    const GridFunction f(BanachSpace(2), g, v);
    EXPECT_EQ(translate(m, m.identity(), f).values(), f.values());
  }
}

TEST(Translate, IndicatorOnLine) {
  const auto m = GroupModel::real_line();
  const auto g = build_grid(m, {{-1.0}, {2.0}}, 0.01);
  const auto f = scalar(g, [](const GroupElement& x) { return x[0] >= 0.0 && x[0] <= 1.0 ? 1.0 : 0.0; });
  const auto t = translate(m, {0.3}, f);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->node(i)[0];
    if (std::abs(x - 0.3) <= g->mesh() || std::abs(x - 1.3) <= g->mesh()) continue;
    EXPECT_EQ(t.value(i)[0], x >= 0.3 && x <= 1.3 ? 1.0 : 0.0) << x;
  }
}

// ||T^h f||_p = ||f||_p up to C mesh on every model.
TEST(Translate, NormPreserved) {
  for (auto m : {GroupModel::real_line(), GroupModel::torus(), GroupModel::integer_lattice(), GroupModel::affine()}) {
    const auto fx = identity_fixture(m);
    const double h = m.is_discrete() ? 1.0 : 0.01;
    const auto g = build_grid(m, fx.box, h);
    std::mt19937_64 rng(kIdentitySeed);
    for (const auto& tf : fx.functions) {
      const auto f = scalar(g, tf.f);
      for (int s = 0; s < 4; ++s) {
        const GroupElement x = fx.sample_element(rng);
        for (double p : {1.0, 2.0}) {
          const double a = lp_norm(translate(m, x, f), p);
          const double b = lp_norm(f, p);
          EXPECT_NEAR(a / b, 1.0, m.is_discrete() ? 1e-14 : 5 * g->mesh()) << m.name() << " " << tf.name;
        }
      }
    }
  }
}

// 1_[-1/2,1/2] * 1_[-1/2,1/2] is the triangle max(0, 1 - |x|).
TEST(Convolve, TriangleOnLine) {
  const auto g = build_grid(GroupModel::real_line(), {{-2.0}, {2.0}}, 0.01);
  const Kernel j = mollifier(g, 0.5, 2.0);
  const auto f = scalar(g, [](const GroupElement& x) { return std::abs(x[0]) <= 0.5 ? 1.0 : 0.0; });
  for (auto formula : {ConvolutionFormula::Alt, ConvolutionFormula::Xy}) {
    const auto c = convolve(j, f, formula);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double x = g->node(i)[0];
      EXPECT_NEAR(c.value(i)[0], std::max(0.0, 1.0 - std::abs(x)), 2 * g->mesh()) << x;
    }
    EXPECT_NEAR(evaluate(c, {0.0}).value[0], 1.0, 2 * g->mesh());
    EXPECT_NEAR(evaluate(c, {1.0}).value[0], 0.0, 2 * g->mesh());
    EXPECT_NEAR(evaluate(c, {-1.0}).value[0], 0.0, 2 * g->mesh());
  }
}

TEST(Convolve, PointMassSurrogate) {
  const auto g = build_grid(GroupModel::real_line(), {{-2.0}, {2.0}}, 0.01);
  const Kernel j = mollifier(g, 1e-4);
  ASSERT_FALSE(j.flags.empty());
  const auto f = scalar(g, [](const GroupElement& x) { return std::cos(x[0]) * bump(x[0] / 1.5); });
  EXPECT_LT(max_abs_diff(convolve(j, f), f), 2 * g->mesh());
}

TEST(Convolve, FormulasAgree) {
  for (auto m : {GroupModel::real_line(), GroupModel::torus(), GroupModel::affine()}) {
    const auto fx = identity_fixture(m);
    const double h = m.kind() == GroupKind::AffineGroup ? 0.04 : 0.01;
    const auto g = build_grid(m, fx.box, h);
    const Kernel j = bump_kernel(g, 0.3);
    const double noise = left_invariance_noise(m, h);
    for (const auto& tf : fx.functions) {
      if (tf.name.rfind("slab", 0) == 0) continue;
      const auto f = scalar(g, tf.f);
      const auto a = convolve(j, f, ConvolutionFormula::Alt);
      const auto b = convolve(j, f, ConvolutionFormula::Xy);
      double scale = 0.0;
      for (double v : a.values()) scale = std::max(scale, std::abs(v));
      EXPECT_LE(max_abs_diff(a, b), 3.0 * noise * scale + 1e-12) << m.name() << " " << tf.name;
    }
  }
}

TEST(Convolve, SideCondition) {
  const auto g = build_grid(GroupModel::real_line(), {{-2.0}, {2.0}}, 0.01);
  const auto f = scalar(g, [](const GroupElement& x) { return bump(x[0]); });
  EXPECT_NO_THROW(convolve(buldygin_kernel(g, 0.1, 2.0), f));
  try {
    convolve(buldygin_kernel(g, 0.1, 1.0), f);
    FAIL() << "expected a side-condition error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("has compact support if either"), std::string::npos);
  }
  const auto ga = build_grid(GroupModel::affine(), {{0.5, -1.0}, {2.0, 1.0}}, 0.05);
  Kernel k = bump_kernel(ga, 0.3);
  k.compact_support = false;
  const auto fa = scalar(ga, [](const GroupElement& x) { return bump(x[0] - 1.0) * bump(x[1]); });
  EXPECT_THROW(convolve(k, fa), ConfigError);
}

TEST(Convolve, YoungContraction) {
  const auto g = build_grid(GroupModel::real_line(), {{-3.0}, {3.0}}, 0.01);
  const auto f = scalar(g, [](const GroupElement& x) { return std::sin(5 * x[0]) * bump(x[0] / 1.5); });
  for (double r : {0.4, 0.2, 0.1, 0.05})
    for (double p : {1.0, 2.0, 4.0}) EXPECT_LE(lp_norm(convolve(mollifier(g, r, p), f), p), lp_norm(f, p) + g->mesh());
}

// |(j*f)(x + s) - (j*f)(x)| <= ||f||_p ||T^s j - j||_{p'} at grid level,
// with s one grid step.
TEST(Convolve, ContinuityBoundedByKernelModulus) {
  const auto g = build_grid(GroupModel::real_line(), {{-3.0}, {3.0}}, 0.01);
  std::vector<double> v;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& x : g->nodes()) v.push_back(std::abs(x[0]) < 1.5 ? u(rng) : 0.0);
  const GridFunction f(BanachSpace(1), g, v);
  for (double p : {1.5, 2.0, 3.0}) {
    const Kernel j = bump_kernel(g, 0.4, p);
    const double q = j.conjugate();
    std::vector<double> d;
    const auto& jv = j.j.values();
    for (std::size_t i = 0; i + 1 < g->size(); ++i) d.push_back(jv[i + 1] - jv[i]);
    double s = 0.0;
    for (double x : d) s += g->weight(0) * std::pow(std::abs(x), q);
    const double kernel_modulus = std::pow(s, 1.0 / q);
    const auto c = convolve(j, f);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < g->size(); ++i)
      worst = std::max(worst, std::abs(c.value(i + 1)[0] - c.value(i)[0]));
    EXPECT_LE(worst, lp_norm(f, p) * kernel_modulus * (1 + 1e-9));
  }
}

TEST(Mollifier, UnitMassAndHeight) {
  const auto g = build_grid(GroupModel::real_line(), {{-2.0}, {2.0}}, 0.01);
  const Kernel j = mollifier(g, 0.5);
  EXPECT_NEAR(lp_norm(j.j, 1.0), 1.0, 1e-12);
  EXPECT_TRUE(j.compact_support);
  EXPECT_TRUE(j.flags.empty());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->node(i)[0];
    EXPECT_NEAR(j.j.value(i)[0], std::abs(x) <= 0.5 ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Mollifier, AffineHeightFromMeasure) {
  const auto m = GroupModel::affine();
  const auto g = build_grid(m, {{0.5, -1.0}, {2.0, 1.0}}, 0.01);
  const Kernel j = mollifier(g, 0.2);
  const double mu = measure(*g, Region::symmetric_ball(m, 0.2));
  EXPECT_NEAR(evaluate(j.j, m.identity()).value[0], 1.0 / mu, 1e-9 / mu);
  EXPECT_NEAR(lp_norm(j.j, 1.0), 1.0, 1e-12);
}

TEST(Mollifier, DegenerateRadius) {
  const auto g = build_grid(GroupModel::real_line(), {{-1.0}, {1.0}}, 0.1);
  const Kernel j = mollifier(g, 0.01);
  ASSERT_EQ(j.flags.size(), 1u);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < g->size(); ++i)
    if (j.j.value(i)[0] != 0.0) {
      ++nonzero;
      EXPECT_DOUBLE_EQ(j.j.value(i)[0], 1.0 / g->weight(i));
    }
  EXPECT_EQ(nonzero, 1u);
  EXPECT_THROW(mollifier(g, 0.0), ConfigError);
}

TEST(Buldygin, MassAndTails) {
  const auto g = build_grid(GroupModel::real_line(), {{-2.0}, {2.0}}, 0.002);
  const Region far5("|x|>0.5", [](const GroupElement& x) { return std::abs(x[0]) > 0.5; });
  const Region far25("|x|>0.25", [](const GroupElement& x) { return std::abs(x[0]) > 0.25; });
  for (double h : {0.1, 0.05, 0.02}) EXPECT_NEAR(lp_norm(buldygin_kernel(g, h).j, 1.0), 1.0, 1e-12);
  EXPECT_LT(lp_norm(buldygin_kernel(g, 0.05).j, far5, 2.0), lp_norm(buldygin_kernel(g, 0.1).j, far5, 2.0));
  // Gaussian tail: ||omega_h||_{2;|x|>d}^2 = erfc(d/h) / (2 h sqrt(pi))
  const double h = 0.02, d = 0.25;
  const double closed = std::sqrt(std::erfc(d / h) / (2 * h * std::sqrt(M_PI)));
  EXPECT_LT(closed, 1e-6);
  EXPECT_LT(lp_norm(buldygin_kernel(g, h).j, far25, 2.0), 1e-6);
  EXPECT_FALSE(buldygin_kernel(g, 0.001).flags.empty());
  const auto ga = build_grid(GroupModel::affine(), {{0.5, -1.0}, {2.0, 1.0}}, 0.05);
  EXPECT_THROW(buldygin_kernel(ga, 0.1), ConfigError);
}
