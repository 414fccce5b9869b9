#ifndef LPCOMPACT_SCENARIO_HPP_
#define LPCOMPACT_SCENARIO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpcompact/bochner.hpp"
#include "lpcompact/criteria.hpp"
#include "lpcompact/errors.hpp"
#include "lpcompact/grid.hpp"
#include "lpcompact/group.hpp"
#include "lpcompact/json_lines.hpp"

namespace lpcompact {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct ScenarioConfig {
  std::string name;
  std::string description;
  GroupKind model = GroupKind::RealLine;
  std::size_t dimension = 1;
  ChartBox box;
  double resolution = 0.01;
  double reference_resolution = 0.0;  // 0 = twice the resolution
  double p = 2.0;
  std::size_t banach_dimension = 1;
  double banach_norm_exponent = 2.0;
  std::string generator;
  json parameters = json::object();
  std::vector<ChartBox> s_ladder;
  std::vector<double> radius_ladder;
  std::vector<KernelSpec> kernels;
  std::vector<double> delta_ladder;
  std::vector<double> eps_ladder;
  double set_integral_eps = 0.0;
  std::optional<double> threshold;
  std::size_t translation_samples = kDefaultTranslationSamples;
  ConvolutionFormula formula = ConvolutionFormula::Alt;
  double equicontinuity_kernel_radius = 0.0;
  std::string json_output;
  std::string csv_output;
  std::filesystem::path base_dir;  // for relative custom-JSON paths; not serialised
  std::map<std::string, int> parameter_lines;  // source line per family parameter; not serialised

  GroupModel group() const { return GroupModel::make(model, dimension); }
  BanachSpace banach() const { return BanachSpace(banach_dimension, banach_norm_exponent); }
  CertifyConfig certify_config() const {
    CertifyConfig c;
    c.p = p;
    c.s_ladder = s_ladder;
    c.radius_ladder = radius_ladder;
    c.kernels = kernels;
    c.delta_ladder = delta_ladder;
    c.eps_ladder = eps_ladder;
    c.set_integral_eps = set_integral_eps;
    c.threshold = threshold;
    c.translation_samples = translation_samples;
    c.formula = formula;
    c.equicontinuity_kernel_radius = equicontinuity_kernel_radius;
    return c;
  }
};

// ---------------------------------------------------------------------------
// serialisation

inline json box_to_json(const ChartBox& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

inline json to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  j["model"] = {{"kind", std::string(to_string(c.model))}, {"dimension", c.dimension}};
  j["box"] = box_to_json(c.box);
  j["resolution"] = c.resolution;
  if (c.reference_resolution > 0.0) j["reference_resolution"] = c.reference_resolution;
  j["p"] = c.p;
  j["banach"] = {{"dimension", c.banach_dimension}, {"norm_exponent", c.banach_norm_exponent}};
  j["family"] = {{"generator", c.generator}, {"parameters", c.parameters}};
  j["s_ladder"] = json::array();
  for (const auto& b : c.s_ladder) j["s_ladder"].push_back(box_to_json(b));
  j["radius_ladder"] = c.radius_ladder;
  j["kernels"] = json::array();
  for (const auto& k : c.kernels)
    j["kernels"].push_back({{"type", std::string(to_string(k.type))}, {"parameter", k.parameter}});
  j["delta_ladder"] = c.delta_ladder;
  if (!c.eps_ladder.empty()) j["eps_ladder"] = c.eps_ladder;
  if (c.set_integral_eps > 0.0) j["set_integral_eps"] = c.set_integral_eps;
  if (c.threshold) j["threshold"] = *c.threshold;
  j["translation_samples"] = c.translation_samples;
  j["formula"] = c.formula == ConvolutionFormula::Alt ? "alt" : "xy";
  if (c.equicontinuity_kernel_radius > 0.0) j["equicontinuity_kernel_radius"] = c.equicontinuity_kernel_radius;
  json out = json::object();
  if (!c.json_output.empty()) out["json"] = c.json_output;
  if (!c.csv_output.empty()) out["csv"] = c.csv_output;
  if (!out.empty()) j["output"] = out;
  return j;
}

struct GeneratorInfo {
  std::string name;
  std::string description;
};

inline std::vector<GeneratorInfo> generators() {
  return {
      {"compact-bumps", "raised-cosine bumps over a grid of centres and radii, all inside a fixed compact set"},
      {"runaway-translates", "disjoint translates of one bump stepping away from the identity, unit p-norm each"},
      {"oscillation", "sin(2 pi n x) e_1 on the torus for a range of frequencies n"},
      {"scaled-copies", "alpha f_0 for alpha in {0, 1/k, ..., 1}"},
      {"spike", "unit-mass bumps of shrinking width at a fixed location"},
      {"custom-JSON", "members given as node-indexed value arrays, inline or from a file"},
  };
}

namespace detail {

class ConfigReader {
 public:
  ConfigReader(const json& root, JsonLineIndex lines) : root_(root), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
    throw ConfigError("config:" + std::to_string(lines_.line_of(pointer)) + ": " +
                      (pointer.empty() ? std::string("/") : pointer) + ": " + msg);
  }

  int line_of(const std::string& pointer) const { return lines_.line_of(pointer); }

  const json* find(const std::string& pointer) const {
    const json::json_pointer ptr(pointer);
    return root_.contains(ptr) ? &root_.at(ptr) : nullptr;
  }
  const json& require(const std::string& pointer) const {
    const json* v = find(pointer);
    if (!v) fail(parent(pointer), "missing required field '" + pointer.substr(pointer.rfind('/') + 1) + "'");
    return *v;
  }

  double number(const std::string& pointer) const {
    const json& v = require(pointer);
    if (!v.is_number()) fail(pointer, "expected a number");
    return v.get<double>();
  }
  double number_or(const std::string& pointer, double fallback) const {
    return find(pointer) ? number(pointer) : fallback;
  }
  std::size_t count(const std::string& pointer) const {
    const json& v = require(pointer);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(pointer, "expected a nonnegative integer");
    return v.get<std::size_t>();
  }
  std::string string(const std::string& pointer) const {
    const json& v = require(pointer);
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& pointer) const {
    const json& v = require(pointer);
    if (!v.is_array()) fail(pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(pointer + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  ChartBox box(const std::string& pointer, std::size_t dim) const {
    require(pointer);
    ChartBox b{numbers(pointer + "/lo"), numbers(pointer + "/hi")};
    if (b.lo.size() != dim) fail(pointer + "/lo", "expected " + std::to_string(dim) + " coordinates");
    if (b.hi.size() != dim) fail(pointer + "/hi", "expected " + std::to_string(dim) + " coordinates");
    for (std::size_t k = 0; k < dim; ++k)
      if (!(b.hi[k] > b.lo[k]) && !(b.hi[k] == b.lo[k])) fail(pointer, "hi must not be below lo");
    return b;
  }

 private:
  static std::string parent(const std::string& pointer) { return pointer.substr(0, pointer.rfind('/')); }
  const json& root_;
  JsonLineIndex lines_;
};

inline bool box_inside(const ChartBox& inner, const ChartBox& outer) {
  for (std::size_t k = 0; k < inner.dim(); ++k)
    if (inner.lo[k] < outer.lo[k] || inner.hi[k] > outer.hi[k]) return false;
  return true;
}

}  // namespace detail

/// Parses and validates a scenario config. Schema violations raise
/// ConfigError with the source line and JSON pointer of the offending value.
inline ScenarioConfig parse_config(const std::string& text, std::filesystem::path base_dir = {}) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError("config:" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  const detail::ConfigReader rd(root, JsonLineIndex(text));
  if (!root.is_object()) rd.fail("", "expected a JSON object");

  static const std::vector<std::string> known = {
      "schema_version", "name",         "description",  "model",           "box",
      "resolution",     "reference_resolution",         "p",               "banach",
      "family",         "s_ladder",     "radius_ladder", "kernels",        "delta_ladder",
      "eps_ladder",     "set_integral_eps",             "threshold",       "translation_samples",
      "formula",        "equicontinuity_kernel_radius", "output"};
  for (const auto& [k, v] : root.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      rd.fail("/" + JsonLineIndex::escape(k), "unknown field '" + k + "'");

  ScenarioConfig c;
  c.base_dir = std::move(base_dir);
  if (rd.find("/schema_version") && rd.count("/schema_version") != static_cast<std::size_t>(kSchemaVersion))
    rd.fail("/schema_version", "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  c.name = rd.string("/name");
  if (rd.find("/description")) c.description = rd.string("/description");
  try {
    c.model = group_kind_from_string(rd.string("/model/kind"));
  } catch (const ConfigError& e) {
    rd.fail("/model/kind", e.what());
  }
  c.dimension = c.model == GroupKind::AffineGroup ? 2 : (rd.find("/model/dimension") ? rd.count("/model/dimension") : 1);
  if (c.model == GroupKind::AffineGroup && rd.find("/model/dimension") && rd.count("/model/dimension") != 2)
    rd.fail("/model/dimension", "the affine group has chart dimension 2");
  if (c.dimension < 1 || c.dimension > kMaxChartDim)
    rd.fail("/model/dimension", "dimension must be between 1 and " + std::to_string(kMaxChartDim));
  c.box = rd.box("/box", c.dimension);
  c.resolution = rd.number("/resolution");
  if (!(c.resolution > 0.0)) rd.fail("/resolution", "resolution must be positive");
  c.reference_resolution = rd.number_or("/reference_resolution", 0.0);
  if (c.reference_resolution < 0.0) rd.fail("/reference_resolution", "must be positive");
  c.p = rd.number_or("/p", 2.0);
  if (!(c.p >= 1.0)) rd.fail("/p", "p must satisfy p >= 1");
  if (rd.find("/banach")) {
    c.banach_dimension = rd.find("/banach/dimension") ? rd.count("/banach/dimension") : 1;
    c.banach_norm_exponent = rd.number_or("/banach/norm_exponent", 2.0);
    if (c.banach_dimension < 1) rd.fail("/banach/dimension", "must be >= 1");
    if (!(c.banach_norm_exponent >= 1.0)) rd.fail("/banach/norm_exponent", "must be >= 1");
  }
  c.generator = rd.string("/family/generator");
  {
    const auto gens = generators();
    if (std::none_of(gens.begin(), gens.end(), [&](const GeneratorInfo& g) { return g.name == c.generator; }))
      rd.fail("/family/generator", "unknown generator '" + c.generator + "'");
  }
  if (const json* params = rd.find("/family/parameters")) {
    if (!params->is_object()) rd.fail("/family/parameters", "expected an object");
    c.parameters = *params;
    for (const auto& [k, v] : params->items())
      c.parameter_lines[k] = rd.line_of("/family/parameters/" + JsonLineIndex::escape(k));
  }

  const json& sl = rd.require("/s_ladder");
  if (!sl.is_array() || sl.empty()) rd.fail("/s_ladder", "expected a nonempty array of boxes");
  for (std::size_t i = 0; i < sl.size(); ++i) {
    const std::string ptr = "/s_ladder/" + std::to_string(i);
    ChartBox b = rd.box(ptr, c.dimension);
    if (!b.contains(c.group().identity()))
      rd.fail(ptr, "every S must contain the identity");
    if (!detail::box_inside(b, c.box)) rd.fail(ptr, "S must lie inside the truncation box");
    if (i > 0 && !detail::box_inside(c.s_ladder.back(), b)) rd.fail(ptr, "S ladder must be increasing");
    c.s_ladder.push_back(std::move(b));
  }

  auto strictly = [&](const std::string& ptr, const std::vector<double>& v, bool decreasing, bool allow_empty) {
    if (v.empty() && !allow_empty) rd.fail(ptr, "ladder must be nonempty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) rd.fail(ptr + "/" + std::to_string(i), "ladder entries must be positive");
      if (i > 0 && (decreasing ? !(v[i] < v[i - 1]) : !(v[i] > v[i - 1])))
        rd.fail(ptr + "/" + std::to_string(i),
                std::string("ladder must be strictly ") + (decreasing ? "decreasing" : "increasing"));
    }
  };
  c.radius_ladder = rd.numbers("/radius_ladder");
  strictly("/radius_ladder", c.radius_ladder, true, false);
  c.delta_ladder = rd.numbers("/delta_ladder");
  strictly("/delta_ladder", c.delta_ladder, true, false);
  if (rd.find("/eps_ladder")) {
    c.eps_ladder = rd.numbers("/eps_ladder");
    strictly("/eps_ladder", c.eps_ladder, false, false);
  }

  const json& ks = rd.require("/kernels");
  if (!ks.is_array() || ks.empty()) rd.fail("/kernels", "expected a nonempty array of kernels");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const std::string ptr = "/kernels/" + std::to_string(i);
    KernelSpec k;
    try {
      k.type = kernel_type_from_string(rd.string(ptr + "/type"));
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("config:", 0) == 0) throw;
      rd.fail(ptr + "/type", e.what());
    }
    k.parameter = rd.number(ptr + "/parameter");
    if (!(k.parameter > 0.0)) rd.fail(ptr + "/parameter", "kernel parameter must be positive");
    if (k.type == KernelType::Buldygin && c.model != GroupKind::RealLine)
      rd.fail(ptr + "/type", "buldygin kernels are defined on the real line model only");
    if (k.type == KernelType::Buldygin && c.p == 1.0)
      rd.fail(ptr + "/type", "buldygin kernels violate the side condition at p = 1: j has compact support if either "
                             "G is nonabelian or p = 1");
    if (i > 0 && k.parameter > c.kernels.back().parameter)
      rd.fail(ptr + "/parameter", "kernel ladder must be nonincreasing");
    c.kernels.push_back(k);
  }

  c.set_integral_eps = rd.number_or("/set_integral_eps", 0.0);
  if (c.set_integral_eps < 0.0) rd.fail("/set_integral_eps", "must be positive");
  if (rd.find("/threshold")) {
    c.threshold = rd.number("/threshold");
    if (!(*c.threshold > 0.0)) rd.fail("/threshold", "must be positive");
  }
  if (rd.find("/translation_samples")) {
    c.translation_samples = rd.count("/translation_samples");
    if (c.translation_samples < 1) rd.fail("/translation_samples", "must be >= 1");
  }
  if (rd.find("/formula")) {
    const std::string f = rd.string("/formula");
    if (f == "alt") c.formula = ConvolutionFormula::Alt;
    else if (f == "xy") c.formula = ConvolutionFormula::Xy;
    else rd.fail("/formula", "expected \"alt\" or \"xy\"");
  }
  c.equicontinuity_kernel_radius = rd.number_or("/equicontinuity_kernel_radius", 0.0);
  if (rd.find("/output")) {
    if (rd.find("/output/json")) c.json_output = rd.string("/output/json");
    if (rd.find("/output/csv")) c.csv_output = rd.string("/output/csv");
  }
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// GridFunction JSON: array indexed by node, each entry the component list.

inline json to_json(const GridFunction& f) {
  json a = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto v = f.value(i);
    a.push_back(std::vector<double>(v.begin(), v.end()));
  }
  return a;
}

inline GridFunction grid_function_from_json(const json& a, const BanachSpace& space, const GridPtr& grid) {
  if (!a.is_array() || a.size() != grid->size())
    throw ConfigError("grid function must list one value per node (" + std::to_string(grid->size()) + ")");
  std::vector<double> values;
  values.reserve(grid->size() * space.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const json& v = a[i];
    if (!v.is_array() || v.size() != space.dim())
      throw ConfigError("grid function node " + std::to_string(i) + ": expected " + std::to_string(space.dim()) +
                        " components");
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("grid function node " + std::to_string(i) + ": non-numeric component");
      values.push_back(x.get<double>());
    }
  }
  return GridFunction(space, grid, std::move(values));
}

// ---------------------------------------------------------------------------
// family generators

namespace detail {

// Raised cosine cos^2(pi t / 2) on |t| < 1.
inline double raised_cosine(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * t);
  return c * c;
}

inline double chart_distance(const GroupModel& m, const GroupElement& x, const std::vector<double>& c) {
  GroupElement y = GroupElement::zeros(m.dimension());
  for (std::size_t k = 0; k < c.size(); ++k) y[k] = c[k];
  return m.distance(x, y);
}

inline GridFunction bump_member(const GroupModel& m, const BanachSpace& b, const GridPtr& g, std::vector<double> centre,
                                double radius) {
  return GridFunction::sample(b, g, [m, centre = std::move(centre), radius](const GroupElement& x, std::span<double> o) {
    std::fill(o.begin(), o.end(), 0.0);
    o[0] = raised_cosine(chart_distance(m, x, centre) / radius);
  });
}

class ParamReader {
 public:
  ParamReader(const json& params, std::string gen, const std::map<std::string, int>& lines)
      : p_(params), gen_(std::move(gen)), lines_(lines) {}
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = lines_.find(key);
    const std::string where = it != lines_.end() ? "config:" + std::to_string(it->second) + ": " : "";
    throw ConfigError(where + "/family/parameters/" + key + " (" + gen_ + "): " + msg);
  }
  bool has(const std::string& key) const { return p_.contains(key); }
  double number(const std::string& key) const {
    if (!p_.contains(key) || !p_[key].is_number()) fail(key, "expected a number");
    return p_[key].get<double>();
  }
  std::size_t count(const std::string& key) const {
    if (!p_.contains(key) || !p_[key].is_number_integer() || p_[key].get<long long>() < 1)
      fail(key, "expected a positive integer");
    return p_[key].get<std::size_t>();
  }
  std::vector<double> numbers(const std::string& key) const {
    if (!p_.contains(key) || !p_[key].is_array()) fail(key, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& x : p_[key]) {
      if (!x.is_number()) fail(key, "expected an array of numbers");
      v.push_back(x.get<double>());
    }
    return v;
  }
  std::vector<double> point(const std::string& key, std::size_t dim) const {
    std::vector<double> v = numbers(key);
    if (v.size() != dim) fail(key, "expected " + std::to_string(dim) + " coordinates");
    return v;
  }
  std::vector<std::vector<double>> points(const std::string& key, std::size_t dim) const {
    if (!p_.contains(key) || !p_[key].is_array() || p_[key].empty()) fail(key, "expected a nonempty array of points");
    std::vector<std::vector<double>> out;
    for (const auto& pt : p_[key]) {
      if (!pt.is_array() || pt.size() != dim) fail(key, "each point needs " + std::to_string(dim) + " coordinates");
      std::vector<double> v;
      for (const auto& x : pt) {
        if (!x.is_number()) fail(key, "non-numeric coordinate");
        v.push_back(x.get<double>());
      }
      out.push_back(std::move(v));
    }
    return out;
  }
  const json& raw(const std::string& key) const {
    if (!p_.contains(key)) fail(key, "missing");
    return p_[key];
  }

 private:
  const json& p_;
  std::string gen_;
  const std::map<std::string, int>& lines_;
};

}  // namespace detail

/// Builds Gamma for a config on the given grid.
inline FunctionFamily build_family(const ScenarioConfig& c, const GridPtr& grid) {
  const GroupModel m = grid->model();
  const BanachSpace b = c.banach();
  const std::size_t n = m.dimension();
  const detail::ParamReader pr(c.parameters, c.generator, c.parameter_lines);
  std::vector<GridFunction> members;

  if (c.generator == "compact-bumps") {
    const auto centres = pr.points("centres", n);
    const auto radii = pr.numbers("radii");
    if (radii.empty()) pr.fail("radii", "expected at least one radius");
    for (double r : radii)
      if (!(r > 0.0)) pr.fail("radii", "radii must be positive");
    for (const auto& ctr : centres)
      for (double r : radii) members.push_back(detail::bump_member(m, b, grid, ctr, r));
  } else if (c.generator == "runaway-translates") {
    const double r = pr.number("radius");
    if (!(r > 0.0)) pr.fail("radius", "must be positive");
    const auto start = pr.point("start", n);
    const auto step = pr.point("step", n);
    const std::size_t count = pr.count("count");
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<double> ctr(n);
      for (std::size_t a = 0; a < n; ++a) ctr[a] = start[a] + static_cast<double>(k) * step[a];
      GridFunction f = detail::bump_member(m, b, grid, ctr, r);
      const double norm = lp_norm(f, c.p);
      if (!(norm > 0.0)) pr.fail("start", "translate " + std::to_string(k) + " has no mass inside the box");
      members.push_back((1.0 / norm) * std::move(f));
    }
  } else if (c.generator == "oscillation") {
    if (m.kind() != GroupKind::Torus) pr.fail("frequencies", "oscillation is defined on the torus model");
    const auto freqs = pr.numbers("frequencies");
    if (freqs.empty()) pr.fail("frequencies", "expected at least one frequency");
    for (double nu : freqs) {
      if (nu != std::round(nu) || nu < 1.0) pr.fail("frequencies", "frequencies must be positive integers");
      members.push_back(GridFunction::sample(b, grid, [nu](const GroupElement& x, std::span<double> o) {
        std::fill(o.begin(), o.end(), 0.0);
        o[0] = std::sin(2.0 * std::numbers::pi * nu * x[0]);
      }));
    }
  } else if (c.generator == "scaled-copies") {
    const auto ctr = pr.point("centre", n);
    const double r = pr.number("radius");
    if (!(r > 0.0)) pr.fail("radius", "must be positive");
    const std::size_t k = pr.count("count");
    const GridFunction f0 = detail::bump_member(m, b, grid, ctr, r);
    for (std::size_t i = 0; i <= k; ++i) members.push_back((static_cast<double>(i) / static_cast<double>(k)) * f0);
  } else if (c.generator == "spike") {
    const auto ctr = pr.point("centre", n);
    const auto widths = pr.numbers("widths");
    if (widths.empty()) pr.fail("widths", "expected at least one width");
    for (double w : widths) {
      if (!(w > 0.0)) pr.fail("widths", "widths must be positive");
      GridFunction f = detail::bump_member(m, b, grid, ctr, 0.5 * w);
      const double mass = lp_norm(f, 1.0);
      if (!(mass > 0.0)) pr.fail("widths", "spike below grid resolution");
      members.push_back((1.0 / mass) * std::move(f));
    }
  } else if (c.generator == "custom-JSON") {
    json doc;
    if (pr.has("members")) {
      doc = pr.raw("members");
    } else if (pr.has("path")) {
      const json& pj = pr.raw("path");
      if (!pj.is_string()) pr.fail("path", "expected a string");
      std::filesystem::path path = pj.get<std::string>();
      if (path.is_relative()) path = c.base_dir / path;
      std::ifstream in(path);
      if (!in) pr.fail("path", "cannot read " + path.string());
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        pr.fail("path", std::string("malformed JSON: ") + e.what());
      }
      if (doc.is_object() && doc.contains("members")) doc = doc["members"];
    } else {
      pr.fail("members", "custom-JSON needs 'members' or 'path'");
    }
    if (!doc.is_array() || doc.empty()) pr.fail("members", "expected a nonempty array of grid functions");
    for (const auto& mj : doc) members.push_back(grid_function_from_json(mj, b, grid));
  } else {
    throw ConfigError("family/generator: unknown generator '" + c.generator + "'");
  }
  return FunctionFamily(std::move(members), c.name);
}

// ---------------------------------------------------------------------------
// reports

inline json to_json(const CriterionTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"parameter", r.parameter}, {"label", r.label}, {"value", r.value}, {"flagged", r.flagged}});
  return {{"scale", t.scale}, {"vanishes", t.vanishes}, {"rows", rows}};
}

inline json to_json(const CoveringProfile& c) {
  return {{"method", std::string(to_string(c.method))}, {"eps", c.eps_ladder}, {"covering_numbers", c.covering_numbers}};
}

inline json to_json(const CriterionReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["family"] = r.family;
  j["model"] = r.model;
  j["p"] = r.p;
  j["resolution"] = r.resolution;
  j["mesh"] = r.mesh;
  j["noise"] = r.noise;
  j["threshold"] = r.threshold;
  j["sup_norm"] = r.sup_norm;
  json tables = json::object();
  for (const CriterionTable* t : {&r.tail_energy, &r.box_edge, &r.translation_modulus, &r.convolution_defect,
                                  &r.uniform_integrability, &r.equicontinuity_modulus})
    tables[t->name] = to_json(*t);
  j["tables"] = tables;
  json si = json::array();
  for (const auto& row : r.set_integral_covering)
    si.push_back({{"set", row.label},
                  {"covering_number", row.covering_number},
                  {"diameter", row.diameter},
                  {"truncated", row.truncated}});
  j["set_integral_covering"] = {{"eps", r.set_integral_eps}, {"rows", si}};
  j["oracle_covering"] = to_json(r.oracle_covering);
  j["reference_covering"] = r.reference_covering ? to_json(*r.reference_covering) : json(nullptr);
  j["separation"] = {{"eps", r.separation_eps}, {"separated", r.separated}};
  j["stabilized"] = r.stabilized;
  j["truncation_flags"] = r.truncation_flags;
  j["notes"] = r.notes;
  j["verdict"] = std::string(to_string(r.verdict));
  return j;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per ladder point: table,parameter,label,value.
inline std::string to_csv(const CriterionReport& r) {
  std::string out = "table,parameter,label,value\n";
  auto row = [&](const std::string& table, double param, const std::string& label, double value) {
    out += table + "," + format_g17(param) + "," + csv_field(label) + "," + format_g17(value) + "\n";
  };
  for (const CriterionTable* t : {&r.tail_energy, &r.box_edge, &r.translation_modulus, &r.convolution_defect,
                                  &r.uniform_integrability, &r.equicontinuity_modulus})
    for (const auto& x : t->rows) row(t->name, x.parameter, x.label, x.value);
  for (const auto& x : r.set_integral_covering)
    row("set_integral_covering", r.set_integral_eps, x.label, static_cast<double>(x.covering_number));
  for (std::size_t i = 0; i < r.oracle_covering.eps_ladder.size(); ++i)
    row("oracle_covering", r.oracle_covering.eps_ladder[i], "N",
        static_cast<double>(r.oracle_covering.covering_numbers[i]));
  if (r.reference_covering)
    for (std::size_t i = 0; i < r.reference_covering->eps_ladder.size(); ++i)
      row("reference_covering", r.reference_covering->eps_ladder[i], "N",
          static_cast<double>(r.reference_covering->covering_numbers[i]));
  return out;
}

struct ScenarioRun {
  CriterionReport report;
  std::string json_text;
  std::string csv_text;
};

inline GridPtr scenario_grid(const ScenarioConfig& c, double resolution) {
  return build_grid(c.group(), c.box, resolution);
}

/// Builds Gamma (and its coarser reference), certifies it and renders the
/// report. Identical configs give byte-identical text.
inline ScenarioRun run_scenario(const ScenarioConfig& c) {
  const GridPtr grid = scenario_grid(c, c.resolution);
  const FunctionFamily family = build_family(c, grid);
  std::optional<FunctionFamily> reference;
  if (c.generator != "custom-JSON") {
    const double ref = c.reference_resolution > 0.0 ? c.reference_resolution : 2.0 * c.resolution;
    reference = build_family(c, scenario_grid(c, ref));
  }
  ScenarioRun run;
  run.report = certify(family, c.certify_config(), reference ? &*reference : nullptr);
  json j = to_json(run.report);
  j["scenario"] = c.name;
  j["config"] = to_json(c);
  j["family_size"] = family.size();
  run.json_text = j.dump(2) + "\n";
  run.csv_text = to_csv(run.report);
  return run;
}

// ---------------------------------------------------------------------------
// built-in scenarios

namespace detail {

inline ChartBox interval(double lo, double hi) { return {{lo}, {hi}}; }

}  // namespace detail

inline std::vector<GeneratorInfo> builtin_scenarios() {
  return {
      {"compact-bumps", "20 raised-cosine bumps (5 centres x 4 radii) on the real line; expected compact"},
      {"compact-bumps-affine", "12 bumps around the identity of the affine group; expected compact"},
      {"runaway-translates", "12 disjoint unit-norm translates walking off to the right; expected noncompact"},
      {"oscillation", "sin(2 pi n x) e_1 on the torus, n = 1..10; expected noncompact with zero tail"},
      {"scaled-copies", "11 multiples of one bump; expected compact"},
      {"spike", "unit-mass bumps of width 0.2 down to 0.025; not uniformly integrable"},
  };
}

inline ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  for (const auto& s : builtin_scenarios())
    if (s.name == name) c.description = s.description;
  if (name == "compact-bumps") {
    c.model = GroupKind::RealLine;
    c.box = detail::interval(-4.0, 4.0);
    c.resolution = 0.005;
    c.p = 2.0;
    c.banach_dimension = 2;
    c.generator = "compact-bumps";
    c.parameters = {{"centres", {{-0.2}, {-0.1}, {0.0}, {0.1}, {0.2}}}, {"radii", {1.6, 1.7, 1.8, 1.9}}};
    c.s_ladder = {detail::interval(-1.0, 1.0), detail::interval(-2.0, 2.0), detail::interval(-3.0, 3.0)};
    c.radius_ladder = {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625};
    c.kernels = {{KernelType::Mollifier, 0.4}, {KernelType::Mollifier, 0.2}, {KernelType::Mollifier, 0.1},
                 {KernelType::Mollifier, 0.05}, {KernelType::Mollifier, 0.025}};
    c.delta_ladder = {0.2, 0.1, 0.05, 0.025, 0.0125};
  } else if (name == "compact-bumps-affine") {
    c.model = GroupKind::AffineGroup;
    c.dimension = 2;
    c.box = {{0.3, -1.6}, {2.6, 1.6}};
    c.resolution = 0.025;
    c.p = 2.0;
    c.generator = "compact-bumps";
    c.parameters = {{"centres", {{0.95, -0.05}, {1.0, 0.0}, {1.05, 0.05}, {1.0, 0.05}}}, {"radii", {0.5, 0.55, 0.6}}};
    c.s_ladder = {{{0.7, -0.4}, {1.4, 0.4}}, {{0.5, -0.7}, {1.7, 0.7}}, {{0.4, -0.8}, {1.8, 0.8}}};
    c.radius_ladder = {0.2, 0.1, 0.05, 0.025};
    c.kernels = {{KernelType::Mollifier, 0.2}, {KernelType::Mollifier, 0.1}, {KernelType::Mollifier, 0.05}};
    c.delta_ladder = {0.1, 0.05, 0.025, 0.0125};
  } else if (name == "runaway-translates") {
    c.model = GroupKind::RealLine;
    c.box = detail::interval(-2.0, 14.0);
    c.resolution = 0.01;
    c.p = 2.0;
    c.generator = "runaway-translates";
    c.parameters = {{"radius", 0.4}, {"start", {0.0}}, {"step", {1.0}}, {"count", 12}};
    c.s_ladder = {detail::interval(-1.0, 1.0), detail::interval(-2.0, 2.0)};
    c.radius_ladder = {0.4, 0.2, 0.1, 0.05};
    c.kernels = {{KernelType::Mollifier, 0.2}, {KernelType::Mollifier, 0.1}, {KernelType::Mollifier, 0.05}};
    c.delta_ladder = {0.2, 0.1, 0.05, 0.025};
  } else if (name == "oscillation") {
    c.model = GroupKind::Torus;
    c.box = detail::interval(0.0, 1.0);
    c.resolution = 0.002;
    c.p = 2.0;
    c.generator = "oscillation";
    c.parameters = {{"frequencies", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}};
    c.s_ladder = {detail::interval(0.0, 1.0)};
    c.radius_ladder = {0.1, 0.05, 0.025};
    c.kernels = {{KernelType::Mollifier, 0.25}, {KernelType::Mollifier, 0.1}, {KernelType::Mollifier, 0.05}};
    c.delta_ladder = {0.2, 0.1, 0.05, 0.025};
  } else if (name == "scaled-copies") {
    c.model = GroupKind::RealLine;
    c.box = detail::interval(-4.0, 4.0);
    c.resolution = 0.005;
    c.p = 2.0;
    c.generator = "scaled-copies";
    c.parameters = {{"centre", {0.0}}, {"radius", 1.8}, {"count", 10}};
    c.s_ladder = {detail::interval(-1.0, 1.0), detail::interval(-2.0, 2.0), detail::interval(-3.0, 3.0)};
    c.radius_ladder = {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625};
    c.kernels = {{KernelType::Mollifier, 0.4}, {KernelType::Mollifier, 0.2}, {KernelType::Mollifier, 0.1},
                 {KernelType::Mollifier, 0.05}, {KernelType::Mollifier, 0.025}};
    c.delta_ladder = {0.2, 0.1, 0.05, 0.025, 0.0125};
  } else if (name == "spike") {
    c.model = GroupKind::RealLine;
    c.box = detail::interval(-1.0, 1.0);
    c.resolution = 0.0025;
    c.p = 1.0;
    c.generator = "spike";
    c.parameters = {{"centre", {0.3}}, {"widths", {0.2, 0.1, 0.05, 0.025}}};
    c.s_ladder = {detail::interval(-0.5, 0.5), detail::interval(-1.0, 1.0)};
    c.radius_ladder = {0.1, 0.05, 0.025, 0.0125};
    c.kernels = {{KernelType::Mollifier, 0.1}, {KernelType::Mollifier, 0.05}, {KernelType::Mollifier, 0.025}};
    c.delta_ladder = {0.2, 0.1, 0.05, 0.025};
  } else {
    throw ConfigError("unknown built-in scenario '" + name + "'");
  }
  c.json_output = name + ".json";
  c.csv_output = name + ".csv";
  return c;
}

/// Built-in names with one-line descriptions, one per line.
inline std::string list_scenarios() {
  std::string out;
  for (const auto& s : builtin_scenarios()) out += s.name + "  " + s.description + "\n";
  out += "\ngenerators:\n";
  for (const auto& g : generators()) out += "  " + g.name + "  " + g.description + "\n";
  return out;
}

}  // namespace lpcompact

#endif  // LPCOMPACT_SCENARIO_HPP_
