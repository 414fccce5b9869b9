// lpcompact command-line front-end.
//
//   lpcompact list
//   lpcompact verify-group --model AffineGroup [--resolution 0.04 --resolution 0.02 ...]
//   lpcompact run (--config PATH | --scenario NAME) [--out DIR] [--resolution H]
//
// Exit codes: 0 success, 1 config error, 2 identity-suite failure, 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpcompact/lpcompact.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIdentity = 2;
constexpr int kExitInternal = 3;

int cmd_verify_group(const std::string& model_name, std::size_t dimension, const std::vector<double>& ladder) {
  using namespace lpcompact;
  const GroupKind kind = group_kind_from_string(model_name);
  const GroupModel model = GroupModel::make(kind, kind == GroupKind::AffineGroup ? 2 : dimension);
  const GroupVerification v = verify_group(model, ladder);
  std::printf("model %s\n", v.model.c_str());
  for (const auto& r : v.identities) {
    std::printf("  %-18s", std::string(to_string(r.identity)).c_str());
    for (std::size_t i = 0; i < r.resolutions.size(); ++i)
      std::printf("  h=%g: %.3e", r.resolutions[i], r.residuals[i]);
    if (r.exact) std::printf("  exact");
    else if (r.order) std::printf("  order %.3f", *r.order);
    std::printf("  %s\n", r.pass ? "PASS" : "FAIL");
  }
  std::printf("%s\n", v.pass ? "PASS" : "FAIL");
  return v.pass ? kExitOk : kExitIdentity;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lpcompact::ConfigError("cannot write " + path.string());
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& scenario, const std::string& out_dir,
            double resolution) {
  using namespace lpcompact;
  if (config_path.empty() == scenario.empty()) throw ConfigError("run: give exactly one of --config or --scenario");
  ScenarioConfig c = config_path.empty() ? builtin_scenario(scenario) : load_config(config_path);
  if (resolution > 0.0) {
    c.resolution = resolution;
    c.reference_resolution = 0.0;
  } else if (resolution < 0.0) {
    throw ConfigError("--resolution must be positive");
  }

  const ScenarioRun run = run_scenario(c);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::string json_name = c.json_output.empty() ? c.name + ".json" : c.json_output;
  const std::string csv_name = c.csv_output.empty() ? c.name + ".csv" : c.csv_output;
  write_file(dir / json_name, run.json_text);
  write_file(dir / csv_name, run.csv_text);

  const CriterionReport& r = run.report;
  std::printf("scenario %s (%s, p=%g, mesh %g)\n", c.name.c_str(), r.model.c_str(), r.p, r.mesh);
  std::printf("noise %.3e threshold %.3e\n", r.noise, r.threshold);
  for (const CriterionTable* t : {&r.tail_energy, &r.translation_modulus, &r.convolution_defect,
                                  &r.uniform_integrability, &r.equicontinuity_modulus}) {
    std::printf("  %-24s", t->name.c_str());
    for (const auto& row : t->rows) std::printf(" %.4g", row.value / t->scale);
    std::printf("%s\n", t->vanishes ? "  (vanishes)" : "");
  }
  std::printf("  covering numbers        ");
  for (auto n : r.oracle_covering.covering_numbers) std::printf(" %zu", n);
  std::printf("\n");
  for (const auto& f : r.truncation_flags) std::printf("  flag: %s\n", f.c_str());
  std::printf("verdict %s\n", std::string(to_string(r.verdict)).c_str());
  std::printf("wrote %s and %s\n", (dir / json_name).string().c_str(), (dir / csv_name).string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Norm compactness diagnostics in L^p(G;B) on discretized groups"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List built-in scenarios and family generators");

  std::string model;
  std::size_t dimension = 1;
  std::vector<double> ladder{0.04, 0.02, 0.01};
  auto* verify = app.add_subcommand("verify-group", "Run the Haar identity suites on a group model");
  verify->add_option("--model", model, "RealLine, Torus, IntegerLattice or AffineGroup")->required();
  verify->add_option("--dimension", dimension, "chart dimension (ignored for AffineGroup)")->capture_default_str();
  verify->add_option("--resolution", ladder, "resolution ladder, repeat for each level")->capture_default_str();

  std::string config_path, scenario, out_dir = ".";
  double resolution = 0.0;
  auto* run = app.add_subcommand("run", "Certify a scenario and write JSON and CSV reports");
  auto* cfg_opt = run->add_option("--config", config_path, "scenario config JSON");
  run->add_option("--scenario", scenario, "built-in scenario name")->excludes(cfg_opt);
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--resolution", resolution, "override the config resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*list) {
      std::fputs(lpcompact::list_scenarios().c_str(), stdout);
      return kExitOk;
    }
    if (*verify) return cmd_verify_group(model, dimension, ladder);
    return cmd_run(config_path, scenario, out_dir, resolution);
  } catch (const lpcompact::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
