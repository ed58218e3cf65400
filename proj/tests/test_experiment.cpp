#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>

#include "ecoevo/errors.hpp"
#include "ecoevo/experiment.hpp"

using namespace ecoevo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecoevo_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ScenarioConfig short_run() {
  auto c = load_scenario(resolve_scenario_path("paper_fig12_eps02"));
  c.scheme.horizon = 2.0;
  c.scheme.snapshot_times = {1.0, 2.0};
  return c;
}

}  // namespace

TEST(Experiment, ExitCodes) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
  EXPECT_EQ(exit_code_for(AuditError("x")), kExitAudit);
  EXPECT_EQ(exit_code_for(BandExitError("x")), kExitAudit);
  EXPECT_EQ(exit_code_for(StabilityError("x", 3)), kExitNumerical);
  EXPECT_EQ(exit_code_for(ExtinctionError("x")), kExitExtinct);
}

TEST(Experiment, CsvHeadersNameRecordFields) {
  EXPECT_STREQ(kMomentsHeader, "time,rho,m1,m2c,m2k0c,m_abs_3,fbar,dbar,w1_to_gaussian,leaked_mass");
  EXPECT_STREQ(kTheoryHeader, "time,zbar_eps,zbar_0,i_of_z,rho_limit");
  const auto o = execute_scenario(short_run(), 0.2, false);
  const auto csv = moments_csv(o.run);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMomentsHeader);
  const auto th = theory_csv(o.theory);
  EXPECT_EQ(th.substr(0, th.find('\n')), kTheoryHeader);
  // 17 significant digits
  EXPECT_NE(csv.find("0.020000000000000004"), std::string::npos);
}

TEST(Experiment, ArtifactsAreReproducibleAndManifestComplete) {
  const auto cfg = short_run();
  const auto a = scratch("a");
  const auto b = scratch("b");
  const auto files_a = write_run_artifacts(a, cfg, 0.2, execute_scenario(cfg, 0.2, false), 1);
  const auto files_b = write_run_artifacts(b, cfg, 0.2, execute_scenario(cfg, 0.2, false), 1);
  EXPECT_EQ(files_a, files_b);
  for (const auto& f : files_a) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    if (f == "manifest.json") continue;
    auto text_b = slurp(b / f);
    if (f == "resolved_config.ini") text_b = std::regex_replace(text_b, std::regex("ecoevo_test_b"), "ecoevo_test_a");
    EXPECT_EQ(slurp(a / f), text_b) << f;
  }
  std::set<std::string> on_disk;
  for (const auto& e : fs::directory_iterator(a)) on_disk.insert(e.path().filename().string());
  EXPECT_EQ(on_disk, std::set<std::string>(files_a.begin(), files_a.end()));

  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  const auto listed = manifest["files"].get<std::vector<std::string>>();
  EXPECT_EQ(listed, files_a);
  EXPECT_EQ(manifest["run"]["status"], "ok");
  EXPECT_TRUE(manifest["audit"]["passed"].get<bool>());
  EXPECT_DOUBLE_EQ(manifest["epsilon"].get<double>(), 0.2);

  // the plot script only opens files from the manifest
  const auto script = slurp(a / "plot_figures.py");
  const std::regex ref("\"([A-Za-z0-9_.]+\\.(csv|json|ini))\"");
  int refs = 0;
  for (std::sregex_iterator it(script.begin(), script.end(), ref), end; it != end; ++it) {
    ++refs;
    EXPECT_NE(std::find(listed.begin(), listed.end(), (*it)[1].str()), listed.end()) << (*it)[1];
  }
  EXPECT_GE(refs, 3);

  // resolved config reproduces the run
  const auto resolved = load_scenario(a / "resolved_config.ini");
  const auto c = scratch("c");
  write_run_artifacts(c, resolved, 0.2, execute_scenario(resolved, 0.2, false), 1);
  EXPECT_EQ(slurp(a / "moments.csv"), slurp(c / "moments.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST(Experiment, SnapshotFiles) {
  EXPECT_EQ(snapshot_filename(2.0), "density_t2.csv");
  EXPECT_EQ(snapshot_filename(16.0), "density_t16.csv");
  EXPECT_EQ(snapshot_filename(0.5), "density_t0.5.csv");
}

TEST(Experiment, LoglogSlopeOfPowerLaw) {
  std::vector<ScalingRow> rows;
  for (double e : {0.4, 0.2, 0.1}) {
    ScalingRow r;
    r.epsilon = e;
    r.m1_gap = 3.0 * e * e;
    rows.push_back(r);
  }
  EXPECT_NEAR(*loglog_slope(rows, &ScalingRow::m1_gap), 2.0, 1e-12);
  rows[0].status = "numerical_error";
  rows[1].status = "extinct";
  EXPECT_FALSE(loglog_slope(rows, &ScalingRow::m1_gap).has_value());
  const auto csv = scaling_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kScalingHeader);
  EXPECT_EQ(csv.find("slope"), std::string::npos);
}

TEST(Experiment, SweepIsolatesFailingMembers) {
  auto cfg = short_run();
  cfg.scheme.horizon = 0.5;
  cfg.scheme.dt = 0.01;  // breaks the stability guard for eps = 0.1 only
  const auto rows = run_sweep(cfg, {0.2, 0.1}, false, std::nullopt);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status, "config_error");
  EXPECT_EQ(rows[1].exit_code, kExitConfig);
  EXPECT_FALSE(rows[1].error.empty());
}

TEST(Experiment, TheoryGapsShrinkWithEpsilon) {
  auto cfg = load_scenario(resolve_scenario_path("pp_theory_sweep"));
  cfg.scheme.horizon = 4.0;
  const auto rows = run_sweep(cfg, {0.2, 0.1}, false, std::nullopt);
  EXPECT_LT(rows[1].m1_gap, rows[0].m1_gap);
  EXPECT_LT(rows[1].terminal_w1, rows[0].terminal_w1);
}

TEST(Experiment, SingleMemberSweepHasNoSlopeRow) {
  auto cfg = short_run();
  cfg.scheme.horizon = 0.5;
  const auto rows = run_sweep(cfg, {0.2}, false, std::nullopt);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_EQ(scaling_csv(rows).find("slope"), std::string::npos);
}

TEST(Experiment, SingleSpeciesPopulationGapShrinks) {
  const auto cfg = load_scenario(resolve_scenario_path("single_species_sweep"));
  auto sup_gap = [&](double eps) {
    const auto out = execute_scenario(cfg, eps);
    double gap = 0.0;
    for (std::size_t i = 0; i < out.run.records.size(); ++i) {
      if (out.theory.times[i] >= std::pow(eps, 1.5)) {
        gap = std::max(gap, std::abs(out.run.records[i].rho - out.theory.rho_limit[i]));
      }
    }
    return gap;
  };
  const double coarse = sup_gap(0.2), fine = sup_gap(0.1);
  EXPECT_GE(coarse / fine, 1.5) << coarse << " vs " << fine;
}
