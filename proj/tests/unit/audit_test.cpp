#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "doctest.h"

#include "fairswap/audit.hpp"
#include "fairswap/csv.hpp"
#include "fairswap/error.hpp"

using namespace fairswap;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FAIRSWAP_FIXTURE_DIR;

AuditConfig fixture_config() {
  AuditConfig c;
  c.data_path = (kFixtures / "synthetic_200x6.csv").string();
  c.target = "outcome";
  c.group_feature = "sex";
  c.seed = 11;
  return c;
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("fairswap_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const AuditReport& shared_report() {
  static const AuditReport report = run_audit(fixture_config());
  return report;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = config_from_json(nlohmann::json::parse(R"({
    "data": "x.csv", "target": "y", "d_max": null, "swap_ratios": [0.2, 0.4],
    "divergences": ["hellinger", "wasserstein"], "model": {"l2": 0.5}, "seed": 9
  })"));
  CHECK(c.data_path == "x.csv");
  CHECK(std::isinf(c.d_max));
  CHECK(c.swap_ratios == std::vector<double>{0.2, 0.4});
  CHECK(c.divergences == std::vector<DivergenceKind>{DivergenceKind::Hellinger, DivergenceKind::Wasserstein});
  CHECK(c.model.l2 == 0.5);
  CHECK(c.model.max_iterations == 2000);
  CHECK(c.folds == 10);
  CHECK(c.seed == 9);

  const auto back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back).dump() == to_json(c).dump());

  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::parse(R"({"data": "x", "colour": 1})")),
                       doctest::Contains("colour"), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"divergences": ["cosine"]})")), Error);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"model": {"momentum": 1}})")), Error);
}

TEST_CASE("config validation") {
  auto c = fixture_config();
  CHECK_NOTHROW(c.validate());
  c.swap_ratios = {0.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = fixture_config();
  c.folds = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = fixture_config();
  c.top_fraction = 0.9;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("load_config resolves data relative to the config file") {
  TempDir dir("cfg");
  std::ofstream(dir.path / "audit.json") << R"({"data": "sub/d.csv", "target": "y"})";
  const auto c = load_config(dir.path / "audit.json");
  CHECK(fs::path(c.data_path) == (dir.path / "sub" / "d.csv").lexically_normal());
  CHECK_THROWS_AS(load_config(dir.path / "missing.json"), Error);
}

TEST_CASE("audit report shape on the six-feature fixture") {
  const auto& r = shared_report();
  CHECK(r.n_rows == 200);
  REQUIRE(r.impact.features.size() == 6);
  CHECK(r.dropped_correlated.empty());
  REQUIRE(r.impact.cdi.size() == 4);
  for (const auto& per_ratio : r.impact.cdi) CHECK(per_ratio.size() == 6);
  CHECK(r.impact.pairs.size() == 15);
  CHECK(r.impact.folds.size() == 10);
  CHECK(r.rankings.size() == 4);
  CHECK(r.reference_ratio == 0.5);

  const auto doc = report_to_json(r);
  std::size_t curves = 0;
  for (const auto& [name, block] : doc.at("impact").at("mean").items()) {
    CHECK(block.at("cdi").size() == 4);
    for (const auto& [ratio, kinds] : block.at("cdi").items()) {
      CHECK(kinds.size() == 4);
      curves += kinds.size();
    }
  }
  CHECK(curves == 6 * 4 * 4);

  // the last feature in the order has no mediators
  const std::string last = doc.at("temporal_order").at("order").back().get<std::string>();
  CHECK(doc.at("impact").at("mean").at(last).at("no_mediators") == true);
  for (const auto& kinds : doc.at("impact").at("mean").at(last).at("total_natural")) {
    for (const auto& v : kinds) CHECK(v.get<double>() == 0.0);
  }
}

TEST_CASE("scenarios") {
  const auto& r = shared_report();
  REQUIRE(r.scenarios.size() == 3);
  CHECK(r.scenarios[0].scenario.kind == ScenarioKind::Default);
  CHECK(r.scenario_labels[0] == "Default");
  CHECK(r.scenarios[1].scenario.kind == ScenarioKind::DropFeature);
  CHECK(r.scenario_labels[2] == "Reweighing");
  for (Verdict v : r.scenarios[0].wtl) CHECK(v == Verdict::Tie);

  // T-Score recomputed from the rendered table
  const auto rows = csv::parse(render_scenario_table(report_to_json(r)));
  REQUIRE(rows.size() == 4);
  const auto& header = rows[0];
  CHECK(header[0] == "Feature");
  for (std::size_t s = 1; s < rows.size(); ++s) {
    double perf = 0, fair = 0, t = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      double v = 0;
      const bool numeric = csv::parse_double(rows[s][c], v);
      if (header[c] == "ACC" || header[c] == "PRE" || header[c] == "Recall" || header[c] == "F1") perf += v;
      if (numeric && (header[c] == "F-alarm" || header[c] == "AOD" || header[c] == "SPD" || header[c] == "DIR" ||
                      header[c] == "FPR_D")) {
        fair += v;
      }
      if (header[c] == "T-Score") t = v;
    }
    CHECK(std::fabs((perf - fair) - t) <= 0.01);
  }
}

TEST_CASE("end-to-end determinism and plot round trip") {
  TempDir a("run_a"), b("run_b");
  const auto& r = shared_report();
  write_report(r, a.path);
  write_report(run_audit(fixture_config()), b.path);
  for (const char* name : {"report.json", "models.json", "impact_table.csv", "scenarios.csv",
                           "plots/single_swap.csv", "plots/double_swap.csv", "plots/importance.csv"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a.path / name));
    CHECK(slurp(a.path / name) == slurp(b.path / name));
  }

  const auto& imp = r.impact;
  std::map<std::string, std::size_t> feature_index;
  for (std::size_t j = 0; j < imp.features.size(); ++j) feature_index[imp.features[j]] = j;
  auto ratio_index = [&](double v) {
    for (std::size_t i = 0; i < imp.ratios.size(); ++i) {
      if (imp.ratios[i] == v) return i;
    }
    FAIL("unknown ratio");
    return std::size_t{0};
  };

  const std::string single = slurp(a.path / "plots/single_swap.csv");
  CHECK(single.substr(0, kPlotHeader.size()) == kPlotHeader);
  const auto rows = parse_plot_csv(single);
  CHECK(rows.size() == 6 * 4 * 4);
  for (const auto& row : rows) {
    REQUIRE(row.ratio.has_value());
    const auto kind = parse_divergence(row.divergence);
    REQUIRE(kind.has_value());
    CHECK(row.metric == "cdi");
    CHECK(row.value == imp.cdi[ratio_index(*row.ratio)][feature_index.at(row.feature)][*kind]);
  }

  std::size_t flagged = 0;
  for (const auto& row : parse_plot_csv(slurp(a.path / "plots/double_swap.csv"))) {
    const auto kind = parse_divergence(row.divergence);
    const std::size_t j = feature_index.at(row.feature);
    const std::size_t ri = ratio_index(*row.ratio);
    if (row.metric == "total_natural") CHECK(row.value == imp.total_natural[ri][j][*kind]);
    if (row.metric == "no_mediators") {
      ++flagged;
      CHECK_FALSE(imp.has_mediators[j]);
    }
    if (row.metric.rfind("ndi:", 0) == 0 || row.metric.rfind("nii:", 0) == 0) {
      const std::size_t med = feature_index.at(row.metric.substr(4));
      for (std::size_t pi = 0; pi < imp.pairs.size(); ++pi) {
        if (imp.pairs[pi] != std::pair{j, med}) continue;
        const auto& p = imp.pair_mean[ri][pi];
        CHECK(row.value == (row.metric[1] == 'd' ? p.ndi[*kind] : p.nii[*kind]));
      }
    }
  }
  CHECK(flagged == 4 * 4);

  for (const auto& row : parse_plot_csv(slurp(a.path / "plots/importance.csv"))) {
    CHECK_FALSE(row.ratio.has_value());
    CHECK(row.value == imp.importance[feature_index.at(row.feature)]);
  }
  CHECK_THROWS_AS(parse_plot_csv("a,b\n1,2\n"), Error);
}

TEST_CASE("thread count does not change results") {
  auto c = fixture_config();
  c.group_feature.clear();
  c.swap_ratios = {0.3};
  const auto one = report_to_json(run_audit(c));
  c.threads = 3;
  CHECK(report_to_json(run_audit(c)).at("impact").dump() == one.at("impact").dump());
}

TEST_CASE("stage-tagged failures") {
  TempDir out("fail");
  auto c = fixture_config();
  c.temporal_order = {"sex", "height"};
  try {
    const auto r = run_audit(c);
    write_report(r, out.path / "report");
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "order");
    CHECK(std::string(e.what()).find("height") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(out.path / "report"));

  c = fixture_config();
  c.data_path = (kFixtures / "nope.csv").string();
  CHECK_THROWS_AS(run_audit(c), StageError);
  c = fixture_config();
  c.group_feature = "height";
  try {
    run_audit(c);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "scenarios");
  }
}

TEST_CASE("user order prefix is respected and reported") {
  auto c = fixture_config();
  c.group_feature.clear();
  c.folds = 3;
  c.swap_ratios = {0.5};
  c.temporal_order = {"hours", "sex"};
  const auto r = run_audit(c);
  const auto doc = report_to_json(r);
  CHECK(doc.at("temporal_order").at("order")[0] == "hours");
  CHECK(doc.at("temporal_order").at("order")[1] == "sex");
  CHECK(doc.at("temporal_order").at("features")[0].at("provenance") == "user");
  CHECK(r.warnings.size() == r.order.violations.size());
}
