// Command-line front end: replay logged events or simulate synthetic
// document streams under a selectable bandit policy, generate logs, and
// run the density linearizer standalone.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bandit/density.hpp"
#include "bandit/harness.hpp"
#include "bandit/policy.hpp"
#include "bandit/replay.hpp"

namespace {

bandit::SyntheticConfig load_synthetic_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bandit::Error("cannot open synthetic config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw bandit::Error(path + ": invalid JSON: " + e.what());
  }
  return bandit::SyntheticConfig::from_json(j);
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw bandit::Error("invalid number '" + item + "' in list");
    }
  }
  return values;
}

bandit::PointSeries load_point_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bandit::Error("cannot open points file: " + path);
  std::vector<bandit::Point> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string spaced = line;
    for (char& c : spaced) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream row(spaced);
    double s = 0.0;
    double p = 0.0;
    if (!(row >> s >> p)) {
      if (line_no == 1) continue;  // header row
      throw bandit::Error(path + ": line " + std::to_string(line_no) +
                          ": expected 's,p'");
    }
    points.push_back({s, p});
  }
  if (points.empty()) throw bandit::Error(path + ": no points");
  double mass = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i].s > points[i - 1].s)) {
      throw bandit::Error(path + ": rewards must be strictly increasing");
    }
    if (points[i].p < 0.0) throw bandit::Error(path + ": negative probability");
    mass += points[i].p;
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    throw bandit::Error(path + ": point masses must sum to 1 (got " +
                        std::to_string(mass) + ")");
  }
  const double lo = points.front().s;
  const double hi = points.back().s;
  return {std::move(points), lo, hi};
}

void print_run_summary(const bandit::RunReport& report) {
  std::printf("mode=%s rounds=%llu evaluated=%llu clicks=%llu final_ctr=%.6f",
              report.mode.c_str(), static_cast<unsigned long long>(report.rounds),
              static_cast<unsigned long long>(report.evaluated_rounds),
              static_cast<unsigned long long>(report.clicks), report.final_ctr);
  if (report.no_overlap) std::printf(" no_overlap=1");
  if (report.mode == "simulate") {
    std::printf(" oracle_mean_reward=%.6f", report.oracle_mean_reward);
  }
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bandit policy replay and simulation toolkit"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "evaluate a policy on a log or synthetic stream");
  std::string policy_name = "linearized";
  std::string log_path, synth_path, onto_dir, out_path;
  std::string format = "csv";
  std::string variant_name = "eq11";
  std::string alg2_mode = "literal";
  std::string eg_candidates = "0.01,0.05,0.1,0.2,0.5";
  bandit::RunOptions options;

  run->add_option("--policy", policy_name, "policy kind")
      ->check(CLI::IsMember({"linearized", "egreedy", "ebeginning", "edecreasing", "eg"}));
  run->add_option("--log", log_path, "event log to replay (JSON lines)");
  run->add_option("--synthetic", synth_path, "synthetic stream config (JSON file)");
  run->add_option("--seed", options.seed, "run seed");
  run->add_option("--epsilon", options.policy.epsilon, "fixed epsilon (egreedy, ebeginning)");
  run->add_option("--epsilon0", options.policy.epsilon0, "epsilon-decreasing seed value");
  run->add_option("--horizon", options.policy.horizon, "round count T for ebeginning");
  run->add_option("--batch", options.policy.batch, "rounds between tradeoff refreshes");
  run->add_option("--a", options.policy.utility.clicked_weight, "utility weight on clicked tail");
  run->add_option("--b", options.policy.utility.nonclicked_weight, "utility weight on non-clicked tail");
  run->add_option("--utility-variant", variant_name, "utility form")
      ->check(CLI::IsMember({"eq11", "eq16"}));
  run->add_option("--threshold-error", options.policy.threshold_error, "linearizer deviation threshold");
  run->add_option("--grid-size", options.policy.grid_size, "threshold search grid size");
  run->add_option("--fallback-epsilon", options.policy.fallback_epsilon, "epsilon when samples are unusable");
  run->add_option("--window", options.policy.sample_window, "reward sample sliding window");
  run->add_option("--eg-candidates", eg_candidates, "EG epsilon candidate set");
  run->add_option("--eg-eta", options.policy.eg_learning_rate, "EG learning rate");
  run->add_option("--eg-gamma", options.policy.eg_floor, "EG uniform mixing floor");
  run->add_option("--alg2-mode", alg2_mode, "linearized gating: literal or inverted")
      ->check(CLI::IsMember({"literal", "inverted"}));
  run->add_option("--similarity-floor", options.similarity_floor, "situation reuse floor (0..3)");
  run->add_option("--ontology-dir", onto_dir, "directory with location/time/social.tsv");
  run->add_option("--out", out_path, "report output path")->required();
  run->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic event log");
  std::string gen_synth, gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--synthetic", gen_synth, "synthetic stream config (JSON file)")->required();
  gen->add_option("--seed", gen_seed, "stream seed");
  gen->add_option("--out", gen_out, "log output path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "linearize a point series into a density table");
  std::string fit_points, fit_out;
  double fit_threshold = 0.0001;
  fit->add_option("--points", fit_points, "CSV of s,p rows")->required();
  fit->add_option("--out", fit_out, "segment table output path")->required();
  fit->add_option("--threshold-error", fit_threshold, "linearizer deviation threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (log_path.empty() == synth_path.empty()) {
        throw bandit::Error("run needs exactly one of --log or --synthetic");
      }
      options.policy.kind = bandit::policy_kind_from_string(policy_name);
      options.policy.utility.variant = bandit::utility_variant_from_string(variant_name);
      options.policy.alg2_literal = alg2_mode == "literal";
      options.policy.eg_candidates = parse_double_list(eg_candidates);
      options.policy.validate();

      std::optional<bandit::OntologySet> ontologies;
      if (!onto_dir.empty()) ontologies = bandit::load_ontology_dir(onto_dir);
      bandit::OntologySet* onto_ptr = ontologies ? &*ontologies : nullptr;

      bandit::RunReport report;
      if (!log_path.empty()) {
        report = bandit::run_replay(options, log_path, onto_ptr);
      } else {
        report = bandit::run_simulation(options, load_synthetic_config(synth_path), onto_ptr);
      }
      bandit::write_report(report, out_path,
                           format == "csv" ? bandit::ReportFormat::csv
                                           : bandit::ReportFormat::json);
      print_run_summary(report);
    } else if (*gen) {
      const bandit::SyntheticConfig config = load_synthetic_config(gen_synth);
      std::ofstream out(gen_out);
      if (!out) throw bandit::Error("cannot write log: " + gen_out);
      bandit::SyntheticGenerator generator(config, gen_seed);
      std::uint64_t count = 0;
      while (auto rec = generator.next()) {
        bandit::write_event_line(out, *rec);
        ++count;
      }
      out.flush();
      if (!out) throw bandit::Error("failed writing log: " + gen_out);
      std::printf("wrote %llu events to %s\n", static_cast<unsigned long long>(count),
                  gen_out.c_str());
    } else if (*fit) {
      const bandit::PointSeries series = load_point_series(fit_points);
      const auto classes = bandit::linearize(series, fit_threshold);
      const auto liaisons = bandit::connect_classes(classes);
      const bandit::PiecewiseDensity density = bandit::normalize_density(classes, liaisons);
      std::ofstream out(fit_out);
      if (!out) throw bandit::Error("cannot write segment table: " + fit_out);
      bandit::dump_density_csv(density, out);
      out.flush();
      if (!out) throw bandit::Error("failed writing segment table: " + fit_out);
      std::printf("wrote %zu segments to %s\n", density.segments.size(), fit_out.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
