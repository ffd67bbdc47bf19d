// Acceptance suite: one test per criterion, each printing a final
// [criterion N] PASS/FAIL line. Tolerances are pinned in code.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bandit/density.hpp"
#include "bandit/harness.hpp"
#include "bandit/ontology.hpp"
#include "bandit/policy.hpp"
#include "bandit/replay.hpp"
#include "bandit/reward.hpp"
#include "bandit/rng.hpp"
#include "bandit/utility.hpp"
#include "support/oracles.hpp"

namespace {

using namespace bandit;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void criterion_line(int n, const std::string& what) {
  std::printf("[criterion %d] %s %s\n", n,
              ::testing::Test::HasFailure() ? "FAIL" : "PASS", what.c_str());
  std::fflush(stdout);
}

PointSeries make_series(std::vector<Point> points) {
  const double lo = points.front().s;
  const double hi = points.back().s;
  return {std::move(points), lo, hi};
}

TEST(Acceptance, Criterion1LinearizerMatchesExhaustiveOracle) {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  for (int round = 0; round < 50; ++round) {
    const int piece_count = 1 + round % 3;
    const oracle::PiecewiseTruth truth = oracle::make_noiseless_pieces(rng, piece_count);

    const auto classes = linearize(make_series(truth.points), 0.0001);
    const oracle::Segmentation expected =
        oracle::exhaustive_segmentation(truth.points, 0.0001);

    ASSERT_EQ(expected.pieces.size(), static_cast<std::size_t>(piece_count))
        << "oracle disagrees with the generator on round " << round;
    ASSERT_EQ(classes.size(), expected.pieces.size()) << "round " << round;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      EXPECT_NEAR(classes[c].slope, expected.lines[c].slope, 1e-6)
          << "round " << round << " class " << c;
    }
  }
  const double elapsed = seconds_since(start);
  EXPECT_LT(elapsed, 5.0);
  criterion_line(1, "linearizer recovers exhaustive-oracle segmentation on 50 series");
}

TEST(Acceptance, Criterion2DensityNormalizationAndTails) {
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int round = 0; round < 100; ++round) {
    const PiecewiseDensity density = oracle::fuzz_density(rng);
    EXPECT_NEAR(tail_probability(density, density.domain_lo), 1.0, 1e-9);

    const auto f = [&](double x) { return evaluate_density(density, x); };
    EXPECT_NEAR(oracle::trapezoid(f, density.domain_lo, density.domain_hi, 100000),
                1.0, 1e-6);

    const double o = density.domain_lo +
                     (density.domain_hi - density.domain_lo) * unit(rng);
    EXPECT_NEAR(tail_probability(density, o),
                oracle::trapezoid(f, o, density.domain_hi, 100000), 1e-6);
  }
  criterion_line(2, "100 fuzzed densities integrate to 1 and tails match trapezoid");
}

TEST(Acceptance, Criterion3DeviationErrorFixture) {
  const std::vector<Point> pts{{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}};
  const Line fitted = fit_least_squares(pts);
  EXPECT_NEAR(fitted.intercept, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(fitted.slope, 0.0, 1e-12);
  EXPECT_NEAR(deviation_error(pts, fitted), 0.6, 1e-12);
  EXPECT_NEAR(deviation_error(pts, {1.0 / 3.0, 0.0}), 0.6, 1e-12);
  criterion_line(3, "deviation of tent fixture from its OLS line is 0.6");
}

TEST(Acceptance, Criterion4ThresholdOptimizerBeatsBruteForce) {
  std::mt19937_64 rng(4004);
  const UtilityParams params;  // eq11-consistent, a = b = 1
  for (int round = 0; round < 20; ++round) {
    const std::optional<PiecewiseDensity> clicked = oracle::fuzz_density(rng);
    const std::optional<PiecewiseDensity> nonclicked = oracle::fuzz_density(rng);
    const PopulationCounts counts{70, 30};
    const TradeoffResult result =
        optimize_threshold(clicked, nonclicked, params, counts);

    const double lo = std::min(clicked->domain_lo, nonclicked->domain_lo);
    const double hi = std::max(clicked->domain_hi, nonclicked->domain_hi);
    double grid_best = -1e300;
    for (int i = 0; i <= 10000; ++i) {
      const double o = lo + (hi - lo) * i / 10000.0;
      grid_best =
          std::max(grid_best, utility_value(o, *clicked, *nonclicked, params, counts));
    }
    EXPECT_GE(result.utility, grid_best - 1e-9) << "round " << round;
  }

  const std::optional<PiecewiseDensity> clicked =
      normalize_density(std::vector<LinearClass>{{0.5, 1.0, 1.0, 0.0}}, {});
  const std::optional<PiecewiseDensity> nonclicked =
      normalize_density(std::vector<LinearClass>{{0.0, 0.5, 1.0, 0.0}}, {});
  const TradeoffResult fixture =
      optimize_threshold(clicked, nonclicked, params, {50, 50});
  EXPECT_DOUBLE_EQ(fixture.threshold, 0.5);
  EXPECT_NEAR(fixture.utility, 1.0, 1e-12);
  EXPECT_NEAR(fixture.epsilon, 1.0, 1e-12);
  criterion_line(4, "optimizer dominates 1e4-point grid; disjoint fixture gives o*=0.5");
}

TEST(Acceptance, Criterion5WuPalmerFixtures) {
  const Ontology onto =
      Ontology::from_edges({{"R", "-"}, {"A", "R"}, {"B", "R"}, {"C", "A"}});
  EXPECT_DOUBLE_EQ(onto.wu_palmer("C", "A"), 0.8);
  EXPECT_DOUBLE_EQ(onto.wu_palmer("C", "B"), 0.4);
  const std::vector<std::string> ids{"R", "A", "B", "C"};
  for (const auto& x : ids) {
    EXPECT_DOUBLE_EQ(onto.wu_palmer(x, x), 1.0);
    for (const auto& y : ids) {
      EXPECT_DOUBLE_EQ(onto.wu_palmer(x, y), onto.wu_palmer(y, x));
    }
  }
  criterion_line(5, "Wu-Palmer fixtures and symmetry on the 4-node tree");
}

TEST(Acceptance, Criterion6BaselineSchedulesExact) {
  EXPECT_DOUBLE_EQ(epsilon_decreasing_schedule(1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_decreasing_schedule(2, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(epsilon_decreasing_schedule(4, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(epsilon_decreasing_schedule(10, 1.0), 0.1);

  // epsilon-beginning explores exactly the first ceil(eps * T) rounds
  DocumentStore store;
  store.record_event("A", true);
  const std::vector<DocId> pool{"A", "B"};
  Rng rng(5);
  for (const auto& [eps, horizon] : std::vector<std::pair<double, std::uint64_t>>{
           {0.1, 100}, {0.13, 40}, {0.5, 7}, {0.0, 50}}) {
    const auto cutoff = static_cast<std::uint64_t>(
        std::ceil(eps * static_cast<double>(horizon)));
    std::uint64_t explored = 0;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
      const Decision d = epsilon_beginning_select(t, horizon, eps, pool, store, rng);
      if (d.exploratory) {
        ++explored;
        EXPECT_LE(t, cutoff);
      } else {
        EXPECT_GT(t, cutoff);
      }
    }
    EXPECT_EQ(explored, cutoff);
  }
  criterion_line(6, "epsilon-decreasing values exact; epsilon-beginning phase exact");
}

struct LogFollower {
  Decision select(const EventRecord& rec, Rng&) { return {rec.displayed, false, 0.0}; }
  void feedback(const EventRecord&, const DocId&, bool, Rng&) {}
};

struct UniformDriver {
  Decision select(const EventRecord& rec, Rng& rng) {
    return {rec.candidates[uniform_index(rng, rec.candidates.size())], true, 1.0};
  }
  void feedback(const EventRecord&, const DocId&, bool, Rng&) {}
};

TEST(Acceptance, Criterion7ReplayCorrectness) {
  SyntheticConfig config;
  config.docs = 5;
  config.candidates_per_round = 5;
  config.rounds = 100000;
  config.ctr_min = 0.1;
  config.ctr_max = 0.6;
  const std::string path = testing::TempDir() + "acceptance_replay.jsonl";
  {
    std::ofstream out(path);
    SyntheticGenerator gen(config, 71);
    while (auto rec = gen.next()) write_event_line(out, *rec);
  }

  std::uint64_t raw_clicks = 0;
  {
    EventLogReader reader(path);
    while (auto rec = reader.next()) raw_clicks += rec->clicked ? 1 : 0;
  }

  // a policy that always matches the log reproduces the raw CTR exactly
  {
    LogFollower follower;
    EventLogReader reader(path);
    Rng rng(1);
    const RunReport report = replay_evaluate(follower, reader, rng);
    EXPECT_EQ(report.evaluated_rounds, config.rounds);
    EXPECT_DOUBLE_EQ(report.final_ctr, static_cast<double>(raw_clicks) /
                                           static_cast<double>(config.rounds));
  }

  // a uniform policy is evaluated on ~1/|candidates| of the rounds
  {
    UniformDriver uniform;
    EventLogReader reader(path);
    Rng rng(2);
    const RunReport report = replay_evaluate(uniform, reader, rng);
    const double rate = static_cast<double>(report.evaluated_rounds) /
                        static_cast<double>(report.rounds);
    EXPECT_NEAR(rate / (1.0 / 5.0), 1.0, 0.02);
  }
  std::remove(path.c_str());
  criterion_line(7, "always-match replay reproduces raw CTR; uniform rate is 1/|c|");
}

TEST(Acceptance, Criterion8LinearizedPolicyIsCompetitive) {
  const auto start = Clock::now();

  // non-stationary stream: 20 concurrent documents with arrivals/expiries
  SyntheticConfig stream;
  stream.docs = 20;
  stream.ctr_min = 0.05;
  stream.ctr_max = 0.65;
  stream.arrival_rate = 0.02;
  stream.lifetime = 1000;
  stream.rounds = 100000;
  stream.candidates_per_round = 5;
  stream.situation_pool = 1;

  const std::vector<double> fixed_epsilons{0.01, 0.05, 0.1, 0.2, 0.5};
  std::map<std::string, double> mean_ctr;

  const auto evaluate = [&](const PolicyConfig& policy) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RunOptions options;
      options.policy = policy;
      options.seed = seed;
      total += run_simulation(options, stream).final_ctr;
    }
    return total / 20.0;
  };

  for (double eps : fixed_epsilons) {
    PolicyConfig policy;
    policy.kind = PolicyKind::egreedy;
    policy.epsilon = eps;
    mean_ctr["egreedy eps=" + std::to_string(eps)] = evaluate(policy);
  }
  PolicyConfig linearized;
  linearized.kind = PolicyKind::linearized;
  const double linearized_ctr = evaluate(linearized);
  mean_ctr["linearized"] = linearized_ctr;

  double best_fixed = 0.0;
  double worst_fixed = 1.0;
  for (const auto& [name, value] : mean_ctr) {
    if (name == "linearized") continue;
    best_fixed = std::max(best_fixed, value);
    worst_fixed = std::min(worst_fixed, value);
  }

  std::printf("  mean final CTR over 20 seeds (1e5 rounds each):\n");
  for (const auto& [name, value] : mean_ctr) {
    std::printf("    %-22s %.5f\n", name.c_str(), value);
  }
  std::printf("  best fixed %.5f, 0.95x best %.5f, worst fixed %.5f\n", best_fixed,
              0.95 * best_fixed, worst_fixed);

  EXPECT_GE(linearized_ctr, 0.95 * best_fixed)
      << "linearized policy fell below 0.95x the best fixed epsilon; "
         "full comparison table printed above";
  EXPECT_GE(linearized_ctr, worst_fixed)
      << "linearized policy fell below the worst fixed epsilon";

  const double elapsed = seconds_since(start);
  EXPECT_LT(elapsed, 120.0);
  std::printf("  runtime %.1f s\n", elapsed);
  criterion_line(8, "linearized epsilon-greedy is competitive with the fixed-eps oracle");
}

TEST(Acceptance, Criterion9ByteIdenticalReports) {
  SyntheticConfig stream;
  stream.docs = 8;
  stream.ctr_min = 0.1;
  stream.ctr_max = 0.7;
  stream.arrival_rate = 0.05;
  stream.lifetime = 300;
  stream.rounds = 2000;
  stream.candidates_per_round = 4;
  stream.situation_pool = 3;

  RunOptions options;
  options.policy.kind = PolicyKind::linearized;
  options.policy.batch = 50;
  options.seed = 12345;

  const auto render = [&]() {
    const RunReport report = run_simulation(options, stream);
    std::ostringstream csv, json;
    write_report_csv(report, csv);
    write_report_json(report, json);
    return csv.str() + "\x1e" + json.str();
  };
  EXPECT_EQ(render(), render());

  // replay path as well: identical log, seed and config
  const std::string path = testing::TempDir() + "acceptance_det.jsonl";
  {
    std::ofstream out(path);
    SyntheticGenerator gen(stream, 99);
    while (auto rec = gen.next()) write_event_line(out, *rec);
  }
  const auto render_replay = [&]() {
    const RunReport report = run_replay(options, path);
    std::ostringstream csv;
    write_report_csv(report, csv);
    return csv.str();
  };
  EXPECT_EQ(render_replay(), render_replay());
  std::remove(path.c_str());
  criterion_line(9, "identical seed/config/log produce byte-identical reports");
}

}  // namespace
