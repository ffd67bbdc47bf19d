#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "bandit/ontology.hpp"
#include "bandit/policy.hpp"
#include "bandit/replay.hpp"

namespace bandit {

/// Everything one evaluation run needs besides the event source.
struct RunOptions {
  PolicyConfig policy;
  double similarity_floor = 2.4;
  std::uint64_t seed = 1;
};

/// Loads location.tsv / time.tsv / social.tsv from a directory.
inline OntologySet load_ontology_dir(const std::string& dir) {
  const std::filesystem::path base(dir);
  return {Ontology::load((base / "location.tsv").string()),
          Ontology::load((base / "time.tsv").string()),
          Ontology::load((base / "social.tsv").string())};
}

inline nlohmann::ordered_json policy_config_json(const PolicyConfig& config) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(config.kind);
  j["epsilon"] = config.epsilon;
  j["epsilon0"] = config.epsilon0;
  j["horizon"] = config.horizon;
  j["eg_candidates"] = config.eg_candidates;
  j["eg_learning_rate"] = config.eg_learning_rate;
  j["eg_floor"] = config.eg_floor;
  j["batch"] = config.batch;
  j["a"] = config.utility.clicked_weight;
  j["b"] = config.utility.nonclicked_weight;
  j["utility_variant"] = to_string(config.utility.variant);
  j["threshold_error"] = config.threshold_error;
  j["grid_size"] = config.grid_size;
  j["fallback_epsilon"] = config.fallback_epsilon;
  j["sample_window"] = config.sample_window;
  j["alg2_mode"] = config.alg2_literal ? "literal" : "inverted";
  return j;
}

namespace detail {

inline nlohmann::ordered_json run_echo(const RunOptions& options) {
  nlohmann::ordered_json j = policy_config_json(options.policy);
  j["similarity_floor"] = options.similarity_floor;
  return j;
}

}  // namespace detail

/// Rejection replay of a logged event stream. A null ontology set selects
/// implicit flat taxonomies grown from the concepts seen in the log.
inline RunReport run_replay(const RunOptions& options, const std::string& log_path,
                            OntologySet* ontologies = nullptr) {
  OntologySet implicit_set;
  const bool grow = ontologies == nullptr;
  if (grow) {
    implicit_set = OntologySet::implicit();
    ontologies = &implicit_set;
  }
  SituationRouter router(ontologies, grow, options.policy, options.similarity_floor);
  EventLogReader reader(log_path);
  Rng rng(mix_seed(options.seed, 1));
  RunReport report = replay_evaluate(router, reader, rng);
  report.seed = options.seed;
  report.policy = detail::run_echo(options);
  return report;
}

/// Simulation over a synthetic stream generated from config and seed.
inline RunReport run_simulation(const RunOptions& options, const SyntheticConfig& config,
                                OntologySet* ontologies = nullptr) {
  OntologySet implicit_set;
  const bool grow = ontologies == nullptr;
  if (grow) {
    implicit_set = OntologySet::implicit();
    ontologies = &implicit_set;
  }
  SituationRouter router(ontologies, grow, options.policy, options.similarity_floor);
  SyntheticGenerator gen(config, mix_seed(options.seed, 0));
  Rng rng(mix_seed(options.seed, 1));
  RunReport report = simulate_evaluate(router, gen, rng);
  report.seed = options.seed;
  report.policy = detail::run_echo(options);
  report.policy["synthetic"] = config.to_json();
  return report;
}

}  // namespace bandit
