#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "bandit/density.hpp"
#include "bandit/errors.hpp"
#include "bandit/reward.hpp"
#include "bandit/rng.hpp"
#include "bandit/utility.hpp"

namespace bandit {

enum class PolicyKind { linearized, egreedy, ebeginning, edecreasing, eg };

inline const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::linearized: return "linearized";
    case PolicyKind::egreedy: return "egreedy";
    case PolicyKind::ebeginning: return "ebeginning";
    case PolicyKind::edecreasing: return "edecreasing";
    case PolicyKind::eg: return "eg";
  }
  return "unknown";
}

inline PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "linearized") return PolicyKind::linearized;
  if (name == "egreedy") return PolicyKind::egreedy;
  if (name == "ebeginning") return PolicyKind::ebeginning;
  if (name == "edecreasing") return PolicyKind::edecreasing;
  if (name == "eg") return PolicyKind::eg;
  throw Error("unknown policy '" + name + "'");
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::linearized;

  double epsilon = 0.1;          // egreedy / ebeginning
  double epsilon0 = 1.0;         // edecreasing seed value
  std::uint64_t horizon = 1000;  // T, round count for ebeginning

  std::vector<double> eg_candidates{0.01, 0.05, 0.1, 0.2, 0.5};
  double eg_learning_rate = 0.1;
  double eg_floor = 0.05;

  std::uint64_t batch = 100;  // rounds between tradeoff refreshes
  UtilityParams utility;
  double threshold_error = 0.0001;
  int grid_size = 1024;
  double fallback_epsilon = 0.5;  // when either reward sample is unusable
  std::size_t sample_window = RewardSample::kDefaultWindow;
  bool alg2_literal = true;  // q <= eps takes the greedy branch

  void validate() const {
    if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must be in [0, 1]");
    if (!(epsilon0 > 0.0)) throw Error("epsilon0 must be positive");
    if (horizon < 1) throw Error("horizon must be at least 1");
    if (batch < 1) throw Error("batch must be at least 1");
    if (eg_candidates.empty()) throw Error("empty epsilon candidate set");
    for (double e : eg_candidates) {
      if (e < 0.0 || e > 1.0) throw Error("epsilon candidates must be in [0, 1]");
    }
    if (!(eg_learning_rate > 0.0)) throw Error("eg learning rate must be positive");
    if (eg_floor < 0.0 || eg_floor >= 1.0) throw Error("eg floor must be in [0, 1)");
    if (!(utility.clicked_weight > 0.0) || !(utility.nonclicked_weight > 0.0)) {
      throw Error("utility weights must be positive");
    }
    if (!(threshold_error > 0.0)) throw Error("threshold_error must be positive");
    if (fallback_epsilon < 0.0 || fallback_epsilon > 1.0) {
      throw Error("fallback epsilon must be in [0, 1]");
    }
    if (sample_window < 1) throw Error("sample window must be at least 1");
  }
};

/// One arm choice plus how it was made.
struct Decision {
  DocId doc;
  bool exploratory = false;  // true when the uniform-random branch fired
  double epsilon_used = 0.0;
};

/// Not-excluded candidate with maximal CTR; never-displayed candidates
/// rank as CTR 0, ties break by a uniform draw among the maximizers.
inline DocId greedy_select(std::span<const DocId> candidates, const DocumentStore& store,
                           const std::unordered_set<DocId>& exclude, Rng& rng) {
  double best = -1.0;
  std::vector<const DocId*> top;
  for (const DocId& doc : candidates) {
    if (exclude.count(doc) != 0) continue;
    const double value = store.ctr_or_zero(doc);
    if (value > best) {
      best = value;
      top.clear();
    }
    if (value == best) top.push_back(&doc);
  }
  if (top.empty()) throw Error("empty candidate pool");
  if (top.size() == 1) return *top.front();
  return *top[uniform_index(rng, top.size())];
}

inline DocId greedy_select(std::span<const DocId> candidates, const DocumentStore& store,
                           Rng& rng) {
  static const std::unordered_set<DocId> kNone;
  return greedy_select(candidates, store, kNone, rng);
}

/// Classical semi-uniform rule: explore uniformly with probability
/// epsilon, otherwise pull the greedy arm.
inline Decision epsilon_greedy_select(std::span<const DocId> candidates,
                                      const DocumentStore& store, double epsilon,
                                      Rng& rng) {
  if (candidates.empty()) throw Error("empty candidate pool");
  if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must be in [0, 1]");
  if (uniform_real(rng) < epsilon) {
    return {candidates[uniform_index(rng, candidates.size())], true, epsilon};
  }
  return {greedy_select(candidates, store, rng), false, epsilon};
}

/// Pure exploration for the first ceil(epsilon * horizon) rounds, pure
/// exploitation afterwards. epsilon_used echoes the phase (1 or 0).
inline Decision epsilon_beginning_select(std::uint64_t t, std::uint64_t horizon,
                                         double epsilon,
                                         std::span<const DocId> candidates,
                                         const DocumentStore& store, Rng& rng) {
  if (t < 1) throw Error("round index must be at least 1");
  if (candidates.empty()) throw Error("empty candidate pool");
  const double cutoff = std::ceil(epsilon * static_cast<double>(horizon));
  if (static_cast<double>(t) <= cutoff) {
    return {candidates[uniform_index(rng, candidates.size())], true, 1.0};
  }
  return {greedy_select(candidates, store, rng), false, 0.0};
}

/// Annealing schedule min(1, epsilon0 / t).
inline double epsilon_decreasing_schedule(std::uint64_t t, double epsilon0) {
  if (t < 1) throw Error("round index must be at least 1");
  if (!(epsilon0 > 0.0)) throw Error("epsilon0 must be positive");
  return std::min(1.0, epsilon0 / static_cast<double>(t));
}

/// Exponentiated-gradient choice over a finite epsilon candidate set.
/// Weights start uniform; a click multiplies the weight of the epsilon in
/// play by exp(learning_rate) and the next epsilon is sampled from the
/// floored probability vector (1 - floor) * w / sum(w) + floor / k.
class EgAdaptiveState {
 public:
  EgAdaptiveState(std::vector<double> candidates, double learning_rate, double floor,
                  Rng& rng)
      : candidates_(std::move(candidates)),
        weights_(candidates_.size(), 1.0),
        learning_rate_(learning_rate),
        floor_(floor) {
    if (candidates_.empty()) throw Error("empty epsilon candidate set");
    if (!(learning_rate_ > 0.0)) throw Error("eg learning rate must be positive");
    if (floor_ < 0.0 || floor_ >= 1.0) throw Error("eg floor must be in [0, 1)");
    current_ = sample(rng);
  }

  double current_epsilon() const { return candidates_[current_]; }
  std::size_t current_index() const { return current_; }
  const std::vector<double>& candidates() const { return candidates_; }

  std::vector<double> probabilities() const {
    double sum = 0.0;
    for (double w : weights_) sum += w;
    const double k = static_cast<double>(weights_.size());
    std::vector<double> probs(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      probs[i] = (1.0 - floor_) * weights_[i] / sum + floor_ / k;
    }
    return probs;
  }

  /// Applies click feedback to the epsilon in play and samples the next
  /// one; returns the epsilon chosen for the next round.
  double step(bool clicked, Rng& rng) {
    weights_[current_] *= std::exp(learning_rate_ * (clicked ? 1.0 : 0.0));
    double sum = 0.0;
    for (double w : weights_) sum += w;
    for (double& w : weights_) w /= sum;
    current_ = sample(rng);
    return current_epsilon();
  }

 private:
  std::size_t sample(Rng& rng) const {
    const auto probs = probabilities();
    const double q = uniform_real(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (q < acc) return i;
    }
    return probs.size() - 1;
  }

  std::vector<double> candidates_;
  std::vector<double> weights_;
  double learning_rate_;
  double floor_;
  std::size_t current_ = 0;
};

/// One batch pass at a fixed epsilon: n picks without replacement. In
/// literal mode q <= epsilon takes the greedy branch, as printed; the
/// inverted mode uses the conventional reading (q <= epsilon explores).
inline std::vector<DocId> select_batch_with_epsilon(std::size_t n, double epsilon,
                                                    std::span<const DocId> candidates,
                                                    const DocumentStore& store,
                                                    bool literal, Rng& rng) {
  if (n > candidates.size()) throw Error("batch larger than candidate pool");
  std::vector<DocId> picked;
  picked.reserve(n);
  std::unordered_set<DocId> used;
  std::vector<const DocId*> remaining;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = uniform_real(rng);
    const bool greedy = literal ? (q <= epsilon) : (q > epsilon);
    if (greedy) {
      picked.push_back(greedy_select(candidates, store, used, rng));
    } else {
      remaining.clear();
      for (const DocId& doc : candidates) {
        if (used.count(doc) == 0) remaining.push_back(&doc);
      }
      picked.push_back(*remaining[uniform_index(rng, remaining.size())]);
    }
    used.insert(picked.back());
  }
  return picked;
}

/// Epsilon refresh outcome; tradeoff is empty when the samples were too
/// thin and the fallback epsilon was used instead.
struct EpsilonUpdate {
  double epsilon = 0.0;
  std::optional<TradeoffResult> tradeoff;
};

/// Builds both reward densities from the samples and derives epsilon from
/// the utility-maximizing threshold. Any insufficient-data condition
/// (empty sample, degenerate density) falls back to the configured value.
inline EpsilonUpdate refresh_linearized_epsilon(const RewardSample& clicked,
                                                const RewardSample& nonclicked,
                                                const PolicyConfig& config) {
  try {
    const auto build = [&](const RewardSample& sample) {
      const PointSeries series = build_point_series(sample);
      const auto classes = linearize(series, config.threshold_error);
      const auto liaisons = connect_classes(classes);
      return normalize_density(classes, liaisons);
    };
    const std::optional<PiecewiseDensity> clicked_density = build(clicked);
    const std::optional<PiecewiseDensity> nonclicked_density = build(nonclicked);
    const PopulationCounts counts{clicked.size(), nonclicked.size()};
    const TradeoffResult tradeoff = optimize_threshold(
        clicked_density, nonclicked_density, config.utility, counts, config.grid_size);
    return {tradeoff.epsilon, tradeoff};
  } catch (const InsufficientData&) {
    return {config.fallback_epsilon, std::nullopt};
  }
}

/// One full linearized pass: linearize both samples, optimize the
/// tradeoff, then select a batch of n documents at the derived epsilon.
inline std::vector<DocId> linearized_select_batch(std::size_t n,
                                                  const RewardSample& clicked,
                                                  const RewardSample& nonclicked,
                                                  std::span<const DocId> candidates,
                                                  const DocumentStore& store,
                                                  const PolicyConfig& config, Rng& rng) {
  const EpsilonUpdate update = refresh_linearized_epsilon(clicked, nonclicked, config);
  return select_batch_with_epsilon(n, update.epsilon, candidates, store,
                                   config.alg2_literal, rng);
}

/// Online policy state for one situation stream. Serves single decisions;
/// the linearized policy refreshes its tradeoff every `batch` rounds.
/// Not safe for concurrent mutation.
class PolicyState {
 public:
  explicit PolicyState(PolicyConfig config)
      : config_(std::move(config)), store_(config_.sample_window) {
    config_.validate();
    current_epsilon_ = config_.fallback_epsilon;
  }

  /// Chooses an arm for the next round and advances the round counter.
  Decision select(std::span<const DocId> candidates, Rng& rng) {
    if (candidates.empty()) throw Error("empty candidate pool");
    ++t_;
    switch (config_.kind) {
      case PolicyKind::egreedy:
        return epsilon_greedy_select(candidates, store_, config_.epsilon, rng);
      case PolicyKind::ebeginning:
        return epsilon_beginning_select(t_, config_.horizon, config_.epsilon, candidates,
                                        store_, rng);
      case PolicyKind::edecreasing:
        return epsilon_greedy_select(candidates, store_,
                                     epsilon_decreasing_schedule(t_, config_.epsilon0),
                                     rng);
      case PolicyKind::eg: {
        if (!eg_) {
          eg_.emplace(config_.eg_candidates, config_.eg_learning_rate, config_.eg_floor,
                      rng);
        }
        return epsilon_greedy_select(candidates, store_, eg_->current_epsilon(), rng);
      }
      case PolicyKind::linearized:
      default: {
        if ((t_ - 1) % config_.batch == 0) {
          const EpsilonUpdate update = refresh_linearized_epsilon(
              store_.clicked_sample(), store_.nonclicked_sample(), config_);
          current_epsilon_ = update.epsilon;
          last_tradeoff_ = update.tradeoff;
          last_refresh_round_ = t_;
        }
        const double q = uniform_real(rng);
        const bool greedy =
            config_.alg2_literal ? (q <= current_epsilon_) : (q > current_epsilon_);
        if (greedy) {
          return {greedy_select(candidates, store_, rng), false, current_epsilon_};
        }
        return {candidates[uniform_index(rng, candidates.size())], true,
                current_epsilon_};
      }
    }
  }

  /// Feeds the click outcome of a displayed document back into the state.
  void feedback(const DocId& doc, bool clicked, Rng& rng) {
    store_.record_event(doc, clicked);
    if (config_.kind == PolicyKind::eg && eg_) eg_->step(clicked, rng);
  }

  std::uint64_t round() const { return t_; }
  const DocumentStore& store() const { return store_; }
  const PolicyConfig& config() const { return config_; }
  double current_epsilon() const { return current_epsilon_; }
  std::uint64_t last_refresh_round() const { return last_refresh_round_; }
  const std::optional<TradeoffResult>& last_tradeoff() const { return last_tradeoff_; }

 private:
  PolicyConfig config_;
  DocumentStore store_;
  std::uint64_t t_ = 0;
  std::optional<EgAdaptiveState> eg_;
  double current_epsilon_ = 0.0;
  std::optional<TradeoffResult> last_tradeoff_;
  std::uint64_t last_refresh_round_ = 0;
};

}  // namespace bandit
