#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bandit/errors.hpp"
#include "bandit/ontology.hpp"
#include "bandit/policy.hpp"
#include "bandit/reward.hpp"
#include "bandit/rng.hpp"

namespace bandit {

/// One logged recommendation round.
struct EventRecord {
  std::uint64_t t = 0;
  Situation situation;
  std::vector<DocId> candidates;
  DocId displayed;
  bool clicked = false;

  bool operator==(const EventRecord&) const = default;
};

inline nlohmann::ordered_json event_to_json(const EventRecord& rec) {
  nlohmann::ordered_json j;
  j["t"] = rec.t;
  j["location"] = rec.situation.location;
  j["time"] = rec.situation.time;
  j["social"] = rec.situation.social;
  j["candidates"] = rec.candidates;
  j["displayed"] = rec.displayed;
  j["clicked"] = rec.clicked ? 1 : 0;
  return j;
}

inline void write_event_line(std::ostream& out, const EventRecord& rec) {
  out << event_to_json(rec).dump() << '\n';
}

inline EventRecord parse_event_record(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("record must be a JSON object");
  const auto field = [&](const char* name) -> const nlohmann::json& {
    const auto it = j.find(name);
    if (it == j.end()) throw Error(std::string("missing field '") + name + "'");
    return *it;
  };
  const auto as_string = [&](const char* name) {
    const auto& v = field(name);
    if (!v.is_string()) throw Error(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
  };

  EventRecord rec;
  const auto& t = field("t");
  if (!t.is_number_unsigned() && !t.is_number_integer()) {
    throw Error("field 't' must be an integer");
  }
  if (t.is_number_integer() && t.get<std::int64_t>() < 1) {
    throw Error("field 't' must be at least 1");
  }
  rec.t = t.get<std::uint64_t>();
  if (rec.t < 1) throw Error("field 't' must be at least 1");

  rec.situation.location = as_string("location");
  rec.situation.time = as_string("time");
  rec.situation.social = as_string("social");

  const auto& cands = field("candidates");
  if (!cands.is_array() || cands.empty()) {
    throw Error("field 'candidates' must be a non-empty array");
  }
  for (const auto& c : cands) {
    if (!c.is_string()) throw Error("candidates must be strings");
    rec.candidates.push_back(c.get<std::string>());
  }

  rec.displayed = as_string("displayed");
  if (std::find(rec.candidates.begin(), rec.candidates.end(), rec.displayed) ==
      rec.candidates.end()) {
    throw Error("displayed document '" + rec.displayed + "' is not a candidate");
  }

  const auto& clicked = field("clicked");
  if (clicked.is_boolean()) {
    rec.clicked = clicked.get<bool>();
  } else if (clicked.is_number_integer() || clicked.is_number_unsigned()) {
    const auto v = clicked.get<std::int64_t>();
    if (v != 0 && v != 1) throw Error("field 'clicked' must be 0 or 1");
    rec.clicked = v == 1;
  } else {
    throw Error("field 'clicked' must be 0 or 1");
  }
  return rec;
}

/// Streaming reader over a line-delimited JSON event log. Validates each
/// record and enforces strictly increasing round indices.
class EventLogReader {
 public:
  explicit EventLogReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw Error("cannot open event log: " + path);
  }

  std::optional<EventRecord> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      EventRecord rec;
      try {
        rec = parse_event_record(nlohmann::json::parse(line));
      } catch (const Error& e) {
        throw Error(location() + e.what());
      } catch (const nlohmann::json::exception& e) {
        throw Error(location() + "invalid JSON: " + e.what());
      }
      if (rec.t <= last_t_) {
        throw Error(location() + "round index " + std::to_string(rec.t) +
                    " does not increase (previous " + std::to_string(last_t_) + ")");
      }
      last_t_ = rec.t;
      return rec;
    }
    return std::nullopt;
  }

 private:
  std::string location() const {
    return path_ + ": line " + std::to_string(line_no_) + ": ";
  }

  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::uint64_t last_t_ = 0;
};

/// Parameters of the synthetic document stream. Documents arrive with
/// fresh latent CTRs and expire `lifetime` rounds after arrival; the
/// logged display is drawn uniformly (an unbiased logging policy).
struct SyntheticConfig {
  std::uint64_t docs = 20;  // pool seeded at round 1
  double ctr_min = 0.0;
  double ctr_max = 1.0;
  double arrival_rate = 0.0;  // expected fresh documents per round
  std::uint64_t lifetime = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t rounds = 1000;
  std::uint64_t candidates_per_round = 5;
  std::uint64_t situation_pool = 1;

  void validate() const {
    if (docs < 1) throw Error("synthetic config: docs must be at least 1");
    if (ctr_min < 0.0 || ctr_max > 1.0 || ctr_min > ctr_max) {
      throw Error("synthetic config: latent CTR bounds must satisfy 0 <= min <= max <= 1");
    }
    if (!(arrival_rate >= 0.0)) throw Error("synthetic config: arrival_rate must be >= 0");
    if (lifetime < 1) throw Error("synthetic config: lifetime must be at least 1");
    if (rounds < 1) throw Error("synthetic config: rounds must be at least 1");
    if (candidates_per_round < 1) {
      throw Error("synthetic config: candidates must be at least 1");
    }
    if (situation_pool < 1) throw Error("synthetic config: situations must be at least 1");
  }

  static SyntheticConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error("synthetic config must be a JSON object");
    SyntheticConfig cfg;
    for (const auto& [key, value] : j.items()) {
      if (key == "docs") cfg.docs = value.get<std::uint64_t>();
      else if (key == "ctr_min") cfg.ctr_min = value.get<double>();
      else if (key == "ctr_max") cfg.ctr_max = value.get<double>();
      else if (key == "arrival_rate") cfg.arrival_rate = value.get<double>();
      else if (key == "lifetime") cfg.lifetime = value.get<std::uint64_t>();
      else if (key == "rounds") cfg.rounds = value.get<std::uint64_t>();
      else if (key == "candidates") cfg.candidates_per_round = value.get<std::uint64_t>();
      else if (key == "situations") cfg.situation_pool = value.get<std::uint64_t>();
      else throw Error("synthetic config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["docs"] = docs;
    j["ctr_min"] = ctr_min;
    j["ctr_max"] = ctr_max;
    j["arrival_rate"] = arrival_rate;
    j["lifetime"] = lifetime;
    j["rounds"] = rounds;
    j["candidates"] = candidates_per_round;
    j["situations"] = situation_pool;
    return j;
  }
};

/// Seed-deterministic stream of event records plus the hidden latent CTR
/// table. Expired documents are replaced as needed so the candidate pool
/// never starves.
class SyntheticGenerator {
 public:
  SyntheticGenerator(const SyntheticConfig& config, std::uint64_t seed)
      : cfg_(config), rng_(seed) {
    cfg_.validate();
    situations_.reserve(cfg_.situation_pool);
    for (std::uint64_t i = 0; i < cfg_.situation_pool; ++i) {
      situations_.push_back(
          {"loc_" + std::to_string(uniform_index(rng_, cfg_.situation_pool)),
           "time_" + std::to_string(uniform_index(rng_, cfg_.situation_pool)),
           "soc_" + std::to_string(uniform_index(rng_, cfg_.situation_pool))});
    }
  }

  std::optional<EventRecord> next() {
    if (t_ == cfg_.rounds) return std::nullopt;
    ++t_;

    if (t_ == 1) {
      for (std::uint64_t i = 0; i < cfg_.docs; ++i) spawn();
    } else {
      arrival_carry_ += cfg_.arrival_rate;
      while (arrival_carry_ >= 1.0) {
        spawn();
        arrival_carry_ -= 1.0;
      }
    }
    std::erase_if(live_, [&](const auto& e) { return t_ - e.second >= cfg_.lifetime; });
    while (live_.size() < cfg_.candidates_per_round) spawn();

    scratch_.resize(live_.size());
    std::iota(scratch_.begin(), scratch_.end(), std::size_t{0});
    const auto k = static_cast<std::size_t>(cfg_.candidates_per_round);
    std::vector<DocId> candidates;
    candidates.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(scratch_[j], scratch_[j + uniform_index(rng_, live_.size() - j)]);
      candidates.push_back(live_[scratch_[j]].first);
    }

    const DocId displayed = candidates[uniform_index(rng_, k)];
    const bool clicked = uniform_real(rng_) < latent_.at(displayed);
    const Situation& situation = situations_[uniform_index(rng_, situations_.size())];
    return EventRecord{t_, situation, std::move(candidates), displayed, clicked};
  }

  double latent_ctr(const DocId& doc) const {
    const auto it = latent_.find(doc);
    if (it == latent_.end()) throw Error("unknown document '" + doc + "'");
    return it->second;
  }

  const std::unordered_map<DocId, double>& latent_table() const { return latent_; }
  const std::vector<Situation>& situation_pool() const { return situations_; }

 private:
  void spawn() {
    DocId id = "doc_" + std::to_string(next_doc_++);
    latent_[id] = cfg_.ctr_min + (cfg_.ctr_max - cfg_.ctr_min) * uniform_real(rng_);
    live_.emplace_back(std::move(id), t_ == 0 ? 1 : t_);
  }

  SyntheticConfig cfg_;
  Rng rng_;
  std::vector<std::pair<DocId, std::uint64_t>> live_;  // doc, arrival round
  std::unordered_map<DocId, double> latent_;
  std::vector<Situation> situations_;
  std::vector<std::size_t> scratch_;
  std::uint64_t t_ = 0;
  std::uint64_t next_doc_ = 0;
  double arrival_carry_ = 0.0;
};

struct RoundStat {
  std::uint64_t round = 0;
  double cumulative_ctr = 0.0;
  double epsilon = 0.0;
  bool evaluated = false;

  bool operator==(const RoundStat&) const = default;
};

struct RunReport {
  std::string mode;  // "replay" | "simulate"
  std::uint64_t seed = 0;
  nlohmann::ordered_json policy;  // config echo
  std::uint64_t rounds = 0;
  std::uint64_t evaluated_rounds = 0;
  std::uint64_t clicks = 0;
  bool no_overlap = false;
  double final_ctr = 0.0;           // 0 when undefined (no overlap)
  double oracle_mean_reward = 0.0;  // simulate mode only
  std::vector<RoundStat> series;

  bool operator==(const RunReport&) const = default;
};

/// Rejection replay: each round the driver picks from the logged
/// candidates; only rounds where the pick matches the logged display are
/// evaluated and fed back. CTR is clicks over evaluated rounds.
template <typename Driver>
RunReport replay_evaluate(Driver& driver, EventLogReader& log, Rng& rng) {
  RunReport report;
  report.mode = "replay";
  while (auto rec = log.next()) {
    ++report.rounds;
    const Decision decision = driver.select(*rec, rng);
    const bool match = decision.doc == rec->displayed;
    if (match) {
      ++report.evaluated_rounds;
      if (rec->clicked) ++report.clicks;
      driver.feedback(*rec, decision.doc, rec->clicked, rng);
    }
    const double cumulative =
        report.evaluated_rounds == 0
            ? 0.0
            : static_cast<double>(report.clicks) /
                  static_cast<double>(report.evaluated_rounds);
    report.series.push_back({rec->t, cumulative, decision.epsilon_used, match});
  }
  report.no_overlap = report.evaluated_rounds == 0;
  report.final_ctr = report.no_overlap
                         ? 0.0
                         : static_cast<double>(report.clicks) /
                               static_cast<double>(report.evaluated_rounds);
  return report;
}

/// Full simulation over a synthetic stream: every round is evaluated and
/// the click is drawn from the latent CTR of whatever the driver picked.
/// Also tracks the expected reward of the best candidate per round. The
/// stream only needs next() and latent_ctr().
template <typename Driver, typename Stream>
RunReport simulate_evaluate(Driver& driver, Stream& gen, Rng& rng) {
  RunReport report;
  report.mode = "simulate";
  double oracle_sum = 0.0;
  while (auto rec = gen.next()) {
    ++report.rounds;
    const Decision decision = driver.select(*rec, rng);
    const bool clicked = uniform_real(rng) < gen.latent_ctr(decision.doc);
    if (clicked) ++report.clicks;
    driver.feedback(*rec, decision.doc, clicked, rng);

    double best = 0.0;
    for (const DocId& doc : rec->candidates) best = std::max(best, gen.latent_ctr(doc));
    oracle_sum += best;

    report.series.push_back({rec->t,
                             static_cast<double>(report.clicks) /
                                 static_cast<double>(report.rounds),
                             decision.epsilon_used, true});
  }
  report.evaluated_rounds = report.rounds;
  if (report.rounds > 0) {
    report.final_ctr =
        static_cast<double>(report.clicks) / static_cast<double>(report.rounds);
    report.oracle_mean_reward = oracle_sum / static_cast<double>(report.rounds);
  }
  return report;
}

/// Standard driver: partitions policy state by situation, reusing the
/// state of the most similar known situation when it clears the floor.
class SituationRouter {
 public:
  SituationRouter(OntologySet* ontologies, bool grow_concepts, PolicyConfig config,
                  double similarity_floor)
      : ontologies_(ontologies),
        grow_(grow_concepts),
        config_(std::move(config)),
        floor_(similarity_floor),
        store_(ontologies) {
    if (floor_ < 0.0 || floor_ > kMaxSituationScore) {
      throw Error("similarity floor must be in [0, 3]");
    }
    config_.validate();
  }

  Decision select(const EventRecord& rec, Rng& rng) {
    PolicyState& state = resolve(rec.situation);
    last_ = &state;
    return state.select(rec.candidates, rng);
  }

  void feedback(const EventRecord&, const DocId& doc, bool clicked, Rng& rng) {
    if (last_ == nullptr) throw Error("feedback before select");
    last_->feedback(doc, clicked, rng);
  }

  std::size_t situation_count() const { return store_.size(); }

 private:
  PolicyState& resolve(const Situation& situation) {
    if (grow_) {
      ontologies_->ensure(situation);
    } else {
      ontologies_->validate(situation);
    }
    return store_.state_for(situation, floor_, [this] { return PolicyState(config_); });
  }

  OntologySet* ontologies_;
  bool grow_;
  PolicyConfig config_;
  double floor_;
  SituationStore<PolicyState> store_;
  PolicyState* last_ = nullptr;
};

enum class ReportFormat { csv, json };

inline void write_report_csv(const RunReport& report, std::ostream& out) {
  out << "round,cumulative_ctr,epsilon,evaluated\n";
  char buf[96];
  for (const RoundStat& row : report.series) {
    std::snprintf(buf, sizeof(buf), "%llu,%.9f,%.9f,%d\n",
                  static_cast<unsigned long long>(row.round), row.cumulative_ctr,
                  row.epsilon, row.evaluated ? 1 : 0);
    out << buf;
  }
}

inline nlohmann::ordered_json report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = report.mode;
  j["seed"] = report.seed;
  j["policy"] = report.policy;
  j["rounds"] = report.rounds;
  j["evaluated_rounds"] = report.evaluated_rounds;
  j["clicks"] = report.clicks;
  j["no_overlap"] = report.no_overlap;
  j["final_ctr"] = report.final_ctr;
  j["oracle_mean_reward"] = report.oracle_mean_reward;
  auto series = nlohmann::ordered_json::array();
  for (const RoundStat& row : report.series) {
    nlohmann::ordered_json r;
    r["round"] = row.round;
    r["cumulative_ctr"] = row.cumulative_ctr;
    r["epsilon"] = row.epsilon;
    r["evaluated"] = row.evaluated;
    series.push_back(std::move(r));
  }
  j["series"] = std::move(series);
  return j;
}

inline RunReport report_from_json(const nlohmann::ordered_json& j) {
  RunReport report;
  report.mode = j.at("mode").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.policy = j.at("policy");
  report.rounds = j.at("rounds").get<std::uint64_t>();
  report.evaluated_rounds = j.at("evaluated_rounds").get<std::uint64_t>();
  report.clicks = j.at("clicks").get<std::uint64_t>();
  report.no_overlap = j.at("no_overlap").get<bool>();
  report.final_ctr = j.at("final_ctr").get<double>();
  report.oracle_mean_reward = j.at("oracle_mean_reward").get<double>();
  for (const auto& r : j.at("series")) {
    report.series.push_back({r.at("round").get<std::uint64_t>(),
                             r.at("cumulative_ctr").get<double>(),
                             r.at("epsilon").get<double>(),
                             r.at("evaluated").get<bool>()});
  }
  return report;
}

inline void write_report_json(const RunReport& report, std::ostream& out) {
  out << report_to_json(report).dump(2) << '\n';
}

inline void write_report(const RunReport& report, const std::string& path,
                         ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report: " + path);
  if (format == ReportFormat::csv) {
    write_report_csv(report, out);
  } else {
    write_report_json(report, out);
  }
  out.flush();
  if (!out) throw Error("failed writing report: " + path);
}

}  // namespace bandit
