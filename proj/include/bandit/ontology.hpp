#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bandit/errors.hpp"

namespace bandit {

/// A concept taxonomy: a single-rooted tree where depth counts the nodes
/// on the path to the root, root included (so the root has depth 1).
/// Immutable once loaded, except for explicit add_concept growth.
class Ontology {
 public:
  Ontology() = default;

  /// Builds from (concept, parent) pairs; parent "-" marks the root.
  static Ontology from_edges(const std::vector<std::pair<std::string, std::string>>& edges) {
    Ontology onto;
    std::vector<std::string> parents;
    parents.reserve(edges.size());
    for (const auto& [child, parent] : edges) {
      if (child.empty()) throw Error("ontology: empty concept id");
      if (!onto.index_.emplace(child, static_cast<int>(onto.nodes_.size())).second) {
        throw Error("ontology: duplicate concept '" + child + "'");
      }
      onto.nodes_.push_back({child, -1, 0});
      parents.push_back(parent);
      if (parent == "-") {
        if (onto.root_ >= 0) throw Error("ontology: more than one root");
        onto.root_ = static_cast<int>(onto.nodes_.size()) - 1;
      }
    }
    if (onto.root_ < 0) throw Error("ontology: no root (expected one 'id<TAB>-' line)");
    for (std::size_t i = 0; i < onto.nodes_.size(); ++i) {
      if (static_cast<int>(i) == onto.root_) continue;
      const auto it = onto.index_.find(parents[i]);
      if (it == onto.index_.end()) {
        throw Error("ontology: unknown parent '" + parents[i] + "' of '" +
                    onto.nodes_[i].id + "'");
      }
      onto.nodes_[i].parent = it->second;
    }
    onto.compute_depths();
    return onto;
  }

  /// Loads tab-separated `child<TAB>parent` lines; the root is listed as
  /// `root_id<TAB>-`. Blank lines are skipped.
  static Ontology load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open ontology file: " + path);
    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
        throw Error(path + ": line " + std::to_string(line_no) +
                    ": expected 'child<TAB>parent'");
      }
      edges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    try {
      return from_edges(edges);
    } catch (const Error& e) {
      throw Error(path + ": " + e.what());
    }
  }

  /// A one-node taxonomy, used as the seed of implicitly grown ontologies.
  static Ontology single_root(const std::string& root_id) {
    return from_edges({{root_id, "-"}});
  }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t size() const { return nodes_.size(); }
  const std::string& root() const { return nodes_[static_cast<std::size_t>(root_)].id; }

  int depth(const std::string& id) const {
    return nodes_[static_cast<std::size_t>(index_of(id))].depth;
  }

  /// Grows the taxonomy under an existing parent.
  void add_concept(const std::string& id, const std::string& parent) {
    if (contains(id)) throw Error("ontology: duplicate concept '" + id + "'");
    const int p = index_of(parent);
    index_.emplace(id, static_cast<int>(nodes_.size()));
    nodes_.push_back({id, p, nodes_[static_cast<std::size_t>(p)].depth + 1});
  }

  /// Deepest common ancestor; a node is its own ancestor.
  std::string lcs(const std::string& x, const std::string& y) const {
    int a = index_of(x);
    int b = index_of(y);
    while (nodes_[static_cast<std::size_t>(a)].depth >
           nodes_[static_cast<std::size_t>(b)].depth) {
      a = nodes_[static_cast<std::size_t>(a)].parent;
    }
    while (nodes_[static_cast<std::size_t>(b)].depth >
           nodes_[static_cast<std::size_t>(a)].depth) {
      b = nodes_[static_cast<std::size_t>(b)].parent;
    }
    while (a != b) {
      a = nodes_[static_cast<std::size_t>(a)].parent;
      b = nodes_[static_cast<std::size_t>(b)].parent;
    }
    return nodes_[static_cast<std::size_t>(a)].id;
  }

  /// Wu-Palmer similarity: 2*depth(lcs) / (depth(x) + depth(y)), in (0, 1].
  double wu_palmer(const std::string& x, const std::string& y) const {
    const double shared = depth(lcs(x, y));
    return 2.0 * shared / (static_cast<double>(depth(x)) + static_cast<double>(depth(y)));
  }

 private:
  struct Node {
    std::string id;
    int parent = -1;
    int depth = 0;
  };

  int index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown concept '" + id + "'");
    return it->second;
  }

  void compute_depths() {
    nodes_[static_cast<std::size_t>(root_)].depth = 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      std::vector<int> chain;
      int cur = static_cast<int>(i);
      while (nodes_[static_cast<std::size_t>(cur)].depth == 0) {
        chain.push_back(cur);
        if (chain.size() > nodes_.size()) {
          throw Error("ontology: cycle involving '" + nodes_[i].id + "'");
        }
        cur = nodes_[static_cast<std::size_t>(cur)].parent;
      }
      int d = nodes_[static_cast<std::size_t>(cur)].depth;
      for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        nodes_[static_cast<std::size_t>(*it)].depth = ++d;
      }
    }
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> index_;
  int root_ = -1;
};

/// A user situation: one concept per context dimension.
struct Situation {
  std::string location;
  std::string time;
  std::string social;

  bool operator==(const Situation&) const = default;
};

/// Maximum attainable situation score: three dimensions, weight 1 each.
inline constexpr double kMaxSituationScore = 3.0;

/// One taxonomy per situation dimension.
struct OntologySet {
  Ontology location;
  Ontology time;
  Ontology social;

  /// Flat single-root taxonomies for runs without ontology files;
  /// concepts are grown on demand with ensure().
  static OntologySet implicit() {
    return {Ontology::single_root("any_location"), Ontology::single_root("any_time"),
            Ontology::single_root("any_social")};
  }

  /// Sum of per-dimension Wu-Palmer similarities.
  double similarity(const Situation& a, const Situation& b,
                    const std::array<double, 3>& weights = {1.0, 1.0, 1.0}) const {
    return weights[0] * location.wu_palmer(a.location, b.location) +
           weights[1] * time.wu_palmer(a.time, b.time) +
           weights[2] * social.wu_palmer(a.social, b.social);
  }

  /// Throws if any concept of the situation is unknown.
  void validate(const Situation& s) const {
    if (!location.contains(s.location)) throw Error("unknown location concept '" + s.location + "'");
    if (!time.contains(s.time)) throw Error("unknown time concept '" + s.time + "'");
    if (!social.contains(s.social)) throw Error("unknown social concept '" + s.social + "'");
  }

  /// Adds unseen concepts as fresh leaves under each dimension root.
  void ensure(const Situation& s) {
    if (!location.contains(s.location)) location.add_concept(s.location, location.root());
    if (!time.contains(s.time)) time.add_concept(s.time, time.root());
    if (!social.contains(s.social)) social.add_concept(s.social, social.root());
  }
};

/// Per-situation bandit state, retrieved by semantic similarity. Entries
/// live in a deque so handed-out references stay valid as the store grows.
template <typename State>
class SituationStore {
 public:
  explicit SituationStore(const OntologySet* ontologies,
                          std::array<double, 3> weights = {1.0, 1.0, 1.0})
      : ontologies_(ontologies), weights_(weights) {}

  struct Match {
    std::size_t index = 0;
    double score = 0.0;
  };

  /// Most similar stored situation; ties resolve to the most recently
  /// stored. Empty store yields nothing.
  std::optional<Match> retrieve(const Situation& current) const {
    std::optional<Match> best;
    for (std::size_t i = entries_.size(); i-- > 0;) {
      const double score = ontologies_->similarity(entries_[i].first, current, weights_);
      if (!best || score > best->score) best = Match{i, score};
    }
    return best;
  }

  /// Reuses the best match at or above the similarity floor, otherwise
  /// registers the current situation with a fresh state.
  template <typename Factory>
  State& state_for(const Situation& current, double similarity_floor, Factory&& make) {
    const auto match = retrieve(current);
    if (match && match->score >= similarity_floor) return entries_[match->index].second;
    entries_.emplace_back(current, make());
    return entries_.back().second;
  }

  std::size_t size() const { return entries_.size(); }
  const Situation& situation_at(std::size_t i) const { return entries_[i].first; }
  State& state_at(std::size_t i) { return entries_[i].second; }
  const State& state_at(std::size_t i) const { return entries_[i].second; }

 private:
  const OntologySet* ontologies_;
  std::array<double, 3> weights_;
  std::deque<std::pair<Situation, State>> entries_;
};

}  // namespace bandit
