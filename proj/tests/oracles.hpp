#pragma once

// Independent reference implementations used only by tests. They deliberately avoid
// the library's own algorithms (no BFS, no sorting for AP, no power iteration).

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "apr/kgstore.hpp"
#include "apr/pathfind.hpp"

namespace oracle {

using apr::kg::EntityId;
using apr::kg::RelationId;

// Random base graph: `nodes` entities e0.., `relations` relations r0.., `edges` draws
// (duplicates collapse, self-loops allowed).
inline apr::kg::KnowledgeGraph random_graph(std::mt19937_64& rng, std::size_t nodes, std::size_t relations,
                                            std::size_t edges) {
  apr::kg::Vocabulary ents, rels;
  for (std::size_t i = 0; i < nodes; ++i) ents.intern("e" + std::to_string(i));
  for (std::size_t i = 0; i < relations; ++i) rels.intern("r" + std::to_string(i));
  std::uniform_int_distribution<EntityId> node(0, static_cast<EntityId>(nodes - 1));
  std::uniform_int_distribution<RelationId> rel(0, static_cast<RelationId>(relations - 1));
  std::vector<apr::kg::Triple> triples;
  for (std::size_t i = 0; i < edges; ++i) triples.push_back({node(rng), rel(rng), node(rng)});
  return apr::kg::KnowledgeGraph(std::move(ents), std::move(rels), triples);
}

// Plain depth-first enumeration over every out-edge. An undirected edge identity is the
// smaller of the two orientations (a, r, b) / (b, r', a) where r' is r's reverse.
inline std::set<apr::path::Path> dfs_paths(const apr::kg::KnowledgeGraph& kg, EntityId source, EntityId target,
                                           std::size_t max_len, std::optional<RelationId> exclude) {
  const auto R = static_cast<RelationId>(kg.base_relation_count());
  auto rev = [&](RelationId r) { return r < R ? r + R : r - R; };
  using Key = std::tuple<EntityId, RelationId, EntityId>;
  auto key = [&](EntityId a, RelationId r, EntityId b) { return std::min(Key{a, r, b}, Key{b, rev(r), a}); };
  std::set<Key> banned;
  if (exclude) {
    banned.insert(key(source, *exclude, target));
    banned.insert(key(target, *exclude, source));
  }
  std::set<apr::path::Path> out;
  std::vector<Key> used;
  apr::path::Path cur;
  cur.entities.push_back(source);
  auto rec = [&](auto& self, EntityId at) -> void {
    if (!cur.relations.empty() && at == target) out.insert(cur);
    if (cur.relations.size() == max_len) return;
    for (const auto& e : kg.neighbors(at)) {
      const auto k = key(at, e.relation, e.target);
      if (banned.contains(k) || std::find(used.begin(), used.end(), k) != used.end()) continue;
      used.push_back(k);
      cur.relations.push_back(e.relation);
      cur.entities.push_back(e.target);
      self(self, e.target);
      cur.entities.pop_back();
      cur.relations.pop_back();
      used.pop_back();
    }
  };
  rec(rec, source);
  return out;
}

// AP without sorting: the rank of item i counts strictly higher scores plus equal
// scores that appear earlier in the input.
inline double average_precision(const std::vector<double>& scores, const std::vector<bool>& labels) {
  const std::size_t n = scores.size();
  auto rank = [&](std::size_t i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++r;
    }
    return r;
  };
  // Precision terms indexed by rank, then summed best rank first so the floating point
  // accumulation order is fixed.
  std::vector<double> term(n + 1, -1.0);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i]) continue;
    ++positives;
    const auto ri = rank(i);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j] && rank(j) <= ri) ++hits;
    }
    term[ri] = static_cast<double>(hits) / static_cast<double>(ri);
  }
  double sum = 0.0;
  for (const double t : term) {
    if (t >= 0.0) sum += t;
  }
  return sum / static_cast<double>(positives);
}

// Personalized PageRank as the solution of (I - (1 - a) M) x = a e_s, where column u of
// M spreads u's mass uniformly over its out-edges (or returns it to s when u has none).
inline Eigen::VectorXd ppr(const apr::kg::KnowledgeGraph& kg, EntityId source, double restart) {
  const auto n = static_cast<Eigen::Index>(kg.entity_count());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    const auto edges = kg.neighbors(static_cast<EntityId>(u));
    if (edges.empty()) {
      M(source, u) = 1.0;
      continue;
    }
    for (const auto& e : edges) M(e.target, u) += 1.0 / static_cast<double>(edges.size());
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(source) = restart;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - (1.0 - restart) * M;
  return A.fullPivLu().solve(rhs);
}

}  // namespace oracle
