#include "apr/pathfind.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "apr/error.hpp"

namespace apr::path {

EdgeKey edge_key(const kg::KnowledgeGraph& kg, EntityId from, RelationId relation, EntityId to) {
  const auto base = static_cast<RelationId>(kg.base_relation_count());
  if (relation < base) return {from, relation, to};
  return {to, relation - base, from};
}

namespace {

// A walk grown from one endpoint. For the forward half `vertices` runs source -> end;
// for the backward half it runs start -> target.
struct Partial {
  std::vector<EntityId> vertices;
  std::vector<RelationId> relations;
  std::vector<EdgeKey> keys;
};

bool uses(const std::vector<EdgeKey>& keys, const EdgeKey& k) {
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

bool disjoint(const std::vector<EdgeKey>& a, const std::vector<EdgeKey>& b) {
  for (const auto& k : a) {
    if (uses(b, k)) return false;
  }
  return true;
}

bool path_less(const Path& a, const Path& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  return a < b;
}

}  // namespace

PathSet extract_paths(const kg::KnowledgeGraph& kg, EntityId source, EntityId target,
                      const ExtractOptions& options) {
  if (!kg.augmented()) throw ContractError("path extraction requires reverse relations");
  if (source >= kg.entity_count() || target >= kg.entity_count()) {
    throw LookupError("query entity id out of range");
  }
  if (options.max_len < 1) throw ContractError("max_len must be at least 1");

  std::vector<EdgeKey> banned;
  if (options.exclude_direct) {
    const auto r = *options.exclude_direct;
    if (r >= kg.base_relation_count()) throw LookupError("excluded relation is not a base relation");
    banned.push_back(edge_key(kg, source, r, target));
    banned.push_back(edge_key(kg, target, r, source));
  }

  const std::size_t fwd_depth = (options.max_len + 1) / 2;
  const std::size_t bwd_depth = options.max_len / 2;

  // Forward layers: all edge-simple walks out of the source, by length.
  std::vector<std::vector<Partial>> forward(fwd_depth + 1);
  forward[0].push_back({{source}, {}, {}});
  for (std::size_t depth = 0; depth < fwd_depth; ++depth) {
    for (const auto& p : forward[depth]) {
      const auto at = p.vertices.back();
      for (const auto& e : kg.neighbors(at)) {
        const auto key = edge_key(kg, at, e.relation, e.target);
        if (uses(banned, key) || uses(p.keys, key)) continue;
        Partial next = p;
        next.vertices.push_back(e.target);
        next.relations.push_back(e.relation);
        next.keys.push_back(key);
        forward[depth + 1].push_back(std::move(next));
      }
    }
  }

  // Backward layers: walks into the target, grown at their front.
  std::vector<std::vector<Partial>> backward(bwd_depth + 1);
  backward[0].push_back({{target}, {}, {}});
  for (std::size_t depth = 0; depth < bwd_depth; ++depth) {
    for (const auto& p : backward[depth]) {
      const auto at = p.vertices.front();
      // (at, r, u) in the augmented graph implies the predecessor edge (u, reverse(r), at).
      for (const auto& e : kg.neighbors(at)) {
        const auto pred_rel = kg.reverse(e.relation);
        const auto key = edge_key(kg, e.target, pred_rel, at);
        if (uses(banned, key) || uses(p.keys, key)) continue;
        Partial next;
        next.vertices.reserve(p.vertices.size() + 1);
        next.vertices.push_back(e.target);
        next.vertices.insert(next.vertices.end(), p.vertices.begin(), p.vertices.end());
        next.relations.push_back(pred_rel);
        next.relations.insert(next.relations.end(), p.relations.begin(), p.relations.end());
        next.keys = p.keys;
        next.keys.push_back(key);
        backward[depth + 1].push_back(std::move(next));
      }
    }
  }

  std::unordered_map<EntityId, std::vector<const Partial*>> by_start;
  for (const auto& layer : backward) {
    for (const auto& p : layer) by_start[p.vertices.front()].push_back(&p);
  }

  // Each full path has exactly one split: the forward half takes min(M, fwd_depth) edges.
  PathSet out{source, target, {}};
  for (std::size_t a = 0; a <= fwd_depth; ++a) {
    for (const auto& f : forward[a]) {
      const auto it = by_start.find(f.vertices.back());
      if (it == by_start.end()) continue;
      for (const Partial* b : it->second) {
        const auto b_len = b->relations.size();
        if (a + b_len == 0) continue;
        if (a < fwd_depth && b_len != 0) continue;
        if (!disjoint(f.keys, b->keys)) continue;
        Path p;
        p.entities = f.vertices;
        p.entities.insert(p.entities.end(), b->vertices.begin() + 1, b->vertices.end());
        p.relations = f.relations;
        p.relations.insert(p.relations.end(), b->relations.begin(), b->relations.end());
        out.paths.push_back(std::move(p));
      }
    }
  }
  std::sort(out.paths.begin(), out.paths.end(), path_less);
  out.paths.erase(std::unique(out.paths.begin(), out.paths.end()), out.paths.end());
  return out;
}

PathSet subsample_paths(const PathSet& paths, std::size_t n_max, std::uint64_t seed) {
  if (n_max < 1) throw ContractError("n_max must be at least 1");
  if (paths.paths.size() <= n_max) return paths;
  std::vector<std::size_t> order(paths.paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n_max);
  std::sort(order.begin(), order.end());
  PathSet out{paths.source, paths.target, {}};
  out.paths.reserve(n_max);
  for (auto i : order) out.paths.push_back(paths.paths[i]);
  return out;
}

bool is_valid_path(const kg::KnowledgeGraph& kg, const Path& p) {
  if (p.relations.empty() || p.entities.size() != p.relations.size() + 1) return false;
  std::vector<EdgeKey> seen;
  for (std::size_t t = 0; t < p.relations.size(); ++t) {
    if (!kg.has_edge(p.entities[t], p.relations[t], p.entities[t + 1])) return false;
    const auto key = edge_key(kg, p.entities[t], p.relations[t], p.entities[t + 1]);
    if (uses(seen, key)) return false;
    seen.push_back(key);
  }
  return true;
}

Path reverse_path(const kg::KnowledgeGraph& kg, const Path& p) {
  Path out;
  out.entities.assign(p.entities.rbegin(), p.entities.rend());
  for (auto it = p.relations.rbegin(); it != p.relations.rend(); ++it) {
    out.relations.push_back(kg.reverse(*it));
  }
  return out;
}

}  // namespace apr::path
