#include "apr/negsample.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "apr/error.hpp"

namespace apr::neg {

PprScores personalized_pagerank(const kg::KnowledgeGraph& kg, EntityId source,
                                const PprOptions& options) {
  if (source >= kg.entity_count()) throw LookupError("PPR source id out of range");
  if (!(options.restart > 0.0 && options.restart < 1.0)) {
    throw ContractError("restart probability must lie in (0, 1)");
  }
  if (!(options.tol > 0.0)) throw ContractError("PPR tolerance must be positive");

  const auto n = static_cast<Eigen::Index>(kg.entity_count());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x[source] = 1.0;
  Eigen::VectorXd next(n);
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    next.setZero();
    double returned = 0.0;
    for (EntityId v = 0; v < kg.entity_count(); ++v) {
      const double mass = x[v];
      if (mass == 0.0) continue;
      const auto edges = kg.neighbors(v);
      if (edges.empty()) {
        returned += mass;
        continue;
      }
      const double share = mass / static_cast<double>(edges.size());
      for (const auto& e : edges) next[e.target] += share;
    }
    next *= (1.0 - options.restart);
    next[source] += options.restart + (1.0 - options.restart) * returned;
    const double change = (next - x).lpNorm<1>();
    x.swap(next);
    if (change < options.tol) {
      ++iter;
      break;
    }
  }
  // Renormalise away accumulated rounding so the scores sum to one.
  x /= x.sum();
  return {source, options.restart, std::move(x), iter};
}

NegativeSample sample_negatives(const kg::KnowledgeGraph& kg, RelationId relation,
                                const std::vector<std::pair<EntityId, EntityId>>& positives,
                                std::uint64_t seed, const PprOptions& options) {
  (void)seed;  // ranking is deterministic; the seed is only recorded by callers
  if (relation >= kg.base_relation_count()) throw LookupError("relation is not a base relation");
  if (positives.empty()) throw ContractError("sample_negatives needs at least one positive");

  std::set<EntityId> range;
  for (const auto& [s, t] : kg.positives(relation)) range.insert(t);

  // Group positives by source, preserving first appearance.
  std::map<EntityId, std::vector<std::size_t>> by_source;
  std::vector<EntityId> source_order;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    auto [it, inserted] = by_source.try_emplace(positives[i].first);
    if (inserted) source_order.push_back(positives[i].first);
    it->second.push_back(i);
  }

  NegativeSample out;
  std::vector<std::pair<std::size_t, kg::Triple>> picked;
  for (const auto source : source_order) {
    std::vector<EntityId> candidates;
    for (const auto t : range) {
      if (t != source && !kg.has_edge(source, relation, t)) candidates.push_back(t);
    }
    const auto& owners = by_source[source];
    if (!candidates.empty()) {
      const auto ppr = personalized_pagerank(kg, source, options);
      std::stable_sort(candidates.begin(), candidates.end(), [&](EntityId a, EntityId b) {
        return ppr.scores[a] > ppr.scores[b];
      });
    }
    const auto supplied = std::min(candidates.size(), owners.size());
    for (std::size_t k = 0; k < supplied; ++k) {
      picked.push_back({owners[k], kg::Triple{source, relation, candidates[k]}});
    }
    if (supplied < owners.size()) {
      out.warnings.push_back("source '" + kg.entities().token(source) + "': " +
                             std::to_string(owners.size() - supplied) + " of " +
                             std::to_string(owners.size()) +
                             " positive(s) left without a negative candidate");
    }
  }
  std::sort(picked.begin(), picked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [origin, triple] : picked) {
    out.origin.push_back(origin);
    out.negatives.push_back(triple);
  }
  return out;
}

}  // namespace apr::neg
