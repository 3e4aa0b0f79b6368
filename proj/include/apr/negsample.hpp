#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "apr/kgstore.hpp"

namespace apr::neg {

using kg::EntityId;
using kg::RelationId;

struct PprOptions {
  double restart = 0.15;
  double tol = 1e-9;
  int max_iters = 200;
};

struct PprScores {
  EntityId source = 0;
  double restart = 0.0;
  Eigen::VectorXd scores;  // one entry per entity, sums to 1
  int iterations = 0;
};

/// Power iteration of x <- restart * e_source + (1 - restart) * P^T x, where P moves
/// uniformly over out-edges. Mass at nodes without out-edges returns to the source.
PprScores personalized_pagerank(const kg::KnowledgeGraph& kg, EntityId source,
                                const PprOptions& options = {});

struct NegativeSample {
  std::vector<kg::Triple> negatives;
  /// Index into the positives list of the positive each negative was drawn for.
  std::vector<std::size_t> origin;
  /// Human-readable notes for positives that received no negative.
  std::vector<std::string> warnings;
};

/// One corrupted-target negative per positive. Candidates for a source are entities
/// that appear as a target of `relation` anywhere in the graph, minus the source and
/// its true targets. Candidates are ranked by PPR from the source (ties by entity id)
/// and handed out in rank order to that source's positives.
NegativeSample sample_negatives(const kg::KnowledgeGraph& kg, RelationId relation,
                                const std::vector<std::pair<EntityId, EntityId>>& positives,
                                std::uint64_t seed, const PprOptions& options = {});

}  // namespace apr::neg
