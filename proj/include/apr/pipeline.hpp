#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apr/io.hpp"
#include "apr/num/grad_check.hpp"
#include "apr/model.hpp"
#include "apr/pathfind.hpp"
#include "apr/synthgen.hpp"
#include "apr/typesys.hpp"

namespace apr::pipeline {

struct ExtractConfig {
  std::size_t max_len = 3;
  std::size_t max_paths = 0;  // 0 keeps every path
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Extracts paths for every pair with the direct `relation` edge withheld. Output
/// order follows the input; each pair's subsample is seeded by (seed, index), so the
/// result does not depend on the thread count.
std::vector<path::LabeledPathSet> extract_labeled_paths(const kg::KnowledgeGraph& kg,
                                                        std::span<const io::LabeledPair> pairs,
                                                        kg::RelationId relation, const ExtractConfig& config);

/// Worker cap from APR_THREADS, defaulting to the hardware concurrency.
std::size_t thread_limit();

/// Pair list of a synthetic split resolved against `kg`.
std::vector<io::LabeledPair> resolve_pairs(const kg::KnowledgeGraph& kg, std::span<const synth::SynthPair> pairs);

/// Scores a test list: model probability, or 0.0 for pairs without paths.
std::vector<double> score_pairs(const model::ModelParams& params, std::span<const path::LabeledPathSet> sets,
                                const types::EntityTypes& entity_types);

/// Tiny model (d_r 4, d_t 6, d_h 8, scorer 5) on two random examples of two paths
/// each, lengths 1 to 3, over random type hierarchies of up to 3 levels.
struct GradCheckCase {
  model::TypeSelector selector = model::TypeSelector::attention;
  model::Pooling pooling = model::Pooling::attention;
  std::uint64_t seed = 1;
};

/// Ridders differences from an initial step of `eps`.
num::GradCheckReport model_gradient_check(const GradCheckCase& c, double eps = 1e-2);

}  // namespace apr::pipeline
