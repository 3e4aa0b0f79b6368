#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "apr/kgstore.hpp"
#include "apr/model.hpp"
#include "apr/pathfind.hpp"
#include "apr/typesys.hpp"

namespace apr::pattern {

using types::TypeId;
using kg::RelationId;

/// <l_1, r_1, ..., r_M, l_{M+1}>: one type per entity of a path.
struct PathPattern {
  std::vector<TypeId> types;
  std::vector<RelationId> relations;
  auto operator<=>(const PathPattern&) const = default;
};

enum class PatternSelector { specific, abstract, attention };

/// Level 0 for specific, the last level for abstract. Attention needs a model; use
/// attention_patterns instead.
PathPattern extract_pattern(const path::Path& p, const types::EntityTypes& entity_types,
                            PatternSelector selector);

/// Index of the largest weight; ties go to the lower level.
std::size_t select_level(const Eigen::MatrixXd& weights);

/// Runs the model over each path and picks, per entity, the level with the largest
/// recorded type weight. The model must use types.
std::vector<PathPattern> attention_patterns(const model::ModelParams& params, const path::PathSet& paths,
                                            const types::EntityTypes& entity_types);

struct Occurrence {
  std::size_t positive = 0;
  std::size_t negative = 0;
  double ratio() const;
};

using PatternCounts = std::map<PathPattern, Occurrence>;

void add_occurrence(PatternCounts& counts, const PathPattern& pattern, bool label);

struct Discriminativeness {
  std::vector<double> ratios;  // one per distinct pattern, in pattern order
  double d = 0.0;              // population variance of the ratios
};

Discriminativeness discriminativeness(const PatternCounts& counts);

/// 1 - |test \ train| / |test|.
double generalizability(const std::set<PathPattern>& train, const std::set<PathPattern>& test);

std::set<PathPattern> pattern_set(const PatternCounts& counts);

/// Tokens joined with '|', alternating type and relation names.
std::string pattern_string(const PathPattern& p, const kg::Vocabulary& types, const kg::Vocabulary& relations);

struct PatternStats {
  PatternCounts train;
  PatternCounts test;
  double d = 0.0;
  double d_test = 0.0;
  double g = 0.0;
};

PatternStats summarize(PatternCounts train, PatternCounts test);

/// Per-pattern "pattern o_pos o_neg ratio" lines for the train counts, then a footer.
void write_stats(std::ostream& out, const PatternStats& stats, const kg::Vocabulary& types,
                 const kg::Vocabulary& relations);

}  // namespace apr::pattern
