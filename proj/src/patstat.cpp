#include "apr/patstat.hpp"

#include <algorithm>
#include <ostream>

#include "apr/error.hpp"

namespace apr::pattern {

PathPattern extract_pattern(const path::Path& p, const types::EntityTypes& entity_types,
                            PatternSelector selector) {
  if (selector == PatternSelector::attention) {
    throw ContractError("attention patterns need a trained model");
  }
  PathPattern out;
  out.relations = p.relations;
  for (const auto e : p.entities) {
    if (e >= entity_types.size() || entity_types[e].empty()) {
      throw LookupError("entity has no type hierarchy entry");
    }
    const auto& levels = entity_types[e];
    out.types.push_back(selector == PatternSelector::specific ? levels.front() : levels.back());
  }
  return out;
}

std::size_t select_level(const Eigen::MatrixXd& weights) {
  if (weights.size() == 0) throw ContractError("select_level: empty weight vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < weights.size(); ++i) {
    if (weights(i) > weights(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::vector<PathPattern> attention_patterns(const model::ModelParams& params, const path::PathSet& paths,
                                            const types::EntityTypes& entity_types) {
  if (!params.config().uses_types()) throw ContractError("attention patterns need a type-aware model");
  std::vector<PathPattern> out;
  for (const auto& p : paths.paths) {
    num::Tape t(params.store());
    const auto enc = model::encode_path(t, params, p, entity_types);
    PathPattern pat;
    pat.relations = p.relations;
    for (std::size_t i = 0; i < p.entities.size(); ++i) {
      const auto level = select_level(t.value(enc.types->weights[i]));
      pat.types.push_back(entity_types[p.entities[i]][level]);
    }
    out.push_back(std::move(pat));
  }
  return out;
}

double Occurrence::ratio() const {
  const auto total = positive + negative;
  if (total == 0) throw ContractError("pattern without occurrences");
  return static_cast<double>(positive) / static_cast<double>(total);
}

void add_occurrence(PatternCounts& counts, const PathPattern& pattern, bool label) {
  auto& c = counts[pattern];
  ++(label ? c.positive : c.negative);
}

Discriminativeness discriminativeness(const PatternCounts& counts) {
  if (counts.empty()) throw ContractError("discriminativeness needs at least one pattern");
  Discriminativeness out;
  double mean = 0.0;
  for (const auto& [pat, occ] : counts) {
    out.ratios.push_back(occ.ratio());
    mean += out.ratios.back();
  }
  mean /= static_cast<double>(out.ratios.size());
  for (const double r : out.ratios) out.d += (r - mean) * (r - mean);
  out.d /= static_cast<double>(out.ratios.size());
  return out;
}

double generalizability(const std::set<PathPattern>& train, const std::set<PathPattern>& test) {
  if (test.empty()) throw ContractError("generalizability needs a non-empty test pattern set");
  const auto unseen = std::count_if(test.begin(), test.end(), [&](const auto& p) { return !train.contains(p); });
  return 1.0 - static_cast<double>(unseen) / static_cast<double>(test.size());
}

std::set<PathPattern> pattern_set(const PatternCounts& counts) {
  std::set<PathPattern> out;
  for (const auto& [pat, occ] : counts) out.insert(pat);
  return out;
}

std::string pattern_string(const PathPattern& p, const kg::Vocabulary& types, const kg::Vocabulary& relations) {
  std::string out = types.token(p.types.at(0));
  for (std::size_t i = 0; i < p.relations.size(); ++i) {
    out += '|';
    out += relations.token(p.relations[i]);
    out += '|';
    out += types.token(p.types.at(i + 1));
  }
  return out;
}

PatternStats summarize(PatternCounts train, PatternCounts test) {
  PatternStats s;
  s.train = std::move(train);
  s.test = std::move(test);
  if (!s.train.empty()) s.d = discriminativeness(s.train).d;
  if (!s.test.empty()) {
    s.d_test = discriminativeness(s.test).d;
    s.g = generalizability(pattern_set(s.train), pattern_set(s.test));
  }
  return s;
}

void write_stats(std::ostream& out, const PatternStats& stats, const kg::Vocabulary& types,
                 const kg::Vocabulary& relations) {
  const auto precision = out.precision();
  out.precision(17);
  for (const auto& [pat, occ] : stats.train) {
    out << pattern_string(pat, types, relations) << ' ' << occ.positive << ' ' << occ.negative << ' '
        << occ.ratio() << '\n';
  }
  out << "d=" << stats.d << " d_test=" << stats.d_test << " g=" << stats.g
      << " n_train_patterns=" << stats.train.size() << " n_test_patterns=" << stats.test.size() << '\n';
  out.precision(precision);
}

}  // namespace apr::pattern
