#include "apr/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "apr/error.hpp"

namespace apr::synth {

void SynthSpec::validate() const {
  if (depth < 2) throw ContractError("synth: hierarchy depth must be at least 2");
  for (const double f : {ambiguous_fraction, positive_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ContractError("synth: fractions must lie in [0, 1]");
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ContractError("synth: train ratio must lie in (0, 1)");
  if (sources == 0 || middles < 2) throw ContractError("synth: need at least 1 source and 2 middles");
  if (targets < middles) throw ContractError("synth: each middle needs its own target, so targets >= middles");
  if (sources_per_middle == 0 || sources_per_middle > sources) {
    throw ContractError("synth: sources_per_middle must lie in [1, sources]");
  }
  const auto positives = static_cast<std::size_t>(std::lround(positive_fraction * static_cast<double>(middles)));
  if (positives == 0 || positives == middles) {
    throw ContractError("synth: positive fraction leaves one class without middles");
  }
}

namespace {

std::string numbered(std::string_view stem, std::size_t i) {
  std::string s = std::to_string(i);
  if (s.size() < 2) s.insert(0, "0");
  return std::string(stem) + "_" + s;
}

std::vector<std::string> middle_levels(std::size_t k, bool positive, const SynthSpec& spec) {
  std::vector<std::string> levels;
  levels.push_back(numbered("item", k));
  for (std::size_t level = 1; level < spec.depth; ++level) {
    if (level == spec.signal_level()) {
      levels.emplace_back(positive ? kSignalType : "class_B");
    } else if (level + 1 == spec.depth) {
      levels.emplace_back("thing");
    } else {
      levels.push_back(numbered("group" + std::to_string(level), k % 5));
    }
  }
  return levels;
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  std::vector<bool> positive(spec.middles, false);
  const auto n_pos = static_cast<std::size_t>(std::lround(spec.positive_fraction * static_cast<double>(spec.middles)));
  std::fill_n(positive.begin(), n_pos, true);
  std::shuffle(positive.begin(), positive.end(), rng);

  std::vector<bool> ambiguous(spec.middles, false);
  const auto n_amb = static_cast<std::size_t>(std::lround(spec.ambiguous_fraction * static_cast<double>(spec.middles)));
  std::fill_n(ambiguous.begin(), n_amb, true);
  std::shuffle(ambiguous.begin(), ambiguous.end(), rng);

  std::vector<std::size_t> target_of(spec.targets);
  std::iota(target_of.begin(), target_of.end(), 0);
  std::shuffle(target_of.begin(), target_of.end(), rng);

  SynthCorpus out;
  out.spec = spec;
  kg::Vocabulary entities;
  kg::Vocabulary relations;
  const auto owns = relations.intern("owns");
  const auto stored_at = relations.intern("stored_at");
  const auto stored_a = relations.intern("stored_at_a");
  const auto stored_b = relations.intern("stored_at_b");
  const auto reaches = relations.intern(kTargetRelation);

  for (std::size_t i = 0; i < spec.sources; ++i) {
    const auto name = numbered("src", i);
    entities.intern(name);
    const std::vector<std::string> levels{"agent", "thing"};
    out.hierarchy.add(name, levels);
  }
  for (std::size_t k = 0; k < spec.middles; ++k) {
    const auto name = numbered("mid", k);
    entities.intern(name);
    out.hierarchy.add(name, middle_levels(k, positive[k], spec));
  }
  for (std::size_t j = 0; j < spec.targets; ++j) {
    const auto name = numbered("tgt", j);
    entities.intern(name);
    const std::vector<std::string> levels{"place", "thing"};
    out.hierarchy.add(name, levels);
  }

  std::vector<kg::Triple> triples;
  std::vector<SynthPair> pos_pairs, neg_pairs;
  std::vector<std::size_t> src_ids(spec.sources);
  std::iota(src_ids.begin(), src_ids.end(), 0);
  for (std::size_t k = 0; k < spec.middles; ++k) {
    const auto mid = entities.at(numbered("mid", k));
    const auto tgt_name = numbered("tgt", target_of[k]);
    const auto tgt = entities.at(tgt_name);
    const auto rel = ambiguous[k] ? stored_at : (positive[k] ? stored_a : stored_b);
    triples.push_back({mid, rel, tgt});
    std::shuffle(src_ids.begin(), src_ids.end(), rng);
    std::vector<std::size_t> chosen(src_ids.begin(), src_ids.begin() + static_cast<std::ptrdiff_t>(spec.sources_per_middle));
    std::sort(chosen.begin(), chosen.end());
    for (const auto i : chosen) {
      const auto src_name = numbered("src", i);
      const auto src = entities.at(src_name);
      triples.push_back({src, owns, mid});
      if (positive[k]) triples.push_back({src, reaches, tgt});
      (positive[k] ? pos_pairs : neg_pairs).push_back({src_name, numbered("mid", k), tgt_name, positive[k]});
    }
  }
  out.graph = kg::KnowledgeGraph(std::move(entities), std::move(relations), triples);

  auto split_class = [&](std::vector<SynthPair>& pairs) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_ratio * static_cast<double>(pairs.size()) + 1e-9));
    for (std::size_t i = 0; i < pairs.size(); ++i) (i < n_train ? out.train : out.test).push_back(pairs[i]);
  };
  split_class(pos_pairs);
  split_class(neg_pairs);
  // Interleave the classes so tied scores do not rank positives first.
  std::shuffle(out.train.begin(), out.train.end(), rng);
  std::shuffle(out.test.begin(), out.test.end(), rng);
  if (out.test.empty() || out.train.empty()) throw ContractError("synth: too few pairs for a train/test split");
  return out;
}

bool planted_label(const types::TypeHierarchy& hierarchy, const SynthSpec& spec, const std::string& middle) {
  const auto levels = hierarchy.levels(middle);
  const auto level = spec.signal_level();
  if (level >= levels.size()) return false;
  return hierarchy.types().token(levels[level]) == kSignalType;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

void write_synth_pairs(const std::filesystem::path& p, const std::vector<SynthPair>& pairs) {
  auto out = open_out(p);
  for (const auto& s : pairs) out << s.source << '\t' << s.target << '\t' << (s.label ? 1 : 0) << '\n';
}

}  // namespace

void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "triples.tsv");
    kg::write_triples(out, corpus.graph);
  }
  {
    auto out = open_out(dir / "types.tsv");
    types::write_type_hierarchies(out, corpus.hierarchy);
  }
  write_synth_pairs(dir / "train_pairs.tsv", corpus.train);
  write_synth_pairs(dir / "test_pairs.tsv", corpus.test);
}

}  // namespace apr::synth
