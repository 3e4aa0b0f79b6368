#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apr/kgstore.hpp"
#include "apr/typesys.hpp"

namespace apr::synth {

inline constexpr std::string_view kTargetRelation = "reaches";
inline constexpr std::string_view kSignalType = "class_A";

/// A corpus of source -owns-> middle -stored_at-> target chains. The target relation
/// holds for a chain iff its middle entity carries class_A at the signal level of its
/// hierarchy. Ambiguous middles all use `stored_at`, so positives and negatives share
/// one relation sequence; the rest use stored_at_a / stored_at_b, which leaks the label.
struct SynthSpec {
  std::size_t sources = 10;
  std::size_t middles = 25;
  std::size_t targets = 25;
  std::size_t sources_per_middle = 10;
  std::size_t depth = 4;  // levels in a middle entity's hierarchy
  double ambiguous_fraction = 1.0;
  double positive_fraction = 0.5;  // share of middles typed class_A
  double train_ratio = 0.8;
  std::uint64_t seed = 7;

  /// Level of a middle's hierarchy that carries the class: depth / 2.
  std::size_t signal_level() const noexcept { return depth / 2; }
  void validate() const;
};

struct SynthPair {
  std::string source;
  std::string middle;
  std::string target;
  bool label = false;
};

struct SynthCorpus {
  SynthSpec spec;
  kg::KnowledgeGraph graph;  // base relations only
  types::TypeHierarchy hierarchy;
  std::vector<SynthPair> train;
  std::vector<SynthPair> test;
};

SynthCorpus generate(const SynthSpec& spec);

/// Re-derives a pair's label from its middle entity's hierarchy.
bool planted_label(const types::TypeHierarchy& hierarchy, const SynthSpec& spec, const std::string& middle);

/// Writes triples.tsv, types.tsv, train_pairs.tsv and test_pairs.tsv into `dir`.
void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace apr::synth
