#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "apr/kgstore.hpp"
#include "apr/pathfind.hpp"

namespace apr::io {

struct LabeledPair {
  kg::EntityId source = 0;
  kg::EntityId target = 0;
  bool label = false;
};

/// Pairs file: "source TAB target TAB label" with label 1 or 0.
std::vector<LabeledPair> read_pairs(std::istream& in, const kg::KnowledgeGraph& kg);
void write_pairs(std::ostream& out, const kg::KnowledgeGraph& kg, std::span<const LabeledPair> pairs);

/// Paths file: per pair a "PAIR source target label" header, then one path per line as
/// "e_1 r_1 e_2 ... r_M e_{M+1}" in vocabulary tokens. Paths are validated on read.
void write_paths(std::ostream& out, const kg::KnowledgeGraph& kg,
                 std::span<const path::LabeledPathSet> sets);
std::vector<path::LabeledPathSet> read_paths(std::istream& in, const kg::KnowledgeGraph& kg);

/// Negatives file: "# seed=S restart=A relation=R" comment then triple lines.
void write_negatives(std::ostream& out, const kg::KnowledgeGraph& kg, std::span<const kg::Triple> negatives,
                     std::uint64_t seed, double restart);

/// Loads either a graph checkpoint or a raw triples file. Raw triples are augmented
/// with reverse relations; checkpoints are augmented when they were not already.
kg::KnowledgeGraph load_graph(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace apr::io
