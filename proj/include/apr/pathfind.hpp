#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "apr/kgstore.hpp"

namespace apr::path {

using kg::EntityId;
using kg::RelationId;

/// Alternating entity/relation walk e_1 r_1 e_2 ... r_M e_{M+1}.
struct Path {
  std::vector<EntityId> entities;
  std::vector<RelationId> relations;

  std::size_t length() const noexcept { return relations.size(); }
  auto operator<=>(const Path&) const = default;
};

struct PathSet {
  EntityId source = 0;
  EntityId target = 0;
  std::vector<Path> paths;
};

/// A query pair with its label and extracted paths; the unit of training and evaluation.
struct LabeledPathSet {
  PathSet paths;
  bool label = false;
};

/// Undirected identity of an augmented edge: (a, r, b) and (b, reverse(r), a) map to
/// the same key. Paths never use the same key twice.
struct EdgeKey {
  EntityId from = 0;
  RelationId relation = 0;
  EntityId to = 0;
  auto operator<=>(const EdgeKey&) const = default;
};

EdgeKey edge_key(const kg::KnowledgeGraph& kg, EntityId from, RelationId relation, EntityId to);

struct ExtractOptions {
  std::size_t max_len = 3;
  /// When set, the base relation whose direct source-target edges are withheld.
  std::optional<RelationId> exclude_direct;
};

/// All edge-simple paths of length 1..max_len from source to target, found with a
/// bidirectional breadth-first expansion that joins at depth ceil(max_len / 2).
/// Requires an augmented graph. The result is sorted and duplicate free.
PathSet extract_paths(const kg::KnowledgeGraph& kg, EntityId source, EntityId target,
                      const ExtractOptions& options);

/// Uniform sample without replacement down to `n_max` paths; identity when the set
/// is already small enough. Surviving paths keep their relative order.
PathSet subsample_paths(const PathSet& paths, std::size_t n_max, std::uint64_t seed);

/// True when every step of `p` is an edge of `kg` and no edge key repeats.
bool is_valid_path(const kg::KnowledgeGraph& kg, const Path& p);

/// Reverses a path edge-wise, replacing each relation with its reverse.
Path reverse_path(const kg::KnowledgeGraph& kg, const Path& p);

}  // namespace apr::path
