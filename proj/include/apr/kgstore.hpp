#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace apr::kg {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

// Suffix appended to a base relation token to name its reverse.
inline constexpr std::string_view kReverseSuffix = "^-1";

/// Bidirectional token <-> dense id map. Ids are assigned in first-seen order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view token);
  std::optional<std::uint32_t> find(std::string_view token) const;
  /// Throws LookupError when the token is unknown.
  std::uint32_t at(std::string_view token) const;
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::span<const std::string> tokens() const noexcept { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

struct Triple {
  EntityId source = 0;
  RelationId relation = 0;
  EntityId target = 0;
  auto operator<=>(const Triple&) const = default;
};

struct Edge {
  RelationId relation = 0;
  EntityId target = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Directed multigraph over an entity vocabulary. Immutable once built; reverse
/// augmentation returns a new graph.
///
/// Base relations occupy ids [0, R). After augmentation reverse relations occupy
/// [R, 2R) and reverse(j) = j + R for j < R, j - R otherwise.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Builds a graph from id triples. Duplicate triples collapse to a single edge.
  KnowledgeGraph(Vocabulary entities, Vocabulary relations, std::span<const Triple> triples);

  const Vocabulary& entities() const noexcept { return entities_; }
  const Vocabulary& relations() const noexcept { return relations_; }

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  std::size_t base_relation_count() const noexcept { return base_relations_; }
  bool augmented() const noexcept { return augmented_; }

  /// Requires an augmented graph.
  RelationId reverse(RelationId r) const;

  /// Out-edges of `e`, sorted by (relation, target) and duplicate free.
  std::span<const Edge> neighbors(EntityId e) const { return adjacency_.at(e); }
  bool has_edge(EntityId source, RelationId relation, EntityId target) const;
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Edges whose relation is a base relation, in (source, relation, target) order.
  std::vector<Triple> base_triples() const;

  /// Every (source, target) pair linked by base relation `r`, in adjacency order.
  std::vector<std::pair<EntityId, EntityId>> positives(RelationId r) const;

  /// Fails with ContractError if the graph is already augmented.
  KnowledgeGraph with_reverse_relations() const;

  bool operator==(const KnowledgeGraph& other) const;

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<std::vector<Edge>> adjacency_;
  std::size_t base_relations_ = 0;
  std::size_t edge_count_ = 0;
  bool augmented_ = false;
};

/// Reads "source TAB relation TAB target" lines. Blank lines and lines starting with
/// '#' are skipped.
/// Malformed lines raise ParseError with the 1-based line number.
KnowledgeGraph ingest_triples(std::istream& in);

/// Free-function form of KnowledgeGraph::with_reverse_relations.
KnowledgeGraph add_reverse_relations(const KnowledgeGraph& kg);

/// Graph checkpoint ("APRGRAPH 1"): vocabularies then base edge list. Byte-stable.
void write_graph(std::ostream& out, const KnowledgeGraph& kg);
KnowledgeGraph read_graph(std::istream& in);

/// Writes base triples as "source TAB relation TAB target" lines.
void write_triples(std::ostream& out, const KnowledgeGraph& kg);

struct RelationSplit {
  RelationId relation = 0;
  std::vector<std::pair<EntityId, EntityId>> train;
  std::vector<std::pair<EntityId, EntityId>> test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle of the positives of `relation`; floor(ratio * n) go to train.
RelationSplit split_positives(const KnowledgeGraph& kg, RelationId relation, double ratio,
                              std::uint64_t seed);

}  // namespace apr::kg
