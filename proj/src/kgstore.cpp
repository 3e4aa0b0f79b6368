#include "apr/kgstore.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "apr/detail/text.hpp"
#include "apr/error.hpp"

namespace apr::kg {

std::uint32_t Vocabulary::intern(std::string_view token) {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  if (auto it = ids_.find(std::string(token)); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::uint32_t Vocabulary::at(std::string_view token) const {
  if (auto id = find(token)) return *id;
  throw LookupError("unknown token '" + std::string(token) + "'");
}

KnowledgeGraph::KnowledgeGraph(Vocabulary entities, Vocabulary relations,
                               std::span<const Triple> triples)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      adjacency_(entities_.size()),
      base_relations_(relations_.size()) {
  for (const auto& t : triples) {
    if (t.source >= entities_.size() || t.target >= entities_.size() ||
        t.relation >= relations_.size()) {
      throw LookupError("triple references an id outside the vocabularies");
    }
    adjacency_[t.source].push_back({t.relation, t.target});
  }
  for (auto& edges : adjacency_) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edge_count_ += edges.size();
  }
}

RelationId KnowledgeGraph::reverse(RelationId r) const {
  if (!augmented_) throw ContractError("reverse() requires an augmented graph");
  if (r >= relation_count()) throw LookupError("relation id out of range");
  const auto base = static_cast<RelationId>(base_relations_);
  return r < base ? r + base : r - base;
}

bool KnowledgeGraph::has_edge(EntityId source, RelationId relation, EntityId target) const {
  if (source >= adjacency_.size()) return false;
  const auto& edges = adjacency_[source];
  return std::binary_search(edges.begin(), edges.end(), Edge{relation, target});
}

std::vector<Triple> KnowledgeGraph::base_triples() const {
  std::vector<Triple> out;
  for (EntityId s = 0; s < adjacency_.size(); ++s) {
    for (const auto& e : adjacency_[s]) {
      if (e.relation < base_relations_) out.push_back({s, e.relation, e.target});
    }
  }
  return out;
}

std::vector<std::pair<EntityId, EntityId>> KnowledgeGraph::positives(RelationId r) const {
  std::vector<std::pair<EntityId, EntityId>> out;
  for (EntityId s = 0; s < adjacency_.size(); ++s) {
    const auto& edges = adjacency_[s];
    auto it = std::lower_bound(edges.begin(), edges.end(), Edge{r, 0});
    for (; it != edges.end() && it->relation == r; ++it) out.emplace_back(s, it->target);
  }
  return out;
}

KnowledgeGraph KnowledgeGraph::with_reverse_relations() const {
  if (augmented_) throw ContractError("graph already carries reverse relations");
  KnowledgeGraph out;
  out.entities_ = entities_;
  out.relations_ = relations_;
  for (std::size_t r = 0; r < base_relations_; ++r) {
    const auto name = relations_.token(static_cast<std::uint32_t>(r)) + std::string(kReverseSuffix);
    if (out.relations_.find(name)) {
      throw ContractError("reverse relation name '" + name + "' collides with a base relation");
    }
    out.relations_.intern(name);
  }
  out.base_relations_ = base_relations_;
  out.augmented_ = true;
  out.adjacency_ = adjacency_;
  const auto base = static_cast<RelationId>(base_relations_);
  for (EntityId s = 0; s < adjacency_.size(); ++s) {
    for (const auto& e : adjacency_[s]) out.adjacency_[e.target].push_back({e.relation + base, s});
  }
  for (auto& edges : out.adjacency_) {
    std::sort(edges.begin(), edges.end());
    out.edge_count_ += edges.size();
  }
  return out;
}

bool KnowledgeGraph::operator==(const KnowledgeGraph& other) const {
  return entities_ == other.entities_ && relations_ == other.relations_ &&
         adjacency_ == other.adjacency_ && base_relations_ == other.base_relations_ &&
         augmented_ == other.augmented_;
}

KnowledgeGraph ingest_triples(std::istream& in) {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line, line_no)) {
    if (detail::is_blank(line) || line.front() == '#') continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError("expected 'source<TAB>relation<TAB>target', got " +
                           std::to_string(fields.size()) + " field(s)",
                       line_no);
    }
    const auto s = entities.intern(fields[0]);
    const auto r = relations.intern(fields[1]);
    const auto t = entities.intern(fields[2]);
    triples.push_back({s, r, t});
  }
  return KnowledgeGraph(std::move(entities), std::move(relations), triples);
}

KnowledgeGraph add_reverse_relations(const KnowledgeGraph& kg) { return kg.with_reverse_relations(); }

void write_graph(std::ostream& out, const KnowledgeGraph& kg) {
  out << "APRGRAPH 1\n";
  out << "entities " << kg.entity_count() << '\n';
  for (const auto& tok : kg.entities().tokens()) out << tok << '\n';
  out << "relations " << kg.base_relation_count() << '\n';
  for (std::size_t r = 0; r < kg.base_relation_count(); ++r) {
    out << kg.relations().token(static_cast<std::uint32_t>(r)) << '\n';
  }
  out << "augmented " << (kg.augmented() ? 1 : 0) << '\n';
  const auto triples = kg.base_triples();
  out << "edges " << triples.size() << '\n';
  for (const auto& t : triples) out << t.source << ' ' << t.relation << ' ' << t.target << '\n';
}

namespace {

std::size_t read_count(std::istream& in, std::string& line, std::size_t& line_no,
                       std::string_view key) {
  if (!detail::next_line(in, line, line_no)) throw ParseError("unexpected end of graph file", line_no);
  const auto fields = detail::split(line, ' ');
  if (fields.size() != 2 || fields[0] != key) {
    throw ParseError("expected '" + std::string(key) + " <count>'", line_no);
  }
  return detail::parse_number<std::size_t>(fields[1], line_no);
}

}  // namespace

KnowledgeGraph read_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no) || line != "APRGRAPH 1") {
    throw ParseError("missing 'APRGRAPH 1' header", line_no);
  }
  Vocabulary entities;
  Vocabulary relations;
  const auto n_entities = read_count(in, line, line_no, "entities");
  for (std::size_t i = 0; i < n_entities; ++i) {
    if (!detail::next_line(in, line, line_no)) throw ParseError("truncated entity list", line_no);
    if (entities.intern(line) != i) throw ParseError("duplicate entity token", line_no);
  }
  const auto n_relations = read_count(in, line, line_no, "relations");
  for (std::size_t i = 0; i < n_relations; ++i) {
    if (!detail::next_line(in, line, line_no)) throw ParseError("truncated relation list", line_no);
    if (relations.intern(line) != i) throw ParseError("duplicate relation token", line_no);
  }
  const auto augmented = read_count(in, line, line_no, "augmented");
  const auto n_edges = read_count(in, line, line_no, "edges");
  std::vector<Triple> triples;
  triples.reserve(n_edges);
  for (std::size_t i = 0; i < n_edges; ++i) {
    if (!detail::next_line(in, line, line_no)) throw ParseError("truncated edge list", line_no);
    const auto f = detail::split(line, ' ');
    if (f.size() != 3) throw ParseError("expected 'source relation target' ids", line_no);
    triples.push_back({detail::parse_number<EntityId>(f[0], line_no),
                       detail::parse_number<RelationId>(f[1], line_no),
                       detail::parse_number<EntityId>(f[2], line_no)});
  }
  KnowledgeGraph kg(std::move(entities), std::move(relations), triples);
  return augmented ? kg.with_reverse_relations() : kg;
}

void write_triples(std::ostream& out, const KnowledgeGraph& kg) {
  for (const auto& t : kg.base_triples()) {
    out << kg.entities().token(t.source) << '\t' << kg.relations().token(t.relation) << '\t'
        << kg.entities().token(t.target) << '\n';
  }
}

RelationSplit split_positives(const KnowledgeGraph& kg, RelationId relation, double ratio,
                              std::uint64_t seed) {
  if (relation >= kg.base_relation_count()) {
    throw LookupError("relation id " + std::to_string(relation) + " is not a base relation");
  }
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("split ratio must lie in (0, 1)");
  auto pairs = kg.positives(relation);
  if (pairs.size() < 2) {
    throw ContractError("relation '" + kg.relations().token(relation) +
                        "' needs at least 2 positives to split");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  // Tolerance keeps products like 0.29 * 100 from flooring to 28.
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(pairs.size()) + 1e-9));
  RelationSplit split;
  split.relation = relation;
  split.seed = seed;
  split.train.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_train), pairs.end());
  return split;
}

}  // namespace apr::kg
