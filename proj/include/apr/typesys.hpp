#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "apr/kgstore.hpp"

namespace apr::types {

using TypeId = std::uint32_t;

/// Sentinel type for entities without hierarchy data; always type id 0.
inline constexpr std::string_view kUnknownType = "<UNKNOWN>";
inline constexpr TypeId kUnknownTypeId = 0;

/// Per-entity type id lists indexed by graph entity id, most specific first.
using EntityTypes = std::vector<std::vector<TypeId>>;

/// Type hierarchies keyed by entity token. Level 0 is the most specific type, the last
/// level the most abstract. Lists are non-empty and duplicate free.
class TypeHierarchy {
 public:
  TypeHierarchy();

  /// Adds an entity's ordered type list. Throws ContractError on a repeated entity.
  void add(std::string_view entity, std::span<const std::string> levels);

  const kg::Vocabulary& types() const noexcept { return types_; }
  std::size_t type_count() const noexcept { return types_.size(); }

  /// Levels of `entity`, or the UNKNOWN singleton when the entity has no entry.
  std::span<const TypeId> levels(std::string_view entity) const;
  bool contains(std::string_view entity) const { return levels_.contains(std::string(entity)); }

  /// Entities in insertion order.
  std::span<const std::string> entities() const noexcept { return entity_order_; }

  /// Tallest hierarchy over the recorded entities (C_max).
  std::size_t max_height() const noexcept { return max_height_; }
  double mean_height() const;

  /// Resolves every graph entity to its type ids.
  EntityTypes bind(const kg::Vocabulary& entities) const;

  bool operator==(const TypeHierarchy& other) const;

 private:
  kg::Vocabulary types_;
  std::vector<std::string> entity_order_;
  std::unordered_map<std::string, std::vector<TypeId>> levels_;
  std::vector<TypeId> unknown_{kUnknownTypeId};
  std::size_t max_height_ = 0;
};

/// Reads "entity TAB type1|type2|..." lines, most specific type first.
TypeHierarchy ingest_type_hierarchies(std::istream& in);
void write_type_hierarchies(std::ostream& out, const TypeHierarchy& h);

/// Ascending by corpus count (rarest first), ties broken lexicographically.
std::vector<std::string> order_types_by_frequency(std::vector<std::string> types,
                                                  const std::map<std::string, std::size_t>& counts);

/// Keeps the `c_max` most frequent types of an ascending list, still ascending.
std::vector<std::string> truncate_levels(const std::vector<std::string>& ordered, std::size_t c_max);

/// Re-orders every entity's types by how many entities carry each type, then truncates
/// to `c_max` levels. Used for type data that is not strictly hierarchical.
TypeHierarchy normalize_non_strict(const TypeHierarchy& raw, std::size_t c_max);

struct PretrainedTypeEmbeddings {
  Eigen::MatrixXd table;  // type_count x file_dim, rows follow the type vocabulary
  std::size_t file_dim = 0;
  std::vector<std::string> missing;  // types that fell back to random initialisation
  bool needs_projection = false;     // file_dim differs from the model's type dimension
};

/// Reads a "count dim" header then "token v1 ... v_dim" rows. Types absent from the
/// file get uniform(-a, a) rows drawn from `seed`.
PretrainedTypeEmbeddings load_pretrained_type_embeddings(std::istream& in,
                                                         const kg::Vocabulary& types,
                                                         std::size_t model_type_dim,
                                                         std::uint64_t seed);

}  // namespace apr::types
