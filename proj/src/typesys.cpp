#include "apr/typesys.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include "apr/detail/text.hpp"
#include "apr/error.hpp"

namespace apr::types {

TypeHierarchy::TypeHierarchy() { types_.intern(kUnknownType); }

void TypeHierarchy::add(std::string_view entity, std::span<const std::string> levels) {
  std::string key(entity);
  if (levels_.contains(key)) throw ContractError("duplicate type entry for entity '" + key + "'");
  std::vector<TypeId> ids;
  for (const auto& tok : levels) {
    if (tok.empty()) continue;
    const auto id = types_.intern(tok);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  if (ids.empty()) ids.push_back(kUnknownTypeId);
  max_height_ = std::max(max_height_, ids.size());
  entity_order_.push_back(key);
  levels_.emplace(std::move(key), std::move(ids));
}

std::span<const TypeId> TypeHierarchy::levels(std::string_view entity) const {
  if (auto it = levels_.find(std::string(entity)); it != levels_.end()) return it->second;
  return unknown_;
}

double TypeHierarchy::mean_height() const {
  if (levels_.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [_, ids] : levels_) total += static_cast<double>(ids.size());
  return total / static_cast<double>(levels_.size());
}

EntityTypes TypeHierarchy::bind(const kg::Vocabulary& entities) const {
  EntityTypes out(entities.size());
  for (std::size_t e = 0; e < entities.size(); ++e) {
    const auto lv = levels(entities.token(static_cast<std::uint32_t>(e)));
    out[e].assign(lv.begin(), lv.end());
  }
  return out;
}

bool TypeHierarchy::operator==(const TypeHierarchy& other) const {
  return types_ == other.types_ && entity_order_ == other.entity_order_ && levels_ == other.levels_;
}

TypeHierarchy ingest_type_hierarchies(std::istream& in) {
  TypeHierarchy h;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line, line_no)) {
    if (detail::is_blank(line)) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError("expected 'entity<TAB>type1|type2|...'", line_no);
    }
    std::vector<std::string> levels;
    for (auto tok : detail::split(fields[1], '|')) levels.emplace_back(tok);
    try {
      h.add(fields[0], levels);
    } catch (const ContractError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return h;
}

void write_type_hierarchies(std::ostream& out, const TypeHierarchy& h) {
  for (const auto& entity : h.entities()) {
    out << entity << '\t';
    bool first = true;
    for (const auto id : h.levels(entity)) {
      if (!first) out << '|';
      out << h.types().token(id);
      first = false;
    }
    out << '\n';
  }
}

std::vector<std::string> order_types_by_frequency(std::vector<std::string> types,
                                                  const std::map<std::string, std::size_t>& counts) {
  auto count_of = [&](const std::string& t) {
    const auto it = counts.find(t);
    if (it == counts.end()) throw LookupError("no corpus count for type '" + t + "'");
    return it->second;
  };
  for (const auto& t : types) count_of(t);
  std::sort(types.begin(), types.end(), [&](const std::string& a, const std::string& b) {
    const auto ca = count_of(a);
    const auto cb = count_of(b);
    return ca != cb ? ca < cb : a < b;
  });
  return types;
}

std::vector<std::string> truncate_levels(const std::vector<std::string>& ordered, std::size_t c_max) {
  if (c_max < 1) throw ContractError("c_max must be at least 1");
  if (ordered.size() <= c_max) return ordered;
  return {ordered.end() - static_cast<std::ptrdiff_t>(c_max), ordered.end()};
}

TypeHierarchy normalize_non_strict(const TypeHierarchy& raw, std::size_t c_max) {
  std::map<std::string, std::size_t> counts;
  for (const auto& entity : raw.entities()) {
    for (const auto id : raw.levels(entity)) ++counts[raw.types().token(id)];
  }
  TypeHierarchy out;
  for (const auto& entity : raw.entities()) {
    std::vector<std::string> names;
    for (const auto id : raw.levels(entity)) names.push_back(raw.types().token(id));
    out.add(entity, truncate_levels(order_types_by_frequency(std::move(names), counts), c_max));
  }
  return out;
}

PretrainedTypeEmbeddings load_pretrained_type_embeddings(std::istream& in,
                                                         const kg::Vocabulary& types,
                                                         std::size_t model_type_dim,
                                                         std::uint64_t seed) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no)) throw ParseError("missing 'count dim' header", 1);
  const auto header = detail::split_ws(line);
  if (header.size() != 2) throw ParseError("expected 'count dim' header", line_no);
  const auto count = detail::parse_number<std::size_t>(header[0], line_no);
  const auto dim = detail::parse_number<std::size_t>(header[1], line_no);
  if (dim == 0) throw ParseError("embedding dimension must be positive", line_no);

  PretrainedTypeEmbeddings out;
  out.file_dim = dim;
  out.needs_projection = dim != model_type_dim;
  const auto rows = static_cast<Eigen::Index>(types.size());
  out.table = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(dim));
  std::vector<bool> seen(types.size(), false);

  std::size_t read = 0;
  while (detail::next_line(in, line, line_no)) {
    if (detail::is_blank(line)) continue;
    const auto f = detail::split_ws(line);
    if (f.size() != dim + 1) {
      throw ParseError("expected token and " + std::to_string(dim) + " values", line_no);
    }
    ++read;
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      row[static_cast<Eigen::Index>(j)] = detail::parse_number<double>(f[j + 1], line_no);
    }
    if (!row.allFinite()) throw ParseError("non-finite embedding value", line_no);
    if (auto id = types.find(f[0])) {
      out.table.row(*id) = row;
      seen[*id] = true;
    }
  }
  if (read != count) {
    throw ParseError("header declares " + std::to_string(count) + " rows, found " +
                         std::to_string(read),
                     line_no);
  }

  const double bound = std::sqrt(6.0 / static_cast<double>(types.size() + dim));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (std::size_t id = 0; id < types.size(); ++id) {
    if (seen[id]) continue;
    out.missing.push_back(types.token(static_cast<std::uint32_t>(id)));
    for (Eigen::Index j = 0; j < out.table.cols(); ++j) {
      out.table(static_cast<Eigen::Index>(id), j) = uni(rng);
    }
  }
  return out;
}

}  // namespace apr::types
