#include "apr/num/param_store.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "apr/detail/text.hpp"
#include "apr/error.hpp"

namespace apr::num {

ParamId ParamStore::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  if (!init.allFinite()) throw NumericError("parameter '" + name + "' initialised with non-finite values");
  const ParamId id{static_cast<std::uint32_t>(entries_.size())};
  index_.emplace(name, id.index);
  Tensor grad = Tensor::Zero(init.rows(), init.cols());
  entries_.push_back({std::move(name), std::move(init), std::move(grad)});
  return id;
}

ParamId ParamStore::id(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return ParamId{it->second};
  throw LookupError("unknown parameter '" + std::string(name) + "'");
}

std::size_t ParamStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.grad.setZero();
}

bool ParamStore::all_finite() const {
  for (const auto& e : entries_) {
    if (!e.value.allFinite()) return false;
  }
  return true;
}

void ParamStore::assign_values(const ParamStore& other) {
  if (other.entries_.size() != entries_.size()) throw ContractError("parameter stores differ in size");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& src = other.entries_[i];
    auto& dst = entries_[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() ||
        src.value.cols() != dst.value.cols()) {
      throw ContractError("parameter '" + dst.name + "' does not match '" + src.name + "'");
    }
    dst.value = src.value;
  }
}

Tensor xavier_uniform(Index rows, Index cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> uni(-a, a);
  Tensor t(rows, cols);
  // Row-major fill so the draw order matches the checkpoint layout.
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) t(r, c) = uni(rng);
  }
  return t;
}

void write_tensors(std::ostream& out, const ParamStore& store) {
  char buf[32];
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    const ParamId id{i};
    const auto& v = store.value(id);
    out << store.name(id) << ' ' << v.rows() << ' ' << v.cols() << '\n';
    for (Index r = 0; r < v.rows(); ++r) {
      for (Index c = 0; c < v.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", v(r, c));
        if (c) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
}

void read_tensors(std::istream& in, ParamStore& store, std::size_t& line_no) {
  std::string line;
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    const ParamId id{i};
    if (!detail::next_line(in, line, line_no)) throw ParseError("truncated tensor list", line_no);
    const auto head = detail::split_ws(line);
    if (head.size() != 3) throw ParseError("expected 'name rows cols'", line_no);
    if (head[0] != store.name(id)) {
      throw ParseError("expected tensor '" + store.name(id) + "', found '" + std::string(head[0]) + "'",
                       line_no);
    }
    auto& v = store.value(id);
    const auto rows = detail::parse_number<Index>(head[1], line_no);
    const auto cols = detail::parse_number<Index>(head[2], line_no);
    if (rows != v.rows() || cols != v.cols()) {
      throw ParseError("shape mismatch for tensor '" + store.name(id) + "'", line_no);
    }
    for (Index r = 0; r < rows; ++r) {
      if (!detail::next_line(in, line, line_no)) throw ParseError("truncated tensor rows", line_no);
      const auto vals = detail::split_ws(line);
      if (static_cast<Index>(vals.size()) != cols) throw ParseError("wrong number of values in row", line_no);
      for (Index c = 0; c < cols; ++c) v(r, c) = detail::parse_number<double>(vals[static_cast<std::size_t>(c)], line_no);
    }
    if (!v.allFinite()) throw NumericError("tensor '" + store.name(id) + "' holds non-finite values");
  }
}

}  // namespace apr::num
