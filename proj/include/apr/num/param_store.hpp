#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace apr::num {

using Scalar = double;
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

struct ParamId {
  std::uint32_t index = 0;
  bool operator==(const ParamId&) const = default;
};

/// Named learnable tensors with a gradient buffer of identical shape per tensor.
/// Iteration order is insertion order.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor init);

  /// Throws LookupError for an unknown name.
  ParamId id(std::string_view name) const;
  bool contains(std::string_view name) const { return index_.contains(std::string(name)); }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;

  const std::string& name(ParamId p) const { return entries_.at(p.index).name; }
  Tensor& value(ParamId p) { return entries_.at(p.index).value; }
  const Tensor& value(ParamId p) const { return entries_.at(p.index).value; }
  Tensor& grad(ParamId p) { return entries_.at(p.index).grad; }
  const Tensor& grad(ParamId p) const { return entries_.at(p.index).grad; }

  void zero_grad();
  bool all_finite() const;

  /// Copies values (not gradients) from a store with identical names and shapes.
  void assign_values(const ParamStore& other);

 private:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// uniform(-a, a) with a = sqrt(6 / (rows + cols)).
Tensor xavier_uniform(Index rows, Index cols, std::mt19937_64& rng);

/// Writes every tensor as a "name rows cols" line followed by its rows, each value
/// printed with 17 significant digits so a read restores it bit for bit.
void write_tensors(std::ostream& out, const ParamStore& store);

/// Reads tensors written by write_tensors into a store that already declares the same
/// names and shapes. `line_no` tracks the position for error messages.
void read_tensors(std::istream& in, ParamStore& store, std::size_t& line_no);

}  // namespace apr::num
