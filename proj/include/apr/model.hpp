#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apr/num/lstm.hpp"
#include "apr/num/param_store.hpp"
#include "apr/num/tape.hpp"
#include "apr/pathfind.hpp"
#include "apr/typesys.hpp"

namespace apr::model {

using num::Index;
using num::ParamId;
using num::Tape;
using num::Tensor;
using num::Var;

/// How each entity's type is chosen from its hierarchy.
enum class TypeSelector { attention, specific, abstract, none };
/// How per-path representations are combined into one prediction.
enum class Pooling { attention, logsumexp, average, max, topk };

std::string_view to_string(TypeSelector s);
std::string_view to_string(Pooling p);
/// Throw ContractError for unknown names.
TypeSelector parse_type_selector(std::string_view s);
Pooling parse_pooling(std::string_view s);

struct ModelConfig {
  Index relation_dim = 50;
  Index type_dim = 150;
  Index hidden_dim = 200;
  Index scorer_dim = 100;
  TypeSelector selector = TypeSelector::attention;
  Pooling pooling = Pooling::attention;
  Index top_k = 3;
  /// Width of a pretrained type table. Zero, or equal to type_dim, means the table is
  /// learned at type_dim directly; anything else adds a learned projection.
  Index pretrained_dim = 0;

  bool uses_types() const noexcept { return selector != TypeSelector::none; }
  bool projects_types() const noexcept { return pretrained_dim != 0 && pretrained_dim != type_dim; }
  Index type_table_dim() const noexcept { return projects_types() ? pretrained_dim : type_dim; }
  /// Length of a path representation v_rho, and of the pooling context u.
  Index path_dim() const noexcept { return uses_types() ? 2 * hidden_dim : hidden_dim; }
  void validate() const;
};

/// Additive attention scorer: score(x, ctx) = v . tanh(W_in x + W_ctx ctx + b).
struct Scorer {
  ParamId w_in;
  ParamId w_ctx;
  ParamId b;
  ParamId v;  // 1 x scorer_dim
};

/// Every learnable tensor of one per-relation model, held in a single ParamStore.
class ModelParams {
 public:
  ModelParams(const ModelConfig& config, std::size_t relation_count, std::size_t type_count,
              std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t relation_count() const noexcept { return relation_count_; }
  std::size_t type_count() const noexcept { return type_count_; }

  num::ParamStore& store() noexcept { return store_; }
  const num::ParamStore& store() const noexcept { return store_; }

  /// Overwrites the type table, e.g. with pretrained vectors. Shape must match.
  void set_type_table(const Tensor& table);

  ParamId relation_table;
  num::LstmWeights relation_lstm;
  // Present only when the configuration uses types.
  ParamId type_table;
  std::optional<ParamId> type_projection;
  num::LstmWeights type_lstm;
  ParamId init_c_w, init_c_b, init_h_w, init_h_b;
  std::optional<Scorer> type_scorer;  // attention selector only
  // Attention pooling.
  std::optional<Scorer> path_scorer;
  std::optional<ParamId> context;  // u
  ParamId pred_w, pred_b;

 private:
  ModelConfig config_;
  std::size_t relation_count_;
  std::size_t type_count_;
  num::ParamStore store_;
};

struct TypeAttention {
  Var weights;         // C x 1 probability vector over hierarchy levels
  Var context_vector;  // a_hat, type_dim x 1
};

struct InitialState {
  Var c0;
  Var h0;
};

struct TypeEncoding {
  Var encoding;              // v_epsilon, hidden_dim x 1
  std::vector<Var> weights;  // one level-weight vector per entity of the path
};

struct PathEncoding {
  Var relations;  // v_pi
  std::optional<TypeEncoding> types;
  Var representation;  // v_rho
};

struct PooledPaths {
  Var pooled;   // p_hat
  Var weights;  // N x 1
};

struct Forward {
  Var probability;
  std::vector<PathEncoding> paths;
  std::optional<Var> path_weights;  // attention pooling only
};

/// Runs the relation LSTM over the path's relation embeddings from a zero state and
/// returns the last hidden state.
Var encode_relations(Tape& t, const ModelParams& params, const path::Path& p);

/// Type vector of one type id, projected when the table is pretrained.
Var type_vector(Tape& t, const ModelParams& params, types::TypeId type);

/// Scores each level against `context`, normalises with softmax and returns the
/// weighted sum of the level vectors.
TypeAttention type_attention(Tape& t, const ModelParams& params, std::span<const Var> type_vectors,
                             Var context);

/// c0 = tanh(W_c v_pi + b_c), h0 = tanh(W_h v_pi + b_h).
InitialState init_type_context(Tape& t, const ModelParams& params, Var relation_encoding);

/// Runs the type LSTM over the path's entities, choosing each entity's type vector
/// with the configured selector. The context for attention is the previous hidden
/// state, starting from init_type_context.
TypeEncoding encode_types(Tape& t, const ModelParams& params, const path::Path& p,
                          const types::EntityTypes& entity_types, Var relation_encoding);

/// [v_pi; v_epsilon], or v_pi alone when types are disabled.
Var path_representation(Tape& t, Var relation_encoding, std::optional<Var> type_encoding);

PathEncoding encode_path(Tape& t, const ModelParams& params, const path::Path& p,
                         const types::EntityTypes& entity_types);

/// Attention over path representations with the trainable relation context u.
PooledPaths pool_attention(Tape& t, const ModelParams& params, std::span<const Var> representations);

/// f_pool over per-path scores (N x 1): max, mean, mean of the top k, or logsumexp.
Var reduce_scores(Tape& t, Var scores, Pooling pooling, Index top_k);
/// sigmoid(reduce_scores(...)).
Var pool_scalar(Tape& t, Var scores, Pooling pooling, Index top_k);

/// sigmoid(f_pred(p_hat)).
Var predict(Tape& t, const ModelParams& params, Var pooled);

/// Binary cross-entropy summed over examples.
Var loss(Tape& t, std::span<const Var> probabilities, std::span<const bool> labels);

/// Full forward pass for one entity pair. `paths` must be non-empty.
Forward model_forward(Tape& t, const ModelParams& params, const path::PathSet& paths,
                      const types::EntityTypes& entity_types);

/// Probability for one pair without recording gradients; 0.0 when there are no paths.
double predict_probability(const ModelParams& params, const path::PathSet& paths,
                           const types::EntityTypes& entity_types);

/// "APRMODEL 1", a key=value configuration block, then the tensors.
void write_model(std::ostream& out, const ModelParams& params, std::string_view relation);

struct LoadedModel {
  ModelParams params;
  std::string relation;
};
LoadedModel read_model(std::istream& in);

}  // namespace apr::model
