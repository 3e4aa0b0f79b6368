#include "apr/model.hpp"

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include "apr/detail/text.hpp"
#include "apr/error.hpp"
#include "apr/num/ops.hpp"

namespace apr::model {

std::string_view to_string(TypeSelector s) {
  switch (s) {
    case TypeSelector::attention: return "attention";
    case TypeSelector::specific: return "specific";
    case TypeSelector::abstract: return "abstract";
    case TypeSelector::none: return "none";
  }
  return "?";
}

std::string_view to_string(Pooling p) {
  switch (p) {
    case Pooling::attention: return "attention";
    case Pooling::logsumexp: return "logsumexp";
    case Pooling::average: return "average";
    case Pooling::max: return "max";
    case Pooling::topk: return "topk";
  }
  return "?";
}

TypeSelector parse_type_selector(std::string_view s) {
  for (auto v : {TypeSelector::attention, TypeSelector::specific, TypeSelector::abstract, TypeSelector::none}) {
    if (to_string(v) == s) return v;
  }
  throw ContractError("unknown type selector '" + std::string(s) + "'");
}

Pooling parse_pooling(std::string_view s) {
  for (auto v : {Pooling::attention, Pooling::logsumexp, Pooling::average, Pooling::max, Pooling::topk}) {
    if (to_string(v) == s) return v;
  }
  throw ContractError("unknown pooling mode '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (relation_dim < 1 || type_dim < 1 || hidden_dim < 1 || scorer_dim < 1) {
    throw ContractError("model dimensions must be at least 1");
  }
  if (pooling == Pooling::topk && top_k < 1) throw ContractError("top-k pooling needs k >= 1");
  if (pretrained_dim < 0) throw ContractError("pretrained dimension cannot be negative");
}

namespace {

Scorer add_scorer(num::ParamStore& store, const std::string& prefix, Index in_dim, Index ctx_dim,
                  Index hidden, std::mt19937_64& rng) {
  Scorer s;
  s.w_in = store.add(prefix + ".w_in", num::xavier_uniform(hidden, in_dim, rng));
  s.w_ctx = store.add(prefix + ".w_ctx", num::xavier_uniform(hidden, ctx_dim, rng));
  s.b = store.add(prefix + ".b", Tensor::Zero(hidden, 1));
  s.v = store.add(prefix + ".v", num::xavier_uniform(1, hidden, rng));
  return s;
}

// Softmax attention of `items` (as columns) against `context`; returns weights and the
// weighted sum.
std::pair<Var, Var> attend(Tape& t, const Scorer& s, std::span<const Var> items, Var context) {
  const Var stacked = num::hstack(t, items);
  const Var ctx = num::affine(t, t.param(s.w_ctx), context, t.param(s.b));
  const Var hidden = num::tanh(t, num::add_cols(t, num::matmul(t, t.param(s.w_in), stacked), ctx));
  const Var scores = num::transpose(t, num::matmul(t, t.param(s.v), hidden));
  const Var weights = num::softmax(t, scores);
  return {weights, num::matmul(t, stacked, weights)};
}

Var zeros(Tape& t, Index n) { return t.constant(Tensor::Zero(n, 1)); }

Var one_hot(Tape& t, Index n, Index at) {
  Tensor v = Tensor::Zero(n, 1);
  v(at, 0) = 1.0;
  return t.constant(std::move(v));
}

}  // namespace

ModelParams::ModelParams(const ModelConfig& config, std::size_t relation_count, std::size_t type_count,
                         std::uint64_t seed)
    : config_(config), relation_count_(relation_count), type_count_(type_count) {
  config_.validate();
  if (relation_count < 1) throw ContractError("model needs at least one relation");
  std::mt19937_64 rng(seed);
  const auto& c = config_;
  const Index H = c.hidden_dim;
  const Index D = c.path_dim();

  relation_table = store_.add("relation.embedding",
                              num::xavier_uniform(static_cast<Index>(relation_count), c.relation_dim, rng));
  relation_lstm = num::add_lstm(store_, "relation_lstm", c.relation_dim, H, rng);

  if (c.uses_types()) {
    if (type_count < 1) throw ContractError("model needs at least one type");
    type_table = store_.add("type.embedding",
                            num::xavier_uniform(static_cast<Index>(type_count), c.type_table_dim(), rng));
    if (c.projects_types()) {
      type_projection = store_.add("type.projection", num::xavier_uniform(c.type_dim, c.pretrained_dim, rng));
    }
    type_lstm = num::add_lstm(store_, "type_lstm", c.type_dim, H, rng);
    init_c_w = store_.add("init_c.w", num::xavier_uniform(H, H, rng));
    init_c_b = store_.add("init_c.b", Tensor::Zero(H, 1));
    init_h_w = store_.add("init_h.w", num::xavier_uniform(H, H, rng));
    init_h_b = store_.add("init_h.b", Tensor::Zero(H, 1));
    if (c.selector == TypeSelector::attention) {
      type_scorer = add_scorer(store_, "type_att", c.type_dim, H, c.scorer_dim, rng);
    }
  }

  if (c.pooling == Pooling::attention) {
    path_scorer = add_scorer(store_, "path_att", D, D, c.scorer_dim, rng);
    context = store_.add("path_att.u", num::xavier_uniform(D, 1, rng));
    pred_w = store_.add("pred.w", num::xavier_uniform(1, D, rng));
    pred_b = store_.add("pred.b", Tensor::Zero(1, 1));
  } else {
    pred_w = store_.add("pred_path.w", num::xavier_uniform(1, D, rng));
    pred_b = store_.add("pred_path.b", Tensor::Zero(1, 1));
  }
}

void ModelParams::set_type_table(const Tensor& table) {
  if (!config_.uses_types()) throw ContractError("model has no type table");
  auto& dst = store_.value(type_table);
  if (table.rows() != dst.rows() || table.cols() != dst.cols()) {
    throw ContractError("type table shape mismatch");
  }
  if (!table.allFinite()) throw NumericError("type table holds non-finite values");
  dst = table;
}

Var encode_relations(Tape& t, const ModelParams& params, const path::Path& p) {
  if (p.relations.empty()) throw ContractError("encode_relations: path has no relations");
  const Index H = params.config().hidden_dim;
  num::LstmState s{zeros(t, H), zeros(t, H)};
  for (const auto r : p.relations) {
    if (r >= params.relation_count()) throw LookupError("relation id outside the model's table");
    s = num::lstm_step(t, params.relation_lstm, t.row(params.relation_table, r), s.h, s.c);
  }
  return s.h;
}

Var type_vector(Tape& t, const ModelParams& params, types::TypeId type) {
  if (type >= params.type_count()) throw LookupError("type id outside the model's table");
  const Var raw = t.row(params.type_table, type);
  if (!params.type_projection) return raw;
  return num::matmul(t, t.param(*params.type_projection), raw);
}

TypeAttention type_attention(Tape& t, const ModelParams& params, std::span<const Var> type_vectors,
                             Var context) {
  if (type_vectors.empty()) throw ContractError("type_attention: empty hierarchy");
  if (!params.type_scorer) throw ContractError("type_attention: model has no type scorer");
  const auto [weights, combined] = attend(t, *params.type_scorer, type_vectors, context);
  return {weights, combined};
}

InitialState init_type_context(Tape& t, const ModelParams& params, Var relation_encoding) {
  const Var c0 = num::tanh(t, num::affine(t, t.param(params.init_c_w), relation_encoding, t.param(params.init_c_b)));
  const Var h0 = num::tanh(t, num::affine(t, t.param(params.init_h_w), relation_encoding, t.param(params.init_h_b)));
  return {c0, h0};
}

TypeEncoding encode_types(Tape& t, const ModelParams& params, const path::Path& p,
                          const types::EntityTypes& entity_types, Var relation_encoding) {
  const auto selector = params.config().selector;
  if (selector == TypeSelector::none) throw ContractError("encode_types: type encoder disabled");
  const auto init = init_type_context(t, params, relation_encoding);
  num::LstmState s{init.h0, init.c0};
  TypeEncoding out;
  for (const auto e : p.entities) {
    if (e >= entity_types.size()) throw LookupError("entity has no type hierarchy entry");
    const auto& levels = entity_types[e];
    if (levels.empty()) throw LookupError("entity has an empty type hierarchy");
    const auto C = static_cast<Index>(levels.size());
    Var chosen;
    switch (selector) {
      case TypeSelector::attention: {
        std::vector<Var> vecs;
        vecs.reserve(levels.size());
        for (const auto id : levels) vecs.push_back(type_vector(t, params, id));
        const auto att = type_attention(t, params, vecs, s.h);
        out.weights.push_back(att.weights);
        chosen = att.context_vector;
        break;
      }
      case TypeSelector::specific:
        out.weights.push_back(one_hot(t, C, 0));
        chosen = type_vector(t, params, levels.front());
        break;
      case TypeSelector::abstract:
        out.weights.push_back(one_hot(t, C, C - 1));
        chosen = type_vector(t, params, levels.back());
        break;
      case TypeSelector::none: break;
    }
    s = num::lstm_step(t, params.type_lstm, chosen, s.h, s.c);
  }
  out.encoding = s.h;
  return out;
}

Var path_representation(Tape& t, Var relation_encoding, std::optional<Var> type_encoding) {
  if (!type_encoding) return relation_encoding;
  const std::array<Var, 2> parts{relation_encoding, *type_encoding};
  return num::concat(t, parts);
}

PathEncoding encode_path(Tape& t, const ModelParams& params, const path::Path& p,
                         const types::EntityTypes& entity_types) {
  PathEncoding out;
  out.relations = encode_relations(t, params, p);
  if (params.config().uses_types()) {
    out.types = encode_types(t, params, p, entity_types, out.relations);
    out.representation = path_representation(t, out.relations, out.types->encoding);
  } else {
    out.representation = path_representation(t, out.relations, std::nullopt);
  }
  return out;
}

PooledPaths pool_attention(Tape& t, const ModelParams& params, std::span<const Var> representations) {
  if (representations.empty()) throw ContractError("pool_attention: no paths");
  if (!params.path_scorer || !params.context) throw ContractError("pool_attention: model has no path scorer");
  const auto [weights, pooled] = attend(t, *params.path_scorer, representations, t.param(*params.context));
  return {pooled, weights};
}

Var reduce_scores(Tape& t, Var scores, Pooling pooling, Index top_k) {
  switch (pooling) {
    case Pooling::logsumexp: return num::logsumexp(t, scores);
    case Pooling::average: return num::mean(t, scores);
    case Pooling::max: return num::max(t, scores);
    case Pooling::topk: return num::topk_mean(t, scores, top_k);
    case Pooling::attention: break;
  }
  throw ContractError("reduce_scores: attention pooling has no scalar reduction");
}

Var pool_scalar(Tape& t, Var scores, Pooling pooling, Index top_k) {
  return num::sigmoid(t, reduce_scores(t, scores, pooling, top_k));
}

Var predict(Tape& t, const ModelParams& params, Var pooled) {
  return num::sigmoid(t, num::affine(t, t.param(params.pred_w), pooled, t.param(params.pred_b)));
}

Var loss(Tape& t, std::span<const Var> probabilities, std::span<const bool> labels) {
  if (probabilities.size() != labels.size() || probabilities.empty()) {
    throw ContractError("loss: need equally many probabilities and labels");
  }
  std::vector<Var> terms;
  terms.reserve(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) terms.push_back(num::binary_nll(t, probabilities[i], labels[i]));
  if (terms.size() == 1) return terms.front();
  return num::sum(t, num::concat(t, terms));
}

Forward model_forward(Tape& t, const ModelParams& params, const path::PathSet& paths,
                      const types::EntityTypes& entity_types) {
  if (paths.paths.empty()) throw ContractError("model_forward: empty path set");
  Forward out;
  std::vector<Var> reps;
  reps.reserve(paths.paths.size());
  for (const auto& p : paths.paths) {
    out.paths.push_back(encode_path(t, params, p, entity_types));
    reps.push_back(out.paths.back().representation);
  }
  const auto& c = params.config();
  if (c.pooling == Pooling::attention) {
    const auto pooled = pool_attention(t, params, reps);
    out.path_weights = pooled.weights;
    out.probability = predict(t, params, pooled.pooled);
  } else {
    const Var stacked = num::hstack(t, reps);
    const Var scores = num::transpose(t, num::affine(t, t.param(params.pred_w), stacked, t.param(params.pred_b)));
    out.probability = pool_scalar(t, scores, c.pooling, c.top_k);
  }
  return out;
}

double predict_probability(const ModelParams& params, const path::PathSet& paths,
                           const types::EntityTypes& entity_types) {
  if (paths.paths.empty()) return 0.0;
  Tape t(params.store());
  const auto f = model_forward(t, params, paths, entity_types);
  return t.value(f.probability)(0, 0);
}

void write_model(std::ostream& out, const ModelParams& params, std::string_view relation) {
  const auto& c = params.config();
  out << "APRMODEL 1\n";
  out << "relation=" << relation << '\n';
  out << "relation_count=" << params.relation_count() << '\n';
  out << "type_count=" << params.type_count() << '\n';
  out << "relation_dim=" << c.relation_dim << '\n';
  out << "type_dim=" << c.type_dim << '\n';
  out << "hidden_dim=" << c.hidden_dim << '\n';
  out << "scorer_dim=" << c.scorer_dim << '\n';
  out << "selector=" << to_string(c.selector) << '\n';
  out << "pooling=" << to_string(c.pooling) << '\n';
  out << "top_k=" << c.top_k << '\n';
  out << "pretrained_dim=" << c.pretrained_dim << '\n';
  out << "tensors=" << params.store().size() << '\n';
  num::write_tensors(out, params.store());
}

LoadedModel read_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no) || line != "APRMODEL 1") {
    throw ParseError("missing 'APRMODEL 1' header", line_no);
  }
  std::map<std::string, std::string> kv;
  while (true) {
    if (!detail::next_line(in, line, line_no)) throw ParseError("truncated model header", line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    auto key = line.substr(0, eq);
    kv[key] = line.substr(eq + 1);
    if (key == "tensors") break;
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("model header lacks '" + key + "'", line_no);
    return it->second;
  };
  auto num_of = [&](const std::string& key) { return detail::parse_number<Index>(get(key), line_no); };
  ModelConfig c;
  c.relation_dim = num_of("relation_dim");
  c.type_dim = num_of("type_dim");
  c.hidden_dim = num_of("hidden_dim");
  c.scorer_dim = num_of("scorer_dim");
  c.selector = parse_type_selector(get("selector"));
  c.pooling = parse_pooling(get("pooling"));
  c.top_k = num_of("top_k");
  c.pretrained_dim = num_of("pretrained_dim");
  ModelParams params(c, static_cast<std::size_t>(num_of("relation_count")),
                     static_cast<std::size_t>(num_of("type_count")), 0);
  if (static_cast<std::size_t>(num_of("tensors")) != params.store().size()) {
    throw ParseError("tensor count does not match the configuration", line_no);
  }
  num::read_tensors(in, params.store(), line_no);
  return {std::move(params), get("relation")};
}

}  // namespace apr::model
