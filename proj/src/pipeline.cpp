#include "apr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "apr/error.hpp"

namespace apr::pipeline {

std::vector<path::LabeledPathSet> extract_labeled_paths(const kg::KnowledgeGraph& kg,
                                                        std::span<const io::LabeledPair> pairs,
                                                        kg::RelationId relation, const ExtractConfig& config) {
  std::vector<path::LabeledPathSet> out(pairs.size());
  path::ExtractOptions options;
  options.max_len = config.max_len;
  options.exclude_direct = relation;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < pairs.size(); i = next++) {
        auto ps = path::extract_paths(kg, pairs[i].source, pairs[i].target, options);
        if (config.max_paths > 0) ps = path::subsample_paths(ps, config.max_paths, config.seed + i);
        out[i] = {std::move(ps), pairs[i].label};
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = pairs.size();
    }
  };
  const auto n = std::clamp<std::size_t>(config.threads, 1, std::max<std::size_t>(pairs.size(), 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < n; ++w) workers.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::size_t thread_limit() {
  if (const char* env = std::getenv("APR_THREADS")) {
    try {
      const auto v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<io::LabeledPair> resolve_pairs(const kg::KnowledgeGraph& kg, std::span<const synth::SynthPair> pairs) {
  std::vector<io::LabeledPair> out;
  for (const auto& p : pairs) out.push_back({kg.entities().at(p.source), kg.entities().at(p.target), p.label});
  return out;
}

std::vector<double> score_pairs(const model::ModelParams& params, std::span<const path::LabeledPathSet> sets,
                                const types::EntityTypes& entity_types) {
  std::vector<double> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(model::predict_probability(params, s.paths, entity_types));
  return out;
}

num::GradCheckReport model_gradient_check(const GradCheckCase& c, double eps) {
  constexpr std::size_t kEntities = 6;
  constexpr std::size_t kRelations = 6;
  constexpr std::size_t kTypes = 8;
  std::mt19937_64 rng(c.seed);
  auto uniform = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  types::EntityTypes entity_types(kEntities);
  for (auto& levels : entity_types) {
    const auto height = 1 + uniform(3);
    while (levels.size() < height) {
      const auto t = static_cast<types::TypeId>(uniform(kTypes));
      if (std::find(levels.begin(), levels.end(), t) == levels.end()) levels.push_back(t);
    }
  }
  std::vector<path::LabeledPathSet> examples(2);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& ex = examples[i];
    ex.label = i == 0;
    for (int k = 0; k < 2; ++k) {
      path::Path p;
      const auto len = 1 + uniform(3);
      p.entities.push_back(0);
      for (std::size_t step = 0; step < len; ++step) {
        p.relations.push_back(static_cast<kg::RelationId>(uniform(kRelations)));
        p.entities.push_back(static_cast<kg::EntityId>(step + 1 == len ? 1 : uniform(kEntities)));
      }
      ex.paths.paths.push_back(std::move(p));
    }
  }

  model::ModelConfig config;
  config.relation_dim = 4;
  config.type_dim = 6;
  config.hidden_dim = 8;
  config.scorer_dim = 5;
  config.selector = c.selector;
  config.pooling = c.pooling;
  model::ModelParams params(config, kRelations, kTypes, c.seed);

  auto loss = [&](num::ParamStore&, bool with_grad) {
    num::Tape t(params.store(), with_grad);
    std::vector<num::Var> probs;
    bool labels[2];
    for (std::size_t i = 0; i < examples.size(); ++i) {
      probs.push_back(model::model_forward(t, params, examples[i].paths, entity_types).probability);
      labels[i] = examples[i].label;
    }
    const auto l = model::loss(t, probs, labels);
    if (with_grad) t.backward(l);
    return t.value(l)(0, 0);
  };
  num::GradCheckOptions options;
  options.eps = eps;
  options.method = num::Difference::ridders;
  options.seed = c.seed;
  return num::gradient_check(params.store(), loss, options);
}

}  // namespace apr::pipeline
