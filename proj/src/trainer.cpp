#include "apr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "apr/error.hpp"

namespace apr::train {

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ContractError("max epochs must be at least 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ContractError("validation fraction must lie in (0, 1)");
  }
}

Carve carve_validation(std::vector<Example> examples, double fraction, std::uint64_t seed) {
  if (examples.size() < 2) throw ContractError("carve_validation needs at least 2 examples");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("validation fraction must lie in (0, 1)");
  const std::size_t n = examples.size();
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (examples[i].label ? pos : neg).push_back(i);

  std::size_t n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  const bool stratify = pos.size() >= 2 && neg.size() >= 2;
  n_val = std::max<std::size_t>(n_val, stratify ? 2 : 1);
  n_val = std::min(n_val, n - 1);

  std::size_t val_pos = static_cast<std::size_t>(
      std::lround(static_cast<double>(n_val) * static_cast<double>(pos.size()) / static_cast<double>(n)));
  if (stratify) val_pos = std::clamp<std::size_t>(val_pos, 1, n_val - 1);
  val_pos = std::min(val_pos, pos.size());
  if (n_val - val_pos > neg.size()) val_pos = n_val - neg.size();

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<bool> to_val(n, false);
  for (std::size_t i = 0; i < val_pos; ++i) to_val[pos[i]] = true;
  for (std::size_t i = 0; i < n_val - val_pos; ++i) to_val[neg[i]] = true;

  Carve out;
  for (std::size_t i = 0; i < n; ++i) (to_val[i] ? out.validation : out.train).push_back(std::move(examples[i]));
  return out;
}

double accuracy_on(const model::ModelParams& params, const std::vector<Example>& examples,
                   const types::EntityTypes& entity_types) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    const double p = model::predict_probability(params, ex.paths, entity_types);
    if ((p >= 0.5) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double example_loss(const model::ModelParams& params, const Example& example,
                    const types::EntityTypes& entity_types) {
  num::Tape t(params.store());
  const auto f = model::model_forward(t, params, example.paths, entity_types);
  const bool labels[] = {example.label};
  const num::Var probs[] = {f.probability};
  return t.value(model::loss(t, probs, labels))(0, 0);
}

namespace {

std::vector<Example> with_paths(const std::vector<Example>& in, std::size_t& dropped) {
  std::vector<Example> out;
  for (const auto& ex : in) {
    if (ex.paths.paths.empty()) {
      ++dropped;
    } else {
      out.push_back(ex);
    }
  }
  return out;
}

}  // namespace

TrainResult train_relation_model(const RelationDataset& dataset, const types::EntityTypes& entity_types,
                                 model::ModelParams initial, const TrainConfig& config) {
  config.validate();
  TrainHistory history;
  auto train = with_paths(dataset.train, history.dropped_train);
  auto validation = with_paths(dataset.validation, history.dropped_validation);
  if (train.empty()) throw ContractError("every training example was dropped for having no paths");
  if (validation.empty()) {
    auto carve = carve_validation(std::move(train), config.validation_fraction, config.seed);
    train = std::move(carve.train);
    validation = std::move(carve.validation);
  }

  model::ModelParams params = std::move(initial);
  num::ParamStore best = params.store();
  auto adam = num::make_adam_state(params.store(), config.adam);
  std::mt19937_64 rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double best_accuracy = -1.0;
  std::size_t streak = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (const auto i : order) {
      const auto& ex = train[i];
      num::Tape t(params.store());
      const auto f = model::model_forward(t, params, ex.paths, entity_types);
      const bool labels[] = {ex.label};
      const num::Var probs[] = {f.probability};
      const num::Var l = model::loss(t, probs, labels);
      total += t.value(l)(0, 0);
      t.backward(l);
      num::adam_update(params.store(), adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = total / static_cast<double>(train.size());
    rec.validation_accuracy = accuracy_on(params, validation, entity_types);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.epochs.push_back(rec);

    if (rec.validation_accuracy > best_accuracy) {
      best_accuracy = rec.validation_accuracy;
      history.best_epoch = epoch;
      best.assign_values(params.store());
      streak = 0;
    } else if (++streak > config.patience) {
      break;
    }
  }
  params.store().assign_values(best);
  params.store().zero_grad();
  return {std::move(params), std::move(history)};
}

void write_history(std::ostream& out, const TrainHistory& history) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out.precision(17);
  for (const auto& e : history.epochs) {
    out << e.epoch << ' ' << e.mean_loss << ' ' << e.validation_accuracy << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace apr::train
