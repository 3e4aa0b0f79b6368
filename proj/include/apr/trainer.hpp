#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "apr/model.hpp"
#include "apr/num/adam.hpp"
#include "apr/pathfind.hpp"
#include "apr/typesys.hpp"

namespace apr::train {

using Example = path::LabeledPathSet;

struct Provenance {
  std::uint64_t split_seed = 0;
  std::uint64_t negative_seed = 0;
  double restart = 0.15;
};

struct RelationDataset {
  kg::RelationId relation = 0;
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;
  Provenance provenance;
};

struct TrainConfig {
  std::size_t max_epochs = 50;
  double validation_fraction = 0.1;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  num::AdamConfig adam;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double validation_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 until an epoch completes
  std::size_t dropped_train = 0;
  std::size_t dropped_validation = 0;
};

struct Carve {
  std::vector<Example> train;
  std::vector<Example> validation;
};

/// Seeded stratified split. The validation side gets max(1, floor(fraction * n))
/// examples, raised to one per label when every label has at least two examples.
Carve carve_validation(std::vector<Example> examples, double fraction, std::uint64_t seed);

/// Accuracy of `params` on `examples` at the 0.5 threshold; pairs without paths
/// score 0.0. Returns 0.0 for an empty list.
double accuracy_on(const model::ModelParams& params, const std::vector<Example>& examples,
                   const types::EntityTypes& entity_types);

/// Binary cross-entropy of one example, without recording gradients.
double example_loss(const model::ModelParams& params, const Example& example,
                    const types::EntityTypes& entity_types);

struct TrainResult {
  model::ModelParams params;
  TrainHistory history;
};

/// Per-epoch seeded shuffle, one Adam step per example, early stopping on validation
/// accuracy. Returns the parameters of the earliest best validation epoch. Examples
/// without paths are dropped from train and validation; an empty train split after
/// drops raises ContractError. When the validation split is empty it is carved from
/// train using config.validation_fraction.
TrainResult train_relation_model(const RelationDataset& dataset, const types::EntityTypes& entity_types,
                                 model::ModelParams initial, const TrainConfig& config);

/// One "epoch loss val_acc" line per epoch.
void write_history(std::ostream& out, const TrainHistory& history);

}  // namespace apr::train
