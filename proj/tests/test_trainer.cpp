#include <doctest.h>

#include <set>
#include <sstream>

#include "apr/error.hpp"
#include "apr/trainer.hpp"

using namespace apr;
using namespace apr::train;

namespace {

// Positives are linked by a path through relation 0, negatives through relation 1.
Example make(kg::EntityId s, kg::EntityId t, bool label) {
  Example e;
  e.label = label;
  e.paths.source = s;
  e.paths.target = t;
  const kg::RelationId r = label ? 0 : 1;
  e.paths.paths.push_back({{s, 9, t}, {r, 2}});
  if (s % 2 == 0) e.paths.paths.push_back({{s, t}, {2}});
  return e;
}

std::vector<Example> toy(std::size_t n, std::size_t offset = 0) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make(static_cast<kg::EntityId>((i + offset) % 9), static_cast<kg::EntityId>((i + offset + 3) % 9), i % 2 == 0));
  }
  return out;
}

types::EntityTypes flat_types() { return types::EntityTypes(10, {0}); }

model::ModelParams small_model(std::uint64_t seed) {
  model::ModelConfig c;
  c.relation_dim = 4;
  c.type_dim = 2;
  c.hidden_dim = 6;
  c.scorer_dim = 3;
  c.selector = model::TypeSelector::none;
  c.pooling = model::Pooling::max;
  return model::ModelParams(c, 3, 1, seed);
}

TrainConfig fast(std::size_t epochs) {
  TrainConfig c;
  c.max_epochs = epochs;
  c.patience = epochs;
  c.seed = 4;
  c.adam.lr = 0.05;
  return c;
}

std::string checkpoint(const model::ModelParams& p) {
  std::ostringstream s;
  model::write_model(s, p, "r");
  return s.str();
}

std::size_t positives(const std::vector<Example>& v) {
  std::size_t n = 0;
  for (const auto& e : v) n += e.label;
  return n;
}

}  // namespace

TEST_CASE("separable toy is learned") {
  RelationDataset d;
  d.train = toy(16);
  d.validation = toy(6, 5);
  const auto r = train_relation_model(d, flat_types(), small_model(1), fast(15));
  REQUIRE(r.history.epochs.size() == 15);
  for (std::size_t i = 1; i < 10; ++i) CHECK(r.history.epochs[i].mean_loss < r.history.epochs[i - 1].mean_loss);
  CHECK(accuracy_on(r.params, d.train, flat_types()) == 1.0);
  CHECK(accuracy_on(r.params, d.validation, flat_types()) == 1.0);
  for (std::size_t i = 0; i < r.history.epochs.size(); ++i) CHECK(r.history.epochs[i].epoch == i + 1);
}

TEST_CASE("training is deterministic for a fixed seed") {
  RelationDataset d;
  d.train = toy(12);
  d.validation = toy(4, 2);
  const auto a = train_relation_model(d, flat_types(), small_model(3), fast(5));
  const auto b = train_relation_model(d, flat_types(), small_model(3), fast(5));
  CHECK(checkpoint(a.params) == checkpoint(b.params));
  std::ostringstream ha, hb;
  write_history(ha, a.history);
  write_history(hb, b.history);
  CHECK(ha.str() == hb.str());
  auto other = fast(5);
  other.seed = 5;
  const auto c = train_relation_model(d, flat_types(), small_model(3), other);
  CHECK(checkpoint(c.params) != checkpoint(a.params));
}

TEST_CASE("early stopping and best snapshot") {
  RelationDataset d;
  d.train = toy(10);
  d.validation = toy(4, 1);
  for (const std::size_t patience : {0u, 1u, 3u}) {
    auto cfg = fast(20);
    cfg.patience = patience;
    cfg.adam.lr = 1e-4;
    const auto r = train_relation_model(d, flat_types(), small_model(6), cfg);
    const auto& h = r.history;
    REQUIRE(h.best_epoch >= 1);
    CHECK((h.epochs.size() == cfg.max_epochs || h.epochs.size() == h.best_epoch + patience + 1));
    double best = -1.0;
    std::size_t first_best = 0;
    for (const auto& e : h.epochs) {
      if (e.validation_accuracy > best) {
        best = e.validation_accuracy;
        first_best = e.epoch;
      }
    }
    CHECK(h.best_epoch == first_best);
    CHECK(accuracy_on(r.params, d.validation, flat_types()) == best);
  }
}

TEST_CASE("patience 0 with flat validation accuracy stops after one non-improving epoch") {
  RelationDataset d;
  d.train = toy(10);
  d.validation = toy(4, 1);
  auto cfg = fast(20);
  cfg.patience = 0;
  cfg.adam.lr = 1e-15;  // parameters effectively frozen
  const auto r = train_relation_model(d, flat_types(), small_model(6), cfg);
  CHECK(r.history.epochs.size() == 2);
  CHECK(r.history.best_epoch == 1);
  CHECK(r.history.epochs[0].validation_accuracy == r.history.epochs[1].validation_accuracy);
}

TEST_CASE("loss on a frozen model survives a checkpoint round trip") {
  const auto params = small_model(13);
  std::istringstream in(checkpoint(params));
  const auto back = model::read_model(in);
  for (const auto& e : toy(6)) {
    CHECK(example_loss(back.params, e, flat_types()) == example_loss(params, e, flat_types()));
  }
}

TEST_CASE("zero-path examples are dropped") {
  RelationDataset d;
  d.train = toy(8);
  d.validation = toy(4, 3);
  Example empty;
  empty.label = true;
  d.train.push_back(empty);
  d.validation.push_back(empty);
  d.validation.push_back(empty);
  const auto r = train_relation_model(d, flat_types(), small_model(1), fast(1));
  CHECK(r.history.dropped_train == 1);
  CHECK(r.history.dropped_validation == 2);

  RelationDataset none;
  none.train = {empty, empty};
  CHECK_THROWS_AS(train_relation_model(none, flat_types(), small_model(1), fast(1)), ContractError);
}

TEST_CASE("validation is carved when absent") {
  RelationDataset d;
  d.train = toy(20);
  const auto r = train_relation_model(d, flat_types(), small_model(1), fast(2));
  CHECK(r.history.epochs.size() == 2);
}

TEST_CASE("carve_validation") {
  SUBCASE("20 balanced examples at 0.1") {
    const auto c = carve_validation(toy(20), 0.1, 1);
    CHECK(c.train.size() == 18);
    CHECK(c.validation.size() == 2);
    CHECK(positives(c.validation) == 1);
  }
  SUBCASE("10 balanced examples still get one of each label") {
    const auto c = carve_validation(toy(10), 0.1, 1);
    CHECK(c.validation.size() == 2);
    CHECK(positives(c.validation) == 1);
  }
  SUBCASE("label proportions are kept") {
    auto v = toy(40);
    for (std::size_t i = 0; i < 10; ++i) v[2 * i + 1].label = true;  // 30 positive, 10 negative
    const auto c = carve_validation(v, 0.2, 3);
    CHECK(c.validation.size() == 8);
    CHECK(positives(c.validation) == 6);
  }
  SUBCASE("partition and determinism") {
    const auto all = toy(30);
    const auto a = carve_validation(all, 0.3, 9);
    const auto b = carve_validation(all, 0.3, 9);
    CHECK(a.train.size() + a.validation.size() == 30);
    std::multiset<std::pair<kg::EntityId, kg::EntityId>> seen, expect;
    for (const auto& e : all) expect.emplace(e.paths.source, e.paths.target);
    for (const auto* part : {&a.train, &a.validation}) {
      for (const auto& e : *part) seen.emplace(e.paths.source, e.paths.target);
    }
    CHECK(seen == expect);
    REQUIRE(a.validation.size() == b.validation.size());
    for (std::size_t i = 0; i < a.validation.size(); ++i) {
      CHECK(a.validation[i].paths.source == b.validation[i].paths.source);
    }
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(carve_validation(toy(1), 0.1, 1), ContractError);
    CHECK_THROWS_AS(carve_validation(toy(10), 1.0, 1), ContractError);
  }
}

TEST_CASE("accuracy_on") {
  const auto params = small_model(2);
  CHECK(accuracy_on(params, {}, flat_types()) == 0.0);
  Example empty;
  empty.label = false;
  CHECK(accuracy_on(params, {empty}, flat_types()) == 1.0);
  empty.label = true;
  CHECK(accuracy_on(params, {empty}, flat_types()) == 0.0);
}

TEST_CASE("history format") {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 0.75, 0.1});
  h.epochs.push_back({2, 0.25, 1.0, 0.1});
  std::ostringstream out;
  write_history(out, h);
  CHECK(out.str() == "1 0.5 0.75\n2 0.25 1\n");
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.max_epochs = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = TrainConfig{};
  c.validation_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), ContractError);
}
