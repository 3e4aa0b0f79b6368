#include <doctest.h>

#include <random>
#include <sstream>

#include "apr/error.hpp"
#include "apr/patstat.hpp"

using namespace apr;
using namespace apr::pattern;

namespace {

PathPattern pat(std::vector<TypeId> t, std::vector<RelationId> r) { return {std::move(t), std::move(r)}; }

}  // namespace

TEST_CASE("occurrence ratio") {
  CHECK(Occurrence{3, 1}.ratio() == 0.75);
  CHECK(Occurrence{0, 2}.ratio() == 0.0);
}

TEST_CASE("discriminativeness of perfectly split patterns") {
  PatternCounts c;
  add_occurrence(c, pat({1, 2}, {0}), true);
  add_occurrence(c, pat({1, 2}, {0}), true);
  add_occurrence(c, pat({1, 3}, {0}), false);
  const auto d = discriminativeness(c);
  CHECK(d.ratios == std::vector<double>{1.0, 0.0});
  CHECK(d.d == 0.25);
  PatternCounts mixed;
  add_occurrence(mixed, pat({1}, {}), true);
  add_occurrence(mixed, pat({1}, {}), false);
  CHECK(discriminativeness(mixed).d == 0.0);
  CHECK_THROWS_AS(discriminativeness(PatternCounts{}), ContractError);
}

TEST_CASE("discriminativeness stays in [0, 0.25]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    PatternCounts c;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) add_occurrence(c, pat({static_cast<TypeId>(rng() % 6)}, {}), rng() % 3 == 0);
    const double d = discriminativeness(c).d;
    CHECK(d >= 0.0);
    CHECK(d <= 0.25);
  }
}

TEST_CASE("generalizability") {
  const std::set<PathPattern> train{pat({1}, {}), pat({2}, {}), pat({3}, {}), pat({9}, {})};
  const std::set<PathPattern> test{pat({1}, {}), pat({2}, {}), pat({3}, {}), pat({4}, {})};
  CHECK(generalizability(train, test) == 0.75);
  CHECK(generalizability(test, test) == 1.0);
  CHECK(generalizability({}, test) == 0.0);
  CHECK_THROWS_AS(generalizability(train, {}), ContractError);
}

TEST_CASE("level selection") {
  Eigen::MatrixXd w(3, 1);
  w << 0.2, 0.7, 0.1;
  // fork -> cutlery -> artifact: the middle level wins.
  kg::Vocabulary types;
  for (const char* t : {"<UNKNOWN>", "fork", "cutlery", "artifact"}) types.intern(t);
  const std::vector<TypeId> levels{1, 2, 3};
  CHECK(types.token(levels[select_level(w)]) == "cutlery");
  w << 0.4, 0.4, 0.2;
  CHECK(select_level(w) == 0);
  w << 0.25, 0.375, 0.375;
  CHECK(select_level(w) == 1);
}

TEST_CASE("specific and abstract extraction") {
  const types::EntityTypes et{{1, 3, 5}, {2, 5}, {4}};
  const path::Path p{{0, 2, 1}, {7, 8}};
  CHECK(extract_pattern(p, et, PatternSelector::specific) == pat({1, 4, 2}, {7, 8}));
  CHECK(extract_pattern(p, et, PatternSelector::abstract) == pat({5, 4, 5}, {7, 8}));
  CHECK_THROWS_AS(extract_pattern(p, et, PatternSelector::attention), ContractError);
}

TEST_CASE("abstract patterns never outnumber specific ones on tree hierarchies") {
  // Type k has parent k / 3, so equal specific types imply equal ancestors.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    types::EntityTypes et(12);
    for (auto& levels : et) {
      TypeId t = 9 + static_cast<TypeId>(rng() % 27);
      while (t > 0) {
        levels.push_back(t);
        t /= 3;
      }
    }
    std::set<PathPattern> spec, abs;
    for (int i = 0; i < 30; ++i) {
      path::Path p;
      const auto len = 1 + rng() % 3;
      p.entities.push_back(static_cast<kg::EntityId>(rng() % 12));
      for (std::size_t k = 0; k < len; ++k) {
        p.relations.push_back(static_cast<RelationId>(rng() % 2));
        p.entities.push_back(static_cast<kg::EntityId>(rng() % 12));
      }
      spec.insert(extract_pattern(p, et, PatternSelector::specific));
      abs.insert(extract_pattern(p, et, PatternSelector::abstract));
    }
    CHECK(abs.size() <= spec.size());
  }
}

TEST_CASE("attention patterns pick levels from each entity's hierarchy") {
  model::ModelConfig c;
  c.relation_dim = 3;
  c.type_dim = 3;
  c.hidden_dim = 4;
  c.scorer_dim = 3;
  const model::ModelParams params(c, 2, 6, 5);
  const types::EntityTypes et{{1, 2}, {3, 4, 5}, {2}};
  path::PathSet ps;
  ps.source = 0;
  ps.target = 1;
  ps.paths.push_back({{0, 1}, {0}});
  ps.paths.push_back({{0, 2, 1}, {1, 0}});
  const auto pats = attention_patterns(params, ps, et);
  REQUIRE(pats.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(pats[i].relations == ps.paths[i].relations);
    REQUIRE(pats[i].types.size() == ps.paths[i].entities.size());
    for (std::size_t k = 0; k < pats[i].types.size(); ++k) {
      const auto& levels = et[ps.paths[i].entities[k]];
      CHECK(std::find(levels.begin(), levels.end(), pats[i].types[k]) != levels.end());
    }
  }
  CHECK(pats[1].types[1] == 2);

  auto none = c;
  none.selector = model::TypeSelector::none;
  CHECK_THROWS_AS(attention_patterns(model::ModelParams(none, 2, 6, 5), ps, et), ContractError);
}

TEST_CASE("summary output") {
  kg::Vocabulary types, rels;
  for (const char* t : {"<UNKNOWN>", "person", "city"}) types.intern(t);
  rels.intern("born_in");
  PatternCounts train, test;
  add_occurrence(train, pat({1, 2}, {0}), true);
  add_occurrence(train, pat({1, 1}, {0}), false);
  add_occurrence(test, pat({1, 2}, {0}), true);
  const auto s = summarize(train, test);
  CHECK(s.d == 0.25);
  CHECK(s.d_test == 0.0);
  CHECK(s.g == 1.0);
  std::ostringstream out;
  write_stats(out, s, types, rels);
  CHECK(out.str() ==
        "person|born_in|person 0 1 0\n"
        "person|born_in|city 1 0 1\n"
        "d=0.25 d_test=0 g=1 n_train_patterns=2 n_test_patterns=1\n");
}

TEST_CASE("fork in kitchen under the specific selector") {
  std::istringstream in("fork\tcutlery|tableware|object\nkitchen\troom|place\n");
  const auto h = types::ingest_type_hierarchies(in);
  kg::Vocabulary ents, rels;
  ents.intern("fork");
  ents.intern("kitchen");
  ents.intern("stray");
  rels.intern("in");
  const auto et = h.bind(ents);
  const auto p = extract_pattern({{0, 1}, {0}}, et, PatternSelector::specific);
  CHECK(pattern_string(p, h.types(), rels) == "cutlery|in|room");
  CHECK(pattern_string(extract_pattern({{0, 2}, {0}}, et, PatternSelector::abstract), h.types(), rels) ==
        "object|in|<UNKNOWN>");
}

TEST_CASE("one-hot weights select their level") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 1);
  w(2, 0) = 1.0;
  CHECK(select_level(w) == 2);
}

TEST_CASE("g uses set semantics and constant types coarsen") {
  PatternCounts train, test;
  add_occurrence(train, pat({1, 2}, {0}), true);
  add_occurrence(test, pat({1, 2}, {0}), true);
  add_occurrence(test, pat({3, 2}, {0}), false);
  const double g = generalizability(pattern_set(train), pattern_set(test));
  add_occurrence(test, pat({3, 2}, {0}), true);
  add_occurrence(test, pat({1, 2}, {0}), false);
  CHECK(generalizability(pattern_set(train), pattern_set(test)) == g);
  CHECK(g == 0.5);

  std::mt19937_64 rng(8);
  types::EntityTypes et(6), constant(6, {7});
  for (auto& l : et) l = {static_cast<TypeId>(rng() % 5)};
  std::set<PathPattern> fine, coarse;
  for (int i = 0; i < 40; ++i) {
    const path::Path p{{static_cast<kg::EntityId>(rng() % 6), static_cast<kg::EntityId>(rng() % 6)},
                       {static_cast<RelationId>(rng() % 2)}};
    fine.insert(extract_pattern(p, et, PatternSelector::specific));
    coarse.insert(extract_pattern(p, constant, PatternSelector::specific));
  }
  CHECK(coarse.size() <= fine.size());
  CHECK(coarse.size() <= 2);
}
