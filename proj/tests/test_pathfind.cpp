#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "apr/error.hpp"
#include "apr/pathfind.hpp"
#include "oracles.hpp"

using namespace apr;
using namespace apr::path;
using kg::KnowledgeGraph;

namespace {

KnowledgeGraph augmented(const std::string& text) {
  std::istringstream in(text);
  return kg::ingest_triples(in).with_reverse_relations();
}

std::set<Path> as_set(const PathSet& ps) { return {ps.paths.begin(), ps.paths.end()}; }

}  // namespace

TEST_CASE("excluded direct edge leaves only the detour") {
  const auto g = augmented("a\tr\tb\nb\ts\tc\na\tt\tc\n");
  const auto a = g.entities().at("a"), b = g.entities().at("b"), c = g.entities().at("c");
  ExtractOptions opt;
  opt.max_len = 2;
  opt.exclude_direct = g.relations().at("t");
  const auto ps = extract_paths(g, a, c, opt);
  REQUIRE(ps.paths.size() == 1);
  CHECK(ps.paths[0].entities == std::vector<kg::EntityId>{a, b, c});
  CHECK(ps.paths[0].relations == std::vector<kg::RelationId>{g.relations().at("r"), g.relations().at("s")});
  CHECK(as_set(ps) == oracle::dfs_paths(g, a, c, 2, opt.exclude_direct));
}

TEST_CASE("max_len 1 returns exactly the one-edge paths") {
  const auto g = augmented("a\tr\tb\na\ts\tb\nb\tt\ta\nb\tu\tc\n");
  const auto a = g.entities().at("a"), b = g.entities().at("b");
  ExtractOptions opt;
  opt.max_len = 1;
  const auto ps = extract_paths(g, a, b, opt);
  CHECK(ps.paths.size() == 3);  // r, s and t^-1
  for (const auto& p : ps.paths) CHECK(p.length() == 1);
}

TEST_CASE("disconnected pair yields no paths") {
  const auto g = augmented("a\tr\tb\nc\tr\td\n");
  const auto ps = extract_paths(g, g.entities().at("a"), g.entities().at("d"), {});
  CHECK(ps.paths.empty());
}

TEST_CASE("an edge is never walked twice, even backwards") {
  const auto g = augmented("a\tr\tb\n");
  ExtractOptions opt;
  opt.max_len = 3;
  const auto ps = extract_paths(g, 0, 1, opt);
  REQUIRE(ps.paths.size() == 1);
  CHECK(ps.paths[0].length() == 1);
}

TEST_CASE("vertices may repeat across distinct edges") {
  // a -r-> b, b -s-> a, a -t-> b: the walk a r b s a t b revisits a over distinct edges.
  const auto g = augmented("a\tr\tb\nb\ts\ta\na\tt\tb\n");
  ExtractOptions opt;
  opt.max_len = 3;
  const auto ps = extract_paths(g, 0, 1, opt);
  bool found = false;
  for (const auto& p : ps.paths) found |= p.entities == std::vector<kg::EntityId>{0, 1, 0, 1};
  CHECK(found);
  CHECK(as_set(ps) == oracle::dfs_paths(g, 0, 1, 3, std::nullopt));
}

TEST_CASE("extraction matches depth-first enumeration on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto nodes = 3 + rng() % 8;
    const auto g = oracle::random_graph(rng, nodes, 1 + rng() % 3, 4 + rng() % 18).with_reverse_relations();
    const auto s = static_cast<kg::EntityId>(rng() % nodes);
    const auto t = static_cast<kg::EntityId>(rng() % nodes);
    ExtractOptions opt;
    opt.max_len = 1 + rng() % 4;
    if (rng() % 2) opt.exclude_direct = static_cast<kg::RelationId>(rng() % g.base_relation_count());
    const auto ps = extract_paths(g, s, t, opt);
    CHECK(as_set(ps) == oracle::dfs_paths(g, s, t, opt.max_len, opt.exclude_direct));
    CHECK(std::is_sorted(ps.paths.begin(), ps.paths.end(),
                         [](const Path& x, const Path& y) { return std::pair(x.length(), x) < std::pair(y.length(), y); }));
    for (const auto& p : ps.paths) {
      CHECK(is_valid_path(g, p));
      CHECK(p.entities.front() == s);
      CHECK(p.entities.back() == t);
    }
  }
}

TEST_CASE("reversing the query reverses every path") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = oracle::random_graph(rng, 7, 2, 14).with_reverse_relations();
    const auto s = static_cast<kg::EntityId>(rng() % 7), t = static_cast<kg::EntityId>(rng() % 7);
    ExtractOptions opt;
    opt.max_len = 3;
    const auto forward = extract_paths(g, s, t, opt);
    std::set<Path> reversed;
    for (const auto& p : forward.paths) reversed.insert(reverse_path(g, p));
    CHECK(reversed == as_set(extract_paths(g, t, s, opt)));
  }
}

TEST_CASE("unknown entity raises a lookup error") {
  const auto g = augmented("a\tr\tb\n");
  CHECK_THROWS_AS(extract_paths(g, 0, 9, {}), LookupError);
}

TEST_CASE("subsample_paths") {
  PathSet big;
  for (kg::EntityId i = 0; i < 300; ++i) big.paths.push_back(Path{{0, i, 1}, {0, 1}});
  const auto s = subsample_paths(big, 200, 17);
  CHECK(s.paths.size() == 200);
  CHECK(as_set(s).size() == 200);
  const auto all = as_set(big);
  for (const auto& p : s.paths) CHECK(all.contains(p));
  CHECK(std::is_sorted(s.paths.begin(), s.paths.end()));
  CHECK(subsample_paths(big, 200, 17).paths == s.paths);
  CHECK(subsample_paths(big, 200, 18).paths != s.paths);

  PathSet small;
  small.paths.assign(big.paths.begin(), big.paths.begin() + 50);
  CHECK(subsample_paths(small, 200, 1).paths == small.paths);
  CHECK_THROWS(subsample_paths(small, 0, 1));
}
