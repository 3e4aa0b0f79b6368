// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "apr/evalkit.hpp"
#include "apr/io.hpp"
#include "apr/num/ops.hpp"
#include "apr/patstat.hpp"
#include "apr/pipeline.hpp"
#include "apr/synthgen.hpp"
#include "apr/trainer.hpp"
#include "oracles.hpp"

using namespace apr;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

void gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const auto s : {model::TypeSelector::attention, model::TypeSelector::specific, model::TypeSelector::abstract}) {
      for (const auto p : {model::Pooling::attention, model::Pooling::logsumexp}) {
        const auto r = pipeline::model_gradient_check({s, p, seed});
        if (r.max_rel_error >= worst) {
          worst = r.max_rel_error;
          where = fmt("%s/%s seed %llu %s", std::string(model::to_string(s)).c_str(),
                      std::string(model::to_string(p)).c_str(), static_cast<unsigned long long>(seed),
                      r.worst_param.c_str());
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  report(worst < 1e-4 && secs < 30.0, "gradient-correctness",
         fmt("max rel error %.3g (< 1e-4) at %s over 3 seeds x 3 selectors x 2 poolings, %.1f s (< 30 s)", worst,
             where.c_str(), secs));
}

// ---------------------------------------------------------------------------

bool in_hull(const num::Tensor& x, const std::vector<num::Tensor>& inputs) {
  num::Tensor lo = inputs.front(), hi = inputs.front();
  for (const auto& v : inputs) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return ((x - lo).array() >= -1e-12).all() && ((hi - x).array() >= -1e-12).all();
}

void attention_invariants() {
  std::mt19937_64 rng(2024);
  model::ModelConfig c;
  c.relation_dim = 4;
  c.type_dim = 5;
  c.hidden_dim = 6;
  c.scorer_dim = 4;
  const std::size_t n_entities = 8, n_relations = 4, n_types = 9;
  std::size_t alphas = 0, hulls = 0, bad_sum = 0, bad_hull = 0;
  double worst_sum = 0.0;
  auto check_alpha = [&](const num::Tensor& w) {
    ++alphas;
    const double dev = std::abs(w.sum() - 1.0);
    worst_sum = std::max(worst_sum, dev);
    if (!(dev <= 1e-12) || w.minCoeff() < 0.0) ++bad_sum;
  };
  std::unique_ptr<model::ModelParams> params;
  for (int pass = 0; pass < 1000; ++pass) {
    if (pass % 20 == 0) params = std::make_unique<model::ModelParams>(c, n_relations, n_types, 500 + pass);
    types::EntityTypes et(n_entities);
    for (auto& levels : et) {
      const auto C = 1 + rng() % 4;
      while (levels.size() < C) {
        const auto t = static_cast<types::TypeId>(rng() % n_types);
        if (std::find(levels.begin(), levels.end(), t) == levels.end()) levels.push_back(t);
      }
    }
    path::PathSet ps;
    const auto n_paths = 1 + rng() % 4;
    for (std::size_t i = 0; i < n_paths; ++i) {
      path::Path p;
      p.entities.push_back(0);
      const auto len = 1 + rng() % 3;
      for (std::size_t k = 0; k < len; ++k) {
        p.relations.push_back(static_cast<kg::RelationId>(rng() % n_relations));
        p.entities.push_back(k + 1 == len ? 1 : static_cast<kg::EntityId>(rng() % n_entities));
      }
      ps.paths.push_back(std::move(p));
    }
    num::Tape t(std::as_const(*params).store());
    const auto f = model::model_forward(t, *params, ps, et);
    check_alpha(t.value(*f.path_weights));
    std::vector<num::Var> reps;
    std::vector<num::Tensor> rep_values;
    for (std::size_t i = 0; i < f.paths.size(); ++i) {
      const auto& enc = f.paths[i];
      reps.push_back(enc.representation);
      rep_values.push_back(t.value(enc.representation));
      for (std::size_t k = 0; k < enc.types->weights.size(); ++k) {
        check_alpha(t.value(enc.types->weights[k]));
        // Re-run the level attention against the state that preceded this entity and
        // check the combined vector.
        const auto& levels = et[ps.paths[i].entities[k]];
        std::vector<num::Var> vecs;
        std::vector<num::Tensor> vec_values;
        for (const auto id : levels) {
          vecs.push_back(model::type_vector(t, *params, id));
          vec_values.push_back(t.value(vecs.back()));
        }
        num::Tensor ctx(c.hidden_dim, 1);
        for (num::Index r = 0; r < ctx.rows(); ++r) ctx(r, 0) = std::uniform_real_distribution<double>(-1, 1)(rng);
        const auto att = model::type_attention(t, *params, vecs, t.constant(ctx));
        check_alpha(t.value(att.weights));
        ++hulls;
        if (!in_hull(t.value(att.context_vector), vec_values)) ++bad_hull;
      }
    }
    const auto pooled = model::pool_attention(t, *params, reps);
    ++hulls;
    if (!in_hull(t.value(pooled.pooled), rep_values)) ++bad_hull;
  }
  report(bad_sum == 0 && bad_hull == 0, "attention-invariants",
         fmt("1000 forward passes, %zu alpha vectors (max |sum-1| %.2g, limit 1e-12), %zu hull checks; %zu sum and %zu hull violations",
             alphas, worst_sum, hulls, bad_sum, bad_hull));
}

// ---------------------------------------------------------------------------

void path_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0, queries = 0, total_paths = 0;
  for (int g = 0; g < 100; ++g) {
    const auto nodes = 2 + rng() % 11;  // <= 12
    const auto kg = oracle::random_graph(rng, nodes, 1 + rng() % 3, nodes + rng() % (2 * nodes)).with_reverse_relations();
    const auto max_len = 1 + g % 4;
    for (kg::EntityId s = 0; s < nodes; ++s) {
      for (kg::EntityId t = 0; t < nodes; ++t) {
        path::ExtractOptions opt;
        opt.max_len = max_len;
        if ((s + t) % 2) opt.exclude_direct = static_cast<kg::RelationId>((s * 7 + t) % kg.base_relation_count());
        const auto got = path::extract_paths(kg, s, t, opt);
        const std::set<path::Path> mine(got.paths.begin(), got.paths.end());
        const auto want = oracle::dfs_paths(kg, s, t, max_len, opt.exclude_direct);
        ++queries;
        total_paths += want.size();
        if (mine != want || mine.size() != got.paths.size()) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(mismatches == 0 && secs < 60.0, "path-oracle",
         fmt("100 graphs (<= 12 nodes, max_len 1..4), %zu pairs, %zu oracle paths, %zu mismatches, %.1f s (< 60 s)",
             queries, total_paths, mismatches, secs));
}

// ---------------------------------------------------------------------------

void metric_oracles() {
  std::mt19937_64 rng(404);
  std::size_t lists = 0, ap_bad = 0;
  while (lists < 1000) {
    const auto n = 1 + rng() % 20;
    std::vector<double> scores(n);
    std::vector<bool> labels(n);
    std::vector<eval::ScoredLabel> s(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng() % 10) / 10.0;
      labels[i] = rng() % 2;
      any = any || labels[i];
      s[i] = {scores[i], labels[i]};
    }
    if (!any) continue;
    ++lists;
    if (eval::average_precision(s) != oracle::average_precision(scores, labels)) ++ap_bad;
  }

  using pattern::PathPattern;
  pattern::PatternCounts split, even;
  pattern::add_occurrence(split, PathPattern{{1, 2}, {0}}, true);
  pattern::add_occurrence(split, PathPattern{{1, 3}, {0}}, false);
  pattern::add_occurrence(even, PathPattern{{1, 2}, {0}}, true);
  pattern::add_occurrence(even, PathPattern{{1, 2}, {0}}, false);
  pattern::add_occurrence(even, PathPattern{{1, 3}, {0}}, true);
  pattern::add_occurrence(even, PathPattern{{1, 3}, {0}}, false);
  pattern::PatternCounts single;
  pattern::add_occurrence(single, PathPattern{{4, 4}, {1}}, true);
  const double d_split = pattern::discriminativeness(split).d;
  const double d_even = pattern::discriminativeness(even).d;
  const double d_single = pattern::discriminativeness(single).d;
  const std::set<PathPattern> train{{{1}, {}}, {{2}, {}}, {{3}, {}}};
  const std::set<PathPattern> test{{{1}, {}}, {{2}, {}}, {{3}, {}}, {{9}, {}}};
  const std::set<PathPattern> other{{{7}, {}}};
  const double g_one_unseen = pattern::generalizability(train, test);
  const double g_subset = pattern::generalizability(test, train);
  const double g_disjoint = pattern::generalizability(train, other);
  const bool d_ok = d_split == 0.25 && d_even == 0.0 && d_single == 0.0;
  const bool g_ok = g_one_unseen == 0.75 && g_subset == 1.0 && g_disjoint == 0.0;

  const double a[] = {1, 2, 3}, zero[] = {0, 0, 0};
  const double t = eval::paired_t_test(a, zero).t;
  const double t_err = std::abs(t - 2 * std::sqrt(3.0));

  report(ap_bad == 0 && d_ok && g_ok && t_err <= 1e-12, "metric-oracles",
         fmt("AP exact on %zu/1000 lists; d {1,0}=%g {0.5,0.5}=%g single=%g; g 1-of-4-unseen=%g subset=%g disjoint=%g; "
             "t=%.17g (|t-2sqrt3| = %.2g, limit 1e-12)",
             lists - ap_bad, d_split, d_even, d_single, g_one_unseen, g_subset, g_disjoint, t, t_err));
}

// ---------------------------------------------------------------------------

void pooling_bounds() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20, 20);
  num::ParamStore store;
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = 1 + static_cast<num::Index>(rng() % 16);
    num::Tensor v(n, 1);
    for (num::Index k = 0; k < n; ++k) v(k, 0) = u(rng);
    num::Tape t(store);
    const auto s = t.constant(v);
    const double avg = t.value(model::reduce_scores(t, s, model::Pooling::average, 0))(0, 0);
    const double mx = t.value(model::reduce_scores(t, s, model::Pooling::max, 0))(0, 0);
    const double lse = t.value(model::reduce_scores(t, s, model::Pooling::logsumexp, 0))(0, 0);
    if (!(avg <= mx && mx <= lse && lse <= mx + std::log(static_cast<double>(n)))) ++bad;
  }
  report(bad == 0, "pooling-bounds", fmt("average <= max <= logsumexp <= max + ln N on 1000 vectors, %zu violations", bad));
}

// ---------------------------------------------------------------------------

struct SynthRun {
  double accuracy = 0.0;
  std::string history;
  std::string report;
  std::size_t epochs = 0;
};

struct SynthData {
  kg::KnowledgeGraph kg;
  types::EntityTypes types;
  std::vector<path::LabeledPathSet> train, test;
};

SynthData synth_data() {
  synth::SynthSpec spec;  // 60 entities, 405 triples, every middle ambiguous
  const auto corpus = synth::generate(spec);
  SynthData d;
  d.kg = corpus.graph.with_reverse_relations();
  d.types = corpus.hierarchy.bind(d.kg.entities());
  const auto r = d.kg.relations().at(synth::kTargetRelation);
  pipeline::ExtractConfig ec;
  ec.max_len = 2;
  ec.seed = spec.seed;
  d.train = pipeline::extract_labeled_paths(d.kg, pipeline::resolve_pairs(d.kg, corpus.train), r, ec);
  d.test = pipeline::extract_labeled_paths(d.kg, pipeline::resolve_pairs(d.kg, corpus.test), r, ec);
  return d;
}

SynthRun train_synth(const SynthData& d, model::TypeSelector selector, std::size_t type_count) {
  model::ModelConfig mc;  // default dimensions
  mc.selector = selector;
  train::TrainConfig tc;  // 50 epochs, patience 5, lr 1e-3
  tc.seed = 1;
  train::RelationDataset data;
  data.relation = d.kg.relations().at(synth::kTargetRelation);
  data.train = d.train;
  auto result = train::train_relation_model(data, d.types, model::ModelParams(mc, d.kg.relation_count(), type_count, 1), tc);
  const auto scores = pipeline::score_pairs(result.params, d.test, d.types);
  std::vector<eval::ScoredLabel> scored;
  std::size_t zero = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scored.push_back({scores[i], d.test[i].label});
    zero += d.test[i].paths.paths.empty();
  }
  eval::EvalReport rep;
  rep.model_id = std::string(model::to_string(selector));
  rep.dataset_id = "synth";
  rep.relations.push_back(eval::evaluate_relation(std::string(synth::kTargetRelation), scored, zero));
  SynthRun run;
  run.accuracy = rep.relations.front().accuracy;
  run.epochs = result.history.epochs.size();
  std::ostringstream h, r;
  train::write_history(h, result.history);
  eval::write_report(r, rep);
  run.history = h.str();
  run.report = r.str();
  return run;
}

void synthetic_separation_and_determinism() {
  const auto t0 = Clock::now();
  const auto d = synth_data();
  const auto n_types = synth::generate(synth::SynthSpec{}).hierarchy.type_count();
  const auto att = train_synth(d, model::TypeSelector::attention, n_types);
  const auto rel = train_synth(d, model::TypeSelector::none, n_types);
  const double secs = seconds_since(t0);
  report(att.accuracy >= 0.95 && rel.accuracy <= 0.65 && att.epochs <= 50 && secs < 300.0, "synthetic-separation",
         fmt("%zu entities, %zu triples, %zu train / %zu test pairs; attention test accuracy %.4f (>= 0.95) after %zu "
             "epochs, relation-only %.4f (<= 0.65), %.1f s (< 300 s)",
             d.kg.entity_count(), d.kg.edge_count() / 2, d.train.size(), d.test.size(), att.accuracy, att.epochs,
             rel.accuracy, secs));

  const auto again = train_synth(synth_data(), model::TypeSelector::attention, n_types);
  report(again.history == att.history && again.report == att.report && !att.history.empty(), "determinism",
         fmt("two attention runs with seed 1: history %zu bytes %s, report %zu bytes %s", att.history.size(),
             again.history == att.history ? "identical" : "DIFFERENT", att.report.size(),
             again.report == att.report ? "identical" : "DIFFERENT"));
}

// ---------------------------------------------------------------------------

void benchmark_reproduction() {
  // Needs WN18RR / FB15k-237 with external type data and hours of training.
  std::printf("SKIP benchmark-reproduction: needs full WN18RR / FB15k-237 with type data and long training; not run, not counted as a pass\n");
}

}  // namespace

int main() {
  gradient_correctness();
  attention_invariants();
  path_oracle();
  metric_oracles();
  pooling_bounds();
  synthetic_separation_and_determinism();
  benchmark_reproduction();
  std::printf("%s: %d failure(s)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
