#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apr/error.hpp"
#include "apr/evalkit.hpp"
#include "apr/io.hpp"
#include "apr/kgstore.hpp"
#include "apr/model.hpp"
#include "apr/negsample.hpp"
#include "apr/patstat.hpp"
#include "apr/pathfind.hpp"
#include "apr/pipeline.hpp"
#include "apr/synthgen.hpp"
#include "apr/trainer.hpp"
#include "apr/typesys.hpp"

namespace fs = std::filesystem;
using namespace apr;

namespace {

std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

// Collects what a run read and wrote; written once as JSON when the command succeeds.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv) : command_(std::move(command)), argv_(std::move(argv)) {}

  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

  void write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["argv"] = argv_;
    j["seeds"] = seeds_;
    j["inputs"] = digests(inputs_);
    j["outputs"] = digests(outputs_);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path + "'");
    out << j.dump(2) << '\n';
  }

 private:
  static nlohmann::ordered_json digests(const std::vector<std::string>& paths) {
    auto j = nlohmann::ordered_json::object();
    for (const auto& p : paths) {
      if (fs::is_regular_file(p)) j[p] = "fnv1a64:" + fnv1a(io::read_file(p));
    }
    return j;
  }

  std::string command_;
  std::vector<std::string> argv_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

std::istringstream open_in(const std::string& path) { return std::istringstream(io::read_file(path)); }

types::TypeHierarchy load_types(const std::string& path) {
  auto in = open_in(path);
  return types::ingest_type_hierarchies(in);
}

std::vector<path::LabeledPathSet> load_paths(const std::string& path, const kg::KnowledgeGraph& kg) {
  auto in = open_in(path);
  return io::read_paths(in, kg);
}

kg::RelationId base_relation(const kg::KnowledgeGraph& kg, const std::string& name) {
  const auto r = kg.relations().at(name);
  if (r >= kg.base_relation_count()) throw ContractError("'" + name + "' is not a base relation");
  return r;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Options shared by every subcommand.
struct Common {
  std::string manifest;
};

void add_manifest_flag(CLI::App* cmd, Common& common) {
  cmd->add_option("--manifest", common.manifest, "Run manifest path (default: next to the main output)");
}

std::string manifest_path(const Common& common, const std::string& out, const std::string& command) {
  if (!common.manifest.empty()) return common.manifest;
  if (out.empty()) return "apr-" + command + ".manifest";
  if (fs::is_directory(out)) return (fs::path(out) / ("apr-" + command + ".manifest")).string();
  return out + ".manifest";
}

// ---- build-graph ----------------------------------------------------------

struct BuildGraphArgs {
  std::string triples, out;
};

int run_build_graph(const BuildGraphArgs& a, Manifest& m) {
  auto in = open_in(a.triples);
  m.input(a.triples);
  const auto kg = kg::ingest_triples(in).with_reverse_relations();
  auto out = open_out(a.out);
  kg::write_graph(out, kg);
  out.close();
  m.output(a.out);
  std::cerr << "entities=" << kg.entity_count() << " relations=" << kg.base_relation_count()
            << " edges=" << kg.edge_count() << '\n';
  return 0;
}

// ---- extract-paths --------------------------------------------------------

struct ExtractArgs {
  std::string graph, pairs, exclude, out;
  std::size_t max_len = 3, max_paths = 0;
  std::uint64_t seed = 0;
};

int run_extract(const ExtractArgs& a, Manifest& m) {
  const auto kg = io::load_graph(a.graph);
  m.input(a.graph);
  auto in = open_in(a.pairs);
  m.input(a.pairs);
  const auto pairs = io::read_pairs(in, kg);
  pipeline::ExtractConfig cfg;
  cfg.max_len = a.max_len;
  cfg.max_paths = a.max_paths;
  cfg.seed = a.seed;
  cfg.threads = pipeline::thread_limit();
  m.seed("subsample", a.seed);
  const auto sets = pipeline::extract_labeled_paths(kg, pairs, base_relation(kg, a.exclude), cfg);
  auto out = open_out(a.out);
  io::write_paths(out, kg, sets);
  out.close();
  m.output(a.out);
  return 0;
}

// ---- sample-negatives -----------------------------------------------------

struct NegArgs {
  std::string graph, relation, out, train_pairs, test_pairs;
  std::uint64_t seed = 0;
  double restart = 0.15;
  double split = 0.8;
};

int run_negatives(const NegArgs& a, Manifest& m) {
  const auto kg = io::load_graph(a.graph);
  m.input(a.graph);
  const auto r = base_relation(kg, a.relation);
  m.seed("negatives", a.seed);
  neg::PprOptions ppr;
  ppr.restart = a.restart;
  const auto positives = kg.positives(r);
  const auto sample = neg::sample_negatives(kg, r, positives, a.seed, ppr);
  for (const auto& w : sample.warnings) std::cerr << "warning: " << w << '\n';
  {
    auto out = open_out(a.out);
    io::write_negatives(out, kg, sample.negatives, a.seed, a.restart);
  }
  m.output(a.out);

  if (a.train_pairs.empty() != a.test_pairs.empty()) {
    throw ContractError("--train-pairs and --test-pairs go together");
  }
  if (a.train_pairs.empty()) return 0;
  // Each negative follows its positive into the same split.
  const auto split = kg::split_positives(kg, r, a.split, a.seed);
  m.seed("split", a.seed);
  std::map<std::pair<kg::EntityId, kg::EntityId>, bool> in_train;
  for (const auto& p : split.train) in_train[p] = true;
  for (const auto& p : split.test) in_train[p] = false;
  std::vector<io::LabeledPair> train, test;
  for (const auto& p : positives) (in_train.at(p) ? train : test).push_back({p.first, p.second, true});
  for (std::size_t i = 0; i < sample.negatives.size(); ++i) {
    const auto& n = sample.negatives[i];
    (in_train.at(positives[sample.origin[i]]) ? train : test).push_back({n.source, n.target, false});
  }
  for (const auto& [path, list] : {std::pair{a.train_pairs, &train}, std::pair{a.test_pairs, &test}}) {
    auto out = open_out(path);
    io::write_pairs(out, kg, *list);
    out.close();
    m.output(path);
  }
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string relation, graph, paths, valid_paths, types, embeddings, mode = "attention", pooling = "attention",
      out, history;
  std::size_t epochs = 50, patience = 5;
  model::Index relation_dim = 50, type_dim = 150, hidden_dim = 200, scorer_dim = 100, top_k = 3;
  double validation_fraction = 0.1, lr = 1e-3;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a, Manifest& m) {
  const auto kg = io::load_graph(a.graph);
  m.input(a.graph);
  base_relation(kg, a.relation);
  model::ModelConfig cfg;
  cfg.relation_dim = a.relation_dim;
  cfg.type_dim = a.type_dim;
  cfg.hidden_dim = a.hidden_dim;
  cfg.scorer_dim = a.scorer_dim;
  cfg.top_k = a.top_k;
  cfg.selector = model::parse_type_selector(a.mode);
  cfg.pooling = model::parse_pooling(a.pooling);

  types::TypeHierarchy hierarchy;
  if (!a.types.empty()) {
    hierarchy = load_types(a.types);
    m.input(a.types);
  } else if (cfg.uses_types()) {
    throw ContractError("--types is required unless --mode none");
  }
  std::optional<types::PretrainedTypeEmbeddings> pretrained;
  if (!a.embeddings.empty()) {
    if (!cfg.uses_types()) throw ContractError("--type-embeddings needs a type-aware mode");
    auto in = open_in(a.embeddings);
    m.input(a.embeddings);
    pretrained = types::load_pretrained_type_embeddings(in, hierarchy.types(), static_cast<std::size_t>(cfg.type_dim),
                                                        a.seed);
    if (pretrained->needs_projection) cfg.pretrained_dim = static_cast<model::Index>(pretrained->file_dim);
    if (!pretrained->missing.empty()) {
      std::cerr << "warning: " << pretrained->missing.size() << " type(s) absent from the embedding file\n";
    }
  }

  train::RelationDataset data;
  data.relation = kg.relations().at(a.relation);
  data.train = load_paths(a.paths, kg);
  m.input(a.paths);
  if (!a.valid_paths.empty()) {
    data.validation = load_paths(a.valid_paths, kg);
    m.input(a.valid_paths);
  }
  model::ModelParams params(cfg, kg.relation_count(), hierarchy.type_count(), a.seed);
  if (pretrained) params.set_type_table(pretrained->table);
  train::TrainConfig tc;
  tc.max_epochs = a.epochs;
  tc.patience = a.patience;
  tc.validation_fraction = a.validation_fraction;
  tc.seed = a.seed;
  tc.adam.lr = a.lr;
  m.seed("train", a.seed);

  const auto result = train::train_relation_model(data, hierarchy.bind(kg.entities()), std::move(params), tc);
  if (result.history.dropped_train > 0) {
    std::cerr << "warning: dropped " << result.history.dropped_train << " training pair(s) without paths\n";
  }
  {
    auto out = open_out(a.out);
    model::write_model(out, result.params, a.relation);
  }
  m.output(a.out);
  const auto history_path = a.history.empty() ? a.out + ".history" : a.history;
  {
    auto out = open_out(history_path);
    train::write_history(out, result.history);
  }
  m.output(history_path);
  const auto& best = result.history.epochs.at(result.history.best_epoch - 1);
  std::cerr << "epochs=" << result.history.epochs.size() << " best_epoch=" << result.history.best_epoch
            << " val_acc=" << best.validation_accuracy << '\n';
  return 0;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string graph, types, out;
  std::vector<std::string> models, paths;
};

int run_eval(const EvalArgs& a, Manifest& m) {
  if (a.models.size() != a.paths.size()) throw ContractError("give one --paths file per --model");
  const auto kg = io::load_graph(a.graph);
  m.input(a.graph);
  types::TypeHierarchy hierarchy;
  if (!a.types.empty()) {
    hierarchy = load_types(a.types);
    m.input(a.types);
  }
  const auto entity_types = hierarchy.bind(kg.entities());
  eval::EvalReport report;
  report.dataset_id = a.graph;
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    auto in = open_in(a.models[i]);
    m.input(a.models[i]);
    const auto loaded = model::read_model(in);
    if (loaded.params.config().uses_types() && loaded.params.type_count() != hierarchy.type_count()) {
      throw ContractError("model '" + a.models[i] + "' was trained with a different type vocabulary");
    }
    if (loaded.params.relation_count() != kg.relation_count()) {
      throw ContractError("model '" + a.models[i] + "' was trained on a different relation vocabulary");
    }
    const auto sets = load_paths(a.paths[i], kg);
    m.input(a.paths[i]);
    if (sets.empty()) throw ContractError("paths file '" + a.paths[i] + "' holds no pairs");
    std::vector<eval::ScoredLabel> scored;
    std::size_t zero = 0;
    const auto scores = pipeline::score_pairs(loaded.params, sets, entity_types);
    for (std::size_t k = 0; k < sets.size(); ++k) {
      if (sets[k].paths.paths.empty()) ++zero;
      scored.push_back({scores[k], sets[k].label});
    }
    report.relations.push_back(eval::evaluate_relation(loaded.relation, scored, zero));
    report.model_id += (i ? "," : "") + fnv1a(io::read_file(a.models[i]));
  }
  if (a.out.empty()) {
    eval::write_report(std::cout, report);
  } else {
    auto out = open_out(a.out);
    eval::write_report(out, report);
    out.close();
    m.output(a.out);
  }
  return 0;
}

// ---- compare --------------------------------------------------------------

struct CompareArgs {
  std::string a, b, out;
};

int run_compare(const CompareArgs& a, Manifest& m) {
  auto ia = open_in(a.a);
  auto ib = open_in(a.b);
  m.input(a.a);
  m.input(a.b);
  const auto c = eval::compare_reports(eval::read_report(ia), eval::read_report(ib));
  if (a.out.empty()) {
    eval::write_comparison(std::cout, c);
  } else {
    auto out = open_out(a.out);
    eval::write_comparison(out, c);
    out.close();
    m.output(a.out);
  }
  return 0;
}

// ---- analyze-patterns -----------------------------------------------------

struct PatternArgs {
  std::string graph, types, train_paths, test_paths, selector = "specific", model, out;
};

int run_patterns(const PatternArgs& a, Manifest& m) {
  const auto kg = io::load_graph(a.graph);
  m.input(a.graph);
  const auto hierarchy = load_types(a.types);
  m.input(a.types);
  const auto entity_types = hierarchy.bind(kg.entities());
  std::optional<model::LoadedModel> loaded;
  pattern::PatternSelector selector;
  if (a.selector == "specific") {
    selector = pattern::PatternSelector::specific;
  } else if (a.selector == "abstract") {
    selector = pattern::PatternSelector::abstract;
  } else if (a.selector == "attention") {
    selector = pattern::PatternSelector::attention;
    if (a.model.empty()) throw ContractError("--selector attention needs --model");
    auto in = open_in(a.model);
    m.input(a.model);
    loaded = model::read_model(in);
    if (loaded->params.type_count() != hierarchy.type_count()) {
      throw ContractError("model was trained with a different type vocabulary");
    }
  } else {
    throw ContractError("unknown selector '" + a.selector + "'");
  }
  auto count = [&](const std::string& file) {
    pattern::PatternCounts counts;
    for (const auto& s : load_paths(file, kg)) {
      if (selector == pattern::PatternSelector::attention) {
        if (s.paths.paths.empty()) continue;
        for (const auto& p : pattern::attention_patterns(loaded->params, s.paths, entity_types)) {
          pattern::add_occurrence(counts, p, s.label);
        }
      } else {
        for (const auto& p : s.paths.paths) {
          pattern::add_occurrence(counts, pattern::extract_pattern(p, entity_types, selector), s.label);
        }
      }
    }
    m.input(file);
    return counts;
  };
  const auto stats = pattern::summarize(count(a.train_paths), count(a.test_paths));
  if (a.out.empty()) {
    pattern::write_stats(std::cout, stats, hierarchy.types(), kg.relations());
  } else {
    auto out = open_out(a.out);
    pattern::write_stats(out, stats, hierarchy.types(), kg.relations());
    out.close();
    m.output(a.out);
  }
  return 0;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  synth::SynthSpec spec;
  std::string out;
  std::size_t max_len = 2, max_paths = 0;
};

int run_synth(const SynthArgs& a, Manifest& m) {
  const auto corpus = synth::generate(a.spec);
  m.seed("synth", a.spec.seed);
  synth::write_corpus(a.out, corpus);
  const fs::path dir(a.out);
  // Paths are extracted from the written files so they use the same vocabulary a
  // later run will see.
  const auto kg = io::load_graph((dir / "triples.tsv").string());
  const auto r = base_relation(kg, std::string(synth::kTargetRelation));
  pipeline::ExtractConfig cfg;
  cfg.max_len = a.max_len;
  cfg.max_paths = a.max_paths;
  cfg.seed = a.spec.seed;
  cfg.threads = pipeline::thread_limit();
  for (const auto* name : {"train", "test"}) {
    auto in = open_in((dir / (std::string(name) + "_pairs.tsv")).string());
    const auto pairs = io::read_pairs(in, kg);
    const auto sets = pipeline::extract_labeled_paths(kg, pairs, r, cfg);
    auto out = open_out((dir / (std::string(name) + ".paths")).string());
    io::write_paths(out, kg, sets);
  }
  for (const auto* f : {"triples.tsv", "types.tsv", "train_pairs.tsv", "test_pairs.tsv", "train.paths", "test.paths"}) {
    m.output((dir / f).string());
  }
  std::cerr << "entities=" << corpus.graph.entity_count() << " triples=" << corpus.graph.edge_count()
            << " train=" << corpus.train.size() << " test=" << corpus.test.size() << '\n';
  return 0;
}

// ---- grad-check -----------------------------------------------------------

struct GradArgs {
  std::uint64_t seed = 1;
  std::vector<std::string> selectors{"attention", "specific", "abstract"};
  std::vector<std::string> poolings{"attention", "logsumexp"};
  double eps = 1e-2;
  double tolerance = 1e-4;
};

int run_grad_check(const GradArgs& a, Manifest& m) {
  m.seed("grad_check", a.seed);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& s : a.selectors) {
    for (const auto& p : a.poolings) {
      pipeline::GradCheckCase c;
      c.selector = model::parse_type_selector(s);
      c.pooling = model::parse_pooling(p);
      c.seed = a.seed;
      const auto r = pipeline::model_gradient_check(c, a.eps);
      std::cout << "selector=" << s << " pooling=" << p << " max_rel_error=" << r.max_rel_error
                << " analytic=" << r.worst_analytic << " numeric=" << r.worst_numeric
                << " tensor=" << r.worst_param << " coordinates=" << r.coordinates << '\n';
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        worst_name = r.worst_param;
      }
    }
  }
  std::cout << "max_rel_error=" << worst << " tensor=" << worst_name << '\n';
  return worst < a.tolerance ? 0 : 2;
}

// ---- stats ----------------------------------------------------------------

struct StatsArgs {
  std::string graph, types;
  std::vector<std::string> paths;
};

int run_stats(const StatsArgs& a, Manifest& m) {
  const auto kg = io::load_graph(a.graph);
  m.input(a.graph);
  std::size_t instances = 0, paths = 0, zero = 0, max_len = 0, total_len = 0;
  for (const auto& file : a.paths) {
    m.input(file);
    for (const auto& s : load_paths(file, kg)) {
      ++instances;
      if (s.paths.paths.empty()) ++zero;
      for (const auto& p : s.paths.paths) {
        ++paths;
        total_len += p.length();
        max_len = std::max(max_len, p.length());
      }
    }
  }
  if (instances == 0) std::cerr << "warning: no instances in the paths input\n";
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  std::cout << "entities=" << kg.entity_count() << '\n'
            << "relations=" << kg.base_relation_count() << '\n'
            << "triples=" << kg.base_triples().size() << '\n'
            << "instances=" << instances << '\n'
            << "zero_path_instances=" << zero << '\n'
            << "paths=" << paths << '\n'
            << "avg_path_length=" << fmt(ratio(total_len, paths)) << '\n'
            << "max_path_length=" << max_len << '\n'
            << "avg_paths_per_instance=" << fmt(ratio(paths, instances)) << '\n';
  if (!a.types.empty()) {
    const auto h = load_types(a.types);
    m.input(a.types);
    std::cout << "typed_entities=" << h.entities().size() << '\n'
              << "types=" << h.type_count() << '\n'
              << "avg_type_height=" << fmt(h.entities().empty() ? 0.0 : h.mean_height()) << '\n'
              << "max_type_height=" << h.max_height() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attentive path ranking over knowledge graphs"};
  app.require_subcommand(1);
  Common common;

  BuildGraphArgs bg;
  auto* c_bg = app.add_subcommand("build-graph", "Ingest triples and write a graph checkpoint");
  c_bg->add_option("--triples", bg.triples, "Triples file")->required();
  c_bg->add_option("--out", bg.out, "Graph checkpoint")->required();

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract-paths", "Enumerate paths for labeled pairs");
  c_ex->add_option("--graph", ex.graph, "Graph checkpoint or triples file")->required();
  c_ex->add_option("--pairs", ex.pairs, "Pairs file")->required();
  c_ex->add_option("--exclude-direct", ex.exclude, "Relation whose direct edges are withheld")->required();
  c_ex->add_option("--max-len", ex.max_len, "Maximum path length")->capture_default_str()->check(CLI::Range(1, 8));
  c_ex->add_option("--max-paths", ex.max_paths, "Subsample cap per pair (0 keeps all)")->capture_default_str();
  c_ex->add_option("--seed", ex.seed, "Subsampling seed")->capture_default_str();
  c_ex->add_option("--out", ex.out, "Paths file")->required();

  NegArgs ng;
  auto* c_ng = app.add_subcommand("sample-negatives", "PPR-ranked corrupted-target negatives");
  c_ng->add_option("--graph", ng.graph, "Graph checkpoint or triples file")->required();
  c_ng->add_option("--relation", ng.relation, "Target relation")->required();
  c_ng->add_option("--seed", ng.seed, "Seed")->capture_default_str();
  c_ng->add_option("--restart", ng.restart, "PPR restart probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c_ng->add_option("--out", ng.out, "Negatives file")->required();
  c_ng->add_option("--train-pairs", ng.train_pairs, "Also write labeled train pairs here");
  c_ng->add_option("--test-pairs", ng.test_pairs, "Also write labeled test pairs here");
  c_ng->add_option("--split", ng.split, "Train share of positives")->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train one relation's model");
  c_tr->add_option("--relation", tr.relation, "Target relation")->required();
  c_tr->add_option("--graph", tr.graph, "Graph checkpoint or triples file")->required();
  c_tr->add_option("--paths", tr.paths, "Training paths file")->required();
  c_tr->add_option("--valid-paths", tr.valid_paths, "Validation paths (default: carved from training)");
  c_tr->add_option("--types", tr.types, "Types file");
  c_tr->add_option("--type-embeddings", tr.embeddings, "Pretrained type vectors");
  c_tr->add_option("--mode", tr.mode, "attention|specific|abstract|none")->capture_default_str();
  c_tr->add_option("--pooling", tr.pooling, "attention|logsumexp|average|max|topk")->capture_default_str();
  c_tr->add_option("--epochs", tr.epochs, "Maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
  c_tr->add_option("--patience", tr.patience, "Early-stopping patience")->capture_default_str();
  c_tr->add_option("--validation-fraction", tr.validation_fraction, "Share of train carved for validation")
      ->capture_default_str();
  c_tr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  c_tr->add_option("--relation-dim", tr.relation_dim, "Relation embedding size")->capture_default_str();
  c_tr->add_option("--type-dim", tr.type_dim, "Type embedding size")->capture_default_str();
  c_tr->add_option("--hidden-dim", tr.hidden_dim, "LSTM hidden size")->capture_default_str();
  c_tr->add_option("--scorer-dim", tr.scorer_dim, "Attention scorer size")->capture_default_str();
  c_tr->add_option("--top-k", tr.top_k, "K for top-k pooling")->capture_default_str();
  c_tr->add_option("--seed", tr.seed, "Seed")->capture_default_str();
  c_tr->add_option("--out", tr.out, "Model checkpoint")->required();
  c_tr->add_option("--history", tr.history, "History file (default: <out>.history)");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Accuracy, AP and MAP over test paths");
  c_ev->add_option("--graph", ev.graph, "Graph checkpoint or triples file")->required();
  c_ev->add_option("--types", ev.types, "Types file");
  c_ev->add_option("--model", ev.models, "Model checkpoint (repeat per relation)")->required();
  c_ev->add_option("--paths", ev.paths, "Test paths (one per --model, same order)")->required();
  c_ev->add_option("--out", ev.out, "Report file (default: stdout)");

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Paired t-test between two reports");
  c_cmp->add_option("--report-a", cmp.a, "First report")->required();
  c_cmp->add_option("--report-b", cmp.b, "Second report")->required();
  c_cmp->add_option("--out", cmp.out, "Output file (default: stdout)");

  PatternArgs pa;
  auto* c_pa = app.add_subcommand("analyze-patterns", "Pattern discriminativeness and generalizability");
  c_pa->add_option("--graph", pa.graph, "Graph checkpoint or triples file")->required();
  c_pa->add_option("--types", pa.types, "Types file")->required();
  c_pa->add_option("--train-paths", pa.train_paths, "Training paths")->required();
  c_pa->add_option("--test-paths", pa.test_paths, "Test paths")->required();
  c_pa->add_option("--selector", pa.selector, "specific|abstract|attention")->capture_default_str();
  c_pa->add_option("--model", pa.model, "Model checkpoint for --selector attention");
  c_pa->add_option("--out", pa.out, "Stats file (default: stdout)");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Generate a planted-rule corpus");
  c_sy->add_option("--seed", sy.spec.seed, "Seed")->capture_default_str();
  c_sy->add_option("--out", sy.out, "Output directory")->required();
  c_sy->add_option("--sources", sy.spec.sources, "Source entities")->capture_default_str();
  c_sy->add_option("--middles", sy.spec.middles, "Middle entities")->capture_default_str();
  c_sy->add_option("--targets", sy.spec.targets, "Target entities")->capture_default_str();
  c_sy->add_option("--sources-per-middle", sy.spec.sources_per_middle, "Owners per middle")->capture_default_str();
  c_sy->add_option("--depth", sy.spec.depth, "Middle hierarchy depth")->capture_default_str();
  c_sy->add_option("--ambiguous-fraction", sy.spec.ambiguous_fraction, "Share of middles behind 'stored_at'")
      ->capture_default_str();
  c_sy->add_option("--train-ratio", sy.spec.train_ratio, "Train share per label")->capture_default_str();
  c_sy->add_option("--max-len", sy.max_len, "Maximum path length")->capture_default_str()->check(CLI::Range(1, 8));
  c_sy->add_option("--max-paths", sy.max_paths, "Subsample cap per pair (0 keeps all)")->capture_default_str();

  GradArgs gc;
  auto* c_gc = app.add_subcommand("grad-check", "Finite-difference check of the full model");
  c_gc->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  c_gc->add_option("--selector", gc.selectors, "Selectors to check")->capture_default_str();
  c_gc->add_option("--pooling", gc.poolings, "Poolings to check")->capture_default_str();
  c_gc->add_option("--eps", gc.eps, "Initial finite-difference step")->capture_default_str();
  c_gc->add_option("--tolerance", gc.tolerance, "Exit 2 when the error reaches this")->capture_default_str();

  StatsArgs st;
  auto* c_st = app.add_subcommand("stats", "Corpus statistics");
  c_st->add_option("--graph", st.graph, "Graph checkpoint or triples file")->required();
  c_st->add_option("--paths", st.paths, "Paths file(s)");
  c_st->add_option("--types", st.types, "Types file");

  for (auto* cmd : app.get_subcommands({})) add_manifest_flag(cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  Manifest manifest(name, std::vector<std::string>(argv, argv + argc));
  try {
    int code = 0;
    std::string out;
    if (cmd == c_bg) {
      code = run_build_graph(bg, manifest), out = bg.out;
    } else if (cmd == c_ex) {
      code = run_extract(ex, manifest), out = ex.out;
    } else if (cmd == c_ng) {
      code = run_negatives(ng, manifest), out = ng.out;
    } else if (cmd == c_tr) {
      code = run_train(tr, manifest), out = tr.out;
    } else if (cmd == c_ev) {
      code = run_eval(ev, manifest), out = ev.out;
    } else if (cmd == c_cmp) {
      code = run_compare(cmp, manifest), out = cmp.out;
    } else if (cmd == c_pa) {
      code = run_patterns(pa, manifest), out = pa.out;
    } else if (cmd == c_sy) {
      code = run_synth(sy, manifest), out = sy.out;
    } else if (cmd == c_gc) {
      code = run_grad_check(gc, manifest);
    } else if (cmd == c_st) {
      code = run_stats(st, manifest);
    }
    manifest.write(manifest_path(common, out, name));
    return code;
  } catch (const std::exception& e) {
    std::cerr << "apr " << name << ": " << e.what() << '\n';
    return 2;
  }
}
