#include "apr/io.hpp"

#include <fstream>
#include <sstream>

#include "apr/detail/text.hpp"
#include "apr/error.hpp"

namespace apr::io {

namespace {

const std::string& checked_token(const std::string& tok) {
  if (tok.find_first_of(" \t\n") != std::string::npos) {
    throw ContractError("token '" + tok + "' contains whitespace and cannot be written to a paths file");
  }
  return tok;
}

bool parse_label(std::string_view s, std::size_t line_no) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError("label must be 0 or 1, got '" + std::string(s) + "'", line_no);
}

std::uint32_t lookup(const kg::Vocabulary& v, std::string_view tok, std::size_t line_no) {
  if (auto id = v.find(tok)) return *id;
  throw ParseError("unknown token '" + std::string(tok) + "'", line_no);
}

}  // namespace

std::vector<LabeledPair> read_pairs(std::istream& in, const kg::KnowledgeGraph& kg) {
  std::vector<LabeledPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line, line_no)) {
    if (detail::is_blank(line) || line.front() == '#') continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 3) throw ParseError("expected 'source<TAB>target<TAB>label'", line_no);
    out.push_back({lookup(kg.entities(), f[0], line_no), lookup(kg.entities(), f[1], line_no),
                   parse_label(f[2], line_no)});
  }
  return out;
}

void write_pairs(std::ostream& out, const kg::KnowledgeGraph& kg, std::span<const LabeledPair> pairs) {
  for (const auto& p : pairs) {
    out << kg.entities().token(p.source) << '\t' << kg.entities().token(p.target) << '\t'
        << (p.label ? 1 : 0) << '\n';
  }
}

void write_paths(std::ostream& out, const kg::KnowledgeGraph& kg,
                 std::span<const path::LabeledPathSet> sets) {
  const auto& ents = kg.entities();
  const auto& rels = kg.relations();
  for (const auto& s : sets) {
    out << "PAIR " << checked_token(ents.token(s.paths.source)) << ' '
        << checked_token(ents.token(s.paths.target)) << ' ' << (s.label ? 1 : 0) << '\n';
    for (const auto& p : s.paths.paths) {
      out << checked_token(ents.token(p.entities[0]));
      for (std::size_t t = 0; t < p.relations.size(); ++t) {
        out << ' ' << checked_token(rels.token(p.relations[t])) << ' '
            << checked_token(ents.token(p.entities[t + 1]));
      }
      out << '\n';
    }
  }
}

std::vector<path::LabeledPathSet> read_paths(std::istream& in, const kg::KnowledgeGraph& kg) {
  std::vector<path::LabeledPathSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line, line_no)) {
    if (detail::is_blank(line)) continue;
    const auto f = detail::split_ws(line);
    if (f[0] == "PAIR") {
      if (f.size() != 4) throw ParseError("expected 'PAIR source target label'", line_no);
      path::LabeledPathSet s;
      s.paths.source = lookup(kg.entities(), f[1], line_no);
      s.paths.target = lookup(kg.entities(), f[2], line_no);
      s.label = parse_label(f[3], line_no);
      out.push_back(std::move(s));
      continue;
    }
    if (out.empty()) throw ParseError("path line before any PAIR header", line_no);
    if (f.size() < 3 || f.size() % 2 == 0) {
      throw ParseError("path must alternate entities and relations", line_no);
    }
    path::Path p;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i % 2 == 0) {
        p.entities.push_back(lookup(kg.entities(), f[i], line_no));
      } else {
        p.relations.push_back(lookup(kg.relations(), f[i], line_no));
      }
    }
    auto& current = out.back().paths;
    if (p.entities.front() != current.source || p.entities.back() != current.target) {
      throw ParseError("path endpoints do not match the PAIR header", line_no);
    }
    if (!path::is_valid_path(kg, p)) throw ParseError("path is not a walk in the graph", line_no);
    current.paths.push_back(std::move(p));
  }
  return out;
}

void write_negatives(std::ostream& out, const kg::KnowledgeGraph& kg, std::span<const kg::Triple> negatives,
                     std::uint64_t seed, double restart) {
  out << "# seed=" << seed << " restart=" << restart;
  if (!negatives.empty()) out << " relation=" << kg.relations().token(negatives.front().relation);
  out << '\n';
  for (const auto& t : negatives) {
    out << kg.entities().token(t.source) << '\t' << kg.relations().token(t.relation) << '\t'
        << kg.entities().token(t.target) << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

kg::KnowledgeGraph load_graph(const std::string& path) {
  std::istringstream in(read_file(path));
  if (in.str().rfind("APRGRAPH 1", 0) == 0) {
    auto g = kg::read_graph(in);
    return g.augmented() ? g : g.with_reverse_relations();
  }
  return kg::ingest_triples(in).with_reverse_relations();
}

}  // namespace apr::io
