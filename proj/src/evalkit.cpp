#include "apr/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "apr/detail/text.hpp"
#include "apr/error.hpp"

namespace apr::eval {

double accuracy(std::span<const double> probabilities, std::span<const bool> labels) {
  if (probabilities.size() != labels.size()) throw ContractError("accuracy: length mismatch");
  if (probabilities.empty()) throw ContractError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((probabilities[i] >= 0.5) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double average_precision(std::span<const ScoredLabel> scored) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!scored[order[rank]].label) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits == 0) throw ContractError("average precision needs at least one positive");
  return sum / static_cast<double>(hits);
}

double mean_average_precision(std::span<const double> aps) {
  if (aps.empty()) throw ContractError("MAP over an empty list");
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

namespace {

double t_density(double x, double nu, double log_norm) {
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(F f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 30);
}

constexpr double kQuadTol = 1e-10;

}  // namespace

double student_t_two_sided_p(double t, double df) {
  if (!(df >= 1.0)) throw ContractError("Student-t needs df >= 1");
  if (std::isnan(t)) throw NumericError("Student-t p-value of NaN");
  const double x = std::abs(t);
  if (std::isinf(x)) return 0.0;
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI);
  double p;
  if (x <= 1.0) {
    p = 1.0 - 2.0 * integrate([&](double u) { return t_density(u, df, log_norm); }, 0.0, x, kQuadTol);
  } else {
    // Tail integral with x = |t| / u, which maps [|t|, inf) onto (0, 1].
    const double limit_at_zero = df == 1.0 ? std::exp(log_norm) * df / x : 0.0;
    auto g = [&](double u) {
      if (u == 0.0) return limit_at_zero;
      const double y = x / u;
      return t_density(y, df, log_norm) * x / (u * u);
    };
    p = 2.0 * integrate(g, 0.0, 1.0, kQuadTol);
  }
  return std::clamp(p, 0.0, 1.0);
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("paired t-test: length mismatch");
  if (a.size() < 2) throw ContractError("paired t-test needs at least 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (const double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTest out;
  out.df = n - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      out.t = 0.0;
      out.p = 1.0;
    } else {
      out.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
      out.p = 0.0;
    }
    return out;
  }
  out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p = student_t_two_sided_p(out.t, static_cast<double>(out.df));
  return out;
}

double EvalReport::map() const {
  if (relations.empty()) throw ContractError("MAP of an empty report");
  std::vector<double> aps;
  for (const auto& r : relations) aps.push_back(r.ap);
  return mean_average_precision(aps);
}

double EvalReport::mean_accuracy() const {
  if (relations.empty()) throw ContractError("mean accuracy of an empty report");
  double s = 0.0;
  for (const auto& r : relations) s += r.accuracy;
  return s / static_cast<double>(relations.size());
}

RelationResult evaluate_relation(std::string relation, std::span<const ScoredLabel> scored,
                                 std::size_t n_zero_path) {
  std::vector<double> probs(scored.size());
  auto labels = std::make_unique<bool[]>(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    probs[i] = scored[i].score;
    labels[i] = scored[i].label;
  }
  RelationResult r;
  r.relation = std::move(relation);
  r.accuracy = accuracy(probs, std::span<const bool>(labels.get(), scored.size()));
  r.ap = average_precision(scored);
  r.n_test = scored.size();
  r.n_zero_path = n_zero_path;
  return r;
}

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::map<std::string, std::string, std::less<>> parse_fields(std::string_view line, std::size_t line_no) {
  std::map<std::string, std::string, std::less<>> out;
  for (const auto f : detail::split(line, '\t')) {
    const auto eq = f.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value, got '" + std::string(f) + "'", line_no);
    out.emplace(std::string(f.substr(0, eq)), std::string(f.substr(eq + 1)));
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string, std::less<>>& m, std::string_view key,
                         std::size_t line_no) {
  const auto it = m.find(key);
  if (it == m.end()) throw ParseError("missing field '" + std::string(key) + "'", line_no);
  return it->second;
}

}  // namespace

void write_report(std::ostream& out, const EvalReport& report) {
  out << "APRREPORT 1\n";
  out << "model=" << report.model_id << "\tdataset=" << report.dataset_id << '\n';
  for (const auto& r : report.relations) {
    out << "relation=" << r.relation << "\taccuracy=" << num(r.accuracy) << "\tap=" << num(r.ap)
        << "\tn_test=" << r.n_test << "\tn_zero_path=" << r.n_zero_path << '\n';
  }
  out << "map=" << num(report.map()) << "\tmean_accuracy=" << num(report.mean_accuracy()) << '\n';
}

EvalReport read_report(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no) || line != "APRREPORT 1") {
    throw ParseError("missing 'APRREPORT 1' header", line_no);
  }
  EvalReport report;
  bool saw_aggregate = false;
  while (detail::next_line(in, line, line_no)) {
    if (detail::is_blank(line)) continue;
    const auto f = parse_fields(line, line_no);
    if (f.contains("relation")) {
      RelationResult r;
      r.relation = field(f, "relation", line_no);
      r.accuracy = detail::parse_number<double>(field(f, "accuracy", line_no), line_no);
      r.ap = detail::parse_number<double>(field(f, "ap", line_no), line_no);
      r.n_test = detail::parse_number<std::size_t>(field(f, "n_test", line_no), line_no);
      r.n_zero_path = detail::parse_number<std::size_t>(field(f, "n_zero_path", line_no), line_no);
      report.relations.push_back(std::move(r));
    } else if (f.contains("model")) {
      report.model_id = field(f, "model", line_no);
      report.dataset_id = field(f, "dataset", line_no);
    } else if (f.contains("map")) {
      saw_aggregate = true;
    } else {
      throw ParseError("unrecognised report line", line_no);
    }
  }
  if (!saw_aggregate) throw ParseError("report has no aggregate line", line_no);
  return report;
}

Comparison compare_reports(const EvalReport& a, const EvalReport& b) {
  std::map<std::string, const RelationResult*> bmap;
  for (const auto& r : b.relations) bmap.emplace(r.relation, &r);
  if (bmap.size() != a.relations.size()) throw ContractError("reports cover different relation sets");
  Comparison c;
  std::vector<double> acc_a, acc_b, ap_a, ap_b;
  for (const auto& r : a.relations) {
    const auto it = bmap.find(r.relation);
    if (it == bmap.end()) throw ContractError("relation '" + r.relation + "' missing from the second report");
    c.relations.push_back(r.relation);
    acc_a.push_back(r.accuracy);
    acc_b.push_back(it->second->accuracy);
    ap_a.push_back(r.ap);
    ap_b.push_back(it->second->ap);
  }
  c.accuracy = paired_t_test(acc_a, acc_b);
  c.ap = paired_t_test(ap_a, ap_b);
  return c;
}

void write_comparison(std::ostream& out, const Comparison& c) {
  out << "APRCOMPARE 1\n";
  out << "n_relations=" << c.relations.size() << '\n';
  out << "metric=accuracy\tt=" << num(c.accuracy.t) << "\tdf=" << c.accuracy.df << "\tp=" << num(c.accuracy.p)
      << '\n';
  out << "metric=ap\tt=" << num(c.ap.t) << "\tdf=" << c.ap.df << "\tp=" << num(c.ap.p) << '\n';
}

}  // namespace apr::eval
