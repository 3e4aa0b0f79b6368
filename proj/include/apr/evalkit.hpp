#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace apr::eval {

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

/// Fraction of predictions on the correct side of 0.5; a probability of exactly 0.5
/// counts as positive.
double accuracy(std::span<const double> probabilities, std::span<const bool> labels);

/// Mean over positives of precision at their rank, ranking by descending score with
/// ties kept in input order.
double average_precision(std::span<const ScoredLabel> scored);

double mean_average_precision(std::span<const double> aps);

struct TTest {
  double t = 0.0;
  std::size_t df = 0;
  double p = 1.0;
};

/// Two-sided paired t-test on a_i - b_i. Zero-variance differences give t = 0, p = 1
/// when the mean is zero and t = +-inf, p = 0 otherwise.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees of
/// freedom, by adaptive Simpson integration of the density.
double student_t_two_sided_p(double t, double df);

struct RelationResult {
  std::string relation;
  double accuracy = 0.0;
  double ap = 0.0;
  std::size_t n_test = 0;
  std::size_t n_zero_path = 0;
};

struct EvalReport {
  std::vector<RelationResult> relations;
  std::string model_id;
  std::string dataset_id;

  double map() const;
  double mean_accuracy() const;
};

/// Scores a relation's test list. Pairs without paths are expected to carry score 0.
RelationResult evaluate_relation(std::string relation, std::span<const ScoredLabel> scored,
                                 std::size_t n_zero_path);

/// "APRREPORT 1" then key=value records, one relation per line, and an aggregate line.
void write_report(std::ostream& out, const EvalReport& report);
EvalReport read_report(std::istream& in);

struct Comparison {
  std::vector<std::string> relations;
  TTest accuracy;
  TTest ap;
};

/// Pairs the two reports by relation name; both must cover the same relations.
Comparison compare_reports(const EvalReport& a, const EvalReport& b);
void write_comparison(std::ostream& out, const Comparison& c);

}  // namespace apr::eval
