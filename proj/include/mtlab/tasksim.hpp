#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtlab/errors.hpp"

namespace mtlab::tasksim {

// Column-stochastic conditional distribution P(synthetic label i | real
// label j): alpha on the diagonal, (1 - alpha) / (c - 1) elsewhere.
struct LabelMatrix {
  std::vector<std::string> labels;
  double alpha = 1.0;
  std::vector<std::vector<double>> entries;  // entries[i][j]

  std::size_t size() const { return labels.size(); }
  // The conditional distribution over synthetic labels given real label j.
  std::vector<double> column(std::size_t j) const;
};

// Aligned multitask samples: the real label column plus one simulated
// column per synthetic task, with measured AMI per synthetic task.
struct TaskSet {
  std::vector<std::string> labels;       // legend for the label indices
  std::vector<int> real_labels;          // length n
  std::vector<std::vector<int>> synthetic;
  std::vector<double> alphas;
  std::vector<double> ami;
  std::size_t n = 0;
  std::size_t total_tasks = 1;  // synthetic tasks + the real task
};

struct ContingencyTable {
  std::vector<std::vector<long long>> counts;  // R x C
  std::vector<long long> row_sums;
  std::vector<long long> col_sums;
  long long total = 0;
};

LabelMatrix generate_label_matrix(const std::vector<std::string>& labels, double alpha);

// One synthetic column per alpha, sampled position-wise from the label
// matrix column of the real label. Per-task streams are independent, so the
// result is unchanged by task reordering or parallel generation.
TaskSet simulate_tasks(const std::vector<int>& real_labels, const std::vector<std::string>& labels,
                       std::size_t n, const std::vector<double>& alphas, std::uint64_t seed);

ContingencyTable contingency(std::span<const int> u, std::span<const int> v);

// Entropy of a marginal in nats.
double entropy(std::span<const long long> counts, long long total);

double mutual_information(const ContingencyTable& t);

// Mean mutual information over all permutations of one labeling with fixed
// margins, via the closed-form hypergeometric cell distribution. Uses a
// log-factorial table; raw factorials overflow for totals in the thousands.
double expected_mutual_information(const ContingencyTable& t);

// (I - E{I}) / (max{H(U), H(V)} - E{I}) with natural logs. Both labelings
// constant -> 1.0; otherwise a vanishing denominator -> 0.0. Exactly
// symmetric in (u, v). Small negative values are reported as computed.
double adjusted_mutual_information(std::span<const int> u, std::span<const int> v);

std::string to_json(const TaskSet& ts);
TaskSet task_set_from_json(const std::string& text);

}  // namespace mtlab::tasksim
