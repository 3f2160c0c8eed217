#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtlab/rng.hpp"
#include "mtlab/tasksim.hpp"
#include "oracles.hpp"

using namespace mtlab;
using namespace mtlab::tasksim;

namespace {

const std::vector<std::string> kLabels5 = {"O", "PER", "LOC", "ORG", "MISC"};

// Skewed five-class sequence, roughly entity-tag shaped.
std::vector<int> base_labels(std::size_t n, std::uint64_t seed) {
  const double probs[5] = {0.62, 0.13, 0.11, 0.09, 0.05};
  SplitRng rng(seed);
  std::vector<int> out(n);
  for (auto& x : out) {
    double u = rng.next_double(), acc = 0.0;
    x = 4;
    for (int k = 0; k < 5; ++k) {
      acc += probs[k];
      if (u < acc) {
        x = k;
        break;
      }
    }
  }
  return out;
}

std::vector<int> random_labels(SplitRng& rng, std::size_t n, int classes) {
  std::vector<int> out(n);
  for (auto& x : out) x = int(rng.next_below(std::size_t(classes)));
  return out;
}

}  // namespace

TEST_CASE("generate_label_matrix endpoints and interior") {
  auto id = generate_label_matrix(kLabels5, 1.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(id.entries[i][j] == (i == j ? 1.0 : 0.0));

  auto indep = generate_label_matrix(kLabels5, 0.2);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(indep.entries[i][j] == doctest::Approx(0.2));

  auto mid = generate_label_matrix(kLabels5, 0.6);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(mid.entries[i][j] == doctest::Approx(i == j ? 0.6 : 0.1));

  // column-stochastic
  for (std::size_t j = 0; j < 5; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) sum += mid.entries[i][j];
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("generate_label_matrix rejects alpha outside [1/c, 1]") {
  CHECK_THROWS_AS(generate_label_matrix(kLabels5, 0.1), AlphaOutOfRange);
  CHECK_THROWS_AS(generate_label_matrix(kLabels5, 1.1), AlphaOutOfRange);
  CHECK_NOTHROW(generate_label_matrix(kLabels5, 0.2));
  CHECK_NOTHROW(generate_label_matrix(kLabels5, 1.0));
}

TEST_CASE("simulate_tasks alpha=1 reproduces the real column") {
  auto real = base_labels(400, 3);
  auto ts = simulate_tasks(real, kLabels5, 400, {1.0}, 11);
  REQUIRE(ts.synthetic.size() == 1);
  CHECK(ts.synthetic[0] == ts.real_labels);
  CHECK(std::abs(ts.ami[0] - 1.0) <= 1e-9);
  CHECK(ts.total_tasks == 2);
}

TEST_CASE("simulate_tasks at independence alpha=1/c") {
  auto real = base_labels(5000, 4);
  auto ts = simulate_tasks(real, kLabels5, 5000, {0.2}, 21);
  CHECK(std::abs(ts.ami[0]) <= 0.05);
}

TEST_CASE("simulate_tasks deterministic") {
  auto real = base_labels(300, 5);
  auto a = simulate_tasks(real, kLabels5, 300, {0.7, 0.9}, 99);
  auto b = simulate_tasks(real, kLabels5, 300, {0.7, 0.9}, 99);
  CHECK(a.synthetic == b.synthetic);
  CHECK(a.ami == b.ami);
  auto c = simulate_tasks(real, kLabels5, 300, {0.7, 0.9}, 100);
  CHECK(a.synthetic != c.synthetic);
}

TEST_CASE("simulate_tasks errors") {
  auto real = base_labels(10, 6);
  CHECK_THROWS_AS(simulate_tasks(real, kLabels5, 11, {0.9}, 1), NotEnoughTokens);
  CHECK_THROWS_AS(simulate_tasks(real, kLabels5, 10, {0.1}, 1), AlphaOutOfRange);
}

TEST_CASE("contingency") {
  std::vector<int> u = {0, 0, 1, 1}, v = {0, 1, 0, 1};
  auto t = contingency(u, v);
  for (auto& row : t.counts)
    for (auto cell : row) CHECK(cell == 1);

  auto t2 = contingency(u, u);
  CHECK(t2.counts[0][0] == 2);
  CHECK(t2.counts[1][1] == 2);
  CHECK(t2.counts[0][1] == 0);
  CHECK(t2.counts[1][0] == 0);

  std::vector<int> one = {0};
  CHECK_THROWS_AS(contingency(one, v), LengthMismatch);
  CHECK_THROWS_AS(contingency(std::vector<int>{}, std::vector<int>{}), EmptyInput);
}

TEST_CASE("entropy") {
  std::vector<long long> a1 = {4};
  CHECK(entropy(a1, 4) == 0.0);
  std::vector<long long> a2 = {2, 2};
  CHECK(entropy(a2, 4) == doctest::Approx(std::log(2.0)));
  std::vector<long long> a4 = {1, 1, 1, 1};
  CHECK(entropy(a4, 4) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("mutual_information") {
  std::vector<int> u = {0, 0, 1, 1};
  CHECK(mutual_information(contingency(u, u)) == doctest::Approx(std::log(2.0)));
  std::vector<int> v = {0, 1, 0, 1};
  CHECK(mutual_information(contingency(u, v)) == doctest::Approx(0.0));
}

TEST_CASE("mutual information bounded by min entropy") {
  SplitRng rng(17);
  for (int iter = 0; iter < 200; ++iter) {
    auto r = rng.split(std::uint64_t(iter));
    auto u = random_labels(r, 4 + r.next_below(30), 2 + int(r.next_below(4)));
    auto v = random_labels(r, u.size(), 2 + int(r.next_below(4)));
    auto t = contingency(u, v);
    double mi = mutual_information(t);
    CHECK(mi >= -1e-12);
    CHECK(mi <= std::min(entropy(t.row_sums, t.total), entropy(t.col_sums, t.total)) + 1e-12);
  }
}

TEST_CASE("expected MI matches the closed form on 2x2 uniform margins") {
  std::vector<int> u = {0, 0, 1, 1}, v = {0, 1, 0, 1};
  // all margins 2 with N=4: P(n11=1) = 2/3 giving MI 0, else MI = ln 2
  CHECK(expected_mutual_information(contingency(u, v)) ==
        doctest::Approx(std::log(2.0) / 3.0).epsilon(1e-9));
}

TEST_CASE("expected MI vanishes for single-cluster margins") {
  std::vector<int> u = {0, 0, 0}, v = {0, 0, 0};
  CHECK(expected_mutual_information(contingency(u, v)) == doctest::Approx(0.0));
}

TEST_CASE("expected MI equals the permutation average for small N") {
  SplitRng rng(23);
  for (int iter = 0; iter < 60; ++iter) {
    auto r = rng.split(std::uint64_t(iter));
    std::size_t n = 3 + r.next_below(6);  // N in [3, 8]
    auto u = random_labels(r, n, 2 + int(r.next_below(3)));
    auto v = random_labels(r, n, 2 + int(r.next_below(3)));
    double emi = expected_mutual_information(contingency(u, v));
    double brute = oracles::permutation_mean_mi(u, v);
    CHECK(std::abs(emi - brute) <= 1e-9);
  }
}

TEST_CASE("AMI endpoints and the negative pairing") {
  std::vector<int> u = {0, 0, 1, 1};
  CHECK(std::abs(adjusted_mutual_information(u, u) - 1.0) <= 1e-9);

  std::vector<int> swapped = {1, 1, 0, 0};
  CHECK(std::abs(adjusted_mutual_information(u, swapped) - 1.0) <= 1e-9);

  // MI 0 with EMI ln2/3 drives AMI below zero; reported unclamped.
  std::vector<int> v = {0, 1, 0, 1};
  CHECK(adjusted_mutual_information(u, v) == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("AMI degenerate cases") {
  std::vector<int> flat = {3, 3, 3, 3};
  CHECK(adjusted_mutual_information(flat, flat) == 1.0);
  std::vector<int> u = {0, 1, 0, 1};
  // one side constant: MI = 0, EMI = 0, denominator = H > 0 -> AMI 0
  CHECK(adjusted_mutual_information(u, flat) == doctest::Approx(0.0));
}

TEST_CASE("AMI errors") {
  std::vector<int> u = {0}, v = {0, 1};
  CHECK_THROWS_AS(adjusted_mutual_information(u, v), LengthMismatch);
  CHECK_THROWS_AS(adjusted_mutual_information(std::vector<int>{}, std::vector<int>{}), EmptyInput);
}

TEST_CASE("AMI is exactly symmetric and relabel-invariant") {
  SplitRng rng(31);
  for (int iter = 0; iter < 100; ++iter) {
    auto r = rng.split(std::uint64_t(iter));
    auto u = random_labels(r, 5 + r.next_below(40), 2 + int(r.next_below(4)));
    auto v = random_labels(r, u.size(), 2 + int(r.next_below(4)));
    double a = adjusted_mutual_information(u, v);
    double b = adjusted_mutual_information(v, u);
    CHECK(a == b);  // bitwise
    CHECK(a <= 1.0 + 1e-9);

    // relabel clusters of u: 0 <-> max+1 keeps the partition
    auto u2 = u;
    for (auto& x : u2) x = (x + 7) * 3;
    CHECK(adjusted_mutual_information(u2, v) == a);
  }
}

TEST_CASE("AMI matches the full reference for small inputs") {
  SplitRng rng(37);
  for (int iter = 0; iter < 30; ++iter) {
    auto r = rng.split(std::uint64_t(iter));
    std::size_t n = 3 + r.next_below(6);
    auto u = random_labels(r, n, 2 + int(r.next_below(3)));
    auto v = random_labels(r, n, 2 + int(r.next_below(3)));
    CHECK(adjusted_mutual_information(u, v) ==
          doctest::Approx(oracles::ami_reference(u, v)).epsilon(1e-9));
  }
}

TEST_CASE("measured AMI rises with alpha") {
  const std::vector<double> alphas = {0.2, 0.4, 0.6, 0.8, 0.9, 1.0};
  auto real = base_labels(5000, 12);
  std::vector<double> mean(alphas.size(), 0.0);
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    auto ts = simulate_tasks(real, kLabels5, 5000, alphas, std::uint64_t(1000 + s));
    for (std::size_t t = 0; t < alphas.size(); ++t) mean[t] += ts.ami[t] / seeds;
  }
  for (std::size_t t = 1; t < alphas.size(); ++t) CHECK(mean[t] >= mean[t - 1] - 0.01);
  CHECK(std::abs(mean.front()) <= 0.05);
  CHECK(std::abs(mean.back() - 1.0) <= 1e-9);
}

TEST_CASE("TaskSet JSON round trip") {
  auto real = base_labels(50, 8);
  auto ts = simulate_tasks(real, kLabels5, 50, {0.9, 0.6}, 5);
  auto ts2 = task_set_from_json(to_json(ts));
  CHECK(ts2.real_labels == ts.real_labels);
  CHECK(ts2.synthetic == ts.synthetic);
  CHECK(ts2.ami == ts.ami);
  CHECK(ts2.alphas == ts.alphas);
  CHECK(ts2.labels == ts.labels);
  CHECK(ts2.n == ts.n);
  CHECK(ts2.total_tasks == ts.total_tasks);
  CHECK(to_json(ts2) == to_json(ts));
}
