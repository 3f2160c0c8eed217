#include "mtlab/tasksim.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "mtlab/rng.hpp"

namespace mtlab::tasksim {

namespace {

// Dense first-appearance relabeling. Makes every downstream quantity
// invariant under cluster renaming, exactly.
std::vector<int> remap(std::span<const int> xs) {
  std::unordered_map<int, int> ids;
  std::vector<int> out;
  out.reserve(xs.size());
  for (int x : xs) {
    auto [it, fresh] = ids.emplace(x, int(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> log_factorials(long long n) {
  std::vector<double> lf(std::size_t(n) + 1, 0.0);
  for (long long k = 1; k <= n; ++k) lf[std::size_t(k)] = lf[std::size_t(k - 1)] + std::log(double(k));
  return lf;
}

}  // namespace

std::vector<double> LabelMatrix::column(std::size_t j) const {
  std::vector<double> col(size());
  for (std::size_t i = 0; i < size(); ++i) col[i] = entries[i][j];
  return col;
}

LabelMatrix generate_label_matrix(const std::vector<std::string>& labels, double alpha) {
  const std::size_t c = labels.size();
  if (c < 2) throw InputError("label matrix needs at least 2 labels");
  const double lo = 1.0 / double(c);
  if (alpha < lo - 1e-12 || alpha > 1.0 + 1e-12)
    throw AlphaOutOfRange("alpha " + std::to_string(alpha) + " outside [1/" + std::to_string(c) +
                          ", 1]");
  LabelMatrix m;
  m.labels = labels;
  m.alpha = alpha;
  const double off = (1.0 - alpha) / double(c - 1);
  m.entries.assign(c, std::vector<double>(c, off));
  for (std::size_t i = 0; i < c; ++i) m.entries[i][i] = alpha;
  return m;
}

TaskSet simulate_tasks(const std::vector<int>& real_labels, const std::vector<std::string>& labels,
                       std::size_t n, const std::vector<double>& alphas, std::uint64_t seed) {
  if (n > real_labels.size())
    throw NotEnoughTokens("requested " + std::to_string(n) + " samples, have " +
                          std::to_string(real_labels.size()));
  const std::size_t c = labels.size();
  for (std::size_t i = 0; i < n; ++i)
    if (real_labels[i] < 0 || std::size_t(real_labels[i]) >= c)
      throw InputError("real label index out of range at position " + std::to_string(i));

  TaskSet ts;
  ts.labels = labels;
  ts.real_labels.assign(real_labels.begin(), real_labels.begin() + long(n));
  ts.alphas = alphas;
  ts.n = n;
  ts.total_tasks = alphas.size() + 1;

  SplitRng root(seed);
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    const LabelMatrix m = generate_label_matrix(labels, alphas[t]);
    SplitRng stream = root.split(t);
    std::vector<int> column(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = stream.next_double();
      const std::size_t j = std::size_t(ts.real_labels[i]);
      double acc = 0.0;
      std::size_t pick = c - 1;
      for (std::size_t k = 0; k < c; ++k) {
        acc += m.entries[k][j];
        if (u < acc) {
          pick = k;
          break;
        }
      }
      column[i] = int(pick);
    }
    ts.ami.push_back(adjusted_mutual_information(ts.real_labels, column));
    ts.synthetic.push_back(std::move(column));
  }
  return ts;
}

ContingencyTable contingency(std::span<const int> u, std::span<const int> v) {
  if (u.empty() || v.empty()) throw EmptyInput("contingency of empty labelings");
  if (u.size() != v.size())
    throw LengthMismatch("labelings differ in length: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  const auto uu = remap(u);
  const auto vv = remap(v);
  const int rows = *std::max_element(uu.begin(), uu.end()) + 1;
  const int cols = *std::max_element(vv.begin(), vv.end()) + 1;

  ContingencyTable t;
  t.counts.assign(std::size_t(rows), std::vector<long long>(std::size_t(cols), 0));
  t.row_sums.assign(std::size_t(rows), 0);
  t.col_sums.assign(std::size_t(cols), 0);
  t.total = (long long)u.size();
  for (std::size_t k = 0; k < uu.size(); ++k) {
    ++t.counts[std::size_t(uu[k])][std::size_t(vv[k])];
    ++t.row_sums[std::size_t(uu[k])];
    ++t.col_sums[std::size_t(vv[k])];
  }
  return t;
}

double entropy(std::span<const long long> counts, long long total) {
  double h = 0.0;
  for (long long a : counts) {
    if (a <= 0) continue;
    const double p = double(a) / double(total);
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const ContingencyTable& t) {
  const double n = double(t.total);
  double mi = 0.0;
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
      const long long nij = t.counts[i][j];
      if (nij <= 0) continue;
      mi += (double(nij) / n) *
            std::log(n * double(nij) / (double(t.row_sums[i]) * double(t.col_sums[j])));
    }
  }
  return mi;
}

double expected_mutual_information(const ContingencyTable& t) {
  const long long n = t.total;
  const auto lf = log_factorials(n);
  const double logn = std::log(double(n));
  double emi = 0.0;
  for (long long a : t.row_sums) {
    for (long long b : t.col_sums) {
      const long long lo = std::max<long long>(1, a + b - n);
      const long long hi = std::min(a, b);
      for (long long m = lo; m <= hi; ++m) {
        const double term = (double(m) / double(n)) *
                            (logn + std::log(double(m)) - std::log(double(a) * double(b)));
        const double logp = lf[std::size_t(a)] + lf[std::size_t(b)] + lf[std::size_t(n - a)] +
                            lf[std::size_t(n - b)] - lf[std::size_t(n)] - lf[std::size_t(m)] -
                            lf[std::size_t(a - m)] - lf[std::size_t(b - m)] -
                            lf[std::size_t(n - a - b + m)];
        emi += term * std::exp(logp);
      }
    }
  }
  return emi;
}

double adjusted_mutual_information(std::span<const int> u, std::span<const int> v) {
  if (u.empty() || v.empty()) throw EmptyInput("AMI of empty labelings");
  if (u.size() != v.size())
    throw LengthMismatch("labelings differ in length: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  // Order the pair canonically so AMI(u, v) and AMI(v, u) run the identical
  // arithmetic and compare equal bit for bit.
  auto uu = remap(u);
  auto vv = remap(v);
  if (std::lexicographical_compare(vv.begin(), vv.end(), uu.begin(), uu.end())) std::swap(uu, vv);

  const ContingencyTable t = contingency(uu, vv);
  const double hu = entropy(t.row_sums, t.total);
  const double hv = entropy(t.col_sums, t.total);
  if (hu == 0.0 && hv == 0.0) return 1.0;

  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t);
  const double denom = std::max(hu, hv) - emi;
  if (denom <= 1e-12) return 0.0;
  return (mi - emi) / denom;
}

std::string to_json(const TaskSet& ts) {
  nlohmann::json j;
  j["labels"] = ts.labels;
  j["n"] = ts.n;
  j["T"] = ts.total_tasks;
  j["alphas"] = ts.alphas;
  j["ami"] = ts.ami;
  j["real"] = ts.real_labels;
  j["synthetic"] = ts.synthetic;
  return j.dump(2) + "\n";
}

TaskSet task_set_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TaskSet ts;
  ts.labels = j.at("labels").get<std::vector<std::string>>();
  ts.n = j.at("n").get<std::size_t>();
  ts.total_tasks = j.at("T").get<std::size_t>();
  ts.alphas = j.at("alphas").get<std::vector<double>>();
  ts.ami = j.at("ami").get<std::vector<double>>();
  ts.real_labels = j.at("real").get<std::vector<int>>();
  ts.synthetic = j.at("synthetic").get<std::vector<std::vector<int>>>();
  return ts;
}

}  // namespace mtlab::tasksim
