#include "mtlab/mtlnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "mtlab/rng.hpp"
#include "mtlab/text.hpp"

namespace mtlab::mtlnet {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;

void check_task(const MultitaskModel& m, std::size_t task) {
  if (task >= m.heads.size())
    throw UnknownTask("task index " + std::to_string(task) + " out of range (" +
                      std::to_string(m.heads.size()) + " tasks)");
}

void check_batch(const MultitaskModel& m, const Batch& b) {
  if (b.tasks.size() != m.heads.size())
    throw ShapeMismatch("batch has " + std::to_string(b.tasks.size()) + " sub-batches for " +
                        std::to_string(m.heads.size()) + " tasks");
  for (std::size_t t = 0; t < b.tasks.size(); ++t) {
    const auto& tb = b.tasks[t];
    if (tb.x.rows != tb.y.size()) throw ShapeMismatch("features and labels differ in rows");
    if (tb.x.rows > 0 && tb.x.cols != m.config.input_dim)
      throw ShapeMismatch("feature width does not match input_dim");
    for (int label : tb.y)
      if (label < 0 || std::size_t(label) >= m.heads[t].w.rows)
        throw ShapeMismatch("label index out of range for task " + std::to_string(t));
  }
}

void encode(const MultitaskModel& m, const double* x, double* h) {
  const Matrix& w = m.shared_w;
  for (std::size_t j = 0; j < w.rows; ++j) {
    const double* wr = w.row(j);
    double acc = m.shared_b[j];
    for (std::size_t k = 0; k < w.cols; ++k) acc += wr[k] * x[k];
    h[j] = std::tanh(acc);
  }
}

void head_logits(const Head& head, const double* h, double* z) {
  for (std::size_t k = 0; k < head.w.rows; ++k) {
    const double* wr = head.w.row(k);
    double acc = head.b[k];
    for (std::size_t j = 0; j < head.w.cols; ++j) acc += wr[j] * h[j];
    z[k] = acc;
  }
}

double log_sum_exp(const double* z, std::size_t c) {
  const double mx = *std::max_element(z, z + c);
  double s = 0.0;
  for (std::size_t k = 0; k < c; ++k) s += std::exp(z[k] - mx);
  return mx + std::log(s);
}

// Order-independent mean: identical multisets give identical sums.
double sorted_mean(std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

Gradients zero_gradients(const MultitaskModel& m) {
  Gradients g;
  g.shared_w = Matrix(m.shared_w.rows, m.shared_w.cols);
  g.shared_b.assign(m.shared_b.size(), 0.0);
  g.heads.reserve(m.heads.size());
  for (const auto& h : m.heads)
    g.heads.push_back({Matrix(h.w.rows, h.w.cols), std::vector<double>(h.b.size(), 0.0)});
  return g;
}

// Forward/backward over one task sub-batch, addressed through `idx`.
// Gradients are scaled by `scale / idx.size()` (per-task mean). Returns the
// per-sample cross-entropy losses.
std::vector<double> task_pass(const MultitaskModel& m, std::size_t t, const Matrix& x,
                              const std::vector<int>& y, std::span<const std::size_t> idx,
                              double scale, Gradients* g) {
  const Head& head = m.heads[t];
  const std::size_t hidden = m.config.hidden_dim;
  const std::size_t c = head.w.rows;
  std::vector<double> h(hidden), z(c), dz(c), dh(hidden);
  std::vector<double> losses;
  losses.reserve(idx.size());
  const double s = idx.empty() ? 0.0 : scale / double(idx.size());

  for (std::size_t row : idx) {
    const double* xr = x.row(row);
    encode(m, xr, h.data());
    head_logits(head, h.data(), z.data());
    const double lse = log_sum_exp(z.data(), c);
    const int label = y[row];
    losses.push_back(lse - z[std::size_t(label)]);
    if (!g) continue;

    for (std::size_t k = 0; k < c; ++k) dz[k] = std::exp(z[k] - lse);
    dz[std::size_t(label)] -= 1.0;

    Head& gh = g->heads[t];
    for (std::size_t k = 0; k < c; ++k) {
      const double d = s * dz[k];
      double* gw = gh.w.row(k);
      for (std::size_t j = 0; j < hidden; ++j) gw[j] += d * h[j];
      gh.b[k] += d;
    }
    // back through the head into the encoder
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double d = dz[k];
      const double* wr = head.w.row(k);
      for (std::size_t j = 0; j < hidden; ++j) dh[j] += d * wr[j];
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      const double dpre = s * dh[j] * (1.0 - h[j] * h[j]);
      double* gw = g->shared_w.row(j);
      for (std::size_t k = 0; k < m.shared_w.cols; ++k) gw[k] += dpre * xr[k];
      g->shared_b[j] += dpre;
    }
  }
  return losses;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  return idx;
}

double loss_and_gradients(const MultitaskModel& m, const Batch& b, Gradients* g) {
  const double scale = m.config.average_over_tasks ? 1.0 / double(m.heads.size()) : 1.0;
  double total = 0.0;
  for (std::size_t t = 0; t < b.tasks.size(); ++t) {
    const auto& tb = b.tasks[t];
    auto idx = all_rows(tb.x.rows);
    auto losses = task_pass(m, t, tb.x, tb.y, idx, scale, g);
    total += scale * sorted_mean(losses);
  }
  return total;
}

// Cycles one task's sample indices: shuffled pass, reshuffle on wrap.
class CycleSampler {
 public:
  CycleSampler(std::size_t n, SplitRng rng) : rng_(rng), order_(all_rows(n)) {
    rng_.shuffle(order_);
  }

  std::size_t next() {
    if (pos_ == order_.size()) {
      rng_.shuffle(order_);
      pos_ = 0;
    }
    return order_[pos_++];
  }

 private:
  SplitRng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

using SpanTuple = std::tuple<std::string, std::size_t, std::size_t>;

// Maximal IOB2 spans. A dangling I-X (after O or a different type) opens a
// new span, the same leniency the CoNLL scorer applies.
std::vector<SpanTuple> extract_spans(const std::vector<std::string>& labels) {
  std::vector<SpanTuple> out;
  std::string open_type;
  std::size_t open_start = 0;
  auto close = [&](std::size_t end) {
    if (!open_type.empty()) out.emplace_back(open_type, open_start, end);
    open_type.clear();
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    const bool begins = l.starts_with("B-");
    const bool inside = l.starts_with("I-");
    if (inside && !open_type.empty() && l.substr(2) == open_type) continue;
    close(i);
    if (begins || inside) {
      open_type = l.substr(2);
      open_start = i;
    }
  }
  close(labels.size());
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0) throw InvalidConfig("model dimensions must be positive");
  if (tasks.empty()) throw InvalidConfig("model needs at least one task");
  for (const auto& t : tasks)
    if (t.label_count == 0) throw InvalidConfig("task '" + t.id + "' has no labels");
  if (batch_size == 0) throw InvalidConfig("batch size must be positive");
  if (learning_rate <= 0) throw InvalidConfig("learning rate must be positive");
}

std::size_t MultitaskModel::task_index(std::string_view id) const {
  for (std::size_t t = 0; t < config.tasks.size(); ++t)
    if (config.tasks[t].id == id) return t;
  throw UnknownTask("no task named '" + std::string(id) + "'");
}

MultitaskModel init_model(const ModelConfig& cfg) {
  cfg.validate();
  MultitaskModel m;
  m.config = cfg;
  m.shared_w = Matrix(cfg.hidden_dim, cfg.input_dim);
  m.shared_b.assign(cfg.hidden_dim, 0.0);

  SplitRng rng = SplitRng(cfg.seed).split(kInitStream);
  const double shared_limit = std::sqrt(6.0 / double(cfg.input_dim + cfg.hidden_dim));
  for (auto& w : m.shared_w.data) w = rng.next_uniform(-shared_limit, shared_limit);

  for (const auto& spec : cfg.tasks) {
    Head h;
    h.w = Matrix(spec.label_count, cfg.hidden_dim);
    h.b.assign(spec.label_count, 0.0);
    const double limit = std::sqrt(6.0 / double(cfg.hidden_dim + spec.label_count));
    for (auto& w : h.w.data) w = rng.next_uniform(-limit, limit);
    m.heads.push_back(std::move(h));
  }
  return m;
}

std::vector<double> forward(const MultitaskModel& m, std::span<const double> x, std::size_t task) {
  check_task(m, task);
  if (x.size() != m.config.input_dim) throw ShapeMismatch("input width does not match input_dim");
  std::vector<double> h(m.config.hidden_dim);
  encode(m, x.data(), h.data());
  const Head& head = m.heads[task];
  std::vector<double> z(head.w.rows);
  head_logits(head, h.data(), z.data());
  const double lse = log_sum_exp(z.data(), z.size());
  for (auto& zk : z) zk = std::exp(zk - lse);
  return z;
}

double batch_loss(const MultitaskModel& m, const Batch& b) {
  check_batch(m, b);
  return loss_and_gradients(m, b, nullptr);
}

Gradients gradients(const MultitaskModel& m, const Batch& b) {
  check_batch(m, b);
  Gradients g = zero_gradients(m);
  loss_and_gradients(m, b, &g);
  return g;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double lr, double beta1, double beta2, double epsilon) {
  if (params.size() != grads.size()) throw ShapeMismatch("params and grads differ in size");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size())
    throw ShapeMismatch("optimizer state does not match parameter count");

  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(beta2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + epsilon);
  }
}

TrainResult train(MultitaskModel& m, std::span<const TrainTask> tasks) {
  if (tasks.size() != m.heads.size())
    throw ShapeMismatch("train() needs one dataset per task");
  std::size_t max_n = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& task = tasks[t];
    if (!task.features || !task.labels || task.features->rows != task.labels->size())
      throw ShapeMismatch("task dataset misaligned");
    if (task.features->rows == 0) throw ShapeMismatch("task dataset is empty");
    if (task.features->cols != m.config.input_dim)
      throw ShapeMismatch("feature width does not match input_dim");
    for (int label : *task.labels)
      if (label < 0 || std::size_t(label) >= m.heads[t].w.rows)
        throw ShapeMismatch("label index out of range for task " + std::to_string(t));
    max_n = std::max(max_n, task.features->rows);
  }

  const ModelConfig& cfg = m.config;
  const std::size_t steps = (max_n + cfg.batch_size - 1) / cfg.batch_size;

  // Equal-size tasks share a stream and therefore an index sequence.
  SplitRng batch_root = SplitRng(cfg.seed).split(kBatchStream);
  std::vector<CycleSampler> samplers;
  samplers.reserve(tasks.size());
  for (const auto& task : tasks)
    samplers.emplace_back(task.features->rows, batch_root.split(task.features->rows));

  std::vector<double> flat = flatten_params(m);
  AdamState state;
  const double scale = cfg.average_over_tasks ? 1.0 / double(tasks.size()) : 1.0;

  TrainResult result;
  result.epoch_loss.reserve(cfg.epochs);
  std::vector<std::size_t> idx;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      Gradients g = zero_gradients(m);
      double step_loss = 0.0;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const std::size_t take = std::min(cfg.batch_size, tasks[t].features->rows);
        idx.clear();
        for (std::size_t i = 0; i < take; ++i) idx.push_back(samplers[t].next());
        auto losses = task_pass(m, t, *tasks[t].features, *tasks[t].labels, idx, scale, &g);
        step_loss += scale * sorted_mean(losses);
      }
      adam_step(state, flat, flatten_grads(g), cfg.learning_rate, cfg.beta1, cfg.beta2,
                cfg.epsilon);
      unflatten_params(m, flat);
      epoch_loss += step_loss;
    }
    result.epoch_loss.push_back(epoch_loss / double(steps));
  }
  return result;
}

std::vector<int> predict(const MultitaskModel& m, const Matrix& features, std::size_t task) {
  check_task(m, task);
  if (features.rows > 0 && features.cols != m.config.input_dim)
    throw ShapeMismatch("feature width does not match input_dim");
  const Head& head = m.heads[task];
  std::vector<double> h(m.config.hidden_dim), z(head.w.rows);
  std::vector<int> out;
  out.reserve(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    encode(m, features.row(i), h.data());
    head_logits(head, h.data(), z.data());
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k)
      if (z[k] > z[best]) best = k;
    out.push_back(int(best));
  }
  return out;
}

SpanScore span_f1(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size()) throw ShapeMismatch("gold and pred sentence counts differ");
  long long tp = 0, gold_count = 0, pred_count = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw ShapeMismatch("sentence " + std::to_string(s) + " lengths differ");
    auto gs = extract_spans(gold[s]);
    auto ps = extract_spans(pred[s]);
    std::sort(gs.begin(), gs.end());
    std::sort(ps.begin(), ps.end());
    std::vector<SpanTuple> common;
    std::set_intersection(gs.begin(), gs.end(), ps.begin(), ps.end(), std::back_inserter(common));
    tp += (long long)common.size();
    gold_count += (long long)gs.size();
    pred_count += (long long)ps.size();
  }
  SpanScore score;
  score.precision = pred_count > 0 ? double(tp) / double(pred_count) : 0.0;
  score.recall = gold_count > 0 ? double(tp) / double(gold_count) : 0.0;
  score.f1 = (score.precision + score.recall) > 0
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

std::vector<double> flatten_params(const MultitaskModel& m) {
  std::vector<double> flat;
  flat.insert(flat.end(), m.shared_w.data.begin(), m.shared_w.data.end());
  flat.insert(flat.end(), m.shared_b.begin(), m.shared_b.end());
  for (const auto& h : m.heads) {
    flat.insert(flat.end(), h.w.data.begin(), h.w.data.end());
    flat.insert(flat.end(), h.b.begin(), h.b.end());
  }
  return flat;
}

void unflatten_params(MultitaskModel& m, std::span<const double> flat) {
  std::size_t off = 0;
  auto take = [&](double* dst, std::size_t n) {
    std::copy(flat.begin() + long(off), flat.begin() + long(off + n), dst);
    off += n;
  };
  take(m.shared_w.data.data(), m.shared_w.data.size());
  take(m.shared_b.data(), m.shared_b.size());
  for (auto& h : m.heads) {
    take(h.w.data.data(), h.w.data.size());
    take(h.b.data(), h.b.size());
  }
  if (off != flat.size()) throw ShapeMismatch("flat parameter vector has wrong length");
}

std::vector<double> flatten_grads(const Gradients& g) {
  std::vector<double> flat;
  flat.insert(flat.end(), g.shared_w.data.begin(), g.shared_w.data.end());
  flat.insert(flat.end(), g.shared_b.begin(), g.shared_b.end());
  for (const auto& h : g.heads) {
    flat.insert(flat.end(), h.w.data.begin(), h.w.data.end());
    flat.insert(flat.end(), h.b.begin(), h.b.end());
  }
  return flat;
}

std::string to_json(const MultitaskModel& m) {
  nlohmann::json cfg;
  cfg["input_dim"] = m.config.input_dim;
  cfg["hidden_dim"] = m.config.hidden_dim;
  cfg["seed"] = m.config.seed;
  cfg["epochs"] = m.config.epochs;
  cfg["batch_size"] = m.config.batch_size;
  cfg["learning_rate"] = m.config.learning_rate;
  cfg["beta1"] = m.config.beta1;
  cfg["beta2"] = m.config.beta2;
  cfg["epsilon"] = m.config.epsilon;
  cfg["average_over_tasks"] = m.config.average_over_tasks;
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : m.config.tasks) tasks.push_back({{"id", t.id}, {"labels", t.label_count}});
  cfg["tasks"] = tasks;

  nlohmann::json j;
  j["config"] = cfg;
  j["params"] = flatten_params(m);
  return j.dump() + "\n";
}

MultitaskModel model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const auto& cj = j.at("config");
  ModelConfig cfg;
  cfg.input_dim = cj.at("input_dim").get<std::size_t>();
  cfg.hidden_dim = cj.at("hidden_dim").get<std::size_t>();
  cfg.seed = cj.at("seed").get<std::uint64_t>();
  cfg.epochs = cj.at("epochs").get<std::size_t>();
  cfg.batch_size = cj.at("batch_size").get<std::size_t>();
  cfg.learning_rate = cj.at("learning_rate").get<double>();
  cfg.beta1 = cj.at("beta1").get<double>();
  cfg.beta2 = cj.at("beta2").get<double>();
  cfg.epsilon = cj.at("epsilon").get<double>();
  cfg.average_over_tasks = cj.at("average_over_tasks").get<bool>();
  for (const auto& t : cj.at("tasks"))
    cfg.tasks.push_back({t.at("id").get<std::string>(), t.at("labels").get<std::size_t>()});

  MultitaskModel m = init_model(cfg);
  auto params = j.at("params").get<std::vector<double>>();
  unflatten_params(m, params);
  return m;
}

void write_loss_csv(const std::string& path, std::span<const double> epoch_loss) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableFile("cannot write '" + path + "'");
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < epoch_loss.size(); ++i)
    out << (i + 1) << ',' << format_double(epoch_loss[i]) << '\n';
}

}  // namespace mtlab::mtlnet
