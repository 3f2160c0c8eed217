#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtlab/errors.hpp"

namespace mtlab::mtlnet {

// Dense row-major matrix. Just enough linear algebra for this model.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

struct TaskSpec {
  std::string id;
  std::size_t label_count = 0;
};

struct ModelConfig {
  std::size_t input_dim = 350;  // window width * embedding dim
  std::size_t hidden_dim = 64;
  std::vector<TaskSpec> tasks;
  std::uint64_t seed = 0;

  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // false: total loss is the sum of per-task means; true: divide by T.
  bool average_over_tasks = false;

  void validate() const;
};

struct Head {
  Matrix w;               // label_count x hidden
  std::vector<double> b;  // label_count

  bool operator==(const Head&) const = default;
};

// Shared tanh encoder over window features with one softmax head per task.
struct MultitaskModel {
  ModelConfig config;
  Matrix shared_w;               // hidden x input
  std::vector<double> shared_b;  // hidden
  std::vector<Head> heads;

  std::size_t task_index(std::string_view id) const;  // throws UnknownTask
};

struct TaskBatch {
  Matrix x;            // samples x input_dim
  std::vector<int> y;  // label indices, aligned with rows of x
};

// One sub-batch per task, aligned with model.heads.
struct Batch {
  std::vector<TaskBatch> tasks;
};

// Same shapes as the parameters they differentiate.
struct Gradients {
  Matrix shared_w;
  std::vector<double> shared_b;
  std::vector<Head> heads;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

MultitaskModel init_model(const ModelConfig& cfg);

// Softmax layer output for one sample; entries positive, summing to 1.
std::vector<double> forward(const MultitaskModel& m, std::span<const double> x, std::size_t task);

// Sum over tasks of the mean per-sample cross-entropy within each task
// sub-batch (optionally divided by T). Per-sample terms are summed in sorted
// order so the result does not depend on sample order within a sub-batch.
double batch_loss(const MultitaskModel& m, const Batch& b);

// Exact analytic gradient of batch_loss.
Gradients gradients(const MultitaskModel& m, const Batch& b);

// Standard Adam update with bias correction, applied in place to a flat
// parameter vector. State buffers are allocated on first use.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double lr, double beta1, double beta2, double epsilon);

struct TrainTask {
  const Matrix* features = nullptr;
  const std::vector<int>* labels = nullptr;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean step loss per epoch
};

// Joint training: every step draws up to batch_size samples per task, each
// task cycling through its own reshuffled data; an epoch is one pass over
// the largest task. Tasks of equal size draw identical index sequences, so
// identical tasks receive identical sub-batches.
TrainResult train(MultitaskModel& m, std::span<const TrainTask> tasks);

// Argmax labels per row; ties resolve to the lowest label index.
std::vector<int> predict(const MultitaskModel& m, const Matrix& features, std::size_t task);

struct SpanScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Exact (type, start, end) span matching over IOB2 sentences. Zero
// denominators score 0.
SpanScore span_f1(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& pred);

std::vector<double> flatten_params(const MultitaskModel& m);
void unflatten_params(MultitaskModel& m, std::span<const double> flat);
std::vector<double> flatten_grads(const Gradients& g);

// Checkpoint: config, shapes and flat parameter arrays.
std::string to_json(const MultitaskModel& m);
MultitaskModel model_from_json(const std::string& text);

void write_loss_csv(const std::string& path, std::span<const double> epoch_loss);

}  // namespace mtlab::mtlnet
