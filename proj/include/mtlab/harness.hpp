#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mtlab/corpus.hpp"
#include "mtlab/mtlnet.hpp"
#include "mtlab/symreg.hpp"
#include "mtlab/tasksim.hpp"

namespace mtlab::harness {

struct ModelParams {
  std::size_t embedding_dim = 50;
  std::size_t hidden_dim = 64;
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  double learning_rate = 1e-3;
  bool average_over_tasks = false;
};

struct SweepGrid {
  bool balanced = true;
  std::string corpus_path;
  corpus::Scheme scheme = corpus::Scheme::IOB2;
  std::vector<std::size_t> n_values;      // tokens per task; n_ner when unbalanced
  std::vector<std::size_t> n_syn_values;  // unbalanced only
  std::vector<std::size_t> t_values;      // total task count, the real task included
  std::vector<double> alpha_values;
  std::size_t runs = 5;
  std::uint64_t base_seed = 0;
  ModelParams model;

  void validate() const;
};

SweepGrid grid_from_json(const std::string& text);
std::string to_json(const SweepGrid& grid);

struct ExperimentRecord {
  std::size_t n = 0;      // n_ner when unbalanced
  std::size_t n_syn = 0;  // unbalanced only
  std::size_t t = 1;
  double alpha = 0.0;
  double ami = 0.0;  // mean over synthetic tasks and runs; 0 for T=1
  double f1_mean = 0.0;
  double f1_std = 0.0;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::vector<double> ami_tasks;  // per-synthetic-task means, kept for audit

  bool operator==(const ExperimentRecord&) const = default;
};

struct RecordSet {
  bool balanced = true;
  std::vector<ExperimentRecord> records;

  bool operator==(const RecordSet&) const = default;
};

// Corpus-derived state shared by every cell of a sweep: window features for
// the training prefix and the fixed tail evaluation slice.
struct SweepContext {
  SweepGrid grid;
  std::vector<std::string> label_set;  // IO legend
  std::vector<int> io_labels;          // training-prefix label indices
  mtlnet::Matrix train_features;       // rows cover the largest grid prefix
  mtlnet::Matrix eval_features;
  std::vector<int> eval_gold_io;
  std::vector<std::vector<std::string>> eval_gold_iob2;
  std::vector<std::size_t> eval_sentence_sizes;
};

SweepContext prepare_sweep(const SweepGrid& grid);

struct CellSpec {
  std::size_t n = 0;
  std::size_t n_syn = 0;  // ignored in balanced mode
  std::size_t t = 1;
  double alpha = 1.0;
  std::size_t alpha_index = 0;
};

// Seed for one run of one cell, derived from coordinates only so sweep
// order and resumption cannot change results.
std::uint64_t cell_seed(std::uint64_t base, const CellSpec& cell, std::size_t run);

// Train `runs` models for one grid cell and aggregate F1 on the shared
// evaluation slice.
ExperimentRecord run_cell(const SweepContext& ctx, const CellSpec& cell);

struct SweepOptions {
  std::size_t parallelism = 1;
  std::function<bool()> should_stop;                        // polled between cells
  std::function<void(std::size_t, std::size_t)> progress;  // (done, total)
};

// Runs the Cartesian product of the grid, appending each record to out_path
// as it completes (in canonical cell order, flushed per record). Cells whose
// records are already present are not recomputed, so an interrupted sweep
// resumes where it stopped and converges to a byte-identical file.
RecordSet run_sweep(const SweepGrid& grid, const std::string& out_path,
                    const SweepOptions& options = {});

void save_records(const std::string& path, const RecordSet& rs);
RecordSet load_records(const std::string& path);
// Validates the schema tag on top of loading.
RecordSet load_records(const std::string& path, bool expect_balanced);

std::pair<RecordSet, RecordSet> split_records(const RecordSet& rs, double train_fraction,
                                              std::uint64_t seed);

double record_column(const ExperimentRecord& r, bool balanced, const std::string& name);
std::vector<std::string> input_columns(bool balanced);

// Builds X from the named input columns and y = scale * target, fits on the
// train set and scores held-out MSE on the test set.
symreg::FitResult fit_formula(const RecordSet& train, const RecordSet& test,
                              const std::vector<std::string>& inputs, const std::string& target,
                              double scale, const symreg::GPConfig& gp);

// MSE of an expression over a record set, on the scaled target.
double evaluate_formula(const symreg::Expr& expr, const RecordSet& rs,
                        const std::vector<std::string>& inputs, const std::string& target,
                        double scale);

}  // namespace mtlab::harness
