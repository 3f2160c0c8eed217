#include "mtlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mtlab/rng.hpp"
#include "mtlab/text.hpp"

namespace mtlab::harness {

namespace {

constexpr std::size_t kEvalTokenCap = 2000;

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
}

std::string header_line(bool balanced) {
  return balanced ? "n,T,alpha,ami,f1_mean,f1_std,runs,seed,ami_tasks"
                  : "n_ner,n_syn,T,alpha,ami,f1_mean,f1_std,runs,seed,ami_tasks";
}

std::string record_line(const ExperimentRecord& r, bool balanced) {
  std::string line = std::to_string(r.n);
  if (!balanced) line += ',' + std::to_string(r.n_syn);
  line += ',' + std::to_string(r.t);
  line += ',' + format_double(r.alpha);
  line += ',' + format_double(r.ami);
  line += ',' + format_double(r.f1_mean);
  line += ',' + format_double(r.f1_std);
  line += ',' + std::to_string(r.runs);
  line += ',' + std::to_string(r.seed);
  line += ',';
  for (std::size_t i = 0; i < r.ami_tasks.size(); ++i) {
    if (i > 0) line += ';';
    line += format_double(r.ami_tasks[i]);
  }
  return line;
}

// Cell identity within a sweep, used to match existing records on resume.
std::string cell_key(std::size_t n, std::size_t n_syn, std::size_t t, double alpha,
                     bool balanced) {
  std::string key = std::to_string(n);
  if (!balanced) key += '|' + std::to_string(n_syn);
  key += '|' + std::to_string(t) + '|' + format_double(alpha);
  return key;
}

std::string cell_key(const ExperimentRecord& r, bool balanced) {
  return cell_key(r.n, r.n_syn, r.t, r.alpha, balanced);
}

std::string cell_key(const CellSpec& c, bool balanced) {
  return cell_key(c.n, c.n_syn, c.t, c.alpha, balanced);
}

mtlnet::Matrix slice_rows(const mtlnet::Matrix& src, std::size_t rows) {
  mtlnet::Matrix out(rows, src.cols);
  std::copy(src.data.begin(), src.data.begin() + long(rows * src.cols), out.data.begin());
  return out;
}

mtlnet::Matrix embed_windows(const std::vector<corpus::WindowSample>& windows,
                             const corpus::EmbeddingTable& table) {
  mtlnet::Matrix m(windows.size(), corpus::kWindowWidth * table.dim);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    double* row = m.row(i);
    for (std::size_t k = 0; k < corpus::kWindowWidth; ++k)
      table.embed_into(windows[i].words[k], row + k * table.dim);
  }
  return m;
}

struct OrderedWriter {
  std::ofstream out;
  bool balanced = true;
  std::size_t next = 0;
  std::map<std::size_t, ExperimentRecord> pending;
  std::mutex mu;

  // Records reach the file in canonical cell order regardless of which
  // worker finishes first; anything still out of order on shutdown is
  // dropped and recomputed on resume.
  void push(std::size_t index, ExperimentRecord rec) {
    std::lock_guard lock(mu);
    pending.emplace(index, std::move(rec));
    while (!pending.empty() && pending.begin()->first == next) {
      out << record_line(pending.begin()->second, balanced) << '\n';
      out.flush();
      pending.erase(pending.begin());
      ++next;
    }
  }
};

}  // namespace

void SweepGrid::validate() const {
  if (corpus_path.empty()) throw InvalidConfig("sweep config has no corpus path");
  if (n_values.empty()) throw InvalidConfig(balanced ? "empty n list" : "empty n_ner list");
  if (t_values.empty()) throw InvalidConfig("empty T list");
  if (alpha_values.empty()) throw InvalidConfig("empty alpha list");
  if (runs == 0) throw InvalidConfig("runs must be at least 1");
  for (std::size_t t : t_values)
    if (t == 0) throw InvalidConfig("T values must be at least 1");
  for (std::size_t n : n_values)
    if (n == 0) throw InvalidConfig("n values must be positive");
  if (balanced) {
    if (!n_syn_values.empty()) throw InvalidConfig("balanced sweeps do not take n_syn");
  } else {
    if (n_syn_values.empty()) throw InvalidConfig("unbalanced sweeps need an n_syn list");
    const auto max_ner = *std::max_element(n_values.begin(), n_values.end());
    for (std::size_t n : n_syn_values)
      if (n < max_ner)
        throw InvalidConfig("every n_syn must be >= every n_ner (synthetic tasks carry at "
                            "least as much data)");
  }
  if (model.embedding_dim == 0 || model.hidden_dim == 0 || model.batch_size == 0)
    throw InvalidConfig("model dimensions and batch size must be positive");

  auto no_dupes = [](auto list, const char* what) {
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw InvalidConfig(std::string("duplicate values in the ") + what + " list");
  };
  no_dupes(n_values, balanced ? "n" : "n_ner");
  no_dupes(n_syn_values, "n_syn");
  no_dupes(t_values, "T");
  no_dupes(alpha_values, "alpha");
}

SweepGrid grid_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("bad sweep config: ") + e.what());
  }
  SweepGrid g;
  try {
    g.balanced = j.value("balanced", true);
    g.corpus_path = j.at("corpus").get<std::string>();
    g.scheme = corpus::scheme_from_name(j.value("scheme", "IOB2"));
    if (g.balanced) {
      g.n_values = j.at("n").get<std::vector<std::size_t>>();
    } else {
      g.n_values = j.at("n_ner").get<std::vector<std::size_t>>();
      g.n_syn_values = j.at("n_syn").get<std::vector<std::size_t>>();
    }
    g.t_values = j.at("T").get<std::vector<std::size_t>>();
    g.alpha_values = j.at("alpha").get<std::vector<double>>();
    g.runs = j.value("runs", std::size_t(5));
    g.base_seed = j.value("seed", std::uint64_t(0));
    if (j.contains("model")) {
      const auto& m = j.at("model");
      g.model.embedding_dim = m.value("embedding_dim", g.model.embedding_dim);
      g.model.hidden_dim = m.value("hidden_dim", g.model.hidden_dim);
      g.model.epochs = m.value("epochs", g.model.epochs);
      g.model.batch_size = m.value("batch_size", g.model.batch_size);
      g.model.learning_rate = m.value("learning_rate", g.model.learning_rate);
      g.model.average_over_tasks = m.value("average_over_tasks", g.model.average_over_tasks);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("bad sweep config: ") + e.what());
  }
  g.validate();
  return g;
}

std::string to_json(const SweepGrid& g) {
  nlohmann::json j;
  j["balanced"] = g.balanced;
  j["corpus"] = g.corpus_path;
  j["scheme"] = std::string(corpus::scheme_name(g.scheme));
  if (g.balanced) {
    j["n"] = g.n_values;
  } else {
    j["n_ner"] = g.n_values;
    j["n_syn"] = g.n_syn_values;
  }
  j["T"] = g.t_values;
  j["alpha"] = g.alpha_values;
  j["runs"] = g.runs;
  j["seed"] = g.base_seed;
  j["model"] = {{"embedding_dim", g.model.embedding_dim},
                {"hidden_dim", g.model.hidden_dim},
                {"epochs", g.model.epochs},
                {"batch_size", g.model.batch_size},
                {"learning_rate", g.model.learning_rate},
                {"average_over_tasks", g.model.average_over_tasks}};
  return j.dump(2) + "\n";
}

SweepContext prepare_sweep(const SweepGrid& grid) {
  grid.validate();

  auto raw = corpus::read_conll_file(grid.corpus_path, grid.scheme);
  auto io = grid.scheme == corpus::Scheme::IO ? raw : corpus::convert_iob_to_io(raw);
  const std::size_t c = io.label_set.size();
  if (c < 2) throw InputError("corpus needs at least two distinct labels");
  for (double alpha : grid.alpha_values)
    if (alpha < 1.0 / double(c) - 1e-12 || alpha > 1.0 + 1e-12)
      throw AlphaOutOfRange("alpha " + format_double(alpha) + " outside [1/" + std::to_string(c) +
                            ", 1] for this corpus");

  const std::size_t total = io.token_count();
  const std::size_t eval_target = std::min(kEvalTokenCap, total / 5);
  if (eval_target == 0) throw NotEnoughTokens("corpus too small for an evaluation slice");

  // Evaluation slice: whole sentences from the tail, starting at the first
  // sentence boundary at or past total - eval_target tokens.
  std::size_t eval_first_sentence = io.sentences.size();
  {
    std::size_t seen = 0;
    for (std::size_t s = 0; s < io.sentences.size(); ++s) {
      if (seen >= total - eval_target) {
        eval_first_sentence = s;
        break;
      }
      seen += io.sentences[s].size();
    }
  }
  std::size_t train_tokens = 0;
  for (std::size_t s = 0; s < eval_first_sentence; ++s) train_tokens += io.sentences[s].size();

  std::size_t max_prefix = *std::max_element(grid.n_values.begin(), grid.n_values.end());
  if (!grid.balanced)
    max_prefix = std::max(max_prefix,
                          *std::max_element(grid.n_syn_values.begin(), grid.n_syn_values.end()));
  if (max_prefix > train_tokens)
    throw NotEnoughTokens("grid needs " + std::to_string(max_prefix) +
                          " training tokens but only " + std::to_string(train_tokens) +
                          " precede the evaluation slice");

  SweepContext ctx;
  ctx.grid = grid;
  ctx.label_set = io.label_set;

  const auto table = corpus::EmbeddingTable::hashed(grid.model.embedding_dim, grid.base_seed);
  ctx.train_features = embed_windows(corpus::extract_windows(io, max_prefix), table);
  {
    auto all_labels = io.io_label_indices();
    ctx.io_labels.assign(all_labels.begin(), all_labels.begin() + long(max_prefix));
  }

  corpus::LabeledCorpus eval_io;
  eval_io.scheme = corpus::Scheme::IO;
  eval_io.label_set = io.label_set;
  eval_io.sentences.assign(io.sentences.begin() + long(eval_first_sentence), io.sentences.end());
  if (eval_io.sentences.empty()) throw NotEnoughTokens("empty evaluation slice");

  ctx.eval_features = embed_windows(corpus::extract_windows(eval_io, eval_io.token_count()), table);
  ctx.eval_gold_io = eval_io.io_label_indices();
  for (std::size_t s = 0; s < eval_io.sentences.size(); ++s) {
    ctx.eval_sentence_sizes.push_back(eval_io.sentences[s].size());
    if (grid.scheme == corpus::Scheme::IOB2) {
      std::vector<std::string> gold;
      for (const auto& tok : raw.sentences[eval_first_sentence + s]) gold.push_back(tok.label);
      ctx.eval_gold_iob2.push_back(std::move(gold));
    } else {
      // No native IOB2 gold: canonicalize through the IO labels.
      std::vector<std::string> io_labels;
      for (const auto& tok : eval_io.sentences[s]) io_labels.push_back(tok.label);
      ctx.eval_gold_iob2.push_back(corpus::convert_io_to_iob2(io_labels));
    }
  }
  return ctx;
}

std::uint64_t cell_seed(std::uint64_t base, const CellSpec& cell, std::size_t run) {
  std::uint64_t h = mix64(base);
  h = hash_combine(h, cell.n);
  h = hash_combine(h, cell.n_syn);
  h = hash_combine(h, cell.t);
  h = hash_combine(h, cell.alpha_index);
  return hash_combine(h, run);
}

ExperimentRecord run_cell(const SweepContext& ctx, const CellSpec& cell) {
  const SweepGrid& grid = ctx.grid;
  if (cell.t == 0) throw InvalidConfig("T must be at least 1");
  const std::size_t n_real = cell.n;
  const std::size_t n_sim = grid.balanced ? cell.n : cell.n_syn;
  if (n_real > ctx.io_labels.size() || n_sim > ctx.io_labels.size())
    throw NotEnoughTokens("cell exceeds the prepared training prefix");

  const std::size_t synth_count = cell.t - 1;
  const std::vector<double> alphas(synth_count, cell.alpha);
  const std::size_t c = ctx.label_set.size();

  const mtlnet::Matrix real_features = slice_rows(ctx.train_features, n_real);
  const std::vector<int> real_labels(ctx.io_labels.begin(), ctx.io_labels.begin() + long(n_real));
  const mtlnet::Matrix syn_features =
      synth_count > 0 ? slice_rows(ctx.train_features, n_sim) : mtlnet::Matrix();

  std::vector<double> f1s;
  std::vector<double> run_ami_means;
  std::vector<double> task_ami_sums(synth_count, 0.0);

  for (std::size_t run = 0; run < grid.runs; ++run) {
    const std::uint64_t seed = cell_seed(grid.base_seed, cell, run);
    auto ts = tasksim::simulate_tasks(ctx.io_labels, ctx.label_set, n_sim, alphas, seed);

    mtlnet::ModelConfig cfg;
    cfg.input_dim = ctx.train_features.cols;
    cfg.hidden_dim = grid.model.hidden_dim;
    cfg.seed = seed;
    cfg.epochs = grid.model.epochs;
    cfg.batch_size = grid.model.batch_size;
    cfg.learning_rate = grid.model.learning_rate;
    cfg.average_over_tasks = grid.model.average_over_tasks;
    cfg.tasks.push_back({"ner", c});
    for (std::size_t t = 0; t < synth_count; ++t)
      cfg.tasks.push_back({"syn" + std::to_string(t + 1), c});

    auto model = mtlnet::init_model(cfg);
    std::vector<mtlnet::TrainTask> tasks;
    tasks.push_back({&real_features, &real_labels});
    for (std::size_t t = 0; t < synth_count; ++t)
      tasks.push_back({&syn_features, &ts.synthetic[t]});
    mtlnet::train(model, tasks);

    const auto pred = mtlnet::predict(model, ctx.eval_features, 0);
    std::vector<std::vector<std::string>> pred_iob2;
    pred_iob2.reserve(ctx.eval_sentence_sizes.size());
    std::size_t pos = 0;
    for (std::size_t size : ctx.eval_sentence_sizes) {
      std::vector<std::string> io_labels;
      io_labels.reserve(size);
      for (std::size_t i = 0; i < size; ++i)
        io_labels.push_back(ctx.label_set[std::size_t(pred[pos++])]);
      pred_iob2.push_back(corpus::convert_io_to_iob2(io_labels));
    }
    f1s.push_back(mtlnet::span_f1(ctx.eval_gold_iob2, pred_iob2).f1);

    if (synth_count > 0) {
      double mean = 0.0;
      for (std::size_t t = 0; t < synth_count; ++t) {
        task_ami_sums[t] += ts.ami[t];
        mean += ts.ami[t];
      }
      run_ami_means.push_back(mean / double(synth_count));
    }
  }

  ExperimentRecord rec;
  rec.n = cell.n;
  rec.n_syn = grid.balanced ? 0 : cell.n_syn;
  rec.t = cell.t;
  rec.alpha = cell.alpha;
  rec.runs = grid.runs;
  rec.seed = grid.base_seed;
  double mean = 0.0;
  for (double f : f1s) mean += f;
  mean /= double(f1s.size());
  double var = 0.0;
  for (double f : f1s) var += (f - mean) * (f - mean);
  rec.f1_mean = mean;
  rec.f1_std = std::sqrt(var / double(f1s.size()));
  if (!run_ami_means.empty()) {
    double a = 0.0;
    for (double v : run_ami_means) a += v;
    rec.ami = a / double(run_ami_means.size());
    for (double sum : task_ami_sums) rec.ami_tasks.push_back(sum / double(grid.runs));
  }
  return rec;
}

namespace {

std::vector<CellSpec> enumerate_cells(const SweepGrid& grid) {
  std::vector<CellSpec> cells;
  if (grid.balanced) {
    for (std::size_t n : grid.n_values)
      for (std::size_t t : grid.t_values)
        for (std::size_t a = 0; a < grid.alpha_values.size(); ++a)
          cells.push_back({n, 0, t, grid.alpha_values[a], a});
  } else {
    for (std::size_t n : grid.n_values)
      for (std::size_t n_syn : grid.n_syn_values)
        for (std::size_t t : grid.t_values)
          for (std::size_t a = 0; a < grid.alpha_values.size(); ++a)
            cells.push_back({n, n_syn, t, grid.alpha_values[a], a});
  }
  return cells;
}

}  // namespace

RecordSet run_sweep(const SweepGrid& grid, const std::string& out_path,
                    const SweepOptions& options) {
  SweepContext ctx = prepare_sweep(grid);
  const auto cells = enumerate_cells(grid);

  std::vector<std::optional<ExperimentRecord>> results(cells.size());
  std::size_t prefix = 0;  // existing records that match the canonical order
  bool prefix_resume = true;
  if (std::filesystem::exists(out_path)) {
    RecordSet existing = load_records(out_path, grid.balanced);
    std::map<std::string, ExperimentRecord> by_key;
    for (const auto& r : existing.records) {
      if (r.runs != grid.runs || r.seed != grid.base_seed)
        throw SchemaMismatch("existing records in '" + out_path +
                             "' were produced with a different runs/seed configuration");
      by_key.emplace(cell_key(r, grid.balanced), r);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      auto it = by_key.find(cell_key(cells[i], grid.balanced));
      if (it != by_key.end()) results[i] = it->second;
    }
    while (prefix < cells.size() && prefix < existing.records.size() &&
           cell_key(existing.records[prefix], grid.balanced) ==
               cell_key(cells[prefix], grid.balanced))
      ++prefix;
    prefix_resume = prefix == existing.records.size();  // file is exactly a canonical prefix
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!results[i]) todo.push_back(i);

  std::mutex progress_mu;
  std::size_t done = cells.size() - todo.size();

  if (!todo.empty()) {
    OrderedWriter writer;
    writer.balanced = grid.balanced;
    if (prefix_resume) {
      writer.next = prefix;
      writer.out.open(out_path, prefix > 0 ? std::ios::app | std::ios::binary
                                           : std::ios::trunc | std::ios::binary);
      if (!writer.out) throw UnreadableFile("cannot write '" + out_path + "'");
      if (prefix == 0) writer.out << header_line(grid.balanced) << '\n';
      writer.out.flush();
    }

    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> stopped{false};
    auto worker = [&]() {
      while (true) {
        if (options.should_stop && options.should_stop()) {
          stopped.store(true);
          return;
        }
        const std::size_t k = cursor.fetch_add(1);
        if (k >= todo.size() || stopped.load()) return;
        const std::size_t i = todo[k];
        ExperimentRecord rec = run_cell(ctx, cells[i]);
        if (prefix_resume) writer.push(i, rec);
        results[i] = std::move(rec);
        if (options.progress) {
          std::lock_guard lock(progress_mu);
          options.progress(++done, cells.size());
        }
      }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, todo.size()));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
  }

  RecordSet rs;
  rs.balanced = grid.balanced;
  for (auto& r : results) {
    if (!r) break;  // stopped early: keep the contiguous prefix
    rs.records.push_back(std::move(*r));
  }

  // A file that was not a clean prefix (records out of canonical order) is
  // rewritten whole once everything is known.
  if (!prefix_resume && rs.records.size() == cells.size()) save_records(out_path, rs);
  return rs;
}

void save_records(const std::string& path, const RecordSet& rs) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw UnreadableFile("cannot write '" + path + "'");
  out << header_line(rs.balanced) << '\n';
  for (const auto& r : rs.records) out << record_line(r, rs.balanced) << '\n';
}

RecordSet load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile("cannot open records file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  auto lines = split_on(text, '\n');
  if (lines.empty() || lines[0].empty()) throw SchemaMismatch("records file has no header");

  RecordSet rs;
  std::string head(lines[0]);
  if (head == header_line(true)) {
    rs.balanced = true;
  } else if (head == header_line(false)) {
    rs.balanced = false;
  } else {
    throw SchemaMismatch("unrecognized records header '" + head + "'");
  }

  const std::size_t expected = rs.balanced ? 9 : 10;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (line.empty()) continue;  // tolerate a partial trailing line's remains
    auto cols = split_on(line, ',');
    if (cols.size() != expected) {
      if (li + 1 == lines.size()) continue;  // interrupted mid-write
      throw SchemaMismatch("line " + std::to_string(li + 1) + ": expected " +
                           std::to_string(expected) + " columns");
    }
    ExperimentRecord r;
    std::size_t c = 0;
    r.n = std::size_t(parse_int(cols[c++]));
    if (!rs.balanced) r.n_syn = std::size_t(parse_int(cols[c++]));
    r.t = std::size_t(parse_int(cols[c++]));
    r.alpha = parse_double(cols[c++]);
    r.ami = parse_double(cols[c++]);
    r.f1_mean = parse_double(cols[c++]);
    r.f1_std = parse_double(cols[c++]);
    r.runs = std::size_t(parse_int(cols[c++]));
    r.seed = std::uint64_t(parse_int(cols[c++]));
    if (!cols[c].empty())
      for (auto part : split_on(cols[c], ';')) r.ami_tasks.push_back(parse_double(part));
    rs.records.push_back(std::move(r));
  }
  return rs;
}

RecordSet load_records(const std::string& path, bool expect_balanced) {
  RecordSet rs = load_records(path);
  if (rs.balanced != expect_balanced)
    throw SchemaMismatch(std::string("records file is ") +
                         (rs.balanced ? "balanced" : "unbalanced") + " but the " +
                         (expect_balanced ? "balanced" : "unbalanced") + " schema was requested");
  return rs;
}

std::pair<RecordSet, RecordSet> split_records(const RecordSet& rs, double train_fraction,
                                              std::uint64_t seed) {
  if (rs.records.size() < 10)
    throw TooFewRecords("need at least 10 records to split, have " +
                        std::to_string(rs.records.size()));
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw InvalidConfig("train fraction must be in (0, 1)");
  std::vector<std::size_t> idx(rs.records.size());
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  SplitRng rng(seed);
  rng.shuffle(idx);
  std::size_t train_count = std::size_t(std::llround(train_fraction * double(idx.size())));
  train_count = std::clamp<std::size_t>(train_count, 1, idx.size() - 1);

  std::pair<RecordSet, RecordSet> out;
  out.first.balanced = out.second.balanced = rs.balanced;
  for (std::size_t k = 0; k < idx.size(); ++k)
    (k < train_count ? out.first : out.second).records.push_back(rs.records[idx[k]]);
  return out;
}

double record_column(const ExperimentRecord& r, bool balanced, const std::string& name) {
  if (balanced && name == "n") return double(r.n);
  if (!balanced && name == "n_ner") return double(r.n);
  if (!balanced && name == "n_syn") return double(r.n_syn);
  if (name == "T") return double(r.t);
  if (name == "alpha") return r.alpha;
  if (name == "ami") return r.ami;
  if (name == "f1_mean") return r.f1_mean;
  if (name == "f1_std") return r.f1_std;
  if (name == "runs") return double(r.runs);
  if (name == "seed") return double(r.seed);
  throw UnknownColumn("no column named '" + name + "' in the " +
                      (balanced ? "balanced" : "unbalanced") + " schema");
}

std::vector<std::string> input_columns(bool balanced) {
  if (balanced) return {"n", "T", "alpha", "ami", "f1_mean", "f1_std", "runs", "seed"};
  return {"n_ner", "n_syn", "T", "alpha", "ami", "f1_mean", "f1_std", "runs", "seed"};
}

namespace {

std::pair<symreg::Dataset, std::vector<double>> build_xy(const RecordSet& rs,
                                                         const std::vector<std::string>& inputs,
                                                         const std::string& target, double scale) {
  symreg::Dataset x;
  std::vector<double> y;
  x.reserve(rs.records.size());
  y.reserve(rs.records.size());
  for (const auto& r : rs.records) {
    std::vector<double> row;
    row.reserve(inputs.size());
    for (const auto& name : inputs) row.push_back(record_column(r, rs.balanced, name));
    x.push_back(std::move(row));
    y.push_back(scale * record_column(r, rs.balanced, target));
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

symreg::FitResult fit_formula(const RecordSet& train, const RecordSet& test,
                              const std::vector<std::string>& inputs, const std::string& target,
                              double scale, const symreg::GPConfig& gp) {
  if (inputs.empty()) throw InvalidConfig("no input columns given");
  auto [x, y] = build_xy(train, inputs, target, scale);
  auto [xt, yt] = build_xy(test, inputs, target, scale);
  symreg::FitResult result = symreg::evolve(gp, x, y, xt, yt);
  result.y_scale = scale;
  return result;
}

double evaluate_formula(const symreg::Expr& expr, const RecordSet& rs,
                        const std::vector<std::string>& inputs, const std::string& target,
                        double scale) {
  if (inputs.empty()) throw InvalidConfig("no input columns given");
  auto [x, y] = build_xy(rs, inputs, target, scale);
  return symreg::mse(expr, x, y);
}

}  // namespace mtlab::harness
