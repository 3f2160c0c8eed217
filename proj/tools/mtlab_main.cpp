// mtlab command line: task simulation, parameter sweeps, formula fitting
// and reporting over experiment records.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtlab/corpus.hpp"
#include "mtlab/harness.hpp"
#include "mtlab/mtlnet.hpp"
#include "mtlab/symreg.hpp"
#include "mtlab/tasksim.hpp"
#include "mtlab/text.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mtlab::UnreadableFile("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw mtlab::UnreadableFile("cannot write '" + path + "'");
  out << text;
}

struct SimulateArgs {
  std::string input;
  std::string scheme = "IOB1";
  std::size_t tasks = 1;
  std::vector<double> alphas;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  using namespace mtlab;
  if (args.tasks != args.alphas.size())
    throw InvalidConfig("--tasks (" + std::to_string(args.tasks) + ") must match the number of "
                        "--alpha values (" + std::to_string(args.alphas.size()) + ")");
  auto raw = corpus::read_conll_file(args.input, corpus::scheme_from_name(args.scheme));
  auto io = raw.scheme == corpus::Scheme::IO ? raw : corpus::convert_iob_to_io(raw);
  auto labels = io.io_label_indices();
  auto ts = tasksim::simulate_tasks(labels, io.label_set, args.samples, args.alphas, args.seed);
  write_file(args.out, tasksim::to_json(ts));

  std::cout << "task,alpha,ami\n";
  for (std::size_t t = 0; t < ts.alphas.size(); ++t)
    std::cout << (t + 1) << ',' << format_double(ts.alphas[t]) << ',' << format_double(ts.ami[t])
              << '\n';
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::size_t parallel = 0;  // 0: take MTLAB_PARALLEL, else 1
};

int cmd_sweep(const SweepArgs& args) {
  using namespace mtlab;
  harness::SweepGrid grid = harness::grid_from_json(read_file(args.config));

  std::size_t parallel = args.parallel;
  if (parallel == 0) {
    if (const char* env = std::getenv("MTLAB_PARALLEL")) parallel = std::size_t(std::atoll(env));
    if (parallel == 0) parallel = 1;
  }

  const std::size_t total_cells = (grid.balanced ? 1 : grid.n_syn_values.size()) *
                                  grid.n_values.size() * grid.t_values.size() *
                                  grid.alpha_values.size();

  std::size_t computed = 0;
  harness::SweepOptions options;
  options.parallelism = parallel;
  options.should_stop = []() { return g_interrupted.load(); };
  options.progress = [&](std::size_t done, std::size_t total) {
    ++computed;
    std::cerr << "cell " << done << "/" << total << " done\n";
  };

  std::signal(SIGINT, handle_sigint);
  auto rs = harness::run_sweep(grid, args.out, options);
  std::signal(SIGINT, SIG_DFL);

  if (g_interrupted.load()) {
    std::cerr << "interrupted after " << rs.records.size() << "/" << total_cells
              << " cells; partial results kept in " << args.out << "\n";
    return 1;
  }
  if (computed == 0)
    std::cout << "all cells present: " << rs.records.size() << " records in " << args.out << "\n";
  else
    std::cout << "wrote " << rs.records.size() << " records to " << args.out << "\n";
  return 0;
}

struct FitArgs {
  std::string records;
  std::vector<std::string> inputs;
  std::string target = "f1_mean";
  double scale = 100.0;
  double train_fraction = 0.9;
  std::size_t generations = 20;
  std::size_t population = 1000;
  std::size_t tournament = 20;
  double parsimony = 0.2;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

int cmd_fit(const FitArgs& args) {
  using namespace mtlab;
  auto rs = harness::load_records(args.records);
  for (const auto& name : args.inputs)
    (void)harness::record_column(rs.records.empty() ? harness::ExperimentRecord{} : rs.records[0],
                                 rs.balanced, name);

  auto [train, test] = harness::split_records(rs, args.train_fraction, args.seed);

  symreg::GPConfig gp;
  gp.generations = args.generations;
  gp.population_size = args.population;
  gp.tournament_size = args.tournament;
  gp.parsimony = args.parsimony;
  gp.seed = args.seed;
  gp.threads = args.threads;

  auto fit = harness::fit_formula(train, test, args.inputs, args.target, args.scale, gp);

  std::cout << "expression: " << symreg::format_sexpr(fit.best) << "\n";
  std::cout << "infix:      " << symreg::format_infix(fit.best) << "\n";
  std::cout << "train_mse:  " << format_double(fit.train_mse) << "\n";
  std::cout << "test_mse:   " << format_double(fit.test_mse) << "\n";

  if (!args.out.empty()) {
    nlohmann::json j;
    j["expression"] = symreg::format_sexpr(fit.best);
    j["infix"] = symreg::format_infix(fit.best);
    j["train_mse"] = fit.train_mse;
    j["test_mse"] = fit.test_mse;
    j["scale"] = fit.y_scale;
    j["inputs"] = args.inputs;
    j["target"] = args.target;
    j["seed"] = args.seed;
    j["generations"] = args.generations;
    j["best_fitness_trace"] = fit.best_fitness_trace;
    write_file(args.out, j.dump(2) + "\n");
  }
  return 0;
}

struct EvalArgs {
  std::string expr;
  std::string records;
  std::vector<std::string> inputs;
  std::string target = "f1_mean";
  double scale = 100.0;
};

int cmd_eval(const EvalArgs& args) {
  using namespace mtlab;
  auto expr = symreg::parse_expr(args.expr);
  auto rs = harness::load_records(args.records);
  const double m = harness::evaluate_formula(expr, rs, args.inputs, args.target, args.scale);
  std::cout << "mse: " << format_double(m) << "\n";
  return 0;
}

struct ReportArgs {
  std::string records;
  std::string outdir;
};

// Simple fixed-size line chart; series are (x, y) points with a label.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series) {
  using mtlab::format_double;
  const double width = 640, height = 440, left = 70, right = 180, top = 40, bottom = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  for (const auto& [name, points] : series)
    for (auto [x, y] : points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  ymax = std::max(ymax * 1.05, 1e-6);

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom); };

  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
         "\" height=\"" + format_double(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(width / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(height - bottom) +
         "\" x2=\"" + format_double(width - right) + "\" y2=\"" + format_double(height - bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) + "\" x2=\"" +
         format_double(left) + "\" y2=\"" + format_double(height - bottom) +
         "\" stroke=\"black\"/>\n";
  auto tick_text = [&](double x, double y, const std::string& s, const char* anchor) {
    return "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" text-anchor=\"" +
           anchor + "\" font-family=\"sans-serif\" font-size=\"11\">" + s + "</text>\n";
  };
  svg += tick_text(left, height - bottom + 16, format_double(xmin), "middle");
  svg += tick_text(width - right, height - bottom + 16, format_double(xmax), "middle");
  svg += tick_text(left - 6, height - bottom, format_double(ymin), "end");
  svg += tick_text(left - 6, top + 4, format_double(ymax), "end");
  svg += tick_text((left + width - right) / 2, height - 12, x_label, "middle");
  svg += tick_text(18, (top + height - bottom) / 2, "F1", "middle");

  std::size_t si = 0;
  for (const auto& [name, points] : series) {
    const char* color = colors[si % std::size(colors)];
    std::string poly;
    for (auto [x, y] : points) {
      poly += format_double(px(x)) + "," + format_double(py(y)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" "
           "points=\"" + poly + "\"/>\n";
    svg += "<text x=\"" + format_double(width - right + 10) + "\" y=\"" +
           format_double(top + 14 * double(si + 1)) + "\" fill=\"" + color +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + name + "</text>\n";
    si++;
  }
  svg += "</svg>\n";
  return svg;
}

int cmd_report(const ReportArgs& args) {
  using namespace mtlab;
  auto rs = harness::load_records(args.records);
  if (rs.records.empty()) throw EmptyInput("records file has no data rows");
  std::filesystem::create_directories(args.outdir);
  auto path = [&](const std::string& name) { return args.outdir + "/" + name; };

  using Key2 = std::pair<double, double>;  // generic two-part series key

  // F1 vs n per (T, alpha)
  {
    std::map<Key2, std::vector<const harness::ExperimentRecord*>> groups;
    for (const auto& r : rs.records) groups[{double(r.t), r.alpha}].push_back(&r);
    std::string csv = "T,alpha,n,f1_mean,f1_std\n";
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
    for (auto& [key, rows] : groups) {
      std::sort(rows.begin(), rows.end(),
                [](auto* a, auto* b) { return a->n < b->n; });
      std::vector<std::pair<double, double>> points;
      for (const auto* r : rows) {
        csv += std::to_string(r->t) + ',' + format_double(r->alpha) + ',' + std::to_string(r->n) +
               ',' + format_double(r->f1_mean) + ',' + format_double(r->f1_std) + '\n';
        points.emplace_back(double(r->n), r->f1_mean);
      }
      series.emplace_back("T=" + format_double(key.first) + " a=" + format_double(key.second),
                          std::move(points));
    }
    write_file(path("f1_vs_n.csv"), csv);
    write_file(path("f1_vs_n.svg"), render_svg("F1 vs tokens per task", "n", series));
  }

  // F1 vs measured AMI per n
  {
    std::map<double, std::vector<const harness::ExperimentRecord*>> groups;
    for (const auto& r : rs.records)
      if (r.t > 1) groups[double(r.n)].push_back(&r);
    std::string csv = "n,ami,f1_mean,f1_std\n";
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
    for (auto& [n, rows] : groups) {
      std::sort(rows.begin(), rows.end(),
                [](auto* a, auto* b) { return a->ami < b->ami; });
      std::vector<std::pair<double, double>> points;
      for (const auto* r : rows) {
        csv += std::to_string(r->n) + ',' + format_double(r->ami) + ',' +
               format_double(r->f1_mean) + ',' + format_double(r->f1_std) + '\n';
        points.emplace_back(r->ami, r->f1_mean);
      }
      series.emplace_back("n=" + format_double(n), std::move(points));
    }
    write_file(path("f1_vs_ami.csv"), csv);
    write_file(path("f1_vs_ami.svg"), render_svg("F1 vs adjusted mutual information", "AMI", series));
  }

  // F1 vs T per alpha
  {
    std::map<double, std::vector<const harness::ExperimentRecord*>> groups;
    for (const auto& r : rs.records) groups[r.alpha].push_back(&r);
    std::string csv = "alpha,T,f1_mean,f1_std\n";
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
    for (auto& [alpha, rows] : groups) {
      std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->t < b->t; });
      std::vector<std::pair<double, double>> points;
      for (const auto* r : rows) {
        csv += format_double(alpha) + ',' + std::to_string(r->t) + ',' +
               format_double(r->f1_mean) + ',' + format_double(r->f1_std) + '\n';
        points.emplace_back(double(r->t), r->f1_mean);
      }
      series.emplace_back("a=" + format_double(alpha), std::move(points));
    }
    write_file(path("f1_vs_T.csv"), csv);
    write_file(path("f1_vs_T.svg"), render_svg("F1 vs task count", "T", series));
  }

  std::cout << "wrote report files to " << args.outdir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multitask sequence-labeling laboratory"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate synthetic related tasks");
  simulate->add_option("--input", sim.input, "CoNLL corpus")->required();
  simulate->add_option("--scheme", sim.scheme, "corpus tagging scheme (IOB1, IOB2, IO)");
  simulate->add_option("--tasks", sim.tasks, "number of synthetic tasks")->required();
  simulate->add_option("--alpha", sim.alphas, "comma-separated alpha per task")
      ->required()
      ->delimiter(',');
  simulate->add_option("--samples", sim.samples, "tokens per task")->required();
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--out", sim.out, "output task-set JSON")->required();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "train and evaluate a parameter grid");
  sweep_cmd->add_option("--config", sweep.config, "sweep config JSON")->required();
  sweep_cmd->add_option("--out", sweep.out, "records CSV")->required();
  sweep_cmd->add_option("--parallel", sweep.parallel,
                        "worker threads (default: MTLAB_PARALLEL or 1)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a formula to experiment records");
  fit_cmd->add_option("--records", fit.records, "records CSV")->required();
  fit_cmd->add_option("--inputs", fit.inputs, "input columns")->required()->delimiter(',');
  fit_cmd->add_option("--target", fit.target, "target column (default f1_mean)");
  fit_cmd->add_option("--scale", fit.scale, "y scale constant (default 100)");
  fit_cmd->add_option("--train-fraction", fit.train_fraction, "train split (default 0.9)");
  fit_cmd->add_option("--generations", fit.generations, "GP generations (default 20)");
  fit_cmd->add_option("--population", fit.population, "GP population (default 1000)");
  fit_cmd->add_option("--tournament", fit.tournament, "tournament size (default 20)");
  fit_cmd->add_option("--parsimony", fit.parsimony, "parsimony coefficient (default 0.2)");
  fit_cmd->add_option("--seed", fit.seed, "random seed");
  fit_cmd->add_option("--threads", fit.threads, "fitness evaluation threads");
  fit_cmd->add_option("--out", fit.out, "report JSON path");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score an expression against records");
  eval_cmd->add_option("--expr", eval.expr, "expression, e.g. mul(sqrt(x1), 20)")->required();
  eval_cmd->add_option("--records", eval.records, "records CSV")->required();
  eval_cmd->add_option("--inputs", eval.inputs, "input columns bound to x1..xk")
      ->required()
      ->delimiter(',');
  eval_cmd->add_option("--target", eval.target, "target column (default f1_mean)");
  eval_cmd->add_option("--scale", eval.scale, "y scale constant (default 100)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "summaries and charts from records");
  report_cmd->add_option("--records", report.records, "records CSV")->required();
  report_cmd->add_option("--outdir", report.outdir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (report_cmd->parsed()) return cmd_report(report);
  } catch (const mtlab::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
