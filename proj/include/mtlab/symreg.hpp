#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mtlab/errors.hpp"
#include "mtlab/rng.hpp"

namespace mtlab::symreg {

enum class Op : std::uint8_t { Add, Sub, Mul, Div, Log, Sqrt, Exp, Neg, Var, Const };

int arity(Op op);
std::string_view op_name(Op op);

struct Node {
  Op op = Op::Const;
  int var = 0;          // Var only
  double value = 0.0;   // Const only

  bool operator==(const Node&) const = default;
};

// Expression tree stored as a prefix-order vector; the subtree rooted at
// node i is the contiguous range [i, subtree_end(i)).
struct Expr {
  std::vector<Node> nodes;

  std::size_t size() const { return nodes.size(); }
  bool operator==(const Expr&) const = default;

  static Expr constant(double v) { return Expr{{Node{Op::Const, 0, v}}}; }
  static Expr variable(int index) { return Expr{{Node{Op::Var, index, 0.0}}}; }
};

std::size_t subtree_end(const std::vector<Node>& nodes, std::size_t i);
std::size_t expr_depth(const Expr& e);
// Structural sanity: arities consistent, one tree, finite constants,
// depth within the hard cap.
bool expr_valid(const Expr& e, std::size_t max_depth = 17);

inline constexpr std::size_t kMaxDepth = 17;

struct GPConfig {
  std::size_t population_size = 1000;
  std::size_t generations = 20;
  std::size_t tournament_size = 20;
  double p_crossover = 0.7;
  double p_subtree_mutation = 0.1;
  double p_hoist_mutation = 0.1;
  double p_point_mutation = 0.1;
  double parsimony = 0.2;
  double const_min = -1.0;
  double const_max = 1.0;
  std::size_t init_depth_min = 2;
  std::size_t init_depth_max = 6;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

using Dataset = std::vector<std::vector<double>>;  // rows of variable values

struct FitResult {
  Expr best;
  double train_mse = 0.0;
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> best_fitness_trace;  // best penalized fitness per generation
  double y_scale = 1.0;

  bool operator==(const FitResult&) const = default;
};

// Recursive evaluation with protected primitives: div returns 1 near zero
// denominators, log is 0 near zero and otherwise acts on |x|, sqrt acts on
// |x|, exp clamps its argument to [-20, 20]. Every node output is clamped
// to +/-1e150 so arbitrary evolved trees stay finite.
double eval_expr(const Expr& e, std::span<const double> row);

double mse(const Expr& e, const Dataset& x, std::span<const double> y);
// mse + parsimony * node count; lower is better.
double fitness(const Expr& e, const Dataset& x, std::span<const double> y, double parsimony);

// Ramped half-and-half tree over init_depth with 50/50 variable/constant
// leaves.
Expr random_expr(const GPConfig& cfg, std::size_t n_vars, SplitRng& rng);

// Best of k individuals sampled without replacement; ties break toward
// fewer nodes, then the earlier population index.
std::size_t tournament_select(std::span<const double> penalized, std::span<const Expr> pop,
                              std::size_t k, SplitRng& rng);

// Replace a uniformly chosen subtree of a with a uniformly chosen subtree
// of b. Results deeper than kMaxDepth are retried up to 5 times, then a is
// returned unchanged.
Expr subtree_crossover(const Expr& a, const Expr& b, SplitRng& rng);

Expr mutate_subtree(const Expr& e, const GPConfig& cfg, std::size_t n_vars, SplitRng& rng);
Expr mutate_hoist(const Expr& e, SplitRng& rng);
Expr mutate_point(const Expr& e, const GPConfig& cfg, std::size_t n_vars, SplitRng& rng);

// Generational GP with tournament selection, the crossover/mutation mix
// from cfg (remainder = reproduction) and single-individual elitism. The
// returned expression is the final population's best by raw train MSE; the
// trace records the best penalized fitness of each generation. Identical
// (cfg, data, seed) give identical results, serial or parallel.
FitResult evolve(const GPConfig& cfg, const Dataset& x, std::span<const double> y,
                 const Dataset& x_test = {}, std::span<const double> y_test = {});

std::string format_sexpr(const Expr& e);
std::string format_infix(const Expr& e);
// Inverse of format_sexpr.
Expr parse_expr(const std::string& text);

}  // namespace mtlab::symreg
