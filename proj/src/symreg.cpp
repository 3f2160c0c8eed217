#include "mtlab/symreg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <thread>

#include "mtlab/text.hpp"

namespace mtlab::symreg {

namespace {

constexpr double kValueCap = 1e150;
constexpr double kDivFloor = 1e-3;
constexpr double kExpArgCap = 20.0;

constexpr Op kOperators[] = {Op::Add, Op::Sub, Op::Mul, Op::Div,
                             Op::Log, Op::Sqrt, Op::Exp, Op::Neg};

double clamp_value(double v) { return std::clamp(v, -kValueCap, kValueCap); }

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Log: return std::abs(a) > kDivFloor ? clamp_value(std::log(std::abs(a))) : 0.0;
    case Op::Sqrt: return std::sqrt(std::abs(a));
    case Op::Exp: return std::exp(std::clamp(a, -kExpArgCap, kExpArgCap));
    case Op::Neg: return -a;
    default: throw InputError("not a unary operator");
  }
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return clamp_value(a + b);
    case Op::Sub: return clamp_value(a - b);
    case Op::Mul: return clamp_value(a * b);
    case Op::Div: return std::abs(b) > kDivFloor ? clamp_value(a / b) : 1.0;
    default: throw InputError("not a binary operator");
  }
}

double eval_node(const std::vector<Node>& ns, std::size_t& i, std::span<const double> row) {
  const Node& n = ns[i++];
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var:
      if (n.var < 0 || std::size_t(n.var) >= row.size())
        throw UnboundVariable("x" + std::to_string(n.var + 1) + " is not bound (row has " +
                              std::to_string(row.size()) + " variables)");
      return row[std::size_t(n.var)];
    case Op::Log:
    case Op::Sqrt:
    case Op::Exp:
    case Op::Neg: {
      const double a = eval_node(ns, i, row);
      return apply_unary(n.op, a);
    }
    default: {
      const double a = eval_node(ns, i, row);
      const double b = eval_node(ns, i, row);
      return apply_binary(n.op, a, b);
    }
  }
}

Node random_leaf(const GPConfig& cfg, std::size_t n_vars, SplitRng& rng) {
  if (rng.next_double() < 0.5) return Node{Op::Var, int(rng.next_below(n_vars)), 0.0};
  return Node{Op::Const, 0, rng.next_uniform(cfg.const_min, cfg.const_max)};
}

// Grow/full tree with every path at least min_depth deep and none deeper
// than max_depth.
void random_tree(std::vector<Node>& out, const GPConfig& cfg, std::size_t n_vars, SplitRng& rng,
                 std::size_t depth, std::size_t min_depth, std::size_t max_depth, bool full) {
  const bool must_stop = depth >= max_depth;
  const bool must_grow = depth < min_depth;
  bool pick_op;
  if (must_stop)
    pick_op = false;
  else if (must_grow || full)
    pick_op = true;
  else
    pick_op = rng.next_double() < 0.5;

  if (!pick_op) {
    out.push_back(random_leaf(cfg, n_vars, rng));
    return;
  }
  const Op op = kOperators[rng.next_below(std::size(kOperators))];
  out.push_back(Node{op, 0, 0.0});
  for (int k = 0; k < arity(op); ++k)
    random_tree(out, cfg, n_vars, rng, depth + 1, min_depth, max_depth, full);
}

Expr random_expr_capped(const GPConfig& cfg, std::size_t n_vars, SplitRng& rng,
                        std::size_t max_depth) {
  const std::size_t lo = std::min(cfg.init_depth_min, max_depth);
  const std::size_t hi = std::min(cfg.init_depth_max, max_depth);
  const std::size_t target = lo + rng.next_below(hi - lo + 1);
  const bool full = rng.next_double() < 0.5;
  Expr e;
  random_tree(e.nodes, cfg, n_vars, rng, 0, std::min<std::size_t>(cfg.init_depth_min, target),
              target, full);
  return e;
}

// Depth of the node at position `at` (root = 0).
std::size_t depth_of_node(const std::vector<Node>& ns, std::size_t at) {
  std::vector<int> stack;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (i == at) return stack.size();
    const int k = arity(ns[i].op);
    if (k > 0) {
      stack.push_back(k);
    } else {
      while (!stack.empty() && --stack.back() == 0) stack.pop_back();
    }
  }
  return 0;
}

Expr splice(const Expr& host, std::size_t from, std::size_t to, std::span<const Node> graft) {
  Expr out;
  out.nodes.reserve(host.nodes.size() - (to - from) + graft.size());
  out.nodes.insert(out.nodes.end(), host.nodes.begin(), host.nodes.begin() + long(from));
  out.nodes.insert(out.nodes.end(), graft.begin(), graft.end());
  out.nodes.insert(out.nodes.end(), host.nodes.begin() + long(to), host.nodes.end());
  return out;
}

struct Ranked {
  double fitness;
  std::size_t size;
  std::size_t index;

  bool operator<(const Ranked& o) const {
    if (fitness != o.fitness) return fitness < o.fitness;
    if (size != o.size) return size < o.size;
    return index < o.index;
  }
};

void sexpr_of(const std::vector<Node>& ns, std::size_t& i, std::string& out);
void infix_of(const std::vector<Node>& ns, std::size_t& i, std::string& out);

// Constant format: shortest round-trip text, padded to three decimals when
// it has no exponent.
std::string format_constant(double v) {
  std::string s = format_double(v);
  if (s.find_first_of("eE") != std::string::npos) return s;
  const auto dot = s.find('.');
  if (dot == std::string::npos) return s + ".000";
  for (std::size_t d = s.size() - dot - 1; d < 3; ++d) s += '0';
  return s;
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  void expect(char c) {
    if (peek() != c)
      throw ExprParseError("expected '" + std::string(1, c) + "' at position " +
                           std::to_string(pos));
    ++pos;
  }

  void parse_into(std::vector<Node>& out) {
    skip_ws();
    if (pos >= text.size()) throw ExprParseError("unexpected end of expression");
    const char c = text[pos];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string_view word = text.substr(start, pos - start);
      if (word.size() >= 2 && word[0] == 'x' &&
          std::all_of(word.begin() + 1, word.end(),
                      [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        const long long idx = parse_int(word.substr(1));
        if (idx < 1) throw ExprParseError("variable indices start at x1");
        out.push_back(Node{Op::Var, int(idx - 1), 0.0});
        return;
      }
      Op op;
      if (word == "add") op = Op::Add;
      else if (word == "sub") op = Op::Sub;
      else if (word == "mul") op = Op::Mul;
      else if (word == "div") op = Op::Div;
      else if (word == "log") op = Op::Log;
      else if (word == "sqrt") op = Op::Sqrt;
      else if (word == "exp") op = Op::Exp;
      else if (word == "neg") op = Op::Neg;
      else throw ExprParseError("unknown operator '" + std::string(word) + "'");
      out.push_back(Node{op, 0, 0.0});
      expect('(');
      parse_into(out);
      for (int k = 1; k < arity(op); ++k) {
        expect(',');
        parse_into(out);
      }
      expect(')');
      return;
    }
    // number
    std::size_t start = pos;
    if (c == '+' || c == '-') ++pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
            text[pos] == 'e' || text[pos] == 'E' ||
            ((text[pos] == '+' || text[pos] == '-') &&
             (text[pos - 1] == 'e' || text[pos - 1] == 'E'))))
      ++pos;
    if (pos == start) throw ExprParseError("expected a value at position " + std::to_string(pos));
    double v;
    try {
      v = parse_double(text.substr(start, pos - start));
    } catch (const InputError& err) {
      throw ExprParseError(err.what());
    }
    out.push_back(Node{Op::Const, 0, v});
  }
};

}  // namespace

int arity(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Log:
    case Op::Sqrt:
    case Op::Exp:
    case Op::Neg: return 1;
    default: return 0;
  }
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Exp: return "exp";
    case Op::Neg: return "neg";
    case Op::Var: return "var";
    case Op::Const: return "const";
  }
  return "?";
}

std::size_t subtree_end(const std::vector<Node>& nodes, std::size_t i) {
  std::size_t need = 1, j = i;
  while (need > 0) {
    need += std::size_t(arity(nodes[j].op)) - 1;
    ++j;
  }
  return j;
}

std::size_t expr_depth(const Expr& e) {
  std::size_t max_d = 0;
  std::vector<int> stack;
  for (const Node& n : e.nodes) {
    max_d = std::max(max_d, stack.size());
    const int k = arity(n.op);
    if (k > 0) {
      stack.push_back(k);
    } else {
      while (!stack.empty() && --stack.back() == 0) stack.pop_back();
    }
  }
  return max_d;
}

bool expr_valid(const Expr& e, std::size_t max_depth) {
  if (e.nodes.empty()) return false;
  for (const Node& n : e.nodes)
    if (n.op == Op::Const && !std::isfinite(n.value)) return false;
  // the prefix walk must consume exactly the whole vector
  std::size_t need = 1;
  for (const Node& n : e.nodes) {
    if (need == 0) return false;
    need += std::size_t(arity(n.op)) - 1;
  }
  return need == 0 && expr_depth(e) <= max_depth;
}

void GPConfig::validate() const {
  if (population_size == 0 || tournament_size == 0) throw InvalidConfig("counts must be positive");
  const double p = p_crossover + p_subtree_mutation + p_hoist_mutation + p_point_mutation;
  if (p_crossover < 0 || p_subtree_mutation < 0 || p_hoist_mutation < 0 || p_point_mutation < 0 ||
      p > 1.0 + 1e-9)
    throw InvalidConfig("variation probabilities must be nonnegative and sum to at most 1");
  if (const_min > const_max) throw InvalidConfig("constant range is inverted");
  if (init_depth_min > init_depth_max || init_depth_max > kMaxDepth)
    throw InvalidConfig("bad init depth range");
  if (parsimony < 0) throw InvalidConfig("parsimony must be nonnegative");
}

double eval_expr(const Expr& e, std::span<const double> row) {
  std::size_t i = 0;
  return eval_node(e.nodes, i, row);
}

double mse(const Expr& e, const Dataset& x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw LengthMismatch("dataset rows do not match targets");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = eval_expr(e, x[i]) - y[i];
    acc += d * d;
  }
  return acc / double(x.size());
}

double fitness(const Expr& e, const Dataset& x, std::span<const double> y, double parsimony) {
  return mse(e, x, y) + parsimony * double(e.size());
}

Expr random_expr(const GPConfig& cfg, std::size_t n_vars, SplitRng& rng) {
  if (n_vars == 0) throw InvalidConfig("need at least one variable");
  return random_expr_capped(cfg, n_vars, rng, cfg.init_depth_max);
}

std::size_t tournament_select(std::span<const double> penalized, std::span<const Expr> pop,
                              std::size_t k, SplitRng& rng) {
  if (pop.empty()) throw EmptyInput("empty population");
  k = std::min(k, pop.size());
  Ranked best{0.0, 0, 0};
  bool have = false;
  if (k * 2 >= pop.size()) {
    // sample without replacement via partial Fisher-Yates
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t(0));
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(order[i], order[i + rng.next_below(order.size() - i)]);
      Ranked r{penalized[order[i]], pop[order[i]].size(), order[i]};
      if (!have || r < best) {
        best = r;
        have = true;
      }
    }
  } else {
    std::vector<std::size_t> seen;
    seen.reserve(k);
    while (seen.size() < k) {
      const std::size_t c = rng.next_below(pop.size());
      if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
      seen.push_back(c);
      Ranked r{penalized[c], pop[c].size(), c};
      if (!have || r < best) {
        best = r;
        have = true;
      }
    }
  }
  return best.index;
}

Expr subtree_crossover(const Expr& a, const Expr& b, SplitRng& rng) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    const std::size_t i = rng.next_below(a.size());
    const std::size_t i_end = subtree_end(a.nodes, i);
    const std::size_t j = rng.next_below(b.size());
    const std::size_t j_end = subtree_end(b.nodes, j);
    Expr child = splice(a, i, i_end,
                        std::span<const Node>(b.nodes.data() + j, j_end - j));
    if (expr_depth(child) <= kMaxDepth) return child;
  }
  return a;
}

Expr mutate_subtree(const Expr& e, const GPConfig& cfg, std::size_t n_vars, SplitRng& rng) {
  const std::size_t i = rng.next_below(e.size());
  const std::size_t i_end = subtree_end(e.nodes, i);
  const std::size_t room = kMaxDepth - depth_of_node(e.nodes, i);
  Expr graft = random_expr_capped(cfg, n_vars, rng, room);
  return splice(e, i, i_end, graft.nodes);
}

Expr mutate_hoist(const Expr& e, SplitRng& rng) {
  const std::size_t i = rng.next_below(e.size());
  const std::size_t i_end = subtree_end(e.nodes, i);
  const std::size_t j = i + rng.next_below(i_end - i);
  const std::size_t j_end = subtree_end(e.nodes, j);
  return splice(e, i, i_end, std::span<const Node>(e.nodes.data() + j, j_end - j));
}

Expr mutate_point(const Expr& e, const GPConfig& cfg, std::size_t n_vars, SplitRng& rng) {
  Expr out = e;
  const std::size_t i = rng.next_below(out.size());
  Node& n = out.nodes[std::size_t(i)];
  const int k = arity(n.op);
  if (k == 0) {
    n = random_leaf(cfg, n_vars, rng);
  } else {
    std::vector<Op> same;
    for (Op op : kOperators)
      if (arity(op) == k) same.push_back(op);
    n.op = same[rng.next_below(same.size())];
  }
  return out;
}

namespace {

std::vector<double> evaluate_population(const std::vector<Expr>& pop, const Dataset& x,
                                        std::span<const double> y, std::size_t threads) {
  std::vector<double> raw(pop.size());
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) raw[i] = mse(pop[i], x, y);
  };
  if (threads <= 1 || pop.size() < 2 * threads) {
    run(0, pop.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (pop.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(pop.size(), lo + chunk);
      if (lo < hi) workers.emplace_back(run, lo, hi);
    }
    for (auto& w : workers) w.join();
  }
  return raw;
}

}  // namespace

FitResult evolve(const GPConfig& cfg, const Dataset& x, std::span<const double> y,
                 const Dataset& x_test, std::span<const double> y_test) {
  cfg.validate();
  if (x.size() != y.size()) throw LengthMismatch("dataset rows do not match targets");
  if (x.size() < 2) throw InputError("need at least 2 rows");
  const std::size_t n_vars = x[0].size();
  if (n_vars == 0) throw InputError("rows have no variables");
  for (const auto& row : x)
    if (row.size() != n_vars) throw LengthMismatch("ragged dataset");
  for (double v : y)
    if (!std::isfinite(v)) throw InputError("targets must be finite");

  FitResult result;

  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  if (*mn == *mx) {
    // constant target: nothing to search for
    result.best = Expr::constant(*mn);
    result.train_mse = 0.0;
    result.best_fitness_trace.assign(cfg.generations, cfg.parsimony);
    if (!x_test.empty()) result.test_mse = mse(result.best, x_test, y_test);
    return result;
  }

  SplitRng root(cfg.seed);
  std::vector<Expr> pop;
  pop.reserve(cfg.population_size);
  {
    SplitRng init = root.split(0);
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
      SplitRng r = init.split(i);
      pop.push_back(random_expr(cfg, n_vars, r));
    }
  }

  auto penalize = [&](const std::vector<Expr>& p, const std::vector<double>& raw) {
    std::vector<double> pen(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      pen[i] = raw[i] + cfg.parsimony * double(p[i].size());
    return pen;
  };
  auto best_of = [&](const std::vector<Expr>& p, const std::vector<double>& score) {
    Ranked best{score[0], p[0].size(), 0};
    for (std::size_t i = 1; i < p.size(); ++i) {
      Ranked r{score[i], p[i].size(), i};
      if (r < best) best = r;
    }
    return best.index;
  };

  std::vector<double> raw = evaluate_population(pop, x, y, cfg.threads);
  std::vector<double> pen = penalize(pop, raw);

  // Best raw-MSE individual seen anywhere in the run; the parsimony penalty
  // steers selection but not the reported winner.
  Expr run_best = pop[best_of(pop, raw)];
  double run_best_mse = raw[best_of(pop, raw)];
  auto update_run_best = [&]() {
    const std::size_t i = best_of(pop, raw);
    const bool better = raw[i] < run_best_mse ||
                        (raw[i] == run_best_mse && pop[i].size() < run_best.size());
    if (better) {
      run_best = pop[i];
      run_best_mse = raw[i];
    }
  };

  result.best_fitness_trace.reserve(cfg.generations);
  const double p1 = cfg.p_crossover;
  const double p2 = p1 + cfg.p_subtree_mutation;
  const double p3 = p2 + cfg.p_hoist_mutation;
  const double p4 = p3 + cfg.p_point_mutation;

  for (std::size_t g = 1; g <= cfg.generations; ++g) {
    std::vector<Expr> next;
    next.reserve(cfg.population_size);
    next.push_back(pop[best_of(pop, pen)]);  // elite
    SplitRng gen = root.split(g);
    for (std::size_t i = next.size(); i < cfg.population_size; ++i) {
      SplitRng r = gen.split(i);
      const double u = r.next_double();
      const Expr& parent = pop[tournament_select(pen, pop, cfg.tournament_size, r)];
      if (u < p1) {
        const Expr& donor = pop[tournament_select(pen, pop, cfg.tournament_size, r)];
        next.push_back(subtree_crossover(parent, donor, r));
      } else if (u < p2) {
        next.push_back(mutate_subtree(parent, cfg, n_vars, r));
      } else if (u < p3) {
        next.push_back(mutate_hoist(parent, r));
      } else if (u < p4) {
        next.push_back(mutate_point(parent, cfg, n_vars, r));
      } else {
        next.push_back(parent);  // reproduction
      }
    }
    pop = std::move(next);
    raw = evaluate_population(pop, x, y, cfg.threads);
    pen = penalize(pop, raw);
    result.best_fitness_trace.push_back(pen[best_of(pop, pen)]);
    update_run_best();
  }

  result.best = std::move(run_best);
  result.train_mse = run_best_mse;
  if (!x_test.empty()) result.test_mse = mse(result.best, x_test, y_test);
  return result;
}

namespace {

void sexpr_of(const std::vector<Node>& ns, std::size_t& i, std::string& out) {
  const Node& n = ns[i++];
  switch (n.op) {
    case Op::Const: out += format_constant(n.value); return;
    case Op::Var:
      out += "x" + std::to_string(n.var + 1);
      return;
    default: break;
  }
  out += op_name(n.op);
  out += '(';
  sexpr_of(ns, i, out);
  for (int k = 1; k < arity(n.op); ++k) {
    out += ", ";
    sexpr_of(ns, i, out);
  }
  out += ')';
}

void infix_of(const std::vector<Node>& ns, std::size_t& i, std::string& out) {
  const Node& n = ns[i];
  const int k = arity(n.op);
  if (k == 2) {
    ++i;
    const char* sym = n.op == Op::Add   ? " + "
                      : n.op == Op::Sub ? " - "
                      : n.op == Op::Mul ? " * "
                                        : " / ";
    auto emit_side = [&]() {
      const bool wrap = arity(ns[i].op) == 2;
      if (wrap) out += '(';
      infix_of(ns, i, out);
      if (wrap) out += ')';
    };
    emit_side();
    out += sym;
    emit_side();
  } else if (k == 1) {
    ++i;
    out += op_name(n.op);
    out += '(';
    infix_of(ns, i, out);
    out += ')';
  } else {
    std::size_t j = i;
    sexpr_of(ns, j, out);
    i = j;
  }
}

}  // namespace

std::string format_sexpr(const Expr& e) {
  std::string out;
  std::size_t i = 0;
  sexpr_of(e.nodes, i, out);
  return out;
}

std::string format_infix(const Expr& e) {
  std::string out;
  std::size_t i = 0;
  infix_of(e.nodes, i, out);
  return out;
}

Expr parse_expr(const std::string& text) {
  Parser p{text};
  Expr e;
  p.parse_into(e.nodes);
  p.skip_ws();
  if (p.pos != p.text.size())
    throw ExprParseError("trailing input at position " + std::to_string(p.pos));
  if (!expr_valid(e, std::size_t(-1))) throw ExprParseError("expression is not well formed");
  return e;
}

}  // namespace mtlab::symreg
