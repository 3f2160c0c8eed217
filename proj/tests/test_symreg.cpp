#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtlab/rng.hpp"
#include "mtlab/symreg.hpp"

using namespace mtlab;
using namespace mtlab::symreg;

namespace {

// mul(add(log(x2), 0.5), x1)
Expr example_tree() {
  Expr e;
  e.nodes = {Node{Op::Mul}, Node{Op::Add}, Node{Op::Log}, Node{Op::Var, 1},
             Node{Op::Const, 0, 0.5}, Node{Op::Var, 0}};
  return e;
}

GPConfig quick_config(std::uint64_t seed) {
  GPConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("eval fixtures and protected semantics") {
  std::vector<double> row = {3.0, 1.0};
  CHECK(eval_expr(example_tree(), row) == doctest::Approx(1.5).epsilon(1e-12));

  Expr div0;
  div0.nodes = {Node{Op::Div}, Node{Op::Var, 0}, Node{Op::Var, 1}};
  std::vector<double> zero_den = {5.0, 0.0};
  CHECK(eval_expr(div0, zero_den) == 1.0);
  std::vector<double> small_den = {5.0, 0.0005};
  CHECK(eval_expr(div0, small_den) == 1.0);  // |b| <= 1e-3 counts as zero
  std::vector<double> fine_den = {5.0, 0.01};
  CHECK(eval_expr(div0, fine_den) == doctest::Approx(500.0));

  Expr s;
  s.nodes = {Node{Op::Sqrt}, Node{Op::Const, 0, -4.0}};
  CHECK(eval_expr(s, {}) == 2.0);

  Expr l;
  l.nodes = {Node{Op::Log}, Node{Op::Const, 0, 0.0}};
  CHECK(eval_expr(l, {}) == 0.0);
  l.nodes[1].value = -std::exp(1.0);
  CHECK(eval_expr(l, {}) == doctest::Approx(1.0));

  Expr ex;
  ex.nodes = {Node{Op::Exp}, Node{Op::Const, 0, 100.0}};
  CHECK(eval_expr(ex, {}) == doctest::Approx(std::exp(20.0)));  // clamped argument

  Expr ng;
  ng.nodes = {Node{Op::Neg}, Node{Op::Const, 0, 2.5}};
  CHECK(eval_expr(ng, {}) == -2.5);
}

TEST_CASE("eval matches plain arithmetic when no protection triggers") {
  SplitRng rng(3);
  for (int iter = 0; iter < 100; ++iter) {
    const double a = rng.next_uniform(0.1, 5.0);
    Expr e;
    e.nodes = {Node{Op::Add}, Node{Op::Mul}, Node{Op::Const, 0, a}, Node{Op::Var, 0},
               Node{Op::Sqrt}, Node{Op::Var, 1}};
    std::vector<double> row = {rng.next_uniform(0.1, 9.0), rng.next_uniform(0.1, 9.0)};
    const double direct = a * row[0] + std::sqrt(row[1]);
    CHECK(std::abs(eval_expr(e, row) - direct) <= 1e-12 * std::abs(direct));
  }
}

TEST_CASE("unbound variable") {
  Expr e = Expr::variable(3);
  std::vector<double> row = {1.0, 2.0};
  CHECK_THROWS_AS(eval_expr(e, row), UnboundVariable);
}

TEST_CASE("random_expr respects the init depth band") {
  GPConfig cfg = quick_config(5);
  SplitRng rng(6);
  for (int iter = 0; iter < 300; ++iter) {
    SplitRng r = rng.split(std::uint64_t(iter));
    Expr e = random_expr(cfg, 3, r);
    CHECK(expr_valid(e));
    const std::size_t d = expr_depth(e);
    CHECK(d >= 2);
    CHECK(d <= 6);
  }
}

TEST_CASE("random_expr with one variable uses x1 only") {
  GPConfig cfg = quick_config(7);
  SplitRng rng(8);
  for (int iter = 0; iter < 50; ++iter) {
    SplitRng r = rng.split(std::uint64_t(iter));
    Expr e = random_expr(cfg, 1, r);
    for (const auto& n : e.nodes)
      if (n.op == Op::Var) CHECK(n.var == 0);
  }
}

TEST_CASE("random_expr deterministic") {
  GPConfig cfg = quick_config(9);
  SplitRng a(11), b(11);
  CHECK(random_expr(cfg, 2, a) == random_expr(cfg, 2, b));
}

TEST_CASE("fitness adds the length penalty") {
  // predictions 0 and 2 against targets 1 and 1 -> MSE 1
  Expr e;
  e.nodes = {Node{Op::Add}, Node{Op::Var, 0}, Node{Op::Const, 0, 0.0}};
  Dataset x = {{0.0}, {2.0}};
  std::vector<double> y = {1.0, 1.0};
  CHECK(mse(e, x, y) == doctest::Approx(1.0));
  CHECK(fitness(e, x, y, 0.2) == doctest::Approx(1.0 + 0.2 * 3));

  Expr exact = Expr::variable(0);
  std::vector<double> y2 = {0.0, 2.0};
  CHECK(fitness(exact, x, y2, 0.0) == 0.0);

  // a neg(neg(.)) wrapper changes nothing but the length
  Expr wrapped;
  wrapped.nodes = {Node{Op::Neg}, Node{Op::Neg}};
  wrapped.nodes.insert(wrapped.nodes.end(), e.nodes.begin(), e.nodes.end());
  CHECK(fitness(wrapped, x, y, 0.2) == doctest::Approx(fitness(e, x, y, 0.2) + 2 * 0.2));
}

TEST_CASE("tournament selection") {
  std::vector<Expr> pop;
  std::vector<double> fit;
  for (int i = 0; i < 10; ++i) {
    pop.push_back(Expr::constant(double(i)));
    fit.push_back(10.0 - i);  // last individual is globally best
  }
  SplitRng rng(13);
  CHECK(tournament_select(fit, pop, pop.size(), rng) == 9);

  // k = 1 is a uniform draw; only check it is in range and deterministic
  SplitRng r1(17), r2(17);
  CHECK(tournament_select(fit, pop, 1, r1) == tournament_select(fit, pop, 1, r2));

  // size breaks ties
  std::vector<Expr> pair = {example_tree(), Expr::constant(1.0)};
  std::vector<double> same = {2.0, 2.0};
  SplitRng r3(19);
  CHECK(tournament_select(same, pair, 2, r3) == 1);  // 1 node beats 6
}

TEST_CASE("crossover of two leaves yields one of them") {
  Expr a = Expr::constant(1.0);
  Expr b = Expr::variable(0);
  SplitRng rng(23);
  for (int iter = 0; iter < 20; ++iter) {
    Expr child = subtree_crossover(a, b, rng);
    REQUIRE(child.size() == 1);
    CHECK((child == a || child == b));
  }
}

TEST_CASE("crossover respects the depth cap") {
  // chains of neg at exactly the cap
  Expr deep;
  for (int i = 0; i < int(kMaxDepth); ++i) deep.nodes.push_back(Node{Op::Neg});
  deep.nodes.push_back(Node{Op::Var, 0});
  REQUIRE(expr_depth(deep) == kMaxDepth);
  SplitRng rng(29);
  for (int iter = 0; iter < 200; ++iter) {
    Expr child = subtree_crossover(deep, deep, rng);
    CHECK(expr_valid(child));
  }
}

TEST_CASE("hoist on a single leaf is the identity") {
  Expr leaf = Expr::constant(0.25);
  SplitRng rng(31);
  CHECK(mutate_hoist(leaf, rng) == leaf);
}

TEST_CASE("point mutation preserves the node count") {
  GPConfig cfg = quick_config(37);
  SplitRng rng(41);
  for (int iter = 0; iter < 200; ++iter) {
    SplitRng r = rng.split(std::uint64_t(iter));
    Expr e = random_expr(cfg, 2, r);
    Expr m = mutate_point(e, cfg, 2, r);
    CHECK(m.size() == e.size());
    CHECK(expr_valid(m));
  }
}

TEST_CASE("hoist never deepens and variation keeps invariants") {
  GPConfig cfg = quick_config(43);
  SplitRng rng(47);
  for (int iter = 0; iter < 1000; ++iter) {
    SplitRng r = rng.split(std::uint64_t(iter));
    Expr e = random_expr(cfg, 3, r);
    Expr h = mutate_hoist(e, r);
    CHECK(expr_depth(h) <= expr_depth(e));
    CHECK(expr_valid(h));
    Expr s = mutate_subtree(e, cfg, 3, r);
    CHECK(expr_valid(s));
  }
}

TEST_CASE("closure fuzz: every evaluation stays finite") {
  GPConfig cfg = quick_config(53);
  SplitRng rng(59);
  for (int iter = 0; iter < 10000; ++iter) {
    SplitRng r = rng.split(std::uint64_t(iter));
    Expr e = random_expr(cfg, 3, r);
    std::vector<double> row = {r.next_uniform(-1e6, 1e6), r.next_uniform(-1e3, 1e3),
                               r.next_uniform(-10, 10)};
    CHECK(std::isfinite(eval_expr(e, row)));
  }
}

TEST_CASE("format matches the documented forms") {
  CHECK(format_sexpr(example_tree()) == "mul(add(log(x2), 0.500), x1)");
  CHECK(format_infix(example_tree()) == "(log(x2) + 0.500) * x1");
  CHECK(format_sexpr(Expr::constant(0.69)) == "0.690");
  CHECK(format_sexpr(Expr::constant(2.0)) == "2.000");
  CHECK(format_sexpr(Expr::variable(0)) == "x1");

  Expr nested;
  nested.nodes = {Node{Op::Div}, Node{Op::Var, 0}, Node{Op::Div}, Node{Op::Var, 1},
                  Node{Op::Var, 2}};
  CHECK(format_infix(nested) == "x1 / (x2 / x3)");
}

TEST_CASE("parse round trip on random trees") {
  GPConfig cfg = quick_config(61);
  SplitRng rng(67);
  for (int iter = 0; iter < 1000; ++iter) {
    SplitRng r = rng.split(std::uint64_t(iter));
    Expr e = random_expr(cfg, 4, r);
    Expr back = parse_expr(format_sexpr(e));
    CHECK(back == e);
  }
}

TEST_CASE("parse accepts plain user input") {
  Expr e = parse_expr("mul(sqrt(x1), 20)");
  CHECK(e.size() == 4);
  std::vector<double> row = {16.0};
  CHECK(eval_expr(e, row) == doctest::Approx(80.0));
  CHECK(parse_expr("-0.5") == Expr::constant(-0.5));
  CHECK(parse_expr(" neg( x2 ) ").size() == 2);
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(parse_expr("mul(x1"), ExprParseError);
  CHECK_THROWS_AS(parse_expr("frob(x1)"), ExprParseError);
  CHECK_THROWS_AS(parse_expr("x0"), ExprParseError);
  CHECK_THROWS_AS(parse_expr("mul(x1, x2) tail"), ExprParseError);
  CHECK_THROWS_AS(parse_expr(""), ExprParseError);
  CHECK_THROWS_AS(parse_expr("add(x1)"), ExprParseError);
}

TEST_CASE("evolve recovers the identity target on most seeds") {
  Dataset x;
  std::vector<double> y;
  SplitRng rng(73);
  for (int i = 0; i < 100; ++i) {
    x.push_back({rng.next_uniform(-5, 5)});
    y.push_back(x.back()[0]);
  }
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GPConfig cfg = quick_config(seed);
    auto fit = evolve(cfg, x, y);
    if (fit.train_mse <= 1e-6) ++hits;
    CHECK(fit.best_fitness_trace.size() == cfg.generations);
  }
  CHECK(hits >= 4);
}

TEST_CASE("evolve is deterministic") {
  GPConfig cfg = quick_config(79);
  cfg.population_size = 200;
  cfg.generations = 6;
  Dataset x;
  std::vector<double> y;
  SplitRng rng(83);
  for (int i = 0; i < 60; ++i) {
    x.push_back({rng.next_uniform(1, 9), rng.next_uniform(1, 9)});
    y.push_back(2.0 * x.back()[0] + std::sqrt(x.back()[1]));
  }
  Dataset xt = {{2.0, 3.0}, {4.0, 5.0}};
  std::vector<double> yt = {2.0 * 2 + std::sqrt(3.0), 2.0 * 4 + std::sqrt(5.0)};
  auto a = evolve(cfg, x, y, xt, yt);
  auto b = evolve(cfg, x, y, xt, yt);
  CHECK(a == b);

  cfg.threads = 3;  // parallel fitness evaluation must not change anything
  auto c = evolve(cfg, x, y, xt, yt);
  CHECK(a == c);
}

TEST_CASE("elitism keeps the best fitness nonincreasing") {
  Dataset x;
  std::vector<double> y;
  SplitRng rng(89);
  for (int i = 0; i < 80; ++i) {
    x.push_back({rng.next_uniform(1, 20)});
    y.push_back(3.0 * std::sqrt(x.back()[0]) + rng.next_normal() * 0.1);
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GPConfig cfg = quick_config(seed);
    cfg.population_size = 300;
    cfg.generations = 10;
    auto fit = evolve(cfg, x, y);
    for (std::size_t g = 1; g < fit.best_fitness_trace.size(); ++g)
      CHECK(fit.best_fitness_trace[g] <= fit.best_fitness_trace[g - 1] + 1e-12);
  }
}

TEST_CASE("constant targets return the constant immediately") {
  GPConfig cfg = quick_config(97);
  Dataset x = {{1.0}, {2.0}, {3.0}};
  std::vector<double> y = {4.25, 4.25, 4.25};
  auto fit = evolve(cfg, x, y);
  CHECK(fit.best == Expr::constant(4.25));
  CHECK(fit.train_mse == 0.0);
  CHECK(fit.best_fitness_trace.size() == cfg.generations);
}

TEST_CASE("evolve input validation") {
  GPConfig cfg = quick_config(1);
  Dataset x = {{1.0}};
  std::vector<double> y = {1.0};
  CHECK_THROWS_AS(evolve(cfg, x, y), InputError);  // too few rows
  Dataset x2 = {{1.0}, {2.0}};
  std::vector<double> bad_y = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(evolve(cfg, x2, bad_y), InputError);
  cfg.p_crossover = 0.95;  // sums over 1 with the three 0.1 mutations
  std::vector<double> y2 = {1.0, 2.0};
  CHECK_THROWS_AS(evolve(cfg, x2, y2), InvalidConfig);
}
