#include <catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "bci/dist.h"

using bci::Evidence;
using bci::JointTable;
using bci::Variable;
using bci::VariableSpace;
using Catch::Matchers::WithinAbs;

namespace {

VariableSpace Binary(std::vector<std::string> names) {
  std::vector<Variable> vars;
  for (auto& n : names) vars.push_back({std::move(n), 2});
  return VariableSpace(std::move(vars));
}

// p(x1, x2) with p(x_i = 1) = beta and p(x_j = 1 | x_i = 1) = q.
JointTable CorrelatedPair(double beta, double q) {
  return JointTable(Binary({"x1", "x2"}),
                    {1 - beta * (2 - q), beta * (1 - q), beta * (1 - q), beta * q});
}

JointTable RandomTable(VariableSpace space, std::mt19937_64& rng, double zero_rate = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(space.num_cells());
  double total = 0.0;
  for (double& v : m) total += (v = u(rng) < zero_rate ? 0.0 : u(rng));
  if (total == 0.0) {
    m[0] = total = 1.0;
  }
  for (double& v : m) v /= total;
  return JointTable(std::move(space), std::move(m));
}

}  // namespace

TEST_CASE("variable spaces address cells bijectively") {
  VariableSpace s({{"a", 2}, {"b", 3}, {"c", 2}});
  REQUIRE(s.num_cells() == 12);
  for (std::size_t i = 0; i < s.num_cells(); ++i) {
    const auto asg = s.assignment(i);
    CHECK(s.index(asg) == i);
    for (std::size_t v = 0; v < s.size(); ++v) CHECK(s.value(i, v) == asg[v]);
  }
  CHECK(s.index(std::vector<int>{1, 2, 1}) == 11);
  CHECK(s.position("b") == 1);
  CHECK_THROWS_AS(s.position("nope"), std::invalid_argument);
}

TEST_CASE("variable spaces reject bad declarations") {
  CHECK_THROWS(VariableSpace({{"a", 2}, {"a", 2}}));
  CHECK_THROWS(VariableSpace({{"a", 0}}));
  // 2^25 cells.
  std::vector<Variable> big;
  for (int i = 0; i < 25; ++i) big.push_back({"v" + std::to_string(i), 2});
  CHECK_THROWS(VariableSpace(big));
}

TEST_CASE("joint tables validate their mass") {
  CHECK_THROWS(JointTable(Binary({"x"}), {0.5, 0.6}));
  CHECK_THROWS(JointTable(Binary({"x"}), {-0.1, 1.1}));
  CHECK_THROWS(JointTable(Binary({"x"}), {1.0}));
  CHECK_NOTHROW(JointTable(Binary({"x"}), {0.25, 0.75}));
}

TEST_CASE("marginalize") {
  const auto uniform = JointTable::Uniform(Binary({"x1", "x2"}));
  const std::vector<std::string> keep{"x1"};
  const auto m = bci::marginalize(uniform, keep);
  CHECK(m.mass()[0] == 0.5);
  CHECK(m.mass()[1] == 0.5);

  const auto m31 = bci::marginalize(CorrelatedPair(0.8, 0.8), keep);
  CHECK_THAT(m31.mass()[1], WithinAbs(0.8, 1e-12));

  // A three-variable table marginalized onto (c, a) keeps the requested order.
  std::mt19937_64 rng(7);
  const auto t = RandomTable(VariableSpace({{"a", 2}, {"b", 3}, {"c", 2}}), rng);
  const std::vector<std::string> ca{"c", "a"};
  const auto mca = bci::marginalize(t, ca);
  REQUIRE(mca.space().variables()[0].name == "c");
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 2; ++a) {
      double expect = 0.0;
      for (int b = 0; b < 3; ++b) expect += t.at(std::vector<int>{a, b, c});
      CHECK_THAT(mca.at(std::vector<int>{c, a}), WithinAbs(expect, 1e-15));
    }
  }
  const std::vector<std::string> unknown{"q"};
  CHECK_THROWS_AS(bci::marginalize(t, unknown), std::invalid_argument);
}

TEST_CASE("condition") {
  const auto uniform = JointTable::Uniform(Binary({"x1", "x2"}));
  const std::vector<Evidence> x1_is_1{{"x1", 1}};
  const auto c = bci::condition(uniform, x1_is_1);
  REQUIRE(c.has_value());
  CHECK(c->space().size() == 1);
  CHECK(c->mass()[1] == 0.5);

  const auto c31 = bci::condition(CorrelatedPair(0.8, 0.8), x1_is_1);
  REQUIRE(c31.has_value());
  CHECK_THAT(c31->mass()[1], WithinAbs(0.8, 1e-12));

  const auto point = JointTable::PointMass(Binary({"x1", "x2"}), std::vector<int>{0, 0});
  CHECK_FALSE(bci::condition(point, x1_is_1).has_value());
}

TEST_CASE("sequential conditioning equals joint conditioning") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto t = RandomTable(VariableSpace({{"a", 2}, {"b", 3}, {"c", 2}, {"d", 2}}), rng, 0.2);
    const int b = static_cast<int>(rng() % 3);
    const int d = static_cast<int>(rng() % 2);
    const std::vector<Evidence> e1{{"b", b}}, e2{{"d", d}}, both{{"b", b}, {"d", d}};
    const auto first = bci::condition(t, e1);
    if (!first) continue;
    const auto seq = bci::condition(*first, e2);
    const auto joint = bci::condition(t, both);
    REQUIRE(seq.has_value() == joint.has_value());
    if (!seq) continue;
    for (std::size_t i = 0; i < seq->space().num_cells(); ++i) {
      CHECK_THAT((*seq)[i], WithinAbs((*joint)[i], 1e-12));
    }
  }
}

TEST_CASE("conditional tables flag unsupported rows and recompose the joint") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const auto t = RandomTable(VariableSpace({{"g", 3}, {"x", 2}, {"y", 2}}), rng, 0.3);
    const std::vector<std::string> target{"y"}, given{"g", "x"};
    const auto cond = bci::conditional(t, target, given);
    const auto marg = bci::marginalize(t, given);
    for (std::size_t g = 0; g < cond.given().num_cells(); ++g) {
      CHECK(cond.supported(g) == (marg[g] > 0.0));
      if (!cond.supported(g)) {
        CHECK_FALSE(cond.probability(g, 0).has_value());
        continue;
      }
      CHECK_THAT(*cond.probability(g, 0) + *cond.probability(g, 1), WithinAbs(1.0, 1e-12));
    }
    const auto back = bci::compose(marg, cond);
    for (std::size_t i = 0; i < t.space().num_cells(); ++i) {
      CHECK_THAT(back[i], WithinAbs(t[i], 1e-12));
    }
  }
}

TEST_CASE("check_ci") {
  // Product of independent marginals: every triple is independent.
  const JointTable product(Binary({"a", "b", "c"}),
                           {0.3 * 0.6 * 0.1, 0.3 * 0.6 * 0.9, 0.3 * 0.4 * 0.1, 0.3 * 0.4 * 0.9,
                            0.7 * 0.6 * 0.1, 0.7 * 0.6 * 0.9, 0.7 * 0.4 * 0.1, 0.7 * 0.4 * 0.9});
  const std::vector<std::string> a{"a"}, b{"b"}, c{"c"}, none{};
  CHECK(bci::check_ci(product, a, b, none, 1e-12));
  CHECK(bci::check_ci(product, a, b, c, 1e-12));
  CHECK(bci::check_ci(product, b, c, a, 1e-12));

  // q = beta makes the pair independent; q > beta correlates it.
  const std::vector<std::string> x1{"x1"}, x2{"x2"};
  CHECK(bci::check_ci(CorrelatedPair(0.8, 0.8), x1, x2, none, 1e-12));
  const auto pair = CorrelatedPair(0.5, 0.9);
  CHECK_FALSE(bci::check_ci(pair, x1, x2, none, 1e-6));

  const std::vector<std::string> overlapping{"a", "b"};
  CHECK_THROWS(bci::check_ci(product, a, overlapping, none, 1e-12));
}

TEST_CASE("check_ci is symmetric") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> l{"a"}, r{"b", "c"}, g{"d"};
  for (int rep = 0; rep < 40; ++rep) {
    const auto t = RandomTable(VariableSpace({{"a", 2}, {"b", 2}, {"c", 3}, {"d", 2}}), rng, 0.4);
    for (double tol : {1e-12, 1e-2, 0.1}) {
      CHECK(bci::check_ci(t, l, r, g, tol) == bci::check_ci(t, r, l, g, tol));
    }
  }
}

TEST_CASE("expectation") {
  const auto pair = CorrelatedPair(0.8, 0.8);
  CHECK_THAT(bci::expectation(pair, [](std::span<const int>) { return 1.0; }),
             WithinAbs(1.0, 1e-12));
  CHECK_THAT(bci::expectation(pair, [](std::span<const int> v) { return v[0] * v[1] * 1.0; }),
             WithinAbs(0.64, 1e-12));

  // Table over (t, x1, x2) with three-valued x. The t = 1 rows carry
  // beta + (gamma - beta - 2 beta^2) = gamma - 2 beta^2.
  const double gamma = 0.6, beta = 0.01;
  std::vector<double> m(18, 0.0);
  m[9 + 4] = beta;
  m[3] = m[1] = beta * beta;
  m[8] = 1 - gamma;
  m[9] = gamma - beta - 2 * beta * beta;
  const JointTable t(VariableSpace({{"t", 2}, {"x1", 3}, {"x2", 3}}), m);
  CHECK_THAT(bci::expectation(t, [](std::span<const int> v) { return v[0] == 1 ? 1.0 : 0.0; }),
             WithinAbs(gamma - 2 * beta * beta, 1e-12));
}
