#include "bci/builtins.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bci/worst_case.h"

namespace bci {

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw InfeasibleParameters(what);
}

bool Open01(double v) { return v > 0.0 && v < 1.0; }

std::vector<Variable> Binary(int k) {
  std::vector<Variable> out;
  for (int j = 1; j <= k; ++j) out.push_back({"x" + std::to_string(j), 2});
  return out;
}

StrategyProfile FollowOwnSignal(const Scenario& s) {
  return StrategyProfile::FromRule(s, [](std::size_t, int, std::span<const int> x) {
    return x[0] == 1 ? 1.0 : 0.0;
  });
}

Builtin FromWitness(WitnessInstance w) {
  return {std::move(w.name), std::move(w.scenario), std::move(w.profile),
          std::move(w.schedule)};
}

Builtin Solvable(std::string name, ScenarioSpec spec) {
  Scenario s(std::move(spec));
  TrembleSchedule sched = TrembleSchedule::Uniform(s, 1e-3);
  return {std::move(name), std::move(s), std::nullopt, std::move(sched)};
}

}  // namespace

ScenarioSpec example_1_1_confounder(double q, double c) {
  Require(q >= 0.5 && q <= 1.0, "q must lie in [1/2, 1]");
  ScenarioSpec spec;
  spec.x_variables = Binary(1);
  spec.p_tx = {q / 2, (1 - q) / 2, (1 - q) / 2, q / 2};
  spec.outcome_given_tx = {0.2, 0.8, 0.2, 0.8};
  spec.types = {{{}, {}}, {{0}, {0}}};
  spec.lambda = {0.5, 0.5};
  spec.c = c;
  return spec;
}

ScenarioSpec example_1_1_collider(double q, double c) {
  Require(q >= 0.5 && q <= 1.0, "q must lie in [1/2, 1]");
  ScenarioSpec spec;
  spec.x_variables = Binary(3);
  spec.p_tx.assign(16, 0.0);
  spec.outcome_given_tx.assign(16, 0.0);
  for (int t = 0; t < 2; ++t) {
    for (int x1 = 0; x1 < 2; ++x1) {
      for (int x2 = 0; x2 < 2; ++x2) {
        for (int x3 = 0; x3 < 2; ++x3) {
          const std::size_t i = static_cast<std::size_t>(8 * t + 4 * x1 + 2 * x2 + x3);
          const double p2 = 0.1 + 0.4 * (x1 + x3);
          spec.p_tx[i] = 0.25 * (t == x1 ? q : 1 - q) * (x2 == 1 ? p2 : 1 - p2);
          spec.outcome_given_tx[i] = 0.2 + 0.6 * x3;
        }
      }
    }
  }
  spec.types = {{{}, {1}}, {{}, {}}};
  spec.lambda = {0.5, 0.5};
  spec.c = c;
  return spec;
}

ScenarioSpec example_3_1(double beta, double q, double c) {
  Require(Open01(beta), "beta must lie in (0,1)");
  Require(q >= 0.5 && q < 1.0, "q must lie in [1/2, 1)");
  Require(beta * (2 - q) <= 1.0, "need beta (2 - q) <= 1 so that p(x1=0, x2=0) >= 0");
  ScenarioSpec spec;
  spec.x_variables = Binary(2);
  spec.p_tx = {1 - beta * (2 - q), beta * (1 - q), beta * (1 - q), beta * q, 0, 0, 0, 0};
  spec.outcome_given_tx = {0, 0, 0, 1, 0, 0, 0, 1};
  spec.types = {{{0}, {0}}, {{1}, {1}}};
  spec.lambda = {0.5, 0.5};
  spec.c = c;
  return spec;
}

ScenarioSpec example_3_1_coarse(double beta, double q, double c) {
  ScenarioSpec spec = example_3_1(beta, q, c);
  spec.types[1] = {{}, {}};
  return spec;
}

ScenarioSpec example_4_1(double gamma, double c) {
  Require(Open01(gamma), "gamma must lie in (0,1)");
  ScenarioSpec spec;
  spec.p_tx = {1 - gamma, gamma};
  spec.outcome_given_tx = {0.0, 1.0};
  spec.types = {{{}, {}}};
  spec.lambda = {1.0};
  spec.c = c;
  return spec;
}

ScenarioSpec pandemic(double q, double lambda1, double c) {
  Require(q > 0.5 && q < 1.0, "q must lie in (1/2, 1)");
  Require(Open01(lambda1), "lambda1 must lie in (0,1)");
  ScenarioSpec spec;
  spec.x_variables = {{"x1", 2}};
  spec.p_tx = {q / 2, (1 - q) / 2, (1 - q) / 2, q / 2};
  spec.kind = OutcomeKind::kConsequential;
  spec.beta = 0.5;
  spec.outcome_given_tx = {1.0, 0.0, 1.0, 0.0};
  spec.types = {{{0}, {0}}, {{}, {}}};
  spec.lambda = {lambda1, 1 - lambda1};
  spec.c = c;
  return spec;
}

ScenarioSpec consequential_counterpart(const ScenarioSpec& baseline, double beta) {
  if (baseline.kind != OutcomeKind::kBaseline) {
    throw std::invalid_argument("consequential_counterpart expects a baseline scenario");
  }
  ScenarioSpec out = baseline;
  out.kind = OutcomeKind::kConsequential;
  out.beta = beta;
  out.c = beta + (1 - beta) * baseline.c;
  return out;
}

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> kCatalog = {
      {"example_1_1_confounder", {{"q", 0.9}, {"c", 0.2}}, "a <- x -> y, with and without control"},
      {"example_1_1_collider", {{"q", 0.9}, {"c", 0.2}}, "a <- x1 -> x2 <- x3 -> y, collider control"},
      {"example_3_1", {{"beta", 0.5}, {"q", 0.8}, {"c", 0.5}}, "two types on different signals"},
      {"example_3_1_coarse", {{"beta", 0.5}, {"q", 0.8}, {"c", 0.5}}, "second type without data"},
      {"example_4_1", {{"gamma", 0.3}, {"c", 0.5}}, "no controls, y = t"},
      {"prop2_incomplete", {{"eps", 0.01}, {"lambda1", 0.5}, {"c", 0.9}}, "incomplete P, gamma = 0"},
      {"prop2_cycle",
       {{"eps", 0.01}, {"lambda1", 1.0 / 3}, {"lambda2", 1.0 / 3}, {"c", 0.9}},
       "P* cycle, gamma = 0"},
      {"prop4",
       {{"gamma", 0.6}, {"beta", 0.01}, {"eps", 0.001}, {"lambda1", 0.5}, {"c", 0.9}},
       "incomplete P, y independent of x given t"},
      {"prop5", {{"gamma", 0.5}, {"eps", 0.001}, {"c", 0.9}}, "incomplete P, Pr(a != t) -> 1"},
      {"pandemic", {{"q", 0.8}, {"lambda1", 0.5}, {"c", 0.3}}, "partying during a pandemic"},
  };
  return kCatalog;
}

namespace {

BuiltinParams ResolveParams(const std::string& name, const BuiltinParams& params) {
  const auto& catalog = builtin_catalog();
  auto it = std::find_if(catalog.begin(), catalog.end(),
                         [&](const BuiltinInfo& b) { return b.name == name; });
  if (it == catalog.end()) throw std::invalid_argument("unknown builtin '" + name + "'");
  BuiltinParams p;
  for (const auto& [k, v] : it->defaults) p[k] = v;
  for (const auto& [k, v] : params) {
    if (!p.count(k)) throw std::invalid_argument("builtin '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  return p;
}

}  // namespace

std::optional<WitnessInstance> make_witness(const std::string& name, const BuiltinParams& params) {
  BuiltinParams p = ResolveParams(name, params);
  if (name == "prop2_incomplete") return witness_incomplete(p["eps"], p["lambda1"], p["c"]);
  if (name == "prop2_cycle") {
    return witness_cycle(p["eps"], {p["lambda1"], p["lambda2"], 1.0 - p["lambda1"] - p["lambda2"]},
                         p["c"]);
  }
  if (name == "prop4") {
    return witness_incomplete_hetero(p["gamma"], p["beta"], p["eps"],
                                     {p["lambda1"], 1.0 - p["lambda1"]}, p["c"]);
  }
  if (name == "prop5") return witness_full_loss(p["gamma"], p["eps"], p["c"]);
  return std::nullopt;
}

Builtin make_builtin(const std::string& name, const BuiltinParams& params) {
  if (auto w = make_witness(name, params)) return FromWitness(std::move(*w));
  BuiltinParams p = ResolveParams(name, params);
  if (name == "example_1_1_confounder") {
    return Solvable(name, example_1_1_confounder(p["q"], p["c"]));
  }
  if (name == "example_1_1_collider") {
    return Solvable(name, example_1_1_collider(p["q"], p["c"]));
  }
  if (name == "example_3_1") {
    Scenario s(example_3_1(p["beta"], p["q"], p["c"]));
    StrategyProfile sigma = FollowOwnSignal(s);
    TrembleSchedule none = TrembleSchedule::Uniform(s, 1e-3, {1.0, TrembleDirection::kNone});
    return {name, std::move(s), std::move(sigma), std::move(none)};
  }
  if (name == "example_3_1_coarse") {
    return Solvable(name, example_3_1_coarse(p["beta"], p["q"], p["c"]));
  }
  if (name == "example_4_1") {
    Scenario s(example_4_1(p["gamma"], p["c"]));
    // Taste-consistent play trembles an order of magnitude less.
    TrembleSchedule sched = TrembleSchedule::Uniform(s, 1e-3);
    sched.rules[0][1][0].exponent = 2.0;
    return {name, std::move(s), std::nullopt, std::move(sched)};
  }
  // pandemic
  Scenario s(pandemic(p["q"], p["lambda1"], p["c"]));
  // Type 1 avoids parties; type 2 follows its taste.
  StrategyProfile sigma = StrategyProfile::FromRule(
      s, [](std::size_t type, int t, std::span<const int>) { return type == 0 ? 1.0 : t; });
  TrembleSchedule sched = TrembleSchedule::Uniform(s, 1e-3);
  return {name, std::move(s), std::move(sigma), std::move(sched)};
}

}  // namespace bci
