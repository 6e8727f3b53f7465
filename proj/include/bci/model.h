// Scenarios (the exogenous data-generating process), data types, strategy
// profiles, trembles, the induced long-run joint distribution, and welfare.

#ifndef BCI_MODEL_H_
#define BCI_MODEL_H_

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bci/dist.h"

namespace bci {

// Collects every violated invariant, not just the first.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Data type (C, D): C are the x variables observed before acting, D ⊇ C the
// x variables with long-run data. Indices are 0-based positions into x.
struct DataTypeSpec {
  std::vector<int> conditions;
  std::vector<int> data;

  bool simple() const { return conditions == data; }
  friend bool operator==(const DataTypeSpec&, const DataTypeSpec&) = default;
};

enum class OutcomeKind { kBaseline, kConsequential };

// Raw primitives, before validation. Tables over (t, x_1..x_K) are row-major
// with t slowest.
struct ScenarioSpec {
  std::vector<Variable> x_variables;
  std::vector<double> p_tx;
  OutcomeKind kind = OutcomeKind::kBaseline;
  // p(y=1 | t,x) in baseline mode, p(z=1 | t,x) in consequential mode.
  std::vector<double> outcome_given_tx;
  double beta = 0.0;
  std::vector<DataTypeSpec> types;
  std::vector<double> lambda;
  double c = 0.5;
};

std::vector<std::string> validate(const ScenarioSpec& spec);

class Scenario {
 public:
  // Throws ValidationError listing every violation.
  explicit Scenario(ScenarioSpec spec);

  const ScenarioSpec& spec() const { return spec_; }
  std::size_t num_x() const { return spec_.x_variables.size(); }
  std::size_t num_types() const { return spec_.types.size(); }
  OutcomeKind kind() const { return spec_.kind; }
  bool consequential() const { return spec_.kind == OutcomeKind::kConsequential; }
  double beta() const { return spec_.beta; }
  double c() const { return spec_.c; }
  const std::vector<DataTypeSpec>& types() const { return spec_.types; }
  std::span<const double> lambda() const { return spec_.lambda; }
  std::span<const double> outcome_kernel() const { return spec_.outcome_given_tx; }
  const char* outcome_name() const { return consequential() ? "z" : "y"; }

  // Joint p(t, x) over variables [t, x_1..x_K].
  const JointTable& exogenous() const { return exogenous_; }
  const VariableSpace& x_space() const { return x_space_; }
  std::size_t num_x_cells() const { return x_space_.num_cells(); }
  double gamma() const;

  // Space of x_{C_i}, variables in ascending index order.
  const VariableSpace& condition_space(std::size_t type) const {
    return condition_spaces_[type];
  }
  std::size_t num_condition_cells(std::size_t type) const {
    return condition_spaces_[type].num_cells();
  }
  // Index into condition_space(type) of the x_{C_i} part of x-cell `x`.
  std::size_t condition_cell(std::size_t type, std::size_t x) const {
    return condition_cell_of_x_[type][x];
  }
  // p(t, x_{C_i} = cell).
  double condition_cell_mass(std::size_t type, int t, std::size_t cell) const;

 private:
  ScenarioSpec spec_;
  JointTable exogenous_;
  VariableSpace x_space_;
  std::vector<VariableSpace> condition_spaces_;
  std::vector<std::vector<std::size_t>> condition_cell_of_x_;
  std::vector<std::array<std::vector<double>, 2>> condition_mass_;
};

// sigma(a=1 | t, x_{C_i}) per type, indexed [type].play[t][condition cell].
// Measurability in x_{C_i} holds by construction.
struct TypeStrategy {
  std::array<std::vector<double>, 2> play;

  friend bool operator==(const TypeStrategy&, const TypeStrategy&) = default;
};

struct StrategyProfile {
  std::vector<TypeStrategy> types;

  using Rule = std::function<double(std::size_t type, int t,
                                    std::span<const int> x_condition)>;
  static StrategyProfile FromRule(const Scenario& s, const Rule& rule);
  static StrategyProfile Constant(const Scenario& s, double play_one);
  // a = t everywhere.
  static StrategyProfile Truthful(const Scenario& s);

  double sup_distance(const StrategyProfile& other) const;
  friend bool operator==(const StrategyProfile&, const StrategyProfile&) = default;
};

// Throws std::invalid_argument on shape mismatch or values outside [0,1].
void check_profile(const Scenario& s, const StrategyProfile& sigma);

enum class TrembleDirection { kNone, kTowardZero, kTowardOne, kFlip };

// Tremble magnitude for a cell is epsilon^exponent. kFlip mixes toward the
// opposite action: sigma' = (1 - 2m) sigma + m.
struct TrembleRule {
  double exponent = 1.0;
  TrembleDirection direction = TrembleDirection::kFlip;
};

struct TrembleSchedule {
  double epsilon = 0.0;
  // rules[type][t][condition cell]
  std::vector<std::array<std::vector<TrembleRule>, 2>> rules;

  static TrembleSchedule Uniform(const Scenario& s, double epsilon,
                                 TrembleRule rule = {});
  TrembleSchedule with_epsilon(double eps) const;
  double magnitude(std::size_t type, int t, std::size_t cell) const;
  double max_magnitude() const;
  double min_exponent() const;
};

StrategyProfile apply_trembles(const StrategyProfile& sigma,
                               const TrembleSchedule& sched);

// p(a | t, x) = sum_i lambda_i sigma_{t,i}(a | x_{C_i}); given (t, x), target a.
ConditionalTable aggregate_behavior(const Scenario& s, const StrategyProfile& sigma);

// p(a=1 | t, x) as a flat array over the (t, x) cells of s.exogenous().
std::vector<double> aggregate_play(const Scenario& s, const StrategyProfile& sigma);

// The factorized joint p(t,x) p(a|t,x) p(y|t,x) over [t, x_1..x_K, a, y]
// (outcome variable named z in consequential mode).
JointTable induced_joint(const Scenario& s, const StrategyProfile& sigma);

// Expected welfare loss relative to the rational-expectations benchmark.
// Baseline: c * Pr(a != t). Consequential: expected regret against
// max_a [beta a - c 1(a != t)], which reduces to
// gamma p(a=0|t=1)(c+beta) + (1-gamma) p(a=1|t=0)(c-beta) when beta <= c.
double welfare_loss(const Scenario& s, const StrategyProfile& sigma);

// Pr(a != t).
double error_probability(const Scenario& s, const StrategyProfile& sigma);

// p(a=1 | t) over the whole population.
double play_one_given_t(const Scenario& s, const StrategyProfile& sigma, int t);

}  // namespace bci

#endif  // BCI_MODEL_H_
