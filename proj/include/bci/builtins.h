// Named scenarios from the literature, regenerated from their parameters.

#ifndef BCI_BUILTINS_H_
#define BCI_BUILTINS_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bci/model.h"
#include "bci/worst_case.h"

namespace bci {

struct Builtin {
  std::string name;
  Scenario scenario;
  // The profile the construction is about, if any; otherwise it is solved for.
  std::optional<StrategyProfile> profile;
  TrembleSchedule schedule;
};

using BuiltinParams = std::map<std::string, double>;

struct BuiltinInfo {
  std::string name;
  std::vector<std::pair<std::string, double>> defaults;
  std::string summary;
};

const std::vector<BuiltinInfo>& builtin_catalog();

// Missing parameters take their defaults. Throws std::invalid_argument for
// unknown names or parameters, InfeasibleParameters for infeasible values.
Builtin make_builtin(const std::string& name, const BuiltinParams& params = {});

// The explicit construction behind a prop* builtin, with its closed-form
// annotations; std::nullopt for the other builtins. Same errors as
// make_builtin().
std::optional<WitnessInstance> make_witness(const std::string& name,
                                            const BuiltinParams& params = {});

// a <- x -> y: t tracks x with probability q; one type ignores x, one
// conditions on it.
ScenarioSpec example_1_1_confounder(double q, double c);
// a <- x1 -> x2 <- x3 -> y: one type adjusts for the collider x2, one uses
// no controls.
ScenarioSpec example_1_1_collider(double q, double c);
// gamma = 0, p(x_i = 1) = beta, p(x_j = 1 | x_i = 1) = q, y = x1 x2, simple
// types on x1 and x2. Requires beta (2 - q) <= 1.
ScenarioSpec example_3_1(double beta, double q, double c);
// As example_3_1 but the second type has no data at all.
ScenarioSpec example_3_1_coarse(double beta, double q, double c);
// K = 0, y = t, a single type without controls.
ScenarioSpec example_4_1(double gamma, double c);
// Consequential mode with beta = 1/2 and z = 1 - x: p(x=1) = 1/2,
// p(t = x | x) = q; type 1 controls for x, type 2 does not.
ScenarioSpec pandemic(double q, double lambda1, double c);

// Same exogenous process and types in consequential mode: z follows the old y
// kernel, with direct effect beta and cost beta + (1 - beta) c. Perceived
// margins at t = 0 are the baseline ones scaled by 1 - beta.
ScenarioSpec consequential_counterpart(const ScenarioSpec& baseline, double beta);

}  // namespace bci

#endif  // BCI_BUILTINS_H_
