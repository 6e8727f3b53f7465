// Explicit worst-case constructions and a heuristic search for high-loss
// equilibria.
//
// Each witness bundles a scenario, a profile, the trembles that sustain it and
// closed-form values of the relevant perceived effects. The closed forms are
// claims, not inputs: verify_witness() re-derives the verdict numerically and
// the tests compare every annotation against delta_table().

#ifndef BCI_WORST_CASE_H_
#define BCI_WORST_CASE_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bci/equilibrium.h"
#include "bci/model.h"
#include "bci/type_order.h"

namespace bci {

// Closed-form Delta_type at one condition cell.
struct DeltaAnnotation {
  std::size_t type = 0;
  std::vector<int> x_condition;
  double value = 0.0;
};

struct WitnessInstance {
  std::string name;
  Scenario scenario;
  StrategyProfile profile;
  // Trembles at schedule.epsilon; all kNone when the profile needs none.
  TrembleSchedule schedule;
  double claimed_loss = 0.0;
  double claimed_error_probability = 0.0;
  // Evaluated at apply_trembles(profile, schedule).
  std::vector<DeltaAnnotation> deltas;
};

// Infeasible proof parameters.
class InfeasibleParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two simple types on x1 and x2 with gamma = 0, p(1,1) = 1 - eps and
// p(0,1) = p(1,0) = eps/2, y = x1 x2; both types play a_i = x_i.
WitnessInstance witness_incomplete(double eps, double lambda1, double c);

// Three types forming a P* cycle: C_i = {i}, D_i = {i, i+1 mod 3}. gamma = 0,
// p(1,1,1) = 1 - eps and each cell with a single zero has mass eps/3,
// y = x1 x2 x3; type i plays a = x_i.
WitnessInstance witness_cycle(double eps, std::array<double, 3> lambda, double c);

// Three-valued x1, x2 (value 2 stands for '#'), y = t, simple types on x1 and
// x2 playing a_i = x_i off '#' and a = 0 at '#', where they tremble toward 1.
// Requires 1/2 <= gamma < 1 and gamma - beta - 2 beta^2 > 0.
WitnessInstance witness_incomplete_hetero(double gamma, double beta, double eps,
                                          std::array<double, 2> lambda, double c);

// Four-cell table with Pr(a != t) = 1 - eps under a_i = x_i, lambda = (1/2, 1/2).
WitnessInstance witness_full_loss(double gamma, double eps, double c);

// verify_limit() under the witness schedule when it trembles, otherwise
// verify_eps_equilibrium() at schedule.epsilon.
EquilibriumReport verify_witness(const WitnessInstance& w, const Ladder& ladder = {},
                                 const LimitOptions& opts = {});

// ---------------------------------------------------------------------------
// Search

enum class Objective { kWelfareLoss, kErrorProbability };
enum class StructureConstraint { kAny, kCompleteQuasitransitive, kIncomplete, kChain };

const char* to_string(Objective o);
const char* to_string(StructureConstraint s);

// Every equilibrium the inner solver could certify: best-response dynamics
// from several starting profiles plus pure enumeration when it is small.
struct InnerSolveOptions {
  int inits = 20;
  std::uint64_t enumerate_limit = std::uint64_t{1} << 10;
  int max_iters = 3000;
  std::uint64_t seed = 0;
  Ladder ladder;
  LimitOptions limit;
  // Defaults to uniform flips.
  std::optional<TrembleSchedule> schedule;
};

struct CertifiedEquilibrium {
  StrategyProfile profile;
  EquilibriumReport report;
};

std::vector<CertifiedEquilibrium> solve_equilibria(const Scenario& s,
                                                   const InnerSolveOptions& opts = {});

struct SearchConfig {
  // Binary x variables and data types per instance.
  int num_x = 2;
  int max_types = 2;
  std::optional<double> gamma;
  // Restrict the outcome kernel to depend on t only.
  bool y_independent_of_x = false;
  bool simple_types = true;
  StructureConstraint structure = StructureConstraint::kAny;
  std::optional<double> c;
  double c_min = 0.02;
  double c_max = 0.98;
  Objective objective = Objective::kWelfareLoss;
  int restarts = 20;
  // Objective evaluations per restart.
  int evaluations = 40;
  std::uint64_t seed = 1;
  // Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  InnerSolveOptions inner;
};

// Empty when the configuration is consistent.
std::vector<std::string> validate(const SearchConfig& cfg);

struct SearchTraceRow {
  int restart = 0;
  int evaluations = 0;
  double objective = 0.0;
  double welfare_loss = 0.0;
  double error_probability = 0.0;
  double gamma = 0.0;
  double c = 0.0;
};

struct SearchResult {
  std::optional<WitnessInstance> best;
  double best_objective = 0.0;
  std::vector<SearchTraceRow> trace;
};

// Random-restart pattern search over (lambda, p(t,x), outcome kernel, c).
// Heuristic: the result is a lower bound on the family's worst case.
// Deterministic given cfg.seed, independent of the thread count.
SearchResult search_max_loss(const SearchConfig& cfg);

struct BoundReport {
  double bound = 0.0;
  double best = 0.0;
  bool holds = true;
  SearchResult search;
};

// Runs the search and compares its best objective with bound(gamma).
BoundReport check_bound(const SearchConfig& cfg, const std::function<double(double)>& bound,
                        double tol = 1e-6);

}  // namespace bci

#endif  // BCI_WORST_CASE_H_
