// Equilibrium verification and search.
//
// A profile is an epsilon-equilibrium when every action a type plays with
// probability above epsilon at a signal (t, x_C) that occurs with positive
// probability is a subjective best reply there. An equilibrium is a limit of
// epsilon-equilibria; verify_limit() witnesses this along one caller-supplied
// tremble schedule and a geometric ladder of epsilons, so a positive verdict
// means "witnessed by this schedule", not "for every sequence".

#ifndef BCI_EQUILIBRIUM_H_
#define BCI_EQUILIBRIUM_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bci/causal.h"
#include "bci/model.h"

namespace bci {

enum class Verdict {
  kEpsilonEquilibrium,
  kEquilibriumLimit,
  kNotEquilibrium,
  kUndefinedCells,
};

const char* to_string(Verdict v);

struct CellRef {
  std::size_t type = 0;
  int t = 0;
  std::size_t cell = 0;

  friend bool operator==(const CellRef&, const CellRef&) = default;
};

// An action played above threshold that is not a subjective best reply.
struct Violation {
  CellRef where;
  int action = 0;
  double delta = 0.0;
  // Subjective payoff advantage of the other action.
  double shortfall = 0.0;
};

struct LadderRung {
  double epsilon = 0.0;
  double max_violation = 0.0;
  bool passed = false;
};

struct EquilibriumReport {
  Verdict verdict = Verdict::kNotEquilibrium;
  double epsilon = 0.0;
  std::optional<Violation> witness;
  std::vector<CellRef> undefined_cells;
  // Delta at the checked profile (the finest rung for limit checks).
  DeltaTable deltas;
  // Of the unperturbed profile.
  double welfare_loss = 0.0;
  double error_probability = 0.0;
  std::vector<LadderRung> ladder;

  bool is_equilibrium() const {
    return verdict == Verdict::kEpsilonEquilibrium || verdict == Verdict::kEquilibriumLimit;
  }
};

struct Ladder {
  double start = 0.1;
  double ratio = 0.5;
  double floor = 1e-6;

  std::vector<double> rungs() const;
};

struct VerifyOptions {
  double tie_tol = kDefaultTieTol;
};

struct LimitOptions {
  double tie_tol = kDefaultTieTol;
  // At a rung with tremble size m, near-indifference up to tie_tol +
  // indifference_slack * m counts as a tie: a mixed limit profile is
  // approached by epsilon-equilibria whose mixing drifts by O(m). A cell whose
  // Delta is defined at sigma itself and indifferent there within the same
  // tolerance is excused at every rung.
  double indifference_slack = 10.0;
  // The passing rungs must form a tail covering this fraction of the ladder.
  double min_tail_fraction = 0.5;
};

EquilibriumReport verify_eps_equilibrium(const Scenario& s, const StrategyProfile& sigma,
                                         double eps, const VerifyOptions& opts = {});

EquilibriumReport verify_limit(const Scenario& s, const StrategyProfile& sigma,
                               const TrembleSchedule& sched, const Ladder& ladder = {},
                               const LimitOptions& opts = {});

// verify_limit() when `sched` trembles, otherwise verify_eps_equilibrium() at
// sched.epsilon.
EquilibriumReport verify_profile(const Scenario& s, const StrategyProfile& sigma,
                                 const TrembleSchedule& sched, const Ladder& ladder = {},
                                 const LimitOptions& opts = {});

enum class DynamicsStatus { kConverged, kCycleDetected, kMaxIters };

const char* to_string(DynamicsStatus s);

struct DynamicsOptions {
  double damping = 1.0;
  int max_iters = 20000;
  // Sup-norm change below which the iteration has converged.
  double tolerance = 1e-10;
  // Tremble size used to evaluate Delta during the iteration.
  double tremble_epsilon = 1e-8;
  // Halve a cell's step whenever its best reply reverses, grow it back while
  // the direction persists. Without this, damped dynamics oscillate around
  // interior equilibria instead of converging to them.
  bool adaptive = true;
  double tie_tol = kDefaultTieTol;
  Ladder ladder;
  LimitOptions limit;
};

struct DynamicsResult {
  DynamicsStatus status = DynamicsStatus::kMaxIters;
  StrategyProfile profile;
  // verify_limit() of the final profile; present only on convergence.
  std::optional<EquilibriumReport> report;
  int iterations = 0;
};

// sigma <- (1 - step) sigma + step BR(sigma), BR evaluated on the trembled
// profile. Ties hold the current mixing probability. Signals with zero
// probability hold their current value.
DynamicsResult best_response_dynamics(const Scenario& s, const StrategyProfile& init,
                                      const TrembleSchedule& sched,
                                      const DynamicsOptions& opts = {});

class InstanceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct EnumerateOptions {
  std::uint64_t max_profiles = std::uint64_t{1} << 20;
  Ladder ladder;
  LimitOptions limit;
};

// Number of pure profiles over signals with positive probability.
std::uint64_t pure_profile_count(const Scenario& s);

// All pure profiles passing verify_limit() under `sched`. Signals with zero
// probability carry no requirement and are fixed to a = t. Throws
// InstanceTooLarge past opts.max_profiles.
std::vector<std::pair<StrategyProfile, EquilibriumReport>> enumerate_pure_equilibria(
    const Scenario& s, const TrembleSchedule& sched, const EnumerateOptions& opts = {});

}  // namespace bci

#endif  // BCI_EQUILIBRIUM_H_
