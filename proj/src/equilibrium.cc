#include "bci/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <deque>

namespace bci {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kEpsilonEquilibrium:
      return "epsilon_equilibrium";
    case Verdict::kEquilibriumLimit:
      return "equilibrium_limit";
    case Verdict::kNotEquilibrium:
      return "not_equilibrium";
    case Verdict::kUndefinedCells:
      return "undefined_cells";
  }
  return "unknown";
}

const char* to_string(DynamicsStatus s) {
  switch (s) {
    case DynamicsStatus::kConverged:
      return "converged";
    case DynamicsStatus::kCycleDetected:
      return "cycle_detected";
    case DynamicsStatus::kMaxIters:
      return "max_iters";
  }
  return "unknown";
}

std::vector<double> Ladder::rungs() const {
  if (!(start > 0.0 && start < 1.0 && ratio > 0.0 && ratio < 1.0 && floor > 0.0 &&
        floor <= start)) {
    throw std::invalid_argument("ladder must satisfy 0 < floor <= start < 1, 0 < ratio < 1");
  }
  std::vector<double> out;
  for (double e = start; e >= floor * (1.0 - 1e-12); e *= ratio) out.push_back(e);
  return out;
}

namespace {

struct CheckResult {
  double max_violation = 0.0;
  std::optional<Violation> witness;
  std::vector<CellRef> undefined;

  bool passed() const { return !witness && undefined.empty(); }
};

// Checks the epsilon-equilibrium condition of `sigma` against its own Delta.
// With a reference table, a cell also counts as indifferent when its
// reference Delta is.
CheckResult Check(const Scenario& s, const StrategyProfile& sigma, const DeltaTable& deltas,
                  double threshold, double indifference_tol,
                  const DeltaTable* reference = nullptr) {
  CheckResult out;
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      for (std::size_t cell = 0; cell < s.num_condition_cells(i); ++cell) {
        if (s.condition_cell_mass(i, t, cell) <= 0.0) continue;
        const DeltaCell& dc = deltas.at(i, cell);
        if (!dc.defined()) {
          out.undefined.push_back({i, t, cell});
          continue;
        }
        const double margin = reply_margin(s, dc.value, t);
        if (std::abs(margin) <= indifference_tol) continue;
        if (reference != nullptr && reference->at(i, cell).defined() &&
            std::abs(reply_margin(s, reference->at(i, cell).value, t)) <= indifference_tol) {
          continue;
        }
        const double p1 = sigma.types[i].play[t][cell];
        const int bad = margin > 0.0 ? 0 : 1;
        const double p_bad = bad == 1 ? p1 : 1.0 - p1;
        if (p_bad <= threshold) continue;
        const double shortfall = std::abs(margin);
        if (shortfall > out.max_violation) {
          out.max_violation = shortfall;
          out.witness = Violation{{i, t, cell}, bad, dc.value, shortfall};
        }
      }
    }
  }
  return out;
}

void FillWelfare(const Scenario& s, const StrategyProfile& sigma, EquilibriumReport& r) {
  r.welfare_loss = welfare_loss(s, sigma);
  r.error_probability = error_probability(s, sigma);
}

}  // namespace

EquilibriumReport verify_eps_equilibrium(const Scenario& s, const StrategyProfile& sigma,
                                         double eps, const VerifyOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  check_profile(s, sigma);
  EquilibriumReport r;
  r.epsilon = eps;
  r.deltas = delta_table(s, sigma);
  const CheckResult c = Check(s, sigma, r.deltas, eps, opts.tie_tol);
  if (!c.undefined.empty()) {
    r.verdict = Verdict::kUndefinedCells;
  } else if (c.witness) {
    r.verdict = Verdict::kNotEquilibrium;
  } else {
    r.verdict = Verdict::kEpsilonEquilibrium;
  }
  r.undefined_cells = c.undefined;
  r.witness = c.witness;
  r.ladder.push_back({eps, c.max_violation, c.passed()});
  FillWelfare(s, sigma, r);
  return r;
}

namespace {

struct RungOutcome {
  CheckResult check;
  DeltaTable deltas;
  double distance = 0.0;
};

RungOutcome CheckRung(const Scenario& s, const StrategyProfile& sigma, const DeltaTable& limit,
                      const TrembleSchedule& sched, double eps, const LimitOptions& opts) {
  const TrembleSchedule rung = sched.with_epsilon(eps);
  const StrategyProfile perturbed = apply_trembles(sigma, rung);
  const double size = std::max(eps, rung.max_magnitude());
  RungOutcome out;
  out.deltas = delta_table(s, perturbed);
  out.check = Check(s, perturbed, out.deltas, size * (1.0 + 1e-9) + 1e-12,
                    opts.tie_tol + opts.indifference_slack * size, &limit);
  out.distance = perturbed.sup_distance(sigma);
  return out;
}

}  // namespace

EquilibriumReport verify_limit(const Scenario& s, const StrategyProfile& sigma,
                               const TrembleSchedule& sched, const Ladder& ladder,
                               const LimitOptions& opts) {
  check_profile(s, sigma);
  const std::vector<double> eps = ladder.rungs();
  EquilibriumReport r;
  // Where Delta exists without trembles it is continuous in the profile, so
  // indifference at sigma itself excuses mixing at every rung.
  const DeltaTable limit = delta_table(s, sigma);
  std::vector<RungOutcome> outcomes;
  outcomes.reserve(eps.size());
  for (double e : eps) {
    outcomes.push_back(CheckRung(s, sigma, limit, sched, e, opts));
    r.ladder.push_back({e, outcomes.back().check.max_violation, outcomes.back().check.passed()});
  }
  std::size_t tail = 0;
  while (tail < outcomes.size() && outcomes[outcomes.size() - 1 - tail].check.passed()) ++tail;
  const auto needed = static_cast<std::size_t>(
      std::ceil(opts.min_tail_fraction * static_cast<double>(outcomes.size())));
  // Perturbed profiles must shrink toward sigma along the tail.
  bool converging = true;
  for (std::size_t k = outcomes.size() - tail; k + 1 < outcomes.size(); ++k) {
    converging = converging && outcomes[k + 1].distance <= outcomes[k].distance + 1e-15;
  }
  const RungOutcome& last = outcomes.back();
  r.epsilon = eps.back();
  r.deltas = last.deltas;
  if (tail >= std::max<std::size_t>(needed, 1) && converging) {
    r.verdict = Verdict::kEquilibriumLimit;
  } else if (!last.check.undefined.empty()) {
    r.verdict = Verdict::kUndefinedCells;
    r.undefined_cells = last.check.undefined;
  } else {
    r.verdict = Verdict::kNotEquilibrium;
    // Report the finest failing rung's witness.
    for (std::size_t k = outcomes.size(); k-- > 0;) {
      if (outcomes[k].check.witness) {
        r.witness = outcomes[k].check.witness;
        break;
      }
    }
  }
  FillWelfare(s, sigma, r);
  return r;
}

EquilibriumReport verify_profile(const Scenario& s, const StrategyProfile& sigma,
                                 const TrembleSchedule& sched, const Ladder& ladder,
                                 const LimitOptions& opts) {
  if (sched.max_magnitude() > 0.0) return verify_limit(s, sigma, sched, ladder, opts);
  return verify_eps_equilibrium(s, sigma, sched.epsilon, {opts.tie_tol});
}

DynamicsResult best_response_dynamics(const Scenario& s, const StrategyProfile& init,
                                      const TrembleSchedule& sched,
                                      const DynamicsOptions& opts) {
  check_profile(s, init);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0,1]");
  }
  const TrembleSchedule eval_sched = sched.with_epsilon(opts.tremble_epsilon);

  // Steps halve at every reversal and regrow only up to a cap that halves
  // with them, so oscillation around an interior point is bracketed; the cap
  // recovers after a run of moves in one direction.
  struct CellState {
    double step;
    double cap;
    int last_dir = 0;
    int since_reversal = 1 << 20;
  };
  std::vector<std::array<std::vector<CellState>, 2>> state(s.num_types());
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      state[i][t].assign(s.num_condition_cells(i), CellState{opts.damping, opts.damping});
    }
  }

  DynamicsResult result;
  StrategyProfile sigma = init;
  std::deque<StrategyProfile> history;
  std::deque<std::vector<double>> step_history;
  std::vector<double> prev_steps;
  constexpr std::size_t kHistory = 64;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const DeltaTable deltas = delta_table(s, apply_trembles(sigma, eval_sched));
    StrategyProfile next = sigma;
    bool settled = true;
    for (std::size_t i = 0; i < s.num_types(); ++i) {
      for (int t = 0; t < 2; ++t) {
        for (std::size_t cell = 0; cell < s.num_condition_cells(i); ++cell) {
          if (s.condition_cell_mass(i, t, cell) <= 0.0) continue;
          const DeltaCell& dc = deltas.at(i, cell);
          if (!dc.defined()) continue;
          double& p = next.types[i].play[t][cell];
          const double margin = reply_margin(s, dc.value, t);
          const double target = std::abs(margin) <= opts.tie_tol ? p : (margin > 0.0 ? 1.0 : 0.0);
          const int dir = target > p ? 1 : (target < p ? -1 : 0);
          CellState& cs = state[i][t][cell];
          ++cs.since_reversal;
          if (opts.adaptive && dir != 0) {
            if (cs.last_dir != 0 && dir != cs.last_dir) {
              cs.step *= 0.5;
              cs.cap = cs.step;
              cs.since_reversal = 0;
            } else if (cs.last_dir == dir) {
              // A long run in one direction is heading for a corner.
              if (cs.since_reversal > 4) cs.cap = std::min(opts.damping, cs.cap * 2.0);
              cs.step = std::min(cs.cap, cs.step * 1.5);
            }
          }
          if (dir != 0) cs.last_dir = dir;
          // Adaptive steps are absolute moves, so halving them brackets an
          // interior point; plain damping moves a fraction of the way.
          if (opts.adaptive) {
            p += dir * std::min(cs.step, std::abs(target - p));
          } else {
            p += cs.step * (target - p);
          }
          if (target == 1.0 && 1.0 - p < 1e-12) p = 1.0;
          if (target == 0.0 && p < 1e-12) p = 0.0;
          if (std::abs(target - p) > opts.tolerance && cs.since_reversal > 2) settled = false;
        }
      }
    }
    const double change = next.sup_distance(sigma);
    result.iterations = iter;
    if (change < opts.tolerance && settled) {
      result.status = DynamicsStatus::kConverged;
      result.profile = std::move(next);
      result.report = verify_limit(s, result.profile, sched, opts.ladder, opts.limit);
      return result;
    }
    // A revisit is a cycle only if the step sizes and directions repeat
    // too: shrinking steps can pass through an old profile on their way in.
    std::vector<double> steps;
    for (const auto& per_type : state) {
      for (const auto& per_t : per_type) {
        for (const CellState& cs : per_t) {
          steps.push_back(cs.step);
          steps.push_back(cs.cap);
          steps.push_back(cs.last_dir);
        }
      }
    }
    for (std::size_t h = 0; h + 1 < history.size(); ++h) {
      if (history[h].sup_distance(next) < 1e-12 && step_history[h] == steps) {
        result.status = DynamicsStatus::kCycleDetected;
        result.profile = std::move(next);
        return result;
      }
    }
    history.push_back(sigma);
    step_history.push_back(std::move(prev_steps));
    prev_steps = std::move(steps);
    if (history.size() > kHistory) {
      history.pop_front();
      step_history.pop_front();
    }
    sigma = std::move(next);
  }
  result.status = DynamicsStatus::kMaxIters;
  result.profile = std::move(sigma);
  return result;
}

namespace {

std::vector<CellRef> FreeCells(const Scenario& s) {
  std::vector<CellRef> out;
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      for (std::size_t cell = 0; cell < s.num_condition_cells(i); ++cell) {
        if (s.condition_cell_mass(i, t, cell) > 0.0) out.push_back({i, t, cell});
      }
    }
  }
  return out;
}

}  // namespace

std::uint64_t pure_profile_count(const Scenario& s) {
  const std::size_t n = FreeCells(s).size();
  return n >= 64 ? UINT64_MAX : (std::uint64_t{1} << n);
}

std::vector<std::pair<StrategyProfile, EquilibriumReport>> enumerate_pure_equilibria(
    const Scenario& s, const TrembleSchedule& sched, const EnumerateOptions& opts) {
  const std::vector<CellRef> free = FreeCells(s);
  const std::uint64_t count = pure_profile_count(s);
  if (count > opts.max_profiles) {
    throw InstanceTooLarge("instance too large: " + std::to_string(free.size()) +
                           " free signals");
  }
  const std::vector<double> eps = opts.ladder.rungs();
  std::vector<std::pair<StrategyProfile, EquilibriumReport>> out;
  StrategyProfile sigma = StrategyProfile::Truthful(s);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t k = 0; k < free.size(); ++k) {
      const CellRef& c = free[k];
      sigma.types[c.type].play[c.t][c.cell] = ((mask >> k) & 1U) ? 1.0 : 0.0;
    }
    // The finest rung must pass in any case; it rejects most profiles cheaply.
    if (!CheckRung(s, sigma, delta_table(s, sigma), sched, eps.back(), opts.limit).check.passed()) {
      continue;
    }
    EquilibriumReport r = verify_limit(s, sigma, sched, opts.ladder, opts.limit);
    if (r.is_equilibrium()) out.emplace_back(sigma, std::move(r));
  }
  return out;
}

}  // namespace bci
