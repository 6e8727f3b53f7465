#include "bci/worst_case.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace bci {

namespace {

std::vector<Variable> BinaryX(int k, int cardinality = 2) {
  std::vector<Variable> out;
  for (int j = 1; j <= k; ++j) out.push_back({"x" + std::to_string(j), cardinality});
  return out;
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw InfeasibleParameters(what);
}

bool Open01(double v) { return v > 0.0 && v < 1.0; }

// a_i = x_i at every signal.
StrategyProfile FollowOwnSignal(const Scenario& s) {
  return StrategyProfile::FromRule(s, [](std::size_t, int, std::span<const int> x) {
    return x[0] == 1 ? 1.0 : 0.0;
  });
}

TrembleSchedule NoTrembles(const Scenario& s, double eps) {
  return TrembleSchedule::Uniform(s, eps, {1.0, TrembleDirection::kNone});
}

}  // namespace

WitnessInstance witness_incomplete(double eps, double lambda1, double c) {
  Require(Open01(eps), "eps must lie in (0,1)");
  Require(Open01(lambda1), "lambda1 must lie in (0,1)");
  Require(Open01(c), "c must lie in (0,1)");
  ScenarioSpec spec;
  spec.x_variables = BinaryX(2);
  // (t, x1, x2), t = 0 only.
  spec.p_tx = {0.0, eps / 2, eps / 2, 1.0 - eps, 0.0, 0.0, 0.0, 0.0};
  spec.outcome_given_tx = {0, 0, 0, 1, 0, 0, 0, 1};
  spec.types = {{{0}, {0}}, {{1}, {1}}};
  spec.lambda = {lambda1, 1.0 - lambda1};
  spec.c = c;
  Scenario s(std::move(spec));
  StrategyProfile sigma = FollowOwnSignal(s);
  TrembleSchedule sched = NoTrembles(s, eps);
  const double lambda2 = 1.0 - lambda1;
  const double err = 1.0 - eps / 2;
  return {"prop2_incomplete",
          std::move(s),
          std::move(sigma),
          std::move(sched),
          c * err,
          err,
          {{0, {1}, (1 - eps) / (1 - eps + lambda1 * eps / 2)},
           {0, {0}, 0.0},
           {1, {1}, (1 - eps) / (1 - eps + lambda2 * eps / 2)},
           {1, {0}, 0.0}}};
}

WitnessInstance witness_cycle(double eps, std::array<double, 3> lambda, double c) {
  Require(Open01(eps), "eps must lie in (0,1)");
  Require(Open01(c), "c must lie in (0,1)");
  Require(std::all_of(lambda.begin(), lambda.end(), [](double l) { return l > 0.0; }) &&
              std::abs(lambda[0] + lambda[1] + lambda[2] - 1.0) <= kNormalizationTol,
          "lambda must be strictly positive and sum to 1");
  ScenarioSpec spec;
  spec.x_variables = BinaryX(3);
  spec.p_tx.assign(16, 0.0);
  spec.outcome_given_tx.assign(16, 0.0);
  // x cell index 4 x1 + 2 x2 + x3.
  spec.p_tx[7] = 1.0 - eps;
  spec.p_tx[3] = spec.p_tx[5] = spec.p_tx[6] = eps / 3;
  spec.outcome_given_tx[7] = spec.outcome_given_tx[15] = 1.0;
  // Type i conditions on x_i and adjusts for the next variable around the cycle.
  spec.types = {{{0}, {0, 1}}, {{1}, {1, 2}}, {{2}, {0, 2}}};
  spec.lambda = {lambda[0], lambda[1], lambda[2]};
  spec.c = c;
  Scenario s(std::move(spec));
  StrategyProfile sigma = FollowOwnSignal(s);
  TrembleSchedule sched = NoTrembles(s, eps);
  const double err = 1.0 - eps / 3;
  WitnessInstance w{"prop2_cycle", std::move(s), std::move(sigma), std::move(sched), c * err,
                    err, {}};
  const double x_next = (1 - 2 * eps / 3) / (1 - eps / 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double pair = lambda[i] + lambda[(i + 1) % 3];
    w.deltas.push_back({i, {1}, x_next * (1 - eps) / (1 - eps + pair * eps / 3)});
    w.deltas.push_back({i, {0}, 0.0});
  }
  return w;
}

WitnessInstance witness_incomplete_hetero(double gamma, double beta, double eps,
                                          std::array<double, 2> lambda, double c) {
  Require(gamma >= 0.5 && gamma < 1.0, "gamma must lie in [1/2, 1)");
  Require(beta > 0.0, "beta must be positive");
  const double rest = gamma - beta - 2 * beta * beta;
  Require(rest > 0.0, "need gamma - beta - 2 beta^2 > 0");
  Require(Open01(eps), "eps must lie in (0,1)");
  Require(Open01(c), "c must lie in (0,1)");
  Require(lambda[0] > 0.0 && lambda[1] > 0.0 &&
              std::abs(lambda[0] + lambda[1] - 1.0) <= kNormalizationTol,
          "lambda must be strictly positive and sum to 1");
  constexpr int kHash = 2;
  ScenarioSpec spec;
  spec.x_variables = BinaryX(2, 3);
  spec.p_tx.assign(18, 0.0);
  auto at = [](int t, int x1, int x2) { return static_cast<std::size_t>(9 * t + 3 * x1 + x2); };
  spec.p_tx[at(1, 1, 1)] = beta;
  spec.p_tx[at(0, 1, 0)] = beta * beta;
  spec.p_tx[at(0, 0, 1)] = beta * beta;
  spec.p_tx[at(0, kHash, kHash)] = 1.0 - gamma;
  spec.p_tx[at(1, 0, 0)] = rest;
  // y = t.
  spec.outcome_given_tx.assign(18, 0.0);
  std::fill(spec.outcome_given_tx.begin() + 9, spec.outcome_given_tx.end(), 1.0);
  spec.types = {{{0}, {0}}, {{1}, {1}}};
  spec.lambda = {lambda[0], lambda[1]};
  spec.c = c;
  Scenario s(std::move(spec));
  // '#' never occurs with t = 1; play the taste there.
  StrategyProfile sigma =
      StrategyProfile::FromRule(s, [](std::size_t, int t, std::span<const int> x) {
        if (x[0] == kHash) return static_cast<double>(t);
        return x[0] == 1 ? 1.0 : 0.0;
      });
  TrembleSchedule sched = NoTrembles(s, eps);
  for (std::size_t i = 0; i < 2; ++i) {
    sched.rules[i][0][kHash] = {1.0, TrembleDirection::kTowardOne};
  }
  const double err = gamma - beta - beta * beta;
  WitnessInstance w{"prop4", std::move(s), std::move(sigma), std::move(sched), c * err, err, {}};
  for (std::size_t i = 0; i < 2; ++i) {
    w.deltas.push_back({i, {1}, 1.0 / (1.0 + lambda[i] * beta)});
    w.deltas.push_back({i, {0}, -rest / (rest + lambda[i] * beta * beta)});
    w.deltas.push_back({i, {kHash}, 0.0});
  }
  return w;
}

WitnessInstance witness_full_loss(double gamma, double eps, double c) {
  Require(Open01(gamma), "gamma must lie in (0,1)");
  Require(eps > 0.0 && eps < gamma && eps < 1.0 - gamma,
          "eps must be positive and below min(gamma, 1 - gamma)");
  Require(Open01(c), "c must lie in (0,1)");
  ScenarioSpec spec;
  spec.x_variables = BinaryX(2);
  // (t, x1, x2) with x cell index 2 x1 + x2.
  spec.p_tx = {0.0, 0.0, eps, 1.0 - gamma - eps, gamma - eps, eps, 0.0, 0.0};
  spec.outcome_given_tx = {0, 0, 0, 1, 1, 0, 0, 0};
  spec.types = {{{0}, {0}}, {{1}, {1}}};
  spec.lambda = {0.5, 0.5};
  spec.c = c;
  Scenario s(std::move(spec));
  StrategyProfile sigma = FollowOwnSignal(s);
  TrembleSchedule sched = NoTrembles(s, eps);
  const double err = 1.0 - eps;
  const double hi = (1 - gamma - eps) / (1 - gamma - eps + eps * 0.5);
  const double lo = -(gamma - eps) / (gamma - eps + eps * 0.5);
  return {"prop5",         std::move(s), std::move(sigma), std::move(sched), c * err, err,
          {{0, {1}, hi}, {0, {0}, lo}, {1, {1}, hi}, {1, {0}, lo}}};
}

EquilibriumReport verify_witness(const WitnessInstance& w, const Ladder& ladder,
                                 const LimitOptions& opts) {
  return verify_profile(w.scenario, w.profile, w.schedule, ladder, opts);
}

// ---------------------------------------------------------------------------

const char* to_string(Objective o) {
  return o == Objective::kWelfareLoss ? "welfare_loss" : "error_probability";
}

const char* to_string(StructureConstraint s) {
  switch (s) {
    case StructureConstraint::kAny:
      return "any";
    case StructureConstraint::kCompleteQuasitransitive:
      return "complete_quasitransitive";
    case StructureConstraint::kIncomplete:
      return "incomplete";
    case StructureConstraint::kChain:
      return "chain";
  }
  return "unknown";
}

std::vector<CertifiedEquilibrium> solve_equilibria(const Scenario& s,
                                                   const InnerSolveOptions& opts) {
  const TrembleSchedule sched =
      opts.schedule ? *opts.schedule : TrembleSchedule::Uniform(s, opts.ladder.floor);
  std::vector<CertifiedEquilibrium> out;
  auto add = [&out](const StrategyProfile& p, const EquilibriumReport& r) {
    for (const auto& e : out) {
      if (e.profile.sup_distance(p) < 1e-9) return;
    }
    out.push_back({p, r});
  };
  if (pure_profile_count(s) <= opts.enumerate_limit) {
    EnumerateOptions e;
    e.max_profiles = opts.enumerate_limit;
    e.ladder = opts.ladder;
    e.limit = opts.limit;
    for (const auto& [p, r] : enumerate_pure_equilibria(s, sched, e)) add(p, r);
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DynamicsOptions d;
  d.max_iters = opts.max_iters;
  d.tie_tol = opts.limit.tie_tol;
  d.ladder = opts.ladder;
  d.limit = opts.limit;
  for (int k = 0; k < opts.inits; ++k) {
    StrategyProfile init = k == 0   ? StrategyProfile::Truthful(s)
                           : k == 1 ? StrategyProfile::Constant(s, 0.0)
                           : k == 2 ? StrategyProfile::Constant(s, 1.0)
                                    : StrategyProfile::FromRule(s, [&](std::size_t, int,
                                                                       std::span<const int>) {
                                        return unit(rng);
                                      });
    const DynamicsResult r = best_response_dynamics(s, init, sched, d);
    if (r.status == DynamicsStatus::kConverged && r.report->is_equilibrium()) {
      add(r.profile, *r.report);
    }
  }
  return out;
}

std::vector<std::string> validate(const SearchConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.num_x < 0 || cfg.num_x > 4) out.push_back("num_x must lie in [0,4]");
  if (cfg.max_types < 1 || cfg.max_types > 4) out.push_back("max_types must lie in [1,4]");
  if (cfg.gamma && !(*cfg.gamma >= 0.0 && *cfg.gamma <= 1.0)) {
    out.push_back("gamma must lie in [0,1]");
  }
  if (cfg.c && !Open01(*cfg.c)) out.push_back("c must lie in (0,1)");
  if (!(cfg.c_min > 0.0 && cfg.c_min < cfg.c_max && cfg.c_max < 1.0)) {
    out.push_back("need 0 < c_min < c_max < 1");
  }
  if (cfg.restarts < 1) out.push_back("restarts must be positive");
  if (cfg.evaluations < 1) out.push_back("evaluations must be positive");
  if (cfg.inner.inits < 1) out.push_back("inner inits must be positive");
  if (cfg.structure == StructureConstraint::kChain && !cfg.simple_types) {
    out.push_back("chain structure requires simple types");
  }
  if (cfg.structure == StructureConstraint::kIncomplete &&
      (cfg.max_types < 2 || cfg.num_x < 2)) {
    out.push_back("an incomplete relation needs at least two types and two variables");
  }
  return out;
}

namespace {

double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<double> Softmax(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& x : out) total += (x = std::exp(x - m));
  for (double& x : out) x /= total;
  return out;
}

std::vector<int> RandomSubset(int k, std::mt19937_64& rng) {
  std::vector<int> out;
  for (int j = 0; j < k; ++j) {
    if (rng() & 1U) out.push_back(j);
  }
  return out;
}

std::vector<DataTypeSpec> RandomChain(int k, int n, std::mt19937_64& rng) {
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> sizes(static_cast<std::size_t>(k + 1));
  std::iota(sizes.begin(), sizes.end(), 0);
  std::shuffle(sizes.begin(), sizes.end(), rng);
  sizes.resize(static_cast<std::size_t>(n));
  std::sort(sizes.begin(), sizes.end());
  std::vector<DataTypeSpec> out;
  for (int size : sizes) {
    std::vector<int> set(order.begin(), order.begin() + size);
    std::sort(set.begin(), set.end());
    out.push_back({set, set});
  }
  return out;
}

bool Satisfies(StructureConstraint c, const std::vector<DataTypeSpec>& types) {
  const DominanceRelation rel = build_relation(types);
  switch (c) {
    case StructureConstraint::kAny:
      return true;
    case StructureConstraint::kIncomplete:
      return !is_complete(rel);
    case StructureConstraint::kCompleteQuasitransitive:
    case StructureConstraint::kChain:
      return is_complete(rel) && is_quasitransitive(rel);
  }
  return false;
}

std::vector<DataTypeSpec> SampleTypes(const SearchConfig& cfg, std::mt19937_64& rng) {
  const int k = cfg.num_x;
  const int distinct = cfg.structure == StructureConstraint::kChain ? k + 1 : 1 << k;
  const int lo = cfg.structure == StructureConstraint::kIncomplete ? 2 : 1;
  const int hi = std::max(lo, std::min(cfg.max_types, distinct));
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int n = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    if (cfg.structure == StructureConstraint::kChain) return RandomChain(k, n, rng);
    std::vector<DataTypeSpec> types;
    while (static_cast<int>(types.size()) < n) {
      DataTypeSpec t;
      t.data = RandomSubset(k, rng);
      t.conditions = t.data;
      if (!cfg.simple_types) {
        t.conditions.clear();
        for (int j : t.data) {
          if (rng() & 1U) t.conditions.push_back(j);
        }
      }
      if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
    }
    if (Satisfies(cfg.structure, types)) return types;
  }
  throw std::runtime_error("could not sample data types satisfying the structure constraint");
}

// Maps unconstrained reals onto one member of the family.
class Family {
 public:
  Family(const SearchConfig& cfg, std::vector<DataTypeSpec> types)
      : cfg_(cfg), types_(std::move(types)) {
    x_cells_ = std::size_t{1} << cfg.num_x;
    dim_ = types_.size() > 1 ? types_.size() : 0;
    dim_ += cfg.gamma ? 0 : 1;
    dim_ += 2 * x_cells_;
    dim_ += cfg.y_independent_of_x ? 2 : 2 * x_cells_;
    dim_ += cfg.c ? 0 : 1;
  }

  std::size_t dim() const { return dim_; }

  ScenarioSpec Decode(std::span<const double> theta) const {
    std::size_t pos = 0;
    auto take = [&](std::size_t n) {
      auto s = theta.subspan(pos, n);
      pos += n;
      return s;
    };
    ScenarioSpec spec;
    spec.x_variables = BinaryX(cfg_.num_x);
    spec.types = types_;
    spec.lambda = types_.size() > 1 ? Softmax(take(types_.size())) : std::vector<double>{1.0};
    const double gamma = cfg_.gamma ? *cfg_.gamma : Sigmoid(take(1)[0]);
    spec.p_tx.resize(2 * x_cells_);
    for (int t = 0; t < 2; ++t) {
      const std::vector<double> px = Softmax(take(x_cells_));
      const double pt = t == 1 ? gamma : 1.0 - gamma;
      for (std::size_t x = 0; x < x_cells_; ++x) spec.p_tx[t * x_cells_ + x] = pt * px[x];
    }
    spec.outcome_given_tx.resize(2 * x_cells_);
    if (cfg_.y_independent_of_x) {
      const auto d = take(2);
      for (std::size_t i = 0; i < 2 * x_cells_; ++i) {
        spec.outcome_given_tx[i] = Sigmoid(d[i / x_cells_]);
      }
    } else {
      const auto d = take(2 * x_cells_);
      for (std::size_t i = 0; i < 2 * x_cells_; ++i) spec.outcome_given_tx[i] = Sigmoid(d[i]);
    }
    spec.c = cfg_.c ? *cfg_.c : cfg_.c_min + (cfg_.c_max - cfg_.c_min) * Sigmoid(take(1)[0]);
    return spec;
  }

 private:
  const SearchConfig& cfg_;
  std::vector<DataTypeSpec> types_;
  std::size_t x_cells_ = 1;
  std::size_t dim_ = 0;
};

struct Evaluation {
  double objective = -1.0;
  std::optional<WitnessInstance> instance;
};

Evaluation Evaluate(const SearchConfig& cfg, const ScenarioSpec& spec, std::uint64_t seed) {
  Evaluation out;
  Scenario s(spec);
  InnerSolveOptions inner = cfg.inner;
  inner.seed = seed;
  const std::vector<CertifiedEquilibrium> eqs = solve_equilibria(s, inner);
  const CertifiedEquilibrium* best = nullptr;
  for (const auto& e : eqs) {
    const double v = cfg.objective == Objective::kWelfareLoss ? e.report.welfare_loss
                                                              : e.report.error_probability;
    if (v > out.objective) {
      out.objective = v;
      best = &e;
    }
  }
  if (best != nullptr) {
    out.instance = WitnessInstance{"search",
                                   s,
                                   best->profile,
                                   TrembleSchedule::Uniform(s, inner.ladder.floor),
                                   best->report.welfare_loss,
                                   best->report.error_probability,
                                   {}};
  }
  return out;
}

struct RestartOutcome {
  Evaluation best;
  SearchTraceRow row;
};

RestartOutcome RunRestart(const SearchConfig& cfg, int restart) {
  std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(restart)};
  std::mt19937_64 rng(seq);
  const Family family(cfg, SampleTypes(cfg, rng));
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> theta(family.dim());
  for (double& v : theta) v = normal(rng);

  int evals = 0;
  auto eval = [&](const std::vector<double>& th) {
    ++evals;
    return Evaluate(cfg, family.Decode(th), rng());
  };
  RestartOutcome out;
  out.best = eval(theta);
  // Compass search: accept the first improving coordinate move, shrink the
  // step when none improves.
  double step = 2.0;
  while (evals < cfg.evaluations && step > 1e-3) {
    bool improved = false;
    for (std::size_t j = 0; j < theta.size() && evals < cfg.evaluations && !improved; ++j) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> trial = theta;
        trial[j] += sign * step;
        Evaluation e = eval(trial);
        if (e.objective > out.best.objective) {
          out.best = std::move(e);
          theta = std::move(trial);
          improved = true;
          break;
        }
        if (evals >= cfg.evaluations) break;
      }
    }
    if (!improved) step *= 0.5;
  }
  out.row.restart = restart;
  out.row.evaluations = evals;
  out.row.objective = out.best.objective;
  if (out.best.instance) {
    const Scenario& s = out.best.instance->scenario;
    out.row.welfare_loss = out.best.instance->claimed_loss;
    out.row.error_probability = out.best.instance->claimed_error_probability;
    out.row.gamma = s.gamma();
    out.row.c = s.c();
  }
  return out;
}

}  // namespace

SearchResult search_max_loss(const SearchConfig& cfg) {
  if (auto v = validate(cfg); !v.empty()) throw std::invalid_argument(v.front());
  std::vector<std::optional<RestartOutcome>> outcomes(static_cast<std::size_t>(cfg.restarts));
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int r = next++; r < cfg.restarts; r = next++) {
      try {
        outcomes[static_cast<std::size_t>(r)] = RunRestart(cfg, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.restarts));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  SearchResult result;
  result.best_objective = -1.0;
  for (auto& o : outcomes) {
    result.trace.push_back(o->row);
    // Strict comparison keeps the lowest restart index among ties.
    if (o->best.instance && o->best.objective > result.best_objective) {
      result.best_objective = o->best.objective;
      result.best = std::move(o->best.instance);
    }
  }
  if (!result.best) result.best_objective = 0.0;
  return result;
}

BoundReport check_bound(const SearchConfig& cfg, const std::function<double(double)>& bound,
                        double tol) {
  BoundReport out;
  out.search = search_max_loss(cfg);
  out.best = out.search.best_objective;
  out.bound = out.search.best ? bound(out.search.best->scenario.gamma())
                              : bound(cfg.gamma.value_or(0.0));
  for (const SearchTraceRow& row : out.search.trace) {
    if (row.objective > bound(row.gamma) + tol) out.holds = false;
  }
  return out;
}

}  // namespace bci
