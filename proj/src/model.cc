#include "bci/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace bci {

namespace {

std::string JoinViolations(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << "invalid scenario:";
  for (const auto& s : v) os << "\n  - " << s;
  return os.str();
}

bool IsSortedUnique(const std::vector<int>& v) {
  return std::adjacent_find(v.begin(), v.end(),
                            [](int a, int b) { return a >= b; }) == v.end();
}

std::size_t CellCount(const std::vector<Variable>& vars) {
  std::size_t n = 1;
  for (const auto& v : vars) {
    if (v.cardinality < 1) return 0;
    n *= static_cast<std::size_t>(v.cardinality);
    if (n > kMaxCells) return 0;
  }
  return n;
}

const ScenarioSpec& Validated(const ScenarioSpec& spec) {
  auto violations = validate(spec);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return spec;
}

VariableSpace TxSpace(const std::vector<Variable>& x) {
  std::vector<Variable> vars{{"t", 2}};
  vars.insert(vars.end(), x.begin(), x.end());
  return VariableSpace(std::move(vars));
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::invalid_argument(JoinViolations(violations)),
      violations_(std::move(violations)) {}

std::vector<std::string> validate(const ScenarioSpec& spec) {
  std::vector<std::string> out;
  const int k = static_cast<int>(spec.x_variables.size());

  std::set<std::string> names;
  for (const auto& v : spec.x_variables) {
    if (v.cardinality < 1) out.push_back("variable '" + v.name + "' has cardinality < 1");
    if (v.name.empty()) out.push_back("variable with empty name");
    if (v.name == "t" || v.name == "a" || v.name == "y" || v.name == "z") {
      out.push_back("variable name '" + v.name + "' is reserved");
    }
    if (!names.insert(v.name).second) out.push_back("duplicate variable '" + v.name + "'");
  }
  const std::size_t x_cells = CellCount(spec.x_variables);
  if (x_cells == 0 || 2 * x_cells > kMaxCells) {
    out.push_back("variable space exceeds 2^24 cells");
  } else {
    const std::size_t tx = 2 * x_cells;
    if (spec.p_tx.size() != tx) {
      out.push_back("p_tx has " + std::to_string(spec.p_tx.size()) + " entries, expected " +
                    std::to_string(tx));
    } else {
      double total = 0.0;
      bool in_range = true;
      for (double p : spec.p_tx) {
        in_range = in_range && p >= 0.0 && p <= 1.0;
        total += p;
      }
      if (!in_range) out.push_back("p_tx entries must lie in [0,1]");
      if (std::abs(total - 1.0) > kNormalizationTol) out.push_back("p_tx does not sum to 1");
    }
    const char* kernel = spec.kind == OutcomeKind::kBaseline ? "y_given_tx" : "z_given_tx";
    if (spec.outcome_given_tx.size() != tx) {
      out.push_back(std::string(kernel) + " has " +
                    std::to_string(spec.outcome_given_tx.size()) + " entries, expected " +
                    std::to_string(tx));
    } else if (std::any_of(spec.outcome_given_tx.begin(), spec.outcome_given_tx.end(),
                           [](double p) { return !(p >= 0.0 && p <= 1.0); })) {
      out.push_back(std::string(kernel) + " entries must lie in [0,1]");
    }
  }
  if (spec.kind == OutcomeKind::kConsequential && !(spec.beta > 0.0 && spec.beta < 1.0)) {
    out.push_back("beta must lie in (0,1)");
  }
  if (!(spec.c > 0.0 && spec.c < 1.0)) out.push_back("c must lie in (0,1)");

  if (spec.types.empty()) out.push_back("at least one data type is required");
  for (std::size_t i = 0; i < spec.types.size(); ++i) {
    const auto& ty = spec.types[i];
    const std::string label = "type " + std::to_string(i + 1);
    auto in_range = [k](const std::vector<int>& v) {
      return std::all_of(v.begin(), v.end(), [k](int j) { return j >= 0 && j < k; });
    };
    if (!IsSortedUnique(ty.conditions) || !IsSortedUnique(ty.data)) {
      out.push_back(label + ": index lists must be strictly increasing");
    }
    if (!in_range(ty.conditions) || !in_range(ty.data)) {
      out.push_back(label + ": variable index out of range");
    }
    if (!std::includes(ty.data.begin(), ty.data.end(), ty.conditions.begin(),
                       ty.conditions.end())) {
      out.push_back(label + ": C ⊄ D");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.types[j] == ty) {
        out.push_back(label + ": duplicates type " + std::to_string(j + 1));
      }
    }
  }
  if (spec.lambda.size() != spec.types.size()) {
    out.push_back("lambda has " + std::to_string(spec.lambda.size()) +
                  " entries, expected one per type");
  } else {
    double total = 0.0;
    bool nonneg = true;
    for (double l : spec.lambda) {
      nonneg = nonneg && l >= 0.0;
      total += l;
    }
    if (!nonneg || std::abs(total - 1.0) > kNormalizationTol) {
      out.push_back("lambda not on simplex");
    }
  }
  return out;
}

Scenario::Scenario(ScenarioSpec spec)
    : spec_(Validated(spec)),
      exogenous_(TxSpace(spec_.x_variables), spec_.p_tx),
      x_space_(spec_.x_variables) {
  const std::size_t nx = x_space_.num_cells();
  for (const auto& ty : spec_.types) {
    std::vector<std::size_t> positions(ty.conditions.begin(), ty.conditions.end());
    VariableSpace cs = x_space_.subspace(positions);
    std::vector<std::size_t> map(nx);
    for (std::size_t x = 0; x < nx; ++x) {
      std::size_t cell = 0;
      for (std::size_t j = 0; j < positions.size(); ++j) {
        cell += cs.stride(j) * static_cast<std::size_t>(x_space_.value(x, positions[j]));
      }
      map[x] = cell;
    }
    std::array<std::vector<double>, 2> mass{std::vector<double>(cs.num_cells(), 0.0),
                                            std::vector<double>(cs.num_cells(), 0.0)};
    for (int t = 0; t < 2; ++t) {
      for (std::size_t x = 0; x < nx; ++x) mass[t][map[x]] += exogenous_[t * nx + x];
    }
    condition_spaces_.push_back(std::move(cs));
    condition_cell_of_x_.push_back(std::move(map));
    condition_mass_.push_back(std::move(mass));
  }
}

double Scenario::gamma() const {
  const std::size_t nx = num_x_cells();
  double g = 0.0;
  for (std::size_t x = 0; x < nx; ++x) g += exogenous_[nx + x];
  return g;
}

double Scenario::condition_cell_mass(std::size_t type, int t, std::size_t cell) const {
  return condition_mass_[type][t][cell];
}

StrategyProfile StrategyProfile::FromRule(const Scenario& s, const Rule& rule) {
  StrategyProfile out;
  out.types.resize(s.num_types());
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    const VariableSpace& cs = s.condition_space(i);
    for (int t = 0; t < 2; ++t) {
      auto& row = out.types[i].play[t];
      row.resize(cs.num_cells());
      for (std::size_t cell = 0; cell < cs.num_cells(); ++cell) {
        row[cell] = rule(i, t, cs.assignment(cell));
      }
    }
  }
  return out;
}

StrategyProfile StrategyProfile::Constant(const Scenario& s, double play_one) {
  return FromRule(s, [play_one](std::size_t, int, std::span<const int>) { return play_one; });
}

StrategyProfile StrategyProfile::Truthful(const Scenario& s) {
  return FromRule(s, [](std::size_t, int t, std::span<const int>) { return double(t); });
}

double StrategyProfile::sup_distance(const StrategyProfile& other) const {
  double d = 0.0;
  for (std::size_t i = 0; i < types.size(); ++i) {
    for (int t = 0; t < 2; ++t) {
      const auto& a = types[i].play[t];
      const auto& b = other.types.at(i).play[t];
      for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(a[c] - b.at(c)));
    }
  }
  return d;
}

void check_profile(const Scenario& s, const StrategyProfile& sigma) {
  if (sigma.types.size() != s.num_types()) {
    throw std::invalid_argument("strategy profile has wrong number of types");
  }
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      const auto& row = sigma.types[i].play[t];
      if (row.size() != s.num_condition_cells(i)) {
        throw std::invalid_argument("missing strategy cell for type " + std::to_string(i + 1));
      }
      for (double p : row) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw std::invalid_argument("strategy probability outside [0,1]");
        }
      }
    }
  }
}

TrembleSchedule TrembleSchedule::Uniform(const Scenario& s, double epsilon, TrembleRule rule) {
  TrembleSchedule out;
  out.epsilon = epsilon;
  out.rules.resize(s.num_types());
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      out.rules[i][t].assign(s.num_condition_cells(i), rule);
    }
  }
  return out;
}

TrembleSchedule TrembleSchedule::with_epsilon(double eps) const {
  TrembleSchedule out = *this;
  out.epsilon = eps;
  return out;
}

double TrembleSchedule::magnitude(std::size_t type, int t, std::size_t cell) const {
  const TrembleRule& r = rules[type][t][cell];
  if (r.direction == TrembleDirection::kNone || epsilon <= 0.0) return 0.0;
  return std::pow(epsilon, r.exponent);
}

double TrembleSchedule::max_magnitude() const {
  double m = 0.0;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (int t = 0; t < 2; ++t) {
      for (std::size_t c = 0; c < rules[i][t].size(); ++c) m = std::max(m, magnitude(i, t, c));
    }
  }
  return m;
}

double TrembleSchedule::min_exponent() const {
  double e = 0.0;
  bool any = false;
  for (const auto& per_t : rules) {
    for (const auto& row : per_t) {
      for (const TrembleRule& r : row) {
        if (r.direction == TrembleDirection::kNone) continue;
        e = any ? std::min(e, r.exponent) : r.exponent;
        any = true;
      }
    }
  }
  return any ? e : 1.0;
}

StrategyProfile apply_trembles(const StrategyProfile& sigma, const TrembleSchedule& sched) {
  if (sched.rules.size() != sigma.types.size()) {
    throw std::invalid_argument("tremble schedule does not match profile");
  }
  StrategyProfile out = sigma;
  for (std::size_t i = 0; i < out.types.size(); ++i) {
    for (int t = 0; t < 2; ++t) {
      auto& row = out.types[i].play[t];
      if (sched.rules[i][t].size() != row.size()) {
        throw std::invalid_argument("tremble schedule does not match profile");
      }
      for (std::size_t c = 0; c < row.size(); ++c) {
        const double m = sched.magnitude(i, t, c);
        if (m == 0.0) continue;
        if (!(m > 0.0 && m < 1.0)) throw std::invalid_argument("tremble magnitude must lie in (0,1)");
        switch (sched.rules[i][t][c].direction) {
          case TrembleDirection::kTowardZero:
            row[c] = (1.0 - m) * row[c];
            break;
          case TrembleDirection::kTowardOne:
            row[c] = (1.0 - m) * row[c] + m;
            break;
          case TrembleDirection::kFlip:
            if (m > 0.5) throw std::invalid_argument("flip tremble magnitude must be <= 1/2");
            row[c] = (1.0 - 2.0 * m) * row[c] + m;
            break;
          case TrembleDirection::kNone:
            break;
        }
      }
    }
  }
  return out;
}

std::vector<double> aggregate_play(const Scenario& s, const StrategyProfile& sigma) {
  check_profile(s, sigma);
  const std::size_t nx = s.num_x_cells();
  std::vector<double> out(2 * nx, 0.0);
  for (int t = 0; t < 2; ++t) {
    for (std::size_t x = 0; x < nx; ++x) {
      double p = 0.0;
      for (std::size_t i = 0; i < s.num_types(); ++i) {
        p += s.lambda()[i] * sigma.types[i].play[t][s.condition_cell(i, x)];
      }
      out[t * nx + x] = std::clamp(p, 0.0, 1.0);
    }
  }
  return out;
}

ConditionalTable aggregate_behavior(const Scenario& s, const StrategyProfile& sigma) {
  const auto play = aggregate_play(s, sigma);
  std::vector<double> entries(2 * play.size());
  for (std::size_t r = 0; r < play.size(); ++r) {
    entries[2 * r] = 1.0 - play[r];
    entries[2 * r + 1] = play[r];
  }
  return ConditionalTable(s.exogenous().space(), VariableSpace({{"a", 2}}),
                          std::move(entries), std::vector<bool>(play.size(), true));
}

JointTable induced_joint(const Scenario& s, const StrategyProfile& sigma) {
  const auto play = aggregate_play(s, sigma);
  std::vector<Variable> vars = s.exogenous().space().variables();
  vars.push_back({"a", 2});
  vars.push_back({s.outcome_name(), 2});
  VariableSpace space(std::move(vars));
  const auto kernel = s.outcome_kernel();
  std::vector<double> mass(space.num_cells());
  for (std::size_t tx = 0; tx < play.size(); ++tx) {
    const double ptx = s.exogenous()[tx];
    for (int a = 0; a < 2; ++a) {
      const double pa = a == 1 ? play[tx] : 1.0 - play[tx];
      mass[tx * 4 + a * 2 + 0] = ptx * pa * (1.0 - kernel[tx]);
      mass[tx * 4 + a * 2 + 1] = ptx * pa * kernel[tx];
    }
  }
  return JointTable(std::move(space), std::move(mass));
}

double play_one_given_t(const Scenario& s, const StrategyProfile& sigma, int t) {
  const auto play = aggregate_play(s, sigma);
  const std::size_t nx = s.num_x_cells();
  double num = 0.0, den = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    num += s.exogenous()[t * nx + x] * play[t * nx + x];
    den += s.exogenous()[t * nx + x];
  }
  return den > 0.0 ? num / den : 0.0;
}

double error_probability(const Scenario& s, const StrategyProfile& sigma) {
  const auto play = aggregate_play(s, sigma);
  const std::size_t nx = s.num_x_cells();
  double err = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    err += s.exogenous()[x] * play[x];
    err += s.exogenous()[nx + x] * (1.0 - play[nx + x]);
  }
  return err;
}

double welfare_loss(const Scenario& s, const StrategyProfile& sigma) {
  if (!s.consequential()) return s.c() * error_probability(s, sigma);
  const auto play = aggregate_play(s, sigma);
  const std::size_t nx = s.num_x_cells();
  const double c = s.c();
  const double beta = s.beta();
  double loss = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    const double p0 = s.exogenous()[x];
    const double p1 = s.exogenous()[nx + x];
    loss += p1 * (1.0 - play[nx + x]) * (c + beta);
    if (beta <= c) {
      loss += p0 * play[x] * (c - beta);
    } else {
      loss += p0 * (1.0 - play[x]) * (beta - c);
    }
  }
  return loss;
}

}  // namespace bci
