#include "bci/dist.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace bci {

bool operator==(const Variable& a, const Variable& b) {
  return a.name == b.name && a.cardinality == b.cardinality;
}

VariableSpace::VariableSpace(std::vector<Variable> variables)
    : variables_(std::move(variables)), strides_(variables_.size()) {
  std::unordered_set<std::string> seen;
  for (const Variable& v : variables_) {
    if (v.cardinality < 1) {
      throw std::invalid_argument("variable '" + v.name +
                                  "' must have cardinality >= 1");
    }
    if (!seen.insert(v.name).second) {
      throw std::invalid_argument("duplicate variable name '" + v.name + "'");
    }
    num_cells_ *= static_cast<std::size_t>(v.cardinality);
    if (num_cells_ > kMaxCells) {
      throw std::invalid_argument("variable space exceeds 2^24 cells");
    }
  }
  std::size_t stride = 1;
  for (std::size_t i = variables_.size(); i-- > 0;) {
    strides_[i] = stride;
    stride *= static_cast<std::size_t>(variables_[i].cardinality);
  }
}

std::size_t VariableSpace::position(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw std::invalid_argument("unknown variable '" + name + "'");
}

bool VariableSpace::contains(const std::string& name) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [&](const Variable& v) { return v.name == name; });
}

std::size_t VariableSpace::index(std::span<const int> assignment) const {
  if (assignment.size() != variables_.size()) {
    throw std::invalid_argument("assignment arity does not match space");
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (assignment[i] < 0 || assignment[i] >= variables_[i].cardinality) {
      throw std::out_of_range("value out of range for variable '" +
                              variables_[i].name + "'");
    }
    idx += strides_[i] * static_cast<std::size_t>(assignment[i]);
  }
  return idx;
}

Assignment VariableSpace::assignment(std::size_t index) const {
  Assignment out(variables_.size());
  for (std::size_t i = 0; i < variables_.size(); ++i) out[i] = value(index, i);
  return out;
}

VariableSpace VariableSpace::subspace(std::span<const std::size_t> positions) const {
  std::vector<Variable> vars;
  vars.reserve(positions.size());
  for (std::size_t p : positions) vars.push_back(variables_.at(p));
  return VariableSpace(std::move(vars));
}

bool operator==(const VariableSpace& a, const VariableSpace& b) {
  return a.variables_ == b.variables_;
}

JointTable::JointTable(VariableSpace space, std::vector<double> mass)
    : space_(std::move(space)), mass_(std::move(mass)) {
  if (mass_.size() != space_.num_cells()) {
    throw std::invalid_argument("mass array size does not match space");
  }
  double total = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || m > 1.0) {
      throw std::invalid_argument("probability entries must lie in [0,1]");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw std::invalid_argument("probability entries must sum to 1");
  }
}

JointTable JointTable::Uniform(VariableSpace space) {
  const std::size_t n = space.num_cells();
  return JointTable(std::move(space), std::vector<double>(n, 1.0 / n));
}

JointTable JointTable::PointMass(VariableSpace space, std::span<const int> at) {
  std::vector<double> mass(space.num_cells(), 0.0);
  mass[space.index(at)] = 1.0;
  return JointTable(std::move(space), std::move(mass));
}

ConditionalTable::ConditionalTable(VariableSpace given, VariableSpace target,
                                   std::vector<double> entries,
                                   std::vector<bool> supported)
    : given_(std::move(given)),
      target_(std::move(target)),
      entries_(std::move(entries)),
      supported_(std::move(supported)) {
  const std::size_t rows = given_.num_cells();
  const std::size_t cols = target_.num_cells();
  if (supported_.size() != rows || entries_.size() != rows * cols) {
    throw std::invalid_argument("conditional table shape mismatch");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (!supported_[r]) continue;
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += entries_[r * cols + c];
    if (std::abs(total - 1.0) > kNormalizationTol) {
      throw std::invalid_argument("conditional row does not sum to 1");
    }
  }
}

std::optional<double> ConditionalTable::probability(std::size_t given_index,
                                                    std::size_t target_index) const {
  if (!supported_.at(given_index)) return std::nullopt;
  return entries_[given_index * target_.num_cells() + target_index];
}

namespace {

std::vector<std::size_t> Positions(const VariableSpace& space,
                                   std::span<const std::string> names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const std::string& n : names) out.push_back(space.position(n));
  return out;
}

// Maps each cell of `space` to its index in the subspace `positions`.
std::vector<std::size_t> ProjectionIndex(const VariableSpace& space,
                                         std::span<const std::size_t> positions,
                                         const VariableSpace& sub) {
  std::vector<std::size_t> out(space.num_cells());
  for (std::size_t i = 0; i < space.num_cells(); ++i) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
      j += sub.stride(k) * static_cast<std::size_t>(space.value(i, positions[k]));
    }
    out[i] = j;
  }
  return out;
}

// Sums without renormalization; used where zero-mass rows must be detected.
std::vector<double> SumOnto(const JointTable& table,
                            std::span<const std::size_t> positions,
                            const VariableSpace& sub) {
  std::vector<double> out(sub.num_cells(), 0.0);
  const auto proj = ProjectionIndex(table.space(), positions, sub);
  for (std::size_t i = 0; i < proj.size(); ++i) out[proj[i]] += table[i];
  return out;
}

std::vector<double> Renormalized(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

JointTable marginalize(const JointTable& table, std::span<const std::string> keep) {
  const auto positions = Positions(table.space(), keep);
  VariableSpace sub = table.space().subspace(positions);
  auto summed = SumOnto(table, positions, sub);
  // Summation order can drift normalization by a few ulps.
  return JointTable(std::move(sub), Renormalized(std::move(summed)));
}

std::optional<JointTable> condition(const JointTable& table,
                                    std::span<const Evidence> evidence) {
  const VariableSpace& space = table.space();
  std::vector<int> fixed(space.size(), -1);
  for (const Evidence& e : evidence) {
    const std::size_t p = space.position(e.variable);
    if (e.value < 0 || e.value >= space.cardinality(p)) {
      throw std::out_of_range("evidence value out of range for '" + e.variable + "'");
    }
    fixed[p] = e.value;
  }
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < space.size(); ++p) {
    if (fixed[p] < 0) rest.push_back(p);
  }
  VariableSpace sub = space.subspace(rest);
  std::vector<double> mass(sub.num_cells(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < space.num_cells(); ++i) {
    bool match = true;
    for (std::size_t p = 0; p < space.size() && match; ++p) {
      match = fixed[p] < 0 || space.value(i, p) == fixed[p];
    }
    if (!match) continue;
    std::size_t j = 0;
    for (std::size_t k = 0; k < rest.size(); ++k) {
      j += sub.stride(k) * static_cast<std::size_t>(space.value(i, rest[k]));
    }
    mass[j] += table[i];
    total += table[i];
  }
  if (total <= 0.0) return std::nullopt;
  for (double& m : mass) m /= total;
  return JointTable(std::move(sub), std::move(mass));
}

ConditionalTable conditional(const JointTable& table,
                             std::span<const std::string> target,
                             std::span<const std::string> given) {
  const auto gpos = Positions(table.space(), given);
  const auto tpos = Positions(table.space(), target);
  VariableSpace gspace = table.space().subspace(gpos);
  VariableSpace tspace = table.space().subspace(tpos);
  std::vector<std::size_t> both = gpos;
  both.insert(both.end(), tpos.begin(), tpos.end());
  VariableSpace bspace = table.space().subspace(both);
  const auto joint = SumOnto(table, both, bspace);
  const std::size_t rows = gspace.num_cells();
  const std::size_t cols = tspace.num_cells();
  std::vector<double> entries(rows * cols, 0.0);
  std::vector<bool> supported(rows, false);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += joint[r * cols + c];
    if (total <= 0.0) continue;
    supported[r] = true;
    for (std::size_t c = 0; c < cols; ++c) entries[r * cols + c] = joint[r * cols + c] / total;
  }
  return ConditionalTable(std::move(gspace), std::move(tspace), std::move(entries),
                          std::move(supported));
}

JointTable compose(const JointTable& marginal, const ConditionalTable& cond) {
  if (!(marginal.space() == cond.given())) {
    throw std::invalid_argument("marginal space does not match conditional's given space");
  }
  std::vector<Variable> vars = cond.given().variables();
  for (const Variable& v : cond.target().variables()) vars.push_back(v);
  VariableSpace space(std::move(vars));
  const std::size_t cols = cond.target().num_cells();
  std::vector<double> mass(space.num_cells(), 0.0);
  for (std::size_t r = 0; r < cond.given().num_cells(); ++r) {
    if (!cond.supported(r)) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      mass[r * cols + c] = marginal[r] * *cond.probability(r, c);
    }
  }
  return JointTable(std::move(space), std::move(mass));
}

bool check_ci(const JointTable& table, std::span<const std::string> left,
              std::span<const std::string> right, std::span<const std::string> given,
              double tol) {
  const auto lpos = Positions(table.space(), left);
  const auto rpos = Positions(table.space(), right);
  const auto gpos = Positions(table.space(), given);
  std::vector<std::size_t> all = gpos;
  all.insert(all.end(), lpos.begin(), lpos.end());
  all.insert(all.end(), rpos.begin(), rpos.end());
  {
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("check_ci subsets must be disjoint");
    }
  }
  const VariableSpace space = table.space().subspace(all);
  const auto joint = SumOnto(table, all, space);
  const std::size_t ng = table.space().subspace(gpos).num_cells();
  const std::size_t nl = table.space().subspace(lpos).num_cells();
  const std::size_t nr = table.space().subspace(rpos).num_cells();
  for (std::size_t g = 0; g < ng; ++g) {
    const double* block = joint.data() + g * nl * nr;
    double pg = 0.0;
    for (std::size_t k = 0; k < nl * nr; ++k) pg += block[k];
    if (pg <= 0.0) continue;
    for (std::size_t l = 0; l < nl; ++l) {
      double pl = 0.0;
      for (std::size_t r = 0; r < nr; ++r) pl += block[l * nr + r];
      for (std::size_t r = 0; r < nr; ++r) {
        double pr = 0.0;
        for (std::size_t l2 = 0; l2 < nl; ++l2) pr += block[l2 * nr + r];
        const double lhs = block[l * nr + r] / pg;
        if (std::abs(lhs - (pl / pg) * (pr / pg)) > tol) return false;
      }
    }
  }
  return true;
}

double expectation(const JointTable& table,
                   const std::function<double(std::span<const int>)>& weight) {
  double total = 0.0;
  for (std::size_t i = 0; i < table.space().num_cells(); ++i) {
    if (table[i] == 0.0) continue;
    const Assignment a = table.space().assignment(i);
    total += table[i] * weight(a);
  }
  return total;
}

}  // namespace bci
