#include "bci/causal.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace bci {

namespace {

// Sufficient statistics of the joint for one data type, indexed by x_D cell:
// q[d][a] = p(a, x_D), r[d][a] = p(a, x_D, outcome=1).
struct AdjustmentStats {
  VariableSpace d_space;
  std::vector<std::array<double, 2>> q;
  std::vector<std::array<double, 2>> r;
  // For each x_D cell, its x_C cell (C is a subset of D).
  std::vector<std::size_t> c_of_d;
  std::size_t num_c_cells = 1;
};

void CheckLayout(const JointTable& joint) {
  const auto& vars = joint.space().variables();
  if (vars.size() < 3 || vars.front().name != "t" || vars[vars.size() - 2].name != "a") {
    throw std::invalid_argument("joint must have layout [t, x..., a, outcome]");
  }
}

AdjustmentStats Collect(const JointTable& joint, const DataTypeSpec& dtype) {
  CheckLayout(joint);
  const VariableSpace& space = joint.space();
  const std::size_t k = space.size() - 3;
  for (int j : dtype.data) {
    if (j < 0 || static_cast<std::size_t>(j) >= k) {
      throw std::invalid_argument("data type refers to unknown x variable");
    }
  }
  std::vector<std::size_t> d_pos;
  for (int j : dtype.data) d_pos.push_back(static_cast<std::size_t>(j) + 1);

  AdjustmentStats st{space.subspace(d_pos), {}, {}, {}, 1};
  const std::size_t nd = st.d_space.num_cells();
  st.q.assign(nd, {0.0, 0.0});
  st.r.assign(nd, {0.0, 0.0});

  // Strides of C inside D.
  std::vector<std::size_t> c_stride(dtype.data.size(), 0);
  {
    std::size_t stride = 1;
    for (std::size_t m = dtype.data.size(); m-- > 0;) {
      if (std::binary_search(dtype.conditions.begin(), dtype.conditions.end(), dtype.data[m])) {
        c_stride[m] = stride;
        stride *= static_cast<std::size_t>(st.d_space.cardinality(m));
      }
    }
    st.num_c_cells = stride;
  }
  st.c_of_d.resize(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    std::size_t c = 0;
    for (std::size_t m = 0; m < dtype.data.size(); ++m) {
      c += c_stride[m] * static_cast<std::size_t>(st.d_space.value(d, m));
    }
    st.c_of_d[d] = c;
  }

  const std::size_t a_pos = space.size() - 2;
  const std::size_t o_pos = space.size() - 1;
  for (std::size_t i = 0; i < space.num_cells(); ++i) {
    const double m = joint[i];
    if (m == 0.0) continue;
    std::size_t d = 0;
    for (std::size_t j = 0; j < d_pos.size(); ++j) {
      d += st.d_space.stride(j) * static_cast<std::size_t>(space.value(i, d_pos[j]));
    }
    const int a = space.value(i, a_pos);
    st.q[d][a] += m;
    if (space.value(i, o_pos) == 1) st.r[d][a] += m;
  }
  return st;
}

std::size_t ConditionCellIndex(const DataTypeSpec& dtype, const JointTable& joint,
                               std::span<const int> x_condition) {
  if (x_condition.size() != dtype.conditions.size()) {
    throw std::invalid_argument("condition cell arity does not match C");
  }
  std::size_t cell = 0;
  std::size_t stride = 1;
  for (std::size_t m = dtype.conditions.size(); m-- > 0;) {
    const int card = joint.space().cardinality(static_cast<std::size_t>(dtype.conditions[m]) + 1);
    if (x_condition[m] < 0 || x_condition[m] >= card) {
      throw std::out_of_range("condition value out of range");
    }
    cell += stride * static_cast<std::size_t>(x_condition[m]);
    stride *= static_cast<std::size_t>(card);
  }
  return cell;
}

// Returns tilde-p(outcome=1 | x_C=cell, do(a)) for a = 0, 1 jointly, or the
// reason it is unavailable.
DeltaStatus Beliefs(const AdjustmentStats& st, std::size_t cell, double& belief0,
                    double& belief1) {
  double pc = 0.0;
  for (std::size_t d = 0; d < st.q.size(); ++d) {
    if (st.c_of_d[d] == cell) pc += st.q[d][0] + st.q[d][1];
  }
  if (pc <= 0.0) return DeltaStatus::kUnreachable;
  belief0 = belief1 = 0.0;
  for (std::size_t d = 0; d < st.q.size(); ++d) {
    if (st.c_of_d[d] != cell) continue;
    const double pd = st.q[d][0] + st.q[d][1];
    if (pd <= 0.0) continue;
    if (st.q[d][0] <= 0.0 || st.q[d][1] <= 0.0) return DeltaStatus::kUndefined;
    const double w = pd / pc;
    belief0 += w * st.r[d][0] / st.q[d][0];
    belief1 += w * st.r[d][1] / st.q[d][1];
  }
  return DeltaStatus::kDefined;
}

}  // namespace

std::optional<double> subjective_do_belief(const JointTable& joint, const DataTypeSpec& dtype,
                                           std::span<const int> x_condition, int action) {
  const AdjustmentStats st = Collect(joint, dtype);
  const std::size_t cell = ConditionCellIndex(dtype, joint, x_condition);
  // Only the requested action needs to be supported.
  double pc = 0.0;
  for (std::size_t d = 0; d < st.q.size(); ++d) {
    if (st.c_of_d[d] == cell) pc += st.q[d][0] + st.q[d][1];
  }
  if (pc <= 0.0) return std::nullopt;
  double belief = 0.0;
  for (std::size_t d = 0; d < st.q.size(); ++d) {
    if (st.c_of_d[d] != cell) continue;
    const double pd = st.q[d][0] + st.q[d][1];
    if (pd <= 0.0) continue;
    if (st.q[d][action] <= 0.0) return std::nullopt;
    belief += (pd / pc) * st.r[d][action] / st.q[d][action];
  }
  return belief;
}

DeltaCell delta(const JointTable& joint, const DataTypeSpec& dtype,
                std::span<const int> x_condition) {
  const AdjustmentStats st = Collect(joint, dtype);
  double b0 = 0.0, b1 = 0.0;
  const DeltaStatus status = Beliefs(st, ConditionCellIndex(dtype, joint, x_condition), b0, b1);
  return {status, status == DeltaStatus::kDefined ? b1 - b0 : 0.0};
}

std::vector<DeltaCell> delta_cells(const JointTable& joint, const DataTypeSpec& dtype) {
  const AdjustmentStats st = Collect(joint, dtype);
  std::vector<DeltaCell> out(st.num_c_cells);
  for (std::size_t cell = 0; cell < st.num_c_cells; ++cell) {
    double b0 = 0.0, b1 = 0.0;
    const DeltaStatus status = Beliefs(st, cell, b0, b1);
    out[cell] = {status, status == DeltaStatus::kDefined ? b1 - b0 : 0.0};
  }
  return out;
}

DeltaTable delta_table(const Scenario& s, const StrategyProfile& sigma) {
  const JointTable joint = induced_joint(s, sigma);
  DeltaTable out;
  out.cells.reserve(s.num_types());
  for (const DataTypeSpec& ty : s.types()) out.cells.push_back(delta_cells(joint, ty));
  return out;
}

double perceived_gain(const Scenario& s, double delta_value) {
  if (!s.consequential()) return delta_value;
  return s.beta() + (1.0 - s.beta()) * delta_value;
}

double reply_margin(const Scenario& s, double delta_value, int t) {
  const double gain = perceived_gain(s, delta_value);
  // Choosing a != t costs c.
  return t == 0 ? gain - s.c() : gain + s.c();
}

ReplySet best_reply_set(const Scenario& s, double delta_value, int t, double tie_tol) {
  const double m = reply_margin(s, delta_value, t);
  if (std::abs(m) <= tie_tol) return {true, true};
  return m > 0.0 ? ReplySet{false, true} : ReplySet{true, false};
}

}  // namespace bci
