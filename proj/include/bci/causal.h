// Subjective do-beliefs and perceived causal effects of a data type that
// conditions on x_C and adjusts for x_{D\C}:
//
//   Delta_i(x) = sum_{x_{D\C}} p(x_{D\C} | x_C) [p(y=1|a=1,x_D) - p(y=1|a=0,x_D)]
//
// Joint tables passed here use the layout produced by induced_joint():
// [t, x_1..x_K, a, outcome].

#ifndef BCI_CAUSAL_H_
#define BCI_CAUSAL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bci/dist.h"
#include "bci/model.h"

namespace bci {

inline constexpr double kDefaultTieTol = 1e-9;

enum class DeltaStatus {
  kDefined,
  // Some p(y | a, x_D) with p(x_D | x_C) > 0 conditions on a null event.
  kUndefined,
  // p(x_C) = 0: the signal never occurs.
  kUnreachable,
};

struct DeltaCell {
  DeltaStatus status = DeltaStatus::kUnreachable;
  double value = 0.0;

  bool defined() const { return status == DeltaStatus::kDefined; }
};

// cells[type][condition cell]. In consequential mode the values are Delta^z.
struct DeltaTable {
  std::vector<std::vector<DeltaCell>> cells;

  const DeltaCell& at(std::size_t type, std::size_t cell) const { return cells[type][cell]; }
};

// tilde-p_i(y=1 | x_C, do(a)); std::nullopt when undefined or unreachable.
std::optional<double> subjective_do_belief(const JointTable& joint,
                                           const DataTypeSpec& dtype,
                                           std::span<const int> x_condition, int action);

DeltaCell delta(const JointTable& joint, const DataTypeSpec& dtype,
                std::span<const int> x_condition);

// Delta for every cell of X_C in one pass, row-major over C.
std::vector<DeltaCell> delta_cells(const JointTable& joint, const DataTypeSpec& dtype);

DeltaTable delta_table(const Scenario& s, const StrategyProfile& sigma);

// Subjective payoff gain from a=1 over a=0 before the taste cost: Delta in
// baseline mode, beta + (1 - beta) Delta^z in consequential mode.
double perceived_gain(const Scenario& s, double delta_value);

struct ReplySet {
  bool zero = false;
  bool one = false;

  bool contains(int a) const { return a == 1 ? one : zero; }
  friend bool operator==(const ReplySet&, const ReplySet&) = default;
};

// Subjective best replies of preference type t given a defined Delta.
// |gain - threshold| <= tie_tol counts as indifference.
ReplySet best_reply_set(const Scenario& s, double delta_value, int t,
                        double tie_tol = kDefaultTieTol);

// Signed margin by which a=1 beats a=0 for preference type t (positive means
// a=1 strictly preferred).
double reply_margin(const Scenario& s, double delta_value, int t);

}  // namespace bci

#endif  // BCI_CAUSAL_H_
