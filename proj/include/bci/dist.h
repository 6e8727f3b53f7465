// Finite discrete probability tables: product spaces, joint tables,
// marginalization, conditioning and conditional-independence checks.
//
// Tables are dense and row-major in the declared variable order (the last
// variable varies fastest). All values are immutable after construction.

#ifndef BCI_DIST_H_
#define BCI_DIST_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bci {

inline constexpr double kNormalizationTol = 1e-12;
inline constexpr std::size_t kMaxCells = std::size_t{1} << 24;

struct Variable {
  std::string name;
  int cardinality = 2;
};

// Assignment of a value to each variable of a space, in space order.
using Assignment = std::vector<int>;

class VariableSpace {
 public:
  VariableSpace() = default;
  explicit VariableSpace(std::vector<Variable> variables);

  const std::vector<Variable>& variables() const { return variables_; }
  std::size_t size() const { return variables_.size(); }
  std::size_t num_cells() const { return num_cells_; }
  int cardinality(std::size_t var) const { return variables_[var].cardinality; }
  std::size_t stride(std::size_t var) const { return strides_[var]; }

  // Position of a named variable; throws std::invalid_argument if unknown.
  std::size_t position(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t index(std::span<const int> assignment) const;
  Assignment assignment(std::size_t index) const;
  int value(std::size_t index, std::size_t var) const {
    return static_cast<int>((index / strides_[var]) % variables_[var].cardinality);
  }

  // Subspace made of the given variable positions, in the order given.
  VariableSpace subspace(std::span<const std::size_t> positions) const;

  friend bool operator==(const VariableSpace&, const VariableSpace&);

 private:
  std::vector<Variable> variables_;
  std::vector<std::size_t> strides_;
  std::size_t num_cells_ = 1;
};

bool operator==(const Variable& a, const Variable& b);

class JointTable {
 public:
  // Validates non-negativity and normalization within kNormalizationTol.
  JointTable(VariableSpace space, std::vector<double> mass);

  static JointTable Uniform(VariableSpace space);
  static JointTable PointMass(VariableSpace space, std::span<const int> at);

  const VariableSpace& space() const { return space_; }
  std::span<const double> mass() const { return mass_; }
  double operator[](std::size_t index) const { return mass_[index]; }
  double at(std::span<const int> assignment) const {
    return mass_[space_.index(assignment)];
  }

 private:
  VariableSpace space_;
  std::vector<double> mass_;
};

// p(target | given). Rows are given-assignments (row-major over `given`),
// columns target-assignments. Rows whose given-assignment has zero mass are
// flagged unsupported and hold no entries.
class ConditionalTable {
 public:
  ConditionalTable(VariableSpace given, VariableSpace target,
                   std::vector<double> entries, std::vector<bool> supported);

  const VariableSpace& given() const { return given_; }
  const VariableSpace& target() const { return target_; }
  bool supported(std::size_t given_index) const { return supported_[given_index]; }
  // Empty optional on unsupported rows.
  std::optional<double> probability(std::size_t given_index,
                                    std::size_t target_index) const;

 private:
  VariableSpace given_;
  VariableSpace target_;
  std::vector<double> entries_;
  std::vector<bool> supported_;
};

JointTable marginalize(const JointTable& table, std::span<const std::string> keep);

struct Evidence {
  std::string variable;
  int value = 0;
};

// Renormalized distribution over the variables not named in the evidence.
// Returns std::nullopt ("unsupported") when the evidence has zero mass.
std::optional<JointTable> condition(const JointTable& table,
                                    std::span<const Evidence> evidence);

ConditionalTable conditional(const JointTable& table,
                             std::span<const std::string> target,
                             std::span<const std::string> given);

// Rebuilds p(given, target) = p(given) p(target | given) over the variables of
// `marginal` followed by the targets of `cond`. Unsupported rows contribute 0.
JointTable compose(const JointTable& marginal, const ConditionalTable& cond);

// True iff |p(l,r|g) - p(l|g) p(r|g)| <= tol at every supported cell g.
bool check_ci(const JointTable& table, std::span<const std::string> left,
              std::span<const std::string> right,
              std::span<const std::string> given, double tol);

double expectation(const JointTable& table,
                   const std::function<double(std::span<const int>)>& weight);

}  // namespace bci

#endif  // BCI_DIST_H_
