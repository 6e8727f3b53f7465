// The domination relation between data types: i P j iff D_i ⊇ C_j, i.e. type
// i has data on everything type j conditions on. P* is its asymmetric part.

#ifndef BCI_TYPE_ORDER_H_
#define BCI_TYPE_ORDER_H_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "bci/model.h"

namespace bci {

struct DominanceRelation {
  std::size_t n = 0;
  // matrix[i][j] = i P j
  std::vector<std::vector<bool>> matrix;

  bool dominates(std::size_t i, std::size_t j) const { return matrix[i][j]; }
  bool strictly_dominates(std::size_t i, std::size_t j) const {
    return matrix[i][j] && !matrix[j][i];
  }
  friend bool operator==(const DominanceRelation&, const DominanceRelation&) = default;
};

DominanceRelation build_relation(std::span<const DataTypeSpec> types);

bool is_complete(const DominanceRelation& rel);
// P* transitive.
bool is_quasitransitive(const DominanceRelation& rel);

struct LayerPartition {
  std::vector<std::vector<std::size_t>> layers;

  friend bool operator==(const LayerPartition&, const LayerPartition&) = default;
};

class RelationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Peels off the P*-undominated types layer by layer; every member of a layer
// P-dominates everyone in its own and later layers. Requires a complete,
// quasitransitive relation; throws RelationError otherwise.
LayerPartition layer_partition(const DominanceRelation& rel);

}  // namespace bci

#endif  // BCI_TYPE_ORDER_H_
