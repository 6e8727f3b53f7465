#include "bci/type_order.h"

#include <algorithm>

namespace bci {

DominanceRelation build_relation(std::span<const DataTypeSpec> types) {
  DominanceRelation rel{types.size(), {}};
  rel.matrix.assign(rel.n, std::vector<bool>(rel.n, false));
  for (std::size_t i = 0; i < rel.n; ++i) {
    const auto& d = types[i].data;
    for (std::size_t j = 0; j < rel.n; ++j) {
      const auto& c = types[j].conditions;
      rel.matrix[i][j] = std::all_of(c.begin(), c.end(), [&](int v) {
        return std::find(d.begin(), d.end(), v) != d.end();
      });
    }
  }
  return rel;
}

bool is_complete(const DominanceRelation& rel) {
  for (std::size_t i = 0; i < rel.n; ++i) {
    for (std::size_t j = i + 1; j < rel.n; ++j) {
      if (!rel.matrix[i][j] && !rel.matrix[j][i]) return false;
    }
  }
  return true;
}

bool is_quasitransitive(const DominanceRelation& rel) {
  for (std::size_t i = 0; i < rel.n; ++i) {
    for (std::size_t j = 0; j < rel.n; ++j) {
      if (!rel.strictly_dominates(i, j)) continue;
      for (std::size_t k = 0; k < rel.n; ++k) {
        if (rel.strictly_dominates(j, k) && !rel.strictly_dominates(i, k)) return false;
      }
    }
  }
  return true;
}

LayerPartition layer_partition(const DominanceRelation& rel) {
  if (!is_complete(rel) || !is_quasitransitive(rel)) {
    throw RelationError("layer partition needs a complete, quasitransitive relation");
  }
  LayerPartition out;
  std::vector<bool> placed(rel.n, false);
  std::size_t remaining = rel.n;
  while (remaining > 0) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < rel.n; ++i) {
      if (placed[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < rel.n && !dominated; ++j) {
        dominated = !placed[j] && rel.strictly_dominates(j, i);
      }
      if (!dominated) layer.push_back(i);
    }
    // Nonempty: P* is acyclic on a finite set once it is transitive.
    for (std::size_t i : layer) placed[i] = true;
    remaining -= layer.size();
    out.layers.push_back(std::move(layer));
  }
  return out;
}

}  // namespace bci
