#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "bci/builtins.h"
#include "bci/type_order.h"
#include "bci/worst_case.h"
#include "oracles.h"

using namespace bci;
using testing::RandomQuasitransitive;
using testing::RandomWeakOrder;

namespace {

// Layer l must be exactly the set of types not in earlier layers that no
// such type strictly dominates.
bool SatisfiesDefinition(const DominanceRelation& rel, const std::vector<std::vector<std::size_t>>& layers) {
  std::vector<bool> earlier(rel.n, false);
  for (const auto& layer : layers) {
    std::vector<bool> in_layer(rel.n, false);
    for (std::size_t i : layer) in_layer[i] = true;
    for (std::size_t i = 0; i < rel.n; ++i) {
      if (earlier[i]) continue;
      bool undominated = true;
      for (std::size_t j = 0; j < rel.n; ++j) {
        if (!earlier[j] && rel.matrix[j][i] && !rel.matrix[i][j]) undominated = false;
      }
      if (undominated != in_layer[i]) return false;
    }
    for (std::size_t i : layer) earlier[i] = true;
  }
  return true;
}

// Every ordered set partition of {0..n-1}, as block labels 0..m-1 with every
// label used.
std::vector<std::vector<std::vector<std::size_t>>> BruteForcePartitions(const DominanceRelation& rel) {
  const std::size_t n = rel.n;
  std::vector<std::vector<std::vector<std::size_t>>> hits;
  std::vector<std::size_t> label(n, 0);
  while (true) {
    std::size_t blocks = 0;
    for (std::size_t l : label) blocks = std::max(blocks, l + 1);
    std::vector<std::vector<std::size_t>> layers(blocks);
    for (std::size_t i = 0; i < n; ++i) layers[label[i]].push_back(i);
    const bool onto = std::none_of(layers.begin(), layers.end(),
                                   [](const auto& l) { return l.empty(); });
    if (onto && SatisfiesDefinition(rel, layers)) hits.push_back(layers);
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == n) label[pos++] = 0;
    if (pos == n) break;
  }
  return hits;
}

}  // namespace

TEST_CASE("dominance relation from data types") {
  const Scenario e31(example_3_1(0.5, 0.8, 0.5));
  const auto rel = build_relation(e31.types());
  CHECK_FALSE(rel.dominates(0, 1));
  CHECK_FALSE(rel.dominates(1, 0));
  CHECK(rel.dominates(0, 0));
  CHECK_FALSE(is_complete(rel));
  CHECK_THROWS_AS(layer_partition(rel), RelationError);

  const std::vector<DataTypeSpec> nested{{{0, 1}, {0, 1}}, {{0}, {0}}};
  const auto n = build_relation(nested);
  CHECK(n.dominates(0, 1));
  CHECK_FALSE(n.dominates(1, 0));
  CHECK(n.strictly_dominates(0, 1));

  const Scenario coarse(example_3_1_coarse(0.5, 0.8, 0.5));
  const auto c = build_relation(coarse.types());
  CHECK(c.dominates(0, 1));
  CHECK_FALSE(c.dominates(1, 0));
  CHECK(is_complete(c));
  CHECK(is_quasitransitive(c));

  const std::vector<DataTypeSpec> single{{{0}, {0, 1}}};
  CHECK(is_complete(build_relation(single)));
  CHECK(is_quasitransitive(build_relation(single)));
}

TEST_CASE("the cycle witness is complete but not quasitransitive") {
  const auto w = witness_cycle(0.01, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.9);
  const auto rel = build_relation(w.scenario.types());
  CHECK(is_complete(rel));
  CHECK_FALSE(is_quasitransitive(rel));
  for (std::size_t i = 0; i < 3; ++i) CHECK(rel.strictly_dominates(i, (i + 1) % 3));
  CHECK_THROWS_AS(layer_partition(rel), RelationError);
}

TEST_CASE("layer partition examples") {
  const std::vector<DataTypeSpec> chain{{{0, 1, 2}, {0, 1, 2}}, {{0, 1}, {0, 1}}, {{0}, {0}}};
  const auto layers = layer_partition(build_relation(chain)).layers;
  CHECK(layers == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}});

  // Mutually P-equivalent: every D covers every C.
  const std::vector<DataTypeSpec> equivalent{{{0}, {0, 1}}, {{1}, {0, 1}}, {{}, {0, 1}}};
  CHECK(layer_partition(build_relation(equivalent)).layers ==
        std::vector<std::vector<std::size_t>>{{0, 1, 2}});
}

TEST_CASE("layer partition matches an exhaustive search over ordered partitions") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 1 + rep % 6 + (rep % 20 == 19 ? 1 : 0);
    const auto rel = rep % 3 == 0 ? RandomWeakOrder(n, rng)
                                  : RandomQuasitransitive(n, rng, 0.15 * (rep % 5 + 1));
    REQUIRE(is_complete(rel));
    REQUIRE(is_quasitransitive(rel));
    const auto got = layer_partition(rel);
    const auto expect = BruteForcePartitions(rel);
    REQUIRE(expect.size() == 1);
    CHECK(got.layers == expect[0]);
    // Each type P-dominates every type in its own and later layers.
    for (std::size_t l = 0; l < got.layers.size(); ++l) {
      for (std::size_t i : got.layers[l]) {
        for (std::size_t m = l; m < got.layers.size(); ++m) {
          for (std::size_t j : got.layers[m]) CHECK(rel.dominates(i, j));
        }
      }
    }
  }
}

TEST_CASE("simple types: complete iff the condition sets form a chain") {
  std::mt19937_64 rng(59);
  for (int rep = 0; rep < 200; ++rep) {
    // Distinct random subsets of {0,1,2}.
    std::vector<int> masks{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(masks.begin(), masks.end(), rng);
    masks.resize(2 + rep % 4);
    std::vector<DataTypeSpec> types;
    for (int m : masks) {
      DataTypeSpec t;
      for (int j = 0; j < 3; ++j) {
        if (m >> j & 1) t.conditions.push_back(j);
      }
      t.data = t.conditions;
      types.push_back(t);
    }
    bool chain = true;
    for (int a : masks) {
      for (int b : masks) chain = chain && ((a & b) == a || (a & b) == b);
    }
    const auto rel = build_relation(types);
    CHECK(is_complete(rel) == chain);
    // iPj with i != j is strict for distinct simple types.
    for (std::size_t i = 0; i < rel.n; ++i) {
      for (std::size_t j = 0; j < rel.n; ++j) {
        if (i != j && rel.dominates(i, j)) CHECK(rel.strictly_dominates(i, j));
      }
    }
    CHECK(is_quasitransitive(rel));
  }
}
