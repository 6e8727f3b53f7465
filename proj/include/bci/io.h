// Scenario documents and report export.
//
// A scenario document is a JSON object:
//
//   {
//     "schema_version": 1,
//     "variables": [{"name": "x1", "cardinality": 2}, {"name": "x2", "cardinality": 2}],
//     "p_tx": [p(t=0,x1=0,x2=0), p(0,0,1), p(0,1,0), p(0,1,1), p(1,0,0), ...],
//     "outcome": {"kind": "baseline", "y_given_tx": [...]},
//     "types": [{"C": [1], "D": [1]}, {"C": [2], "D": [1, 2]}],
//     "lambda": [0.5, 0.5],
//     "c": 0.5
//   }
//
// Flat arrays are row-major over [t, x_1..x_K] in declaration order, t
// slowest and the last x fastest. Variable indices in C and D are 1-based.
// A consequential outcome reads {"kind": "consequential", "z_given_tx": [...],
// "beta": b}.
//
// Optional members:
//   "profile":  one {"t0": [...], "t1": [...]} per type, each listing
//               sigma(a=1 | t, x_C) row-major over the type's C variables;
//   "schedule": {"epsilon": e, "exponent": 1, "direction": "flip",
//                "overrides": [{"type": 1, "t": 1, "cell": 0, "exponent": 2}]}
//               with 1-based type, 0-based cell; directions are "none",
//               "toward_zero", "toward_one", "flip".

#ifndef BCI_IO_H_
#define BCI_IO_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bci/causal.h"
#include "bci/equilibrium.h"
#include "bci/model.h"
#include "bci/type_order.h"
#include "bci/worst_case.h"

namespace bci {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Malformed text, missing members or members of the wrong JSON type.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioDocument {
  ScenarioSpec spec;
  // Raw profile/schedule members; they need the validated scenario.
  std::optional<Json> profile;
  std::optional<Json> schedule;
};

// Throws ParseError. Does not validate the spec: Scenario(doc.spec) does.
ScenarioDocument parse_scenario_document(std::string_view text);
ScenarioDocument read_scenario_file(const std::string& path);

StrategyProfile profile_from_json(const Scenario& s, const Json& j);
TrembleSchedule schedule_from_json(const Scenario& s, const Json& j);

Json to_json(const ScenarioSpec& spec);
Json to_json(const StrategyProfile& sigma);
Json to_json(const Scenario& s, const TrembleSchedule& sched);
Json to_json(const Scenario& s, const DeltaTable& deltas);
Json to_json(const Scenario& s, const EquilibriumReport& r);
Json to_json(const DominanceRelation& rel);
Json to_json(const Scenario& s, const WitnessInstance& w);
Json to_json(const SearchTraceRow& row);

// Human-readable name of condition cell `cell` of `type`, e.g. "x1=1,x2=0";
// "-" when the type conditions on nothing.
std::string condition_label(const Scenario& s, std::size_t type, std::size_t cell);

const char* to_string(DeltaStatus s);

// 17 significant digits.
std::string format_decimal(double v);

// Comma-separated rows under a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  // Throws std::invalid_argument on a width mismatch.
  void add_row(std::vector<std::string> row);
  std::size_t num_rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace bci

#endif  // BCI_IO_H_
