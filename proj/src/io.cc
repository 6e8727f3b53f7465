#include "bci/io.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace bci {
namespace {

const Json& Member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing \"" + key + "\"");
  return *it;
}

double Number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

int Integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<int>();
}

std::vector<double> Numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(Number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<int> Indices(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    // 1-based in documents.
    out.push_back(Integer(j[i], where + "[" + std::to_string(i) + "]") - 1);
  }
  return out;
}

Json Indices1(const std::vector<int>& v) {
  Json out = Json::array();
  for (int i : v) out.push_back(i + 1);
  return out;
}

TrembleDirection ParseDirection(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  const auto s = j.get<std::string>();
  if (s == "none") return TrembleDirection::kNone;
  if (s == "toward_zero") return TrembleDirection::kTowardZero;
  if (s == "toward_one") return TrembleDirection::kTowardOne;
  if (s == "flip") return TrembleDirection::kFlip;
  throw ParseError(where + ": unknown direction \"" + s + "\"");
}

const char* DirectionName(TrembleDirection d) {
  switch (d) {
    case TrembleDirection::kNone: return "none";
    case TrembleDirection::kTowardZero: return "toward_zero";
    case TrembleDirection::kTowardOne: return "toward_one";
    case TrembleDirection::kFlip: return "flip";
  }
  return "?";
}

Json CellRefJson(const Scenario& s, const CellRef& c) {
  Json j;
  j["type"] = c.type + 1;
  j["t"] = c.t;
  j["x"] = condition_label(s, c.type, c.cell);
  return j;
}

}  // namespace

ScenarioDocument parse_scenario_document(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  ScenarioDocument doc;
  ScenarioSpec& spec = doc.spec;
  const int version = Integer(Member(root, "schema_version", "document"), "schema_version");
  if (version != kSchemaVersion) {
    throw ParseError("unsupported schema_version " + std::to_string(version));
  }
  const Json& vars = Member(root, "variables", "document");
  if (!vars.is_array()) throw ParseError("variables: expected an array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string where = "variables[" + std::to_string(i) + "]";
    const Json& name = Member(vars[i], "name", where);
    if (!name.is_string()) throw ParseError(where + ".name: expected a string");
    spec.x_variables.push_back(
        {name.get<std::string>(), Integer(Member(vars[i], "cardinality", where), where + ".cardinality")});
  }
  spec.p_tx = Numbers(Member(root, "p_tx", "document"), "p_tx");

  const Json& outcome = Member(root, "outcome", "document");
  const Json& kind = Member(outcome, "kind", "outcome");
  if (kind == "baseline") {
    spec.kind = OutcomeKind::kBaseline;
    spec.outcome_given_tx = Numbers(Member(outcome, "y_given_tx", "outcome"), "outcome.y_given_tx");
  } else if (kind == "consequential") {
    spec.kind = OutcomeKind::kConsequential;
    spec.outcome_given_tx = Numbers(Member(outcome, "z_given_tx", "outcome"), "outcome.z_given_tx");
    spec.beta = Number(Member(outcome, "beta", "outcome"), "outcome.beta");
  } else {
    throw ParseError("outcome.kind: expected \"baseline\" or \"consequential\"");
  }

  const Json& types = Member(root, "types", "document");
  if (!types.is_array()) throw ParseError("types: expected an array");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string where = "types[" + std::to_string(i) + "]";
    spec.types.push_back({Indices(Member(types[i], "C", where), where + ".C"),
                          Indices(Member(types[i], "D", where), where + ".D")});
  }
  spec.lambda = Numbers(Member(root, "lambda", "document"), "lambda");
  spec.c = Number(Member(root, "c", "document"), "c");
  if (root.contains("profile")) doc.profile = root["profile"];
  if (root.contains("schedule")) doc.schedule = root["schedule"];
  return doc;
}

ScenarioDocument read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_document(buf.str());
}

StrategyProfile profile_from_json(const Scenario& s, const Json& j) {
  if (!j.is_array()) throw ParseError("profile: expected an array");
  StrategyProfile sigma;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "profile[" + std::to_string(i) + "]";
    TypeStrategy ts;
    ts.play[0] = Numbers(Member(j[i], "t0", where), where + ".t0");
    ts.play[1] = Numbers(Member(j[i], "t1", where), where + ".t1");
    sigma.types.push_back(std::move(ts));
  }
  check_profile(s, sigma);
  return sigma;
}

TrembleSchedule schedule_from_json(const Scenario& s, const Json& j) {
  TrembleRule base;
  if (j.contains("exponent")) base.exponent = Number(j["exponent"], "schedule.exponent");
  if (j.contains("direction")) base.direction = ParseDirection(j["direction"], "schedule.direction");
  const double eps = Number(Member(j, "epsilon", "schedule"), "schedule.epsilon");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("schedule.epsilon must lie in (0,1)");
  TrembleSchedule sched = TrembleSchedule::Uniform(s, eps, base);
  if (!j.contains("overrides")) return sched;
  const Json& ov = j["overrides"];
  if (!ov.is_array()) throw ParseError("schedule.overrides: expected an array");
  for (std::size_t k = 0; k < ov.size(); ++k) {
    const std::string where = "schedule.overrides[" + std::to_string(k) + "]";
    const int type = Integer(Member(ov[k], "type", where), where + ".type") - 1;
    const int t = Integer(Member(ov[k], "t", where), where + ".t");
    const int cell = Integer(Member(ov[k], "cell", where), where + ".cell");
    if (type < 0 || static_cast<std::size_t>(type) >= s.num_types() || (t != 0 && t != 1) ||
        cell < 0 || static_cast<std::size_t>(cell) >= s.num_condition_cells(type)) {
      throw std::invalid_argument(where + ": no such cell");
    }
    TrembleRule& rule = sched.rules[type][t][cell];
    if (ov[k].contains("exponent")) rule.exponent = Number(ov[k]["exponent"], where + ".exponent");
    if (ov[k].contains("direction")) rule.direction = ParseDirection(ov[k]["direction"], where + ".direction");
    if (!(rule.exponent > 0.0)) throw std::invalid_argument(where + ": exponent must be positive");
  }
  return sched;
}

Json to_json(const ScenarioSpec& spec) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["variables"] = Json::array();
  for (const auto& v : spec.x_variables) {
    j["variables"].push_back({{"name", v.name}, {"cardinality", v.cardinality}});
  }
  j["p_tx"] = spec.p_tx;
  Json outcome;
  if (spec.kind == OutcomeKind::kBaseline) {
    outcome["kind"] = "baseline";
    outcome["y_given_tx"] = spec.outcome_given_tx;
  } else {
    outcome["kind"] = "consequential";
    outcome["z_given_tx"] = spec.outcome_given_tx;
    outcome["beta"] = spec.beta;
  }
  j["outcome"] = outcome;
  j["types"] = Json::array();
  for (const auto& t : spec.types) {
    j["types"].push_back({{"C", Indices1(t.conditions)}, {"D", Indices1(t.data)}});
  }
  j["lambda"] = spec.lambda;
  j["c"] = spec.c;
  return j;
}

Json to_json(const StrategyProfile& sigma) {
  Json j = Json::array();
  for (const auto& t : sigma.types) j.push_back({{"t0", t.play[0]}, {"t1", t.play[1]}});
  return j;
}

Json to_json(const Scenario& s, const TrembleSchedule& sched) {
  // Base rule = the most common one; everything else becomes an override.
  const TrembleRule base = sched.rules.empty() || sched.rules[0][0].empty()
                               ? TrembleRule{}
                               : sched.rules[0][0][0];
  Json j;
  j["epsilon"] = sched.epsilon;
  j["exponent"] = base.exponent;
  j["direction"] = DirectionName(base.direction);
  Json ov = Json::array();
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      for (std::size_t cell = 0; cell < s.num_condition_cells(i); ++cell) {
        const TrembleRule& r = sched.rules[i][t][cell];
        if (r.exponent == base.exponent && r.direction == base.direction) continue;
        ov.push_back({{"type", i + 1}, {"t", t}, {"cell", cell}, {"exponent", r.exponent},
                      {"direction", DirectionName(r.direction)}});
      }
    }
  }
  if (!ov.empty()) j["overrides"] = ov;
  return j;
}

Json to_json(const Scenario& s, const DeltaTable& deltas) {
  Json j = Json::array();
  for (std::size_t i = 0; i < deltas.cells.size(); ++i) {
    for (std::size_t cell = 0; cell < deltas.cells[i].size(); ++cell) {
      const DeltaCell& d = deltas.at(i, cell);
      Json row;
      row["type"] = i + 1;
      row["x"] = condition_label(s, i, cell);
      row["status"] = to_string(d.status);
      row["value"] = d.defined() ? Json(d.value) : Json(nullptr);
      j.push_back(row);
    }
  }
  return j;
}

Json to_json(const Scenario& s, const EquilibriumReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["epsilon"] = r.epsilon;
  j["welfare_loss"] = r.welfare_loss;
  j["error_probability"] = r.error_probability;
  if (r.witness) {
    Json w = CellRefJson(s, r.witness->where);
    w["action"] = r.witness->action;
    w["delta"] = r.witness->delta;
    w["shortfall"] = r.witness->shortfall;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["undefined_cells"] = Json::array();
  for (const CellRef& c : r.undefined_cells) j["undefined_cells"].push_back(CellRefJson(s, c));
  j["deltas"] = to_json(s, r.deltas);
  j["ladder"] = Json::array();
  for (const LadderRung& rung : r.ladder) {
    j["ladder"].push_back(
        {{"epsilon", rung.epsilon}, {"max_violation", rung.max_violation}, {"passed", rung.passed}});
  }
  return j;
}

Json to_json(const DominanceRelation& rel) {
  Json j;
  j["n"] = rel.n;
  j["matrix"] = Json::array();
  for (const auto& row : rel.matrix) {
    Json r = Json::array();
    for (bool b : row) r.push_back(b ? 1 : 0);
    j["matrix"].push_back(r);
  }
  const bool complete = is_complete(rel);
  const bool quasi = is_quasitransitive(rel);
  j["complete"] = complete;
  j["quasitransitive"] = quasi;
  if (complete && quasi) {
    Json layers = Json::array();
    for (const auto& layer : layer_partition(rel).layers) {
      Json l = Json::array();
      for (std::size_t i : layer) l.push_back(i + 1);
      layers.push_back(l);
    }
    j["layers"] = layers;
  } else {
    j["layers"] = nullptr;
  }
  return j;
}

Json to_json(const Scenario& s, const WitnessInstance& w) {
  Json j;
  j["name"] = w.name;
  j["scenario"] = to_json(s.spec());
  j["profile"] = to_json(w.profile);
  j["schedule"] = to_json(s, w.schedule);
  j["claimed_loss"] = w.claimed_loss;
  j["claimed_error_probability"] = w.claimed_error_probability;
  j["deltas"] = Json::array();
  for (const DeltaAnnotation& d : w.deltas) {
    j["deltas"].push_back({{"type", d.type + 1},
                           {"x", condition_label(s, d.type, s.condition_space(d.type).index(d.x_condition))},
                           {"value", d.value}});
  }
  return j;
}

Json to_json(const SearchTraceRow& row) {
  Json j;
  j["restart"] = row.restart;
  j["evaluations"] = row.evaluations;
  j["objective"] = row.objective;
  j["welfare_loss"] = row.welfare_loss;
  j["error_probability"] = row.error_probability;
  j["gamma"] = row.gamma;
  j["c"] = row.c;
  return j;
}

std::string condition_label(const Scenario& s, std::size_t type, std::size_t cell) {
  const VariableSpace& cs = s.condition_space(type);
  if (cs.size() == 0) return "-";
  std::string out;
  for (std::size_t v = 0; v < cs.size(); ++v) {
    if (v > 0) out += ',';
    out += cs.variables()[v].name + "=" + std::to_string(cs.value(cell, v));
  }
  return out;
}

const char* to_string(DeltaStatus s) {
  switch (s) {
    case DeltaStatus::kDefined: return "defined";
    case DeltaStatus::kUndefined: return "undefined";
    case DeltaStatus::kUnreachable: return "unreachable";
  }
  return "?";
}

std::string format_decimal(double v) { return fmt::format("{:.17g}", v); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw std::invalid_argument("csv row has " + std::to_string(row.size()) + " fields, expected " +
                                std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  auto quote = [](const std::string& f) {
    if (f.find_first_of(",\"\n") == std::string::npos) return f;
    std::string q = "\"";
    for (char ch : f) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + quote(r[i]);
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

}  // namespace bci
