// bci: command-line front end.
//
// Exit codes: 0 success, 1 invariant violation (invalid scenario, profile or
// parameters; a bound check that fails), 2 solver non-convergence, 3 parse
// error (command line, document or environment).
//
// Environment: BCI_TIE_TOL overrides the indifference tolerance and
// BCI_LADDER_FLOOR the smallest tremble size of limit checks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bci/builtins.h"
#include "bci/io.h"

namespace {

using namespace bci;

enum ExitCode { kOk = 0, kInvariant = 1, kNoConvergence = 2, kParse = 3 };

// A command that finished but must report a nonzero status.
struct Exit {
  int code;
  std::string message;
};

struct Settings {
  double tie_tol = kDefaultTieTol;
  Ladder ladder;
  std::string format = "text";
  std::uint64_t seed = 1;

  LimitOptions limit() const {
    LimitOptions o;
    o.tie_tol = tie_tol;
    return o;
  }
};

double EnvDouble(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError(std::string(name) + ": not a number: " + v);
  }
}

// Every parameter name used by some builtin.
std::vector<std::string> AllParamNames() {
  std::vector<std::string> out;
  for (const auto& info : builtin_catalog()) {
    for (const auto& [k, v] : info.defaults) {
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
  }
  return out;
}

// Scenario source shared by most subcommands: a document file or a builtin.
struct InputFlags {
  std::string file;
  std::string builtin;
  std::map<std::string, double> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* cmd, bool positional_builtin = false) {
    if (positional_builtin) {
      cmd->add_option("name", builtin, "Builtin scenario name")->required();
    } else {
      cmd->add_option("document", file, "Scenario document (JSON)");
      cmd->add_option("--builtin", builtin, "Builtin scenario name instead of a document");
    }
    for (const auto& name : AllParamNames()) {
      options[name] = cmd->add_option("--" + name, values[name], "Builtin parameter " + name);
    }
  }

  BuiltinParams params() const {
    BuiltinParams p;
    for (const auto& [name, opt] : options) {
      if (opt->count() > 0) p[name] = values.at(name);
    }
    return p;
  }
};

struct Loaded {
  std::string name;
  Scenario scenario;
  std::optional<StrategyProfile> profile;
  TrembleSchedule schedule;
};

Loaded Load(const InputFlags& in) {
  if (in.file.empty() == in.builtin.empty()) {
    throw ParseError("give exactly one of a scenario document or --builtin");
  }
  if (!in.builtin.empty()) {
    Builtin b = make_builtin(in.builtin, in.params());
    return {b.name, std::move(b.scenario), std::move(b.profile), std::move(b.schedule)};
  }
  if (!in.params().empty()) throw ParseError("builtin parameters need --builtin");
  ScenarioDocument doc = read_scenario_file(in.file);
  Scenario s(doc.spec);
  std::optional<StrategyProfile> sigma;
  if (doc.profile) sigma = profile_from_json(s, *doc.profile);
  TrembleSchedule sched =
      doc.schedule ? schedule_from_json(s, *doc.schedule) : TrembleSchedule::Uniform(s, 1e-3);
  return {in.file, std::move(s), std::move(sigma), std::move(sched)};
}

const StrategyProfile& RequireProfile(const Loaded& l) {
  if (!l.profile) throw std::invalid_argument(l.name + ": no strategy profile (add \"profile\")");
  return *l.profile;
}

// ---------------------------------------------------------------------------
// Rendering

std::string Num(double v) { return format_decimal(v); }

std::string Short(double v) { return fmt::format("{:.6g}", v); }

void PrintDeltaText(const Scenario& s, const DeltaTable& dt) {
  fmt::print("{:<6} {:<18} {:<12} {:>12} {:>12}\n", "type", "x_C", "status", "delta", "gain");
  for (std::size_t i = 0; i < dt.cells.size(); ++i) {
    for (std::size_t cell = 0; cell < dt.cells[i].size(); ++cell) {
      const DeltaCell& d = dt.at(i, cell);
      fmt::print("{:<6} {:<18} {:<12} {:>12} {:>12}\n", i + 1, condition_label(s, i, cell),
                 to_string(d.status), d.defined() ? Short(d.value) : "-",
                 d.defined() ? Short(perceived_gain(s, d.value)) : "-");
    }
  }
}

CsvTable DeltaCsv(const Scenario& s, const DeltaTable& dt) {
  CsvTable t({"type", "x", "status", "delta"});
  for (std::size_t i = 0; i < dt.cells.size(); ++i) {
    for (std::size_t cell = 0; cell < dt.cells[i].size(); ++cell) {
      const DeltaCell& d = dt.at(i, cell);
      t.add_row({std::to_string(i + 1), condition_label(s, i, cell), to_string(d.status),
                 d.defined() ? Num(d.value) : ""});
    }
  }
  return t;
}

void PrintProfileText(const Scenario& s, const StrategyProfile& sigma) {
  fmt::print("{:<6} {:<18} {:>12} {:>12}\n", "type", "x_C", "P(a=1|t=0)", "P(a=1|t=1)");
  for (std::size_t i = 0; i < sigma.types.size(); ++i) {
    for (std::size_t cell = 0; cell < s.num_condition_cells(i); ++cell) {
      fmt::print("{:<6} {:<18} {:>12} {:>12}\n", i + 1, condition_label(s, i, cell),
                 Short(sigma.types[i].play[0][cell]), Short(sigma.types[i].play[1][cell]));
    }
  }
}

void PrintReportText(const Scenario& s, const EquilibriumReport& r) {
  fmt::print("verdict            {}\n", to_string(r.verdict));
  if (r.verdict == Verdict::kEpsilonEquilibrium) fmt::print("epsilon            {}\n", Short(r.epsilon));
  fmt::print("welfare loss       {}\n", Short(r.welfare_loss));
  fmt::print("error probability  {}\n", Short(r.error_probability));
  if (r.witness) {
    const Violation& w = *r.witness;
    fmt::print("witness            type {} t={} {} plays a={} with delta {} (short by {})\n",
               w.where.type + 1, w.where.t, condition_label(s, w.where.type, w.where.cell),
               w.action, Short(w.delta), Short(w.shortfall));
  }
  for (const CellRef& c : r.undefined_cells) {
    fmt::print("undefined          type {} t={} {}\n", c.type + 1, c.t,
               condition_label(s, c.type, c.cell));
  }
  if (!r.ladder.empty()) {
    fmt::print("ladder             {} rungs, {} passed\n", r.ladder.size(),
               std::count_if(r.ladder.begin(), r.ladder.end(),
                             [](const LadderRung& g) { return g.passed; }));
  }
  PrintDeltaText(s, r.deltas);
}

std::vector<std::string> EquilibriumHeader(const Scenario& s) {
  std::vector<std::string> h{"equilibrium", "verdict", "welfare_loss", "error_probability"};
  for (std::size_t i = 0; i < s.num_types(); ++i) {
    for (int t = 0; t < 2; ++t) {
      for (std::size_t cell = 0; cell < s.num_condition_cells(i); ++cell) {
        h.push_back(fmt::format("sigma_{}(t={};{})", i + 1, t, condition_label(s, i, cell)));
      }
    }
  }
  return h;
}

std::vector<std::string> EquilibriumRow(std::size_t index, const StrategyProfile& sigma,
                                        const EquilibriumReport& r) {
  std::vector<std::string> row{std::to_string(index), to_string(r.verdict), Num(r.welfare_loss),
                               Num(r.error_probability)};
  for (const auto& t : sigma.types) {
    for (int a = 0; a < 2; ++a) {
      for (double p : t.play[a]) row.push_back(Num(p));
    }
  }
  return row;
}

void EmitEquilibria(const Settings& st, const Loaded& l,
                    const std::vector<std::pair<StrategyProfile, EquilibriumReport>>& eqs,
                    bool single = false) {
  const Scenario& s = l.scenario;
  if (st.format == "json") {
    Json j;
    j["scenario"] = l.name;
    j["equilibria"] = Json::array();
    for (const auto& [sigma, r] : eqs) {
      j["equilibria"].push_back({{"profile", to_json(sigma)}, {"report", to_json(s, r)}});
    }
    std::cout << j.dump(2) << '\n';
  } else if (st.format == "csv") {
    CsvTable t(EquilibriumHeader(s));
    for (std::size_t k = 0; k < eqs.size(); ++k) t.add_row(EquilibriumRow(k + 1, eqs[k].first, eqs[k].second));
    std::cout << t.str();
  } else {
    if (!single) fmt::print("{}: {} equilibria\n", l.name, eqs.size());
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      if (single) {
        fmt::print("{}\n", l.name);
      } else {
        fmt::print("\n[{}]\n", k + 1);
      }
      PrintProfileText(s, eqs[k].first);
      PrintReportText(s, eqs[k].second);
    }
  }
}

void EmitReport(const Settings& st, const Loaded& l, const StrategyProfile& sigma,
                const EquilibriumReport& r) {
  EmitEquilibria(st, l, {{sigma, r}}, true);
}

InnerSolveOptions SolveOptions(const Settings& st, const Loaded& l, int inits) {
  InnerSolveOptions o;
  o.inits = inits;
  o.seed = st.seed;
  o.ladder = st.ladder;
  o.limit = st.limit();
  o.schedule = l.schedule;
  return o;
}

std::vector<std::pair<StrategyProfile, EquilibriumReport>> Solve(const Settings& st,
                                                                 const Loaded& l, int inits) {
  std::vector<std::pair<StrategyProfile, EquilibriumReport>> out;
  for (auto& e : solve_equilibria(l.scenario, SolveOptions(st, l, inits))) {
    out.emplace_back(std::move(e.profile), std::move(e.report));
  }
  if (out.empty()) throw Exit{kNoConvergence, l.name + ": no equilibrium certified"};
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

// "a:b:step" or a single value.
std::vector<double> ParseRange(const std::string& name, const std::string& text) {
  static const std::regex range(R"(^\s*([^:]+):([^:]+):([^:]+)\s*$)");
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return d;
    } catch (const std::exception&) {
      throw ParseError("--" + name + ": not a number: '" + s + "'");
    }
  };
  std::smatch m;
  if (!std::regex_match(text, m, range)) return {num(text)};
  const double lo = num(m[1]), hi = num(m[2]), step = num(m[3]);
  if (!(step > 0.0) || hi < lo) throw ParseError("--" + name + ": need lo <= hi and step > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  // Snap to a 1e-12 grid so 0.5 + 7 * 0.05 prints as 0.85.
  for (long k = 0; k <= n; ++k) out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
  return out;
}

struct SweepPoint {
  BuiltinParams params;
  std::vector<std::vector<std::string>> rows;
};

int RunSweep(const Settings& st, const std::string& name,
             const std::map<std::string, std::string>& ranges, int inits, unsigned threads) {
  const auto& catalog = builtin_catalog();
  const auto info = std::find_if(catalog.begin(), catalog.end(),
                                 [&](const BuiltinInfo& b) { return b.name == name; });
  if (info == catalog.end()) throw std::invalid_argument("unknown builtin '" + name + "'");

  // Cartesian grid in catalog parameter order, last parameter fastest.
  std::vector<std::string> names;
  std::vector<std::vector<double>> axes;
  for (const auto& [k, v] : info->defaults) {
    names.push_back(k);
    const auto it = ranges.find(k);
    axes.push_back(it == ranges.end() ? std::vector<double>{v} : ParseRange(k, it->second));
  }
  for (const auto& [k, v] : ranges) {
    if (std::find(names.begin(), names.end(), k) == names.end()) {
      throw std::invalid_argument("builtin '" + name + "' has no parameter '" + k + "'");
    }
  }
  std::vector<SweepPoint> points(1);
  for (std::size_t a = 0; a < axes.size(); ++a) {
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (double v : axes[a]) {
        SweepPoint q = p;
        q.params[names[a]] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }

  // Delta columns come from the default instance's shape.
  const Builtin shape = make_builtin(name);
  std::vector<std::string> header = names;
  for (const char* h : {"equilibrium", "verdict", "welfare_loss", "error_probability"}) header.push_back(h);
  for (std::size_t i = 0; i < shape.scenario.num_types(); ++i) {
    for (std::size_t cell = 0; cell < shape.scenario.num_condition_cells(i); ++cell) {
      header.push_back(fmt::format("delta_{}({})", i + 1, condition_label(shape.scenario, i, cell)));
    }
  }

  auto evaluate = [&](SweepPoint& pt) {
    std::vector<std::string> prefix;
    for (const auto& n : names) prefix.push_back(fmt::format("{}", pt.params.at(n)));
    auto row = [&](std::size_t k, const std::string& verdict, const EquilibriumReport* r) {
      std::vector<std::string> out = prefix;
      out.push_back(std::to_string(k));
      out.push_back(verdict);
      out.push_back(r ? Num(r->welfare_loss) : "");
      out.push_back(r ? Num(r->error_probability) : "");
      for (const auto& per_type : r ? r->deltas.cells : std::vector<std::vector<DeltaCell>>{}) {
        for (const DeltaCell& d : per_type) out.push_back(d.defined() ? Num(d.value) : "");
      }
      out.resize(header.size());
      pt.rows.push_back(std::move(out));
    };
    try {
      const Builtin b = make_builtin(name, pt.params);
      const Loaded l{b.name, b.scenario, b.profile, b.schedule};
      if (l.profile) {
        const auto r = verify_profile(l.scenario, *l.profile, l.schedule, st.ladder, st.limit());
        row(1, to_string(r.verdict), &r);
      } else {
        const auto eqs = solve_equilibria(l.scenario, SolveOptions(st, l, inits));
        if (eqs.empty()) row(0, "no_equilibrium", nullptr);
        for (std::size_t k = 0; k < eqs.size(); ++k) row(k + 1, to_string(eqs[k].report.verdict), &eqs[k].report);
      }
    } catch (const std::invalid_argument& e) {
      // Infeasible points stay in the table so the grid is rectangular.
      row(0, "infeasible", nullptr);
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                                            static_cast<unsigned>(points.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < points.size(); k = next++) evaluate(points[k]);
    });
  }
  for (auto& t : pool) t.join();

  CsvTable table(header);
  for (auto& pt : points) {
    for (auto& r : pt.rows) table.add_row(std::move(r));
  }
  if (st.format == "json") {
    Json j = Json::array();
    for (const auto& pt : points) {
      for (const auto& r : pt.rows) {
        Json o;
        for (std::size_t c = 0; c < header.size(); ++c) o[header[c]] = r[c];
        j.push_back(o);
      }
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << table.str();
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// order --types "[{C:[1],D:[1]},{C:[2],D:[2]}]"

std::vector<DataTypeSpec> ParseTypeList(std::string text) {
  // Accept bare keys.
  text = std::regex_replace(text, std::regex(R"(([{,]\s*)([CD])(\s*:))"), "$1\"$2\"$3");
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("--types: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("--types: expected a list");
  std::vector<DataTypeSpec> out;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("C") || !t.contains("D")) {
      throw ParseError("--types: every entry needs C and D");
    }
    DataTypeSpec d;
    try {
      for (int v : t["C"].get<std::vector<int>>()) d.conditions.push_back(v - 1);
      for (int v : t["D"].get<std::vector<int>>()) d.data.push_back(v - 1);
    } catch (const Json::exception& e) {
      throw ParseError(std::string("--types: ") + e.what());
    }
    std::sort(d.conditions.begin(), d.conditions.end());
    std::sort(d.data.begin(), d.data.end());
    out.push_back(std::move(d));
  }
  return out;
}

void EmitRelation(const Settings& st, const DominanceRelation& rel) {
  const Json j = to_json(rel);
  if (st.format == "json") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  if (st.format == "csv") {
    std::vector<std::string> h{"type"};
    for (std::size_t k = 0; k < rel.n; ++k) h.push_back(std::to_string(k + 1));
    CsvTable t(h);
    for (std::size_t i = 0; i < rel.n; ++i) {
      std::vector<std::string> row{std::to_string(i + 1)};
      for (std::size_t k = 0; k < rel.n; ++k) row.push_back(rel.dominates(i, k) ? "1" : "0");
      t.add_row(row);
    }
    std::cout << t.str();
    return;
  }
  fmt::print("iPj matrix (row i, column j):\n");
  for (std::size_t i = 0; i < rel.n; ++i) {
    std::string row;
    for (std::size_t k = 0; k < rel.n; ++k) row += rel.dominates(i, k) ? " 1" : " 0";
    fmt::print("  {}:{}\n", i + 1, row);
  }
  const bool complete = j["complete"].get<bool>();
  fmt::print("{}\n", complete ? "complete" : "incomplete");
  fmt::print("{}\n", j["quasitransitive"].get<bool>() ? "quasitransitive" : "not quasitransitive");
  if (!j["layers"].is_null()) fmt::print("layers: {}\n", j["layers"].dump());
}

// ---------------------------------------------------------------------------

StructureConstraint ParseStructure(const std::string& s) {
  for (auto c : {StructureConstraint::kAny, StructureConstraint::kCompleteQuasitransitive,
                 StructureConstraint::kIncomplete, StructureConstraint::kChain}) {
    if (s == to_string(c)) return c;
  }
  throw ParseError("--structure: unknown value '" + s + "'");
}

int Run(int argc, char** argv) {
  CLI::App app{"Equilibrium analysis for decision makers who draw causal conclusions from "
               "long-run data with possibly bad controls."};
  app.require_subcommand(1);
  app.fallthrough();
  Settings st;
  app.add_option("--format", st.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", st.seed, "Seed for randomized solvers")->capture_default_str();

  // delta
  InputFlags delta_in;
  double delta_eps = 0.0;
  auto* delta_cmd = app.add_subcommand("delta", "Perceived causal effects at the document's profile");
  delta_in.attach(delta_cmd);
  delta_cmd->add_option("--epsilon", delta_eps, "Apply the tremble schedule at this size first");

  // verify
  InputFlags verify_in;
  std::optional<double> verify_eps;
  auto* verify_cmd = app.add_subcommand("verify", "Check the profile against the equilibrium conditions");
  verify_in.attach(verify_cmd);
  verify_cmd->add_option("--epsilon", verify_eps, "Plain epsilon-equilibrium check at this epsilon");

  // solve
  InputFlags solve_in;
  int solve_inits = 20;
  auto* solve_cmd = app.add_subcommand("solve", "Find equilibria (dynamics plus small enumeration)");
  solve_in.attach(solve_cmd);
  solve_cmd->add_option("--inits", solve_inits, "Starting profiles for best-response dynamics")
      ->capture_default_str();

  // enumerate
  InputFlags enum_in;
  std::uint64_t enum_max = std::uint64_t{1} << 20;
  auto* enum_cmd = app.add_subcommand("enumerate", "All pure-profile equilibria");
  enum_in.attach(enum_cmd);
  enum_cmd->add_option("--max-profiles", enum_max, "Refuse larger instances")->capture_default_str();

  // order
  InputFlags order_in;
  std::string order_types;
  auto* order_cmd = app.add_subcommand("order", "Domination relation between data types");
  order_in.attach(order_cmd);
  order_cmd->add_option("--types", order_types, "Type list, e.g. \"[{C:[1],D:[1]},{C:[2],D:[2]}]\"");

  // scenario
  auto* scenario_cmd = app.add_subcommand("scenario", "Builtin scenarios");
  scenario_cmd->require_subcommand(1)->fallthrough();
  auto* list_cmd = scenario_cmd->add_subcommand("list", "List builtins and their defaults");
  InputFlags show_in, run_in;
  auto* show_cmd = scenario_cmd->add_subcommand("show", "Print a builtin as a scenario document");
  show_in.attach(show_cmd, true);
  int run_inits = 20;
  auto* run_cmd = scenario_cmd->add_subcommand(
      "run", "Verify the builtin's profile, or solve when it has none");
  run_in.attach(run_cmd, true);
  run_cmd->add_option("--inits", run_inits, "Starting profiles when solving")->capture_default_str();

  // worstcase
  auto* wc_cmd = app.add_subcommand("worstcase", "Explicit constructions and max-loss search");
  wc_cmd->require_subcommand(1)->fallthrough();
  InputFlags witness_in;
  auto* witness_cmd = wc_cmd->add_subcommand("witness", "Verify a construction (prop2_incomplete, "
                                                        "prop2_cycle, prop4, prop5)");
  witness_in.attach(witness_cmd, true);
  SearchConfig cfg;
  std::string structure = "any", objective = "welfare_loss", bound = "none";
  std::optional<double> cfg_gamma, cfg_c;
  auto* search_cmd = wc_cmd->add_subcommand("search", "Random-restart search for high-loss equilibria");
  search_cmd->add_option("--num-x", cfg.num_x, "Binary x variables")->capture_default_str();
  search_cmd->add_option("--max-types", cfg.max_types, "Data types per instance")->capture_default_str();
  search_cmd->add_option("--gamma", cfg_gamma, "Fix p(t=1)");
  search_cmd->add_option("--c", cfg_c, "Fix the taste cost");
  search_cmd->add_flag("--y-independent-of-x", cfg.y_independent_of_x, "Outcome depends on t only");
  search_cmd->add_flag("!--non-simple", cfg.simple_types, "Allow C strictly inside D");
  search_cmd->add_option("--structure", structure, "any|complete_quasitransitive|incomplete|chain")
      ->capture_default_str();
  search_cmd->add_option("--objective", objective, "welfare_loss|error_probability")
      ->check(CLI::IsMember({"welfare_loss", "error_probability"}))
      ->capture_default_str();
  search_cmd->add_option("--restarts", cfg.restarts)->capture_default_str();
  search_cmd->add_option("--evaluations", cfg.evaluations, "Objective evaluations per restart")
      ->capture_default_str();
  search_cmd->add_option("--inits", cfg.inner.inits, "Inner dynamics starts")->capture_default_str();
  search_cmd->add_option("--threads", cfg.threads, "0 = hardware concurrency")->capture_default_str();
  search_cmd->add_option("--bound", bound, "Compare with a proven bound: none|zero|gamma_one_minus_gamma")
      ->check(CLI::IsMember({"none", "zero", "gamma_one_minus_gamma"}))
      ->capture_default_str();

  // sweep
  std::string sweep_name;
  std::map<std::string, std::string> sweep_ranges;
  std::map<std::string, CLI::Option*> sweep_opts;
  int sweep_inits = 20;
  unsigned sweep_threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Long-format CSV over a parameter grid of a builtin");
  sweep_cmd->add_option("name", sweep_name, "Builtin scenario name")->required();
  for (const auto& name : AllParamNames()) {
    sweep_opts[name] = sweep_cmd->add_option("--" + name, sweep_ranges[name], "lo:hi:step or a value");
  }
  sweep_cmd->add_option("--inits", sweep_inits)->capture_default_str();
  sweep_cmd->add_option("--threads", sweep_threads, "0 = hardware concurrency")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  st.tie_tol = EnvDouble("BCI_TIE_TOL", st.tie_tol);
  st.ladder.floor = EnvDouble("BCI_LADDER_FLOOR", st.ladder.floor);
  if (!(st.tie_tol >= 0.0)) throw ParseError("BCI_TIE_TOL must be nonnegative");
  st.ladder.rungs();  // validates the floor

  if (delta_cmd->parsed()) {
    const Loaded l = Load(delta_in);
    StrategyProfile sigma = RequireProfile(l);
    if (delta_eps > 0.0) sigma = apply_trembles(sigma, l.schedule.with_epsilon(delta_eps));
    const DeltaTable dt = delta_table(l.scenario, sigma);
    if (st.format == "json") {
      std::cout << to_json(l.scenario, dt).dump(2) << '\n';
    } else if (st.format == "csv") {
      std::cout << DeltaCsv(l.scenario, dt).str();
    } else {
      PrintDeltaText(l.scenario, dt);
    }
    return kOk;
  }
  if (verify_cmd->parsed()) {
    const Loaded l = Load(verify_in);
    const StrategyProfile& sigma = RequireProfile(l);
    const EquilibriumReport r =
        verify_eps ? verify_eps_equilibrium(l.scenario, sigma, *verify_eps, {st.tie_tol})
                   : verify_profile(l.scenario, sigma, l.schedule, st.ladder, st.limit());
    EmitReport(st, l, sigma, r);
    return kOk;
  }
  if (solve_cmd->parsed()) {
    const Loaded l = Load(solve_in);
    EmitEquilibria(st, l, Solve(st, l, solve_inits));
    return kOk;
  }
  if (enum_cmd->parsed()) {
    const Loaded l = Load(enum_in);
    EnumerateOptions o;
    o.max_profiles = enum_max;
    o.ladder = st.ladder;
    o.limit = st.limit();
    EmitEquilibria(st, l, enumerate_pure_equilibria(l.scenario, l.schedule, o));
    return kOk;
  }
  if (order_cmd->parsed()) {
    if (!order_types.empty()) {
      EmitRelation(st, build_relation(ParseTypeList(order_types)));
    } else {
      EmitRelation(st, build_relation(Load(order_in).scenario.types()));
    }
    return kOk;
  }
  if (list_cmd->parsed()) {
    for (const auto& info : builtin_catalog()) {
      std::string defaults;
      for (const auto& [k, v] : info.defaults) defaults += fmt::format(" --{} {}", k, Short(v));
      fmt::print("{:<24} {}\n{:<24}{}\n", info.name, info.summary, "", defaults);
    }
    return kOk;
  }
  if (show_cmd->parsed()) {
    const Builtin b = make_builtin(show_in.builtin, show_in.params());
    Json j = to_json(b.scenario.spec());
    if (b.profile) j["profile"] = to_json(*b.profile);
    j["schedule"] = to_json(b.scenario, b.schedule);
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  if (run_cmd->parsed()) {
    const Loaded l = Load(run_in);
    if (l.profile) {
      EmitReport(st, l, *l.profile,
                 verify_profile(l.scenario, *l.profile, l.schedule, st.ladder, st.limit()));
    } else {
      EmitEquilibria(st, l, Solve(st, l, run_inits));
    }
    return kOk;
  }
  if (witness_cmd->parsed()) {
    const auto w = make_witness(witness_in.builtin, witness_in.params());
    if (!w) throw std::invalid_argument(witness_in.builtin + " is not a witness construction");
    const EquilibriumReport r = verify_witness(*w, st.ladder, st.limit());
    if (st.format == "json") {
      Json j = to_json(w->scenario, *w);
      j["report"] = to_json(w->scenario, r);
      std::cout << j.dump(2) << '\n';
    } else {
      const Loaded l{w->name, w->scenario, w->profile, w->schedule};
      EmitReport(st, l, w->profile, r);
      if (st.format == "text") {
        fmt::print("claimed loss       {}\nclaimed error      {}\n", Short(w->claimed_loss),
                   Short(w->claimed_error_probability));
      }
    }
    return r.is_equilibrium() ? kOk : kInvariant;
  }
  if (search_cmd->parsed()) {
    cfg.gamma = cfg_gamma;
    cfg.c = cfg_c;
    cfg.seed = st.seed;
    cfg.structure = ParseStructure(structure);
    cfg.objective = objective == "welfare_loss" ? Objective::kWelfareLoss : Objective::kErrorProbability;
    cfg.inner.ladder = st.ladder;
    cfg.inner.limit = st.limit();
    if (const auto v = validate(cfg); !v.empty()) {
      for (const auto& m : v) std::cerr << "error: " << m << '\n';
      return kInvariant;
    }
    std::optional<BoundReport> br;
    SearchResult res;
    if (bound == "none") {
      res = search_max_loss(cfg);
    } else {
      br = check_bound(cfg, bound == "zero" ? std::function<double(double)>([](double) { return 0.0; })
                                            : [](double g) { return g * (1 - g); });
      res = br->search;
    }
    if (st.format == "json") {
      Json j;
      j["objective"] = to_string(cfg.objective);
      j["structure"] = to_string(cfg.structure);
      j["seed"] = cfg.seed;
      j["best_objective"] = res.best_objective;
      j["best"] = res.best ? to_json(res.best->scenario, *res.best) : Json(nullptr);
      if (br) j["bound"] = {{"bound", br->bound}, {"best", br->best}, {"holds", br->holds}};
      j["trace"] = Json::array();
      for (const auto& row : res.trace) j["trace"].push_back(to_json(row));
      std::cout << j.dump(2) << '\n';
    } else if (st.format == "csv") {
      CsvTable t({"restart", "evaluations", "objective", "welfare_loss", "error_probability", "gamma", "c"});
      for (const auto& r : res.trace) {
        t.add_row({std::to_string(r.restart), std::to_string(r.evaluations), Num(r.objective),
                   Num(r.welfare_loss), Num(r.error_probability), Num(r.gamma), Num(r.c)});
      }
      std::cout << t.str();
    } else {
      fmt::print("best {} {} over {} restarts\n", to_string(cfg.objective), Short(res.best_objective),
                 cfg.restarts);
      if (res.best) {
        const Loaded l{"best", res.best->scenario, res.best->profile, res.best->schedule};
        PrintProfileText(l.scenario, res.best->profile);
        std::cout << to_json(res.best->scenario.spec()).dump() << '\n';
      }
      if (br) fmt::print("bound {} {}\n", Short(br->bound), br->holds ? "holds" : "VIOLATED");
    }
    return br && !br->holds ? kInvariant : kOk;
  }
  if (sweep_cmd->parsed()) {
    std::map<std::string, std::string> given;
    for (const auto& [name, opt] : sweep_opts) {
      if (opt->count() > 0) given[name] = sweep_ranges[name];
    }
    if (st.format == "text") st.format = "csv";
    return RunSweep(st, sweep_name, given, sweep_inits, sweep_threads);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const Exit& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const bci::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const bci::ValidationError& e) {
    for (const auto& v : e.violations()) std::cerr << "invalid: " << v << '\n';
    return kInvariant;
  } catch (const bci::InstanceTooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  }
}
