#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitflow/analysis2link.hpp"
#include "splitflow/bounds.hpp"
#include "splitflow/equilibria.hpp"
#include "splitflow/io.hpp"
#include "splitflow/stackelberg.hpp"
#include "splitflow/waterfill.hpp"

namespace splitflow::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        emit(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        emit(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      out += real(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

std::string scalar_text(const Json& j) {
  if (j.is_number_float()) return real(j.get<double>());
  if (j.is_string()) return j.get<std::string>();
  std::string s;
  emit(j, s);
  return s;
}

void table(const Json& j, const std::string& indent, std::ostringstream& os) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Json& v = it.value();
    if (v.is_object()) {
      os << indent << it.key() << ":\n";
      table(v, indent + "  ", os);
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      os << indent << it.key() << ":\n";
      for (const auto& row : v) {
        std::string line;
        for (auto f = row.begin(); f != row.end(); ++f) line += (line.empty() ? "" : "  ") + f.key() + "=" + scalar_text(f.value());
        os << indent << "  - " << line << "\n";
      }
    } else if (v.is_array() && !v.empty() && v.front().is_array()) {
      os << indent << it.key() << ":\n";
      for (const auto& row : v) os << indent << "  " << scalar_text(row) << "\n";
    } else {
      os << indent << it.key() << ": " << scalar_text(v) << "\n";
    }
  }
}

std::string render(const Json& report, const std::string& format) {
  if (format == "table") {
    std::ostringstream os;
    table(report, "", os);
    return os.str();
  }
  std::string s;
  emit(report, s);
  return s + "\n";
}

struct Loaded {
  Instance instance;
  Json echo;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.instance = validate(load_instance(path));
  l.echo = Json::parse(format_instance(l.instance));
  return l;
}

Json real_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json flows(const Instance& inst, const FlowProfile& profile) {
  Json a = Json::array();
  for (const auto& row : to_raw_order(inst, profile).flow) a.push_back(real_array(row));
  return a;
}

std::vector<double> raw_row(const Instance& inst, const std::vector<double>& row) {
  return to_raw_order(inst, FlowProfile{{row}}).flow.front();
}

Json base(const std::string& command, const Loaded& l, const FlowProfile& profile, const std::vector<double>& costs,
          double social, double residual) {
  Json r;
  r["command"] = command;
  r["instance"] = l.echo;
  r["flows"] = flows(l.instance, profile);
  r["player_costs"] = real_array(costs);
  r["social_cost"] = social;
  r["residual"] = residual;
  return r;
}

Json solve_report(const std::string& command, const Loaded& l, const SolveReport& s) {
  Json r = base(command, l, s.profile, s.player_costs, s.social_cost, s.residual);
  r["levels"] = real_array(s.levels);
  r["iterations"] = s.iterations;
  r["violations"] = Json::array();
  return r;
}

Json named(const std::vector<NamedValue>& values) {
  Json o = Json::object();
  for (const auto& [k, v] : values) o[k] = v;
  return o;
}

Json bounds_json(const BoundSet& b) {
  Json o;
  o["leader"] = b.leader;
  o["alpha"] = b.alpha;
  o["l_min"] = b.l_min;
  o["c_se"] = b.c_se;
  o["gamma"] = b.gamma;
  o["dlp"] = b.dlp;
  o["low_mass"] = b.low_mass;
  o["high_mass"] = b.high_mass;
  o["p1_bounds"] = named(b.p1_bounds);
  o["p2_bounds"] = named(b.p2_bounds);
  o["price_bounds"] = named(b.price_bounds);
  return o;
}

Json violations_json(const std::vector<Violation>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(Json{{"check", v.check}, {"measured", v.measured}, {"bound", v.bound}});
  return a;
}

const char* method_name(SslMethod m) {
  switch (m) {
    case SslMethod::exact_support:
      return "exact";
    case SslMethod::numeric:
      return "numeric";
    case SslMethod::automatic:
      return "auto";
  }
  return "auto";
}

Json ssl_json(const Instance& inst, const SslReport& s) {
  Json o;
  o["leader"] = s.leader;
  o["method"] = method_name(s.method);
  o["leader_cost"] = s.leader_cost;
  o["follower_cost"] = s.follower_cost;
  o["social_cost"] = s.social_cost;
  o["leader_allocation"] = real_array(raw_row(inst, s.leader_allocation));
  o["follower_response"] = real_array(raw_row(inst, s.follower_response));
  return o;
}

struct Options {
  std::string path;
  std::size_t leader = 0;
  std::string method = "auto";
  std::uint64_t seed = 42;
  std::size_t n = 10000;
  std::string format = "json";
  bool monomial = false;
  std::size_t max_iters = IterationConfig{}.max_iters;
};

IterationConfig iteration_config(const Options& o) {
  IterationConfig c;
  c.max_iters = o.max_iters;
  return c;
}

SslConfig ssl_config(const Options& o) {
  SslConfig c;
  if (o.method == "exact") c.method = SslMethod::exact_support;
  else if (o.method == "numeric") c.method = SslMethod::numeric;
  return c;
}

Json price_json(const std::string& command, const Loaded& l, const PriceReport& pr) {
  const SslReport& worst = pr.ssl[pr.worst_leader];
  Json r = base(command, l, worst.inner.profile, worst.inner.player_costs, worst.social_cost, worst.inner.residual);
  r["price_vs_nash"] = pr.price_vs_nash;
  r["price_vs_optimal"] = pr.price_vs_optimal;
  r["c_se"] = pr.c_se;
  r["c_ne"] = pr.c_ne;
  r["worst_leader"] = pr.worst_leader;
  Json ssl = Json::array();
  for (const auto& s : pr.ssl) ssl.push_back(ssl_json(l.instance, s));
  r["ssl"] = ssl;
  if (pr.bounds) r["bounds"] = bounds_json(*pr.bounds);
  r["violations"] = violations_json(verify_bounds(l.instance, pr));
  return r;
}

struct Row {
  std::string name;
  double expected;
  double computed;
  double tol;
  /// "equal", "at_least", or "reported" (not asserted).
  std::string kind;
};

bool row_passes(const Row& r) {
  if (r.kind == "reported") return true;
  if (r.kind == "at_least") return r.computed >= r.expected - r.tol;
  return std::abs(r.computed - r.expected) <= r.tol;
}

Instance two_player(std::vector<LatencyFn> links, PlayerSpec p0, PlayerSpec p1) {
  Instance i;
  i.links = std::move(links);
  i.players = {std::move(p0), std::move(p1)};
  return validate(i);
}

Json reproduce(const Options& o, bool& all_pass) {
  std::vector<Row> rows;
  const Instance lb = two_player({{1, 0}, {0, 1.2}}, {0.6, {}, Behavior::atomic}, {0.4, {}, Behavior::atomic});
  rows.push_back({"lower_bound.price_vs_nash", 93.0 / 88.0, price_report(lb).price_vs_nash, 1e-6, "equal"});

  const TwoLinkParams p{1, 0, 0, 2, 2.0 / 3.0};
  const Instance pi = p.to_instance();
  rows.push_back({"closed_form.ne_cost", 22.0 / 9.0, ne_cost(p), 1e-9, "equal"});
  rows.push_back({"closed_form.ssl_cost", 31.0 / 12.0, ssl_cost(p), 1e-9, "equal"});
  rows.push_back({"closed_form.nash_solve", 22.0 / 9.0, nash_solve(pi).social_cost, 1e-9, "equal"});
  rows.push_back({"closed_form.ssl_solve", 31.0 / 12.0, ssl_solve(pi, 0).social_cost, 1e-9, "equal"});
  rows.push_back({"search.max_price", 93.0 / 88.0, maximize_price().value, 1e-4, "equal"});

  const std::vector<LatencyFn> cp{{1, 30}, {1, 60}, {1, 0}};
  const Instance mixed = two_player(cp, {630, {0, 2}, Behavior::atomic}, {630, {1, 2}, Behavior::wardrop});
  const Instance atomic = two_player(cp, {630, {0, 2}, Behavior::atomic}, {630, {1, 2}, Behavior::atomic});
  rows.push_back({"asymmetric.optimum", 566550, global_optimum(mixed).social_cost, 0.5, "equal"});
  rows.push_back({"asymmetric.wardrop", 567000, wardrop_solve(mixed).social_cost, 0.5, "equal"});
  rows.push_back({"asymmetric.nash_mixed", 572400, nash_solve(mixed).social_cost, 0.5, "equal"});
  rows.push_back({"asymmetric.ssl_wardrop_follower", 583537.5, ssl_solve(mixed, 0).social_cost, 0.5, "equal"});
  rows.push_back({"asymmetric.nash_atomic", 576404, nash_solve(atomic).social_cost, 0.0, "reported"});
  rows.push_back({"asymmetric.ssl_atomic_follower", 580032, ssl_solve(atomic, 0).social_cost, 0.0, "reported"});

  const Instance ex = two_player({{1, 0}, {1, 1}}, {0.5, {}, Behavior::atomic}, {0.5, {}, Behavior::atomic});
  const Instance exw = two_player({{1, 0}, {1, 1}}, {0.5, {}, Behavior::atomic}, {0.5, {}, Behavior::wardrop});
  const SslReport ea = ssl_solve(ex, 0), ew = ssl_solve(exw, 0);
  rows.push_back({"example.atomic.leader_cost", 7.0 / 16.0, ea.leader_cost, 1e-7, "equal"});
  rows.push_back({"example.atomic.follower_cost", 15.0 / 32.0, ea.follower_cost, 1e-7, "equal"});
  rows.push_back({"example.wardrop.leader_cost", 15.0 / 32.0, ew.leader_cost, 1e-7, "equal"});
  rows.push_back({"example.wardrop.follower_cost", 7.0 / 16.0, ew.follower_cost, 1e-7, "equal"});

  const MonomialResult mono = maximize_monomial_price();
  rows.push_back({"monomial.at_stated_point", 1.169, mono.at_center, 0.0, "reported"});
  rows.push_back({"monomial.search_max", 1.169, mono.price_vs_nash, 0.01, "at_least"});

  FuzzConfig fc;
  fc.seed = o.seed;
  fc.n = o.n;
  const FuzzSummary fs = fuzz(fc);
  rows.push_back({"fuzz.violations", 0, static_cast<double>(fs.violations.size()), 0.0, "equal"});
  rows.push_back({"fuzz.max_price_vs_optimal", kRefinedPriceBound, fs.max_price_vs_optimal, 0.0, "reported"});

  Json r;
  r["command"] = "reproduce";
  Json table = Json::array();
  all_pass = true;
  for (const auto& row : rows) {
    const bool pass = row_passes(row);
    all_pass = all_pass && pass;
    table.push_back(Json{{"name", row.name},
                         {"expected", row.expected},
                         {"computed", row.computed},
                         {"tol", row.tol},
                         {"kind", row.kind},
                         {"pass", pass}});
  }
  r["rows"] = table;
  r["fuzz_instances"] = fs.instances;
  r["all_pass"] = all_pass;
  r["violations"] = Json::array();
  return r;
}

Json fuzz_json(const Options& o) {
  FuzzConfig fc;
  fc.seed = o.seed;
  fc.n = o.n;
  const FuzzSummary s = fuzz(fc);
  Json r;
  r["command"] = "fuzz";
  r["seed"] = o.seed;
  r["instances"] = s.instances;
  r["dlp_true"] = s.dlp_true;
  r["price_vs_optimal"] = s.max_price_vs_optimal;
  r["price_vs_nash"] = s.max_price_vs_nash;
  r["argmax_vs_optimal"] = s.argmax_vs_optimal;
  r["argmax_vs_nash"] = s.argmax_vs_nash;
  Json v = Json::array();
  for (const auto& fv : s.violations)
    v.push_back(Json{{"item", fv.item},
                     {"check", fv.violation.check},
                     {"measured", fv.violation.measured},
                     {"bound", fv.violation.bound}});
  r["violations"] = v;
  return r;
}

Json search_json(const Options& o) {
  Json r;
  r["command"] = "search";
  if (o.monomial) {
    const MonomialResult m = maximize_monomial_price();
    r["variant"] = "monomial_d4";
    r["b2"] = m.b2;
    r["r"] = m.r;
    r["price_vs_nash"] = m.price_vs_nash;
    r["price_at_start"] = m.at_center;
    r["evaluated"] = m.evaluated;
  } else {
    const SearchResult s = maximize_price();
    r["variant"] = "affine_two_link";
    r["params"] = Json{{"a1", s.params.a1}, {"a2", s.params.a2}, {"b1", s.params.b1}, {"b2", s.params.b2}, {"r", s.params.r}};
    r["price_vs_nash"] = s.value;
    r["evaluated"] = s.evaluated;
  }
  r["violations"] = Json::array();
  return r;
}

}  // namespace

std::string reemit(const std::string& json_text) {
  std::string s;
  emit(Json::parse(json_text), s);
  return s + "\n";
}

Outcome run(const std::vector<std::string>& args) {
  Outcome outcome;
  Options o;
  CLI::App app{"Leader-follower routing on parallel links", "splitflow"};
  app.require_subcommand(1);
  app.add_option("--format", o.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  std::string verb;
  auto with_instance = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("instance", o.path, "instance JSON file")->required();
    sub->add_option("--format", o.format, "json or table")->check(CLI::IsMember({"json", "table"}));
    sub->add_option("--max-iters", o.max_iters, "iteration cap for the equilibrium solvers")->check(CLI::PositiveNumber);
    sub->callback([&verb, name] { verb = name; });
    return sub;
  };
  with_instance("optimum", "social optimum");
  with_instance("wardrop", "every player as infinitesimal users");
  with_instance("nash", "simultaneous-move equilibrium");
  for (const char* name : {"ssl", "price", "bounds"}) {
    CLI::App* sub = with_instance(name, name == std::string("ssl")     ? "leader-optimal commitment"
                                        : name == std::string("price") ? "price of leadership over both leaders"
                                                                       : "bound set and verification");
    sub->add_option("--method", o.method, "exact, numeric or auto")->check(CLI::IsMember({"exact", "numeric", "auto"}));
    if (name != std::string("price")) sub->add_option("--leader", o.leader, "leader index (0 or 1)");
  }
  CLI::App* search = app.add_subcommand("search", "worst-case two-link search");
  search->add_flag("--monomial", o.monomial, "degree-4 variant with a constant second link");
  search->add_option("--format", o.format)->check(CLI::IsMember({"json", "table"}));
  search->callback([&] { verb = "search"; });
  for (const char* name : {"fuzz", "reproduce"}) {
    CLI::App* sub = app.add_subcommand(name, name == std::string("fuzz") ? "random property suite" : "reference numbers");
    sub->add_option("--seed", o.seed, "corpus seed");
    sub->add_option("--n", o.n, "corpus size");
    sub->add_option("--format", o.format)->check(CLI::IsMember({"json", "table"}));
    sub->callback([&verb, name] { verb = name; });
  }
  if (std::find(args.begin(), args.end(), "reproduce") != args.end()) o.n = 1000;

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    outcome.out = app.help();
    return outcome;
  } catch (const CLI::CallForAllHelp&) {
    outcome.out = app.help("", CLI::AppFormatMode::All);
    return outcome;
  } catch (const CLI::ParseError& e) {
    outcome.exit_code = kExitInput;
    outcome.err = std::string("usage error: ") + e.what() + "\n";
    return outcome;
  }

  try {
    Json report;
    bool passed = true;
    if (verb == "search") {
      report = search_json(o);
    } else if (verb == "fuzz") {
      report = fuzz_json(o);
    } else if (verb == "reproduce") {
      report = reproduce(o, passed);
    } else {
      const Loaded l = load(o.path);
      if (verb == "optimum") {
        report = solve_report(verb, l, global_optimum(l.instance, iteration_config(o)));
      } else if (verb == "wardrop") {
        report = solve_report(verb, l, wardrop_solve(l.instance, iteration_config(o)));
      } else if (verb == "nash") {
        report = solve_report(verb, l, nash_solve(l.instance, iteration_config(o)));
      } else if (verb == "ssl") {
        const SslReport s = ssl_solve(l.instance, o.leader, ssl_config(o));
        report = base(verb, l, s.inner.profile, s.inner.player_costs, s.social_cost, s.inner.residual);
        report["ssl"] = ssl_json(l.instance, s);
        report["violations"] = Json::array();
      } else if (verb == "price") {
        report = price_json(verb, l, price_report(l.instance, ssl_config(o), iteration_config(o)));
      } else if (verb == "bounds") {
        const PriceReport pr = price_report(l.instance, ssl_config(o), iteration_config(o));
        const BoundSet bs = bound_set(l.instance, o.leader);
        report = base(verb, l, pr.optimum.profile, pr.optimum.player_costs, pr.c_se, pr.optimum.residual);
        report["price_vs_nash"] = pr.price_vs_nash;
        report["price_vs_optimal"] = pr.price_vs_optimal;
        report["bounds"] = bounds_json(bs);
        report["violations"] = violations_json(verify_bounds(l.instance, pr));
      }
    }
    outcome.out = render(report, o.format);
    if (!passed) outcome.exit_code = kExitSolver;
  } catch (const InputError& e) {
    outcome.exit_code = kExitInput;
    outcome.err = std::string("input error: ") + e.what() + "\n";
  } catch (const InvalidInstance& e) {
    outcome.exit_code = kExitInput;
    outcome.err = std::string("invalid instance: ") + e.what() + "\n";
    for (const auto& m : e.errors()) outcome.err += "  " + m + "\n";
  } catch (const ConvergenceError& e) {
    outcome.exit_code = kExitSolver;
    outcome.err = std::string("solver did not converge: ") + e.what() + " (residual " + real(e.residual()) + ")\n";
  } catch (const SslError& e) {
    outcome.exit_code = kExitSolver;
    outcome.err = std::string("leadership solver failed: ") + e.what() + "\n";
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = kExitInput;
    outcome.err = std::string("unsupported input: ") + e.what() + "\n";
  } catch (const std::out_of_range& e) {
    outcome.exit_code = kExitInput;
    outcome.err = std::string("unsupported input: ") + e.what() + "\n";
  } catch (const std::exception& e) {
    outcome.exit_code = kExitSolver;
    outcome.err = std::string("solver error: ") + e.what() + "\n";
  }
  return outcome;
}

}  // namespace splitflow::cli
