#pragma once

// The bellineq command line: argument parsing, state specs and the six
// commands. `run` takes its streams explicitly so tests can drive it
// in-process.
//
// Exit codes: 0 success or local model found, 2 bad input, 3 violation
// found, 4 resource cap exceeded.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bellineq/bellineq.hpp"
#include "bellineq/json_io.hpp"

namespace bellineq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitViolation = 3;
inline constexpr int kExitResource = 4;

using json_io::json;

namespace detail {

inline double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty() && std::isfinite(v), "cannot parse " + what + " '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  require(v == std::floor(v) && std::abs(v) < 1e6, what + " must be an integer");
  return static_cast<int>(v);
}

inline std::string read_all(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Path or "-" for stdin.
inline json read_json(const std::string& path, std::istream& in) {
  std::string text;
  if (path == "-") {
    text = read_all(in);
  } else {
    std::ifstream f(path);
    require(f.good(), "cannot open '" + path + "'");
    text = read_all(f);
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace detail

/// State specs:
///   singlet
///   ghz:N=3,alpha=0.3        (either key may be omitted; defaults N=3, alpha=pi/4)
///   noise:v=0.8(<spec>)      white noise mixed into the inner state
///   @path                    state JSON from a file, "@-" for stdin
inline DensityMatrix parse_state(const std::string& spec, std::istream& in = std::cin) {
  if (spec == "singlet") return density_from_pure(singlet());
  if (!spec.empty() && spec[0] == '@') return density_from_pure(json_io::state_from_json(detail::read_json(spec.substr(1), in)));
  if (spec.rfind("ghz", 0) == 0) {
    GhzFamily f;
    if (spec.size() > 3) {
      require(spec[3] == ':', "expected 'ghz:' in state spec '" + spec + "'");
      std::stringstream ss(spec.substr(4));
      std::string kv;
      while (std::getline(ss, kv, ',')) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos, "expected key=value in state spec, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "N")
          f.n_qubits = detail::parse_int(val, "N");
        else if (key == "alpha")
          f.alpha = detail::parse_number(val, "alpha");
        else
          throw InputError("unknown ghz parameter '" + key + "'");
      }
    }
    return density_from_pure(ghz_state(f));
  }
  if (spec.rfind("noise:", 0) == 0) {
    const auto open = spec.find('(');
    require(open != std::string::npos && spec.back() == ')', "expected noise:v=<v>(<state>) in '" + spec + "'");
    const std::string param = spec.substr(6, open - 6);
    require(param.rfind("v=", 0) == 0, "noise spec needs v=<visibility>");
    const double v = detail::parse_number(param.substr(2), "visibility");
    return mix_with_white_noise(parse_state(spec.substr(open + 1, spec.size() - open - 2), in), v);
  }
  throw InputError("unknown state spec '" + spec + "'");
}

namespace detail {

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::string out_path;

  void emit(const std::string& text) const {
    if (out_path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(out_path);
    require(f.good(), "cannot write '" + out_path + "'");
    f << text;
  }
  void emit(const json& j) const { emit(j.dump(2) + "\n"); }
};

inline int cmd_tensor(const Io& io, const std::string& spec) {
  io.emit(json_io::tensor_to_json(correlation_tensor(parse_state(spec, io.in))));
  return kExitOk;
}

inline int cmd_lhv(const Io& io, const std::string& input) {
  const auto table = json_io::table_from_json(read_json(input, io.in));
  json j;
  if (table.layout().all_two_settings()) {
    const double lhs = general_bell_lhs(table);
    const auto bound = std::ldexp(1.0, static_cast<int>(table.layout().parties()));
    j["lhs"] = lhs;
    j["bound"] = bound;
    if (lhs <= bound + kBoundaryTolerance) {
      j["local"] = true;
      j["model"] = json_io::model_to_json(construct_lhv_model(table));
      io.emit(j);
      return kExitOk;
    }
    const auto cert = sign_inequality(most_violated_sign_function(table));
    j["local"] = false;
    j["certificate"] = json_io::inequality_to_json(cert);
    j["certificate_value"] = evaluate_inequality(cert, table);
    io.emit(j);
    return kExitViolation;
  }
  const auto res = polytope_membership(table);
  j["infeasibility"] = res.infeasibility;
  j["local"] = res.inside;
  if (res.inside) {
    j["model"] = json_io::model_to_json(*res.model);
    io.emit(j);
    return kExitOk;
  }
  j["certificate"] = json_io::inequality_to_json(*res.certificate);
  j["certificate_value"] = res.certificate_value;
  io.emit(j);
  return kExitViolation;
}

/// Construction tree for a layout, with placeholder sign functions.
inline ConstructionTree tree_for_layout(const ExperimentLayout& l) {
  const auto n = static_cast<int>(l.parties());
  std::vector<int> m;
  for (int j = 0; j < n; ++j) m.push_back(l.settings(static_cast<std::size_t>(j)));
  const auto chsh = SignFunction::chsh();
  if (l.all_two_settings()) {
    require(n >= 2, "a two-setting layout needs at least two parties");
    std::vector<int> parties(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) parties[static_cast<std::size_t>(p)] = p;
    return ConstructionTree::two_setting_block(SignFunction::constant(n), parties, 0, 1);
  }
  if (m == std::vector<int>{8, 8, 4, 2}) return tree_8842(chsh, {chsh, chsh, chsh}, {chsh, chsh, chsh});
  if (m == std::vector<int>{8, 8, 4, 4, 4}) return tree_88444(chsh, {chsh, chsh, chsh}, {chsh, chsh, chsh}, chsh, chsh);
  bool four_x_two = n >= 3 && m.back() == 2;
  for (int j = 0; j + 1 < n; ++j) four_x_two = four_x_two && m[static_cast<std::size_t>(j)] == 4;
  if (four_x_two) return tree_4x2(n, chsh, SignFunction::constant(n - 1), SignFunction::constant(n - 1));
  throw InputError("no construction for layout " + l.to_string() +
                   " (supported: 2x..x2, 4x..x4x2, 8x8x4x2, 8x8x4x4x4)");
}

inline int cmd_generate(const Io& io, const std::string& layout_text, const std::vector<std::string>& sign_fns,
                        bool check_tight) {
  std::vector<int> m;
  {
    std::stringstream ss(layout_text);
    std::string part;
    while (std::getline(ss, part, 'x')) m.push_back(parse_int(part, "layout entry"));
  }
  require(!m.empty(), "empty layout");
  const ExperimentLayout layout(m);
  const auto shape = tree_for_layout(layout);
  const auto placeholders = shape.sign_functions();
  std::vector<SignFunction> signs;
  if (sign_fns.empty()) {
    for (const auto& s : placeholders)
      require(s.arity() == 2, "layout " + layout.to_string() + " needs explicit --sign-fn values (" +
                                  std::to_string(placeholders.size()) + " in depth-first order)");
    signs.assign(placeholders.size(), SignFunction::chsh());
  } else {
    require(sign_fns.size() == placeholders.size(),
            "layout " + layout.to_string() + " takes " + std::to_string(placeholders.size()) +
                " sign functions, got " + std::to_string(sign_fns.size()));
    for (std::size_t i = 0; i < sign_fns.size(); ++i) {
      auto s = SignFunction::from_bitstring(sign_fns[i]);
      require(s.arity() == placeholders[i].arity(),
              "sign function " + std::to_string(i + 1) + " must have " +
                  std::to_string(std::size_t{1} << placeholders[i].arity()) + " bits");
      signs.push_back(std::move(s));
    }
  }
  const auto tree = shape.with_sign_functions(signs);
  const auto ineq = build_recursive(tree);
  require(ineq.layout == layout, "construction produced layout " + ineq.layout.to_string());
  json j = json_io::inequality_to_json(ineq);
  json names = json::array();
  for (const auto& s : signs) names.push_back(s.to_bitstring());
  j["sign_functions"] = names;
  j["family_size_log2"] = tree.family_size_log2();
  if (check_tight) j["tightness"] = json_io::tightness_to_json(check_tightness(ineq));
  io.emit(j);
  return kExitOk;
}

enum class Kind { two_setting, multisetting };

inline std::vector<Kind> parse_kinds(const std::string& s) {
  if (s == "both") return {Kind::two_setting, Kind::multisetting};
  if (s == "two_setting") return {Kind::two_setting};
  if (s == "multisetting") return {Kind::multisetting};
  throw InputError("kind must be two_setting, multisetting or both, got '" + s + "'");
}

inline ConditionReport run_condition(const CorrelationTensor& t, Kind kind, const OptimizerOptions& opt) {
  if (kind == Kind::multisetting) {
    MultisettingOptions mo;
    static_cast<OptimizerOptions&>(mo) = opt;
    return condition_multisetting_CN(t, mo);
  }
  if (t.n_qubits() == 2) return condition_two_qubit(t);
  return condition_two_setting_N(t, opt);
}

inline int cmd_condition(const Io& io, const std::string& spec, const std::string& tensor_path,
                         const std::string& kind, const OptimizerOptions& opt) {
  const auto kinds = parse_kinds(kind);
  require(kinds.size() == 1, "condition takes a single kind");
  require(spec.empty() != tensor_path.empty(), "give either a state spec or --tensor");
  const auto t = tensor_path.empty() ? correlation_tensor(parse_state(spec, io.in))
                                     : json_io::tensor_from_json(read_json(tensor_path, io.in));
  const auto rep = run_condition(t, kinds.front(), opt);
  io.emit(json_io::report_to_json(rep));
  return rep.violated ? kExitViolation : kExitOk;
}

inline BellInequality named_inequality(const std::string& name, std::istream& in) {
  if (name == "chsh") return chsh_inequality();
  if (name == "mermin") return mermin_inequality();
  return json_io::inequality_from_json(read_json(name, in));
}

inline int cmd_maximize(const Io& io, const std::string& spec, const std::string& ineq_name,
                        const OptimizerOptions& opt) {
  const auto t = correlation_tensor(parse_state(spec, io.in));
  const auto ineq = named_inequality(ineq_name, io.in);
  const auto best = maximize_bell_value(t, ineq, opt);
  const bool violated = std::abs(best.value) > static_cast<double>(ineq.bound) + kViolationMargin;
  json j{{"value", best.value},
         {"bound", ineq.bound},
         {"violated", violated},
         {"converged", best.converged},
         {"degenerate_updates", best.degenerate_updates},
         {"seed", opt.seed},
         {"settings", json_io::settings_to_json(best.settings)}};
  io.emit(j);
  return violated ? kExitViolation : kExitOk;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline int cmd_scan(const Io& io, const std::string& family, const std::vector<int>& ns, int steps,
                    std::optional<double> lo, std::optional<double> hi, const std::string& kind,
                    const OptimizerOptions& opt) {
  require(!ns.empty(), "scan needs at least one N");
  require(steps >= 2, "scan needs at least 2 grid points");
  require(family == "ghz" || family == "werner", "scan family must be ghz or werner");
  const double a = lo.value_or(0.0);
  const double b = hi.value_or(family == "ghz" ? std::numbers::pi / 4 : 1.0);
  require(a <= b, "empty parameter range");
  const auto kinds = parse_kinds(kind);
  std::string csv = "family,N,alpha,kind,value,violated\n";
  for (int n : ns) {
    require(family == "ghz" || n == 2, "the werner family is two-qubit");
    for (int i = 0; i < steps; ++i) {
      const double p = i + 1 == steps ? b : a + (b - a) * i / (steps - 1);
      const auto rho = family == "ghz" ? density_from_pure(ghz_state(GhzFamily{n, p}))
                                       : mix_with_white_noise(density_from_pure(singlet()), p);
      const auto t = correlation_tensor(rho);
      for (Kind k : kinds) {
        const auto rep = run_condition(t, k, opt);
        csv += family + "," + std::to_string(n) + "," + format_double(p) + "," + to_string(rep.kind) + "," +
               format_double(rep.value) + "," + (rep.violated ? "true" : "false") + "\n";
      }
    }
  }
  io.emit(csv);
  return kExitOk;
}

}  // namespace detail

/// Runs one command line (args excludes the program name).
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlation Bell inequalities: LHV models, multisetting families, violation conditions",
               "bellineq"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_path;
  OptimizerOptions opt;
  app.add_option("--out", out_path, "Write output to this file instead of stdout");
  app.add_option("--seed", opt.seed, "Seed for randomized optimizers")->capture_default_str();
  app.add_option("--restarts", opt.restarts, "Random restarts per optimization")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::string spec, input = "-", layout, kind = "two_setting", tensor_path, ineq_name = "chsh", family = "ghz";
  std::vector<std::string> sign_fns;
  std::vector<int> ns;
  bool check_tight = false;
  int steps = 21;
  std::optional<double> lo, hi;

  auto* tensor = app.add_subcommand("tensor", "Correlation tensor of a state");
  tensor->add_option("state", spec, "State spec: singlet | ghz:N=..,alpha=.. | noise:v=..(<spec>) | @file")
      ->required();

  auto* lhv = app.add_subcommand("lhv", "Local model or violation certificate for a correlation table");
  lhv->add_option("input", input, "Table JSON path, - for stdin")->capture_default_str();

  auto* gen = app.add_subcommand("generate", "Build a multisetting inequality from sign functions");
  gen->add_option("--layout", layout, "Setting counts, e.g. 4x4x2")->required();
  gen->add_option("--sign-fn", sign_fns, "Sign-function truth tables in depth-first tree order");
  gen->add_flag("--check-tight", check_tight, "Count saturating vertices and their affine rank");

  auto* scan = app.add_subcommand("scan", "Evaluate violation conditions over a family grid (CSV)");
  scan->add_option("--family", family, "ghz (parameter alpha) or werner (parameter v)")->capture_default_str();
  scan->add_option("--N", ns, "Qubit counts")->required();
  scan->add_option("--steps", steps, "Grid points per N")->capture_default_str();
  scan->add_option("--min", lo, "Parameter lower end");
  scan->add_option("--max", hi, "Parameter upper end");
  scan->add_option("--kind", kind, "two_setting | multisetting | both")->capture_default_str();

  auto* cond = app.add_subcommand("condition", "Violation condition on a state's correlation tensor");
  cond->add_option("state", spec, "State spec");
  cond->add_option("--tensor", tensor_path, "Tensor JSON path instead of a state spec, - for stdin");
  cond->add_option("--kind", kind, "two_setting | multisetting")->capture_default_str();

  auto* maxi = app.add_subcommand("maximize", "Numerical quantum value of an inequality on a state");
  maxi->add_option("state", spec, "State spec")->required();
  maxi->add_option("--inequality", ineq_name, "chsh | mermin | inequality JSON path")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const detail::Io io{in, out, err, out_path};
  try {
    if (*tensor) return detail::cmd_tensor(io, spec);
    if (*lhv) return detail::cmd_lhv(io, input);
    if (*gen) return detail::cmd_generate(io, layout, sign_fns, check_tight);
    if (*scan) return detail::cmd_scan(io, family, ns, steps, lo, hi, kind, opt);
    if (*cond) return detail::cmd_condition(io, spec, tensor_path, kind, opt);
    if (*maxi) return detail::cmd_maximize(io, spec, ineq_name, opt);
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json_io::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace bellineq::cli
