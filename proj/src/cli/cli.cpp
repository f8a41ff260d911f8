#include "qbm/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "common.hpp"
#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm::cli {

namespace {

const std::vector<std::string> kCommands{"solve",     "evolve", "langevin", "recurrence",
                                         "continuum", "sweep",  "validate"};

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(std::string("cannot read ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_extended(const std::string& s, const std::string& flag) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(flag + ": expected a number or 'inf', got '" + s + "'");
}

struct Expanded {
  std::vector<std::string> args;  // without --config / --model
  std::optional<std::string> model_text;
  std::string model_file;
};

// Splits "--key=value" and pulls --config / --model out of the argument list.
Expanded expand(const std::vector<std::string>& in) {
  std::vector<std::string> args;
  for (const auto& a : in) {
    const auto eq = a.find('=');
    if (a.rfind("--", 0) == 0 && eq != std::string::npos) {
      args.push_back(a.substr(0, eq));
      args.push_back(a.substr(eq + 1));
    } else {
      args.push_back(a);
    }
  }
  Expanded r;
  std::vector<std::string> from_config, rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const bool cfg = args[i] == "--config", mdl = args[i] == "--model";
    if (!cfg && !mdl) {
      rest.push_back(args[i]);
      continue;
    }
    if (i + 1 >= args.size()) throw UsageError(args[i] + " needs a file argument");
    const std::string path = args[++i];
    if (mdl) {
      r.model_text = read_file(path, "model file");
      r.model_file = path;
      continue;
    }
    const std::string text = read_file(path, "config file");
    std::istringstream in(text);
    const auto kv = parse_key_value(in, path);
    for (const auto& e : kv.entries) {
      std::string flag = "--" + e.key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (e.value == "true") {
        from_config.push_back(flag);
      } else if (e.value != "false") {
        from_config.push_back(flag);
        from_config.push_back(e.value);
      }
    }
    if (kv.has_bath_section) {
      std::ostringstream bath;
      bath.precision(17);
      bath << "[bath]\n";
      for (const auto& b : kv.bath) bath << b.omega << ' ' << b.g << '\n';
      r.model_text = bath.str();
      r.model_file = path;
    }
  }
  // subcommand first, then config values, then explicit flags (last one wins)
  if (!rest.empty()) {
    r.args.push_back(rest.front());
    r.args.insert(r.args.end(), from_config.begin(), from_config.end());
    r.args.insert(r.args.end(), rest.begin() + 1, rest.end());
  } else {
    r.args = from_config;
  }
  return r;
}

struct Raw {
  std::string beta, omega_max, obs, n_list;
};

void add_model_options(CLI::App* s, Options& o, Raw& raw) {
  s->add_flag("--paper-defaults", o.paper_defaults,
              "equidistant Lorentzian bath (Omega = 1, beta = 1, kappa = 1, width 0.018, D = A)");
  s->add_option("--n", o.n_total, "N + 1, total number of oscillators")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  s->add_option("--convention", o.convention, "band spacing convention")
      ->check(CLI::IsMember({"prose", "formula"}));
  s->add_option("--band-width", o.band_width);
  s->add_option("--d-over-a", o.d_over_a, "coupling amplitude D in units of the spacing A");
  s->add_option("--omega-sub", o.omega_sub, "subsystem frequency Omega");
  s->add_option("--beta", raw.beta, "inverse temperature (number or inf)");
  s->add_option("--kappa", o.kappa, "initial subsystem quanta");
  s->add_option("--mass", o.mass);
}

void add_run_options(CLI::App* s, Options& o) {
  s->add_option("--out", o.out_dir, "output directory");
  s->add_option("--simd", o.simd)->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  s->add_option("--rel-tol", o.rel_tol, "secular root tolerance");
  s->add_option("--quad-tol", o.quad_tol, "quadrature tolerance");
}

void add_grid_options(CLI::App* s, Options& o) {
  s->add_option("--t0", o.t0);
  s->add_option("--t-max", o.t_max);
  s->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
}

std::unique_ptr<CLI::App> build_parser(Options& o, Raw& raw) {
  auto app = std::make_unique<CLI::App>("Exact dynamics of an oscillator coupled to a finite bath",
                                        "qbm");
  app->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app->set_version_flag("--version", std::string(kVersion));
  app->require_subcommand(1);

  auto* solve = app->add_subcommand("solve", "normal modes, weights and recurrence time");
  auto* evolve = app->add_subcommand("evolve", "mean observables on a time grid");
  auto* langevin = app->add_subcommand("langevin", "time-dependent Langevin coefficients");
  auto* rec = app->add_subcommand("recurrence", "revivals and decay fit");
  auto* cont = app->add_subcommand("continuum", "continuum limit: pole, widths, validity");
  auto* sweep = app->add_subcommand("sweep", "recurrence summary over several N");
  auto* val = app->add_subcommand("validate", "positivity conditions of the Hamiltonian");

  for (auto* s : {solve, evolve, langevin, rec, cont, sweep, val}) {
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_model_options(s, o, raw);
    add_run_options(s, o);
  }

  add_grid_options(evolve, o);
  evolve->add_option("--obs", raw.obs, "comma separated observables");
  evolve->add_option("--x0", o.x0);
  evolve->add_option("--p0", o.p0);

  add_grid_options(langevin, o);

  rec->add_option("--horizon", o.horizon, "time span in units of t_P")->check(CLI::PositiveNumber);
  rec->add_option("--t-max", o.t_max, "time span (overrides --horizon)");
  rec->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
  rec->add_option("--column", o.column, "observable searched for revivals");
  rec->add_option("--threshold", o.threshold)->check(CLI::Range(0.0, 1.0));
  rec->add_option("--fit-samples", o.fit_samples)->check(CLI::PositiveNumber);

  cont->add_option("--density", o.density, "explicit density instead of the model's")
      ->check(CLI::IsMember({"lorentzian", "ullersma", "linear", "constant", "zero"}));
  cont->add_option("--strength", o.strength);
  cont->add_option("--center", o.center);
  cont->add_option("--width", o.width);
  cont->add_option("--c1", o.c1);
  cont->add_option("--c2", o.c2);
  cont->add_option("--slope", o.slope);
  cont->add_option("--value", o.value);
  cont->add_option("--omega-min", o.omega_min);
  cont->add_option("--omega-max", raw.omega_max, "upper cutoff (number or inf)");
  cont->add_option("--series-t-max", o.series_t_max, "write survival.csv up to this time");
  cont->add_option("--series-samples", o.series_samples);
  cont->add_flag("--no-refine", o.no_refine, "skip Newton refinement of the pole");
  cont->add_option("--cpc-delta", o.cpc_delta, "offset in the continuum validity integrals");

  sweep->add_option("--n-list", raw.n_list, "comma separated N + 1 values");
  sweep->add_flag("--overlay", o.overlay, "export P_surv against t / t_P per member");
  sweep->add_option("--horizon", o.horizon)->check(CLI::PositiveNumber);
  sweep->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
  sweep->add_option("--fit-samples", o.fit_samples)->check(CLI::PositiveNumber);

  val->add_option("--delta", o.delta, "offset in the positivity sums (default: min spacing)");
  return app;
}

void finish_options(Options& o, const Raw& raw) {
  if (!raw.beta.empty()) o.beta = parse_extended(raw.beta, "--beta");
  if (!raw.omega_max.empty()) o.omega_max = parse_extended(raw.omega_max, "--omega-max");
  if (!raw.obs.empty()) o.obs = split_list(raw.obs);
  if (!raw.n_list.empty()) {
    o.n_list.clear();
    for (const auto& s : split_list(raw.n_list)) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size() || v < 2) throw std::invalid_argument(s);
        o.n_list.push_back(static_cast<std::size_t>(v));
      } catch (const std::exception&) {
        throw UsageError("--n-list: expected integers >= 2, got '" + s + "'");
      }
    }
  }
  if (o.paper_defaults && o.model_text)
    throw UsageError("--paper-defaults and an explicit model are mutually exclusive");
}

int dispatch(Context& c) {
  const auto& cmd = c.opt.command;
  if (cmd == "solve") return cmd_solve(c);
  if (cmd == "evolve") return cmd_evolve(c);
  if (cmd == "langevin") return cmd_langevin(c);
  if (cmd == "recurrence") return cmd_recurrence(c);
  if (cmd == "continuum") return cmd_continuum(c);
  if (cmd == "sweep") return cmd_sweep(c);
  return cmd_validate(c);
}

Json tolerances(const Options& o) {
  Json t;
  t["rel_tol"] = o.rel_tol;
  t["quad_tol"] = o.quad_tol;
  t["wronskian"] = 1e-12;
  return t;
}

// --simd applies to one run only
struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

int execute(Options o, std::ostream& out, std::ostream& err) {
  BackendGuard guard;
  if (o.simd != "auto") {
    const auto b = o.simd == "avx2" ? simd::Backend::avx2 : simd::Backend::scalar;
    if (!simd::set_backend(b)) throw UsageError("SIMD backend '" + o.simd + "' is unavailable");
  }
  Context c{std::move(o), out, err, {}, Json::object(), {}};
  c.dir = c.opt.out_dir;

  auto& m = c.manifest;
  m["artifact"] = "qbm";
  m["version"] = kVersion;
  m["command"] = c.opt.command;
  m["timestamp"] = utc_timestamp();
  m["model"] = nullptr;
  m["tolerances"] = tolerances(c.opt);
  m["simd"] = std::string(simd::backend_name(simd::active_backend()));
  m["threads"] = thread_count();
  const char* env = std::getenv("QBM_THREADS");
  m["QBM_THREADS"] = env ? Json(env) : Json(nullptr);
  m["derived"] = Json::object();

  int code = kOk;
  std::optional<ValidationFailure> failure;
  try {
    code = dispatch(c);
  } catch (const ValidationFailure& e) {
    failure = e;
  }
  m["status"] = failure ? "validation failure" : "ok";
  finish_manifest(c);
  if (failure) throw *failure;
  return code;
}

Options parse(const std::vector<std::string>& args, std::ostream& out, bool& done, int& code) {
  const Expanded ex = expand(args);
  Options o;
  Raw raw;
  auto app = build_parser(o, raw);
  std::vector<std::string> rev(ex.args.rbegin(), ex.args.rend());
  try {
    app->parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app->help();
    done = true;
    code = kOk;
    return o;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    done = true;
    code = kOk;
    return o;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  for (const auto* s : app->get_subcommands()) o.command = s->get_name();
  o.model_text = ex.model_text;
  o.model_file = ex.model_file;
  finish_options(o, raw);
  o.effective_args = ex.args;
  return o;
}

int rerun(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::string path, out_dir;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--out" && i + 1 < args.size()) out_dir = args[++i];
    else if (args[i].rfind("--out=", 0) == 0) out_dir = args[i].substr(6);
    else if (path.empty() && args[i].rfind("--", 0) != 0) path = args[i];
    else throw UsageError("usage: qbm --from-manifest FILE [--out DIR]");
  }
  if (path.empty()) throw UsageError("--from-manifest needs a manifest file");
  Json m;
  try {
    m = Json::parse(read_file(path, "manifest"));
  } catch (const Json::exception& e) {
    throw UsageError("malformed manifest '" + path + "': " + e.what());
  }
  if (!m.contains("rerun_args") || !m["rerun_args"].is_array())
    throw UsageError("manifest '" + path + "' has no rerun_args");
  auto rargs = m["rerun_args"].get<std::vector<std::string>>();
  if (!out_dir.empty()) {
    rargs.push_back("--out");
    rargs.push_back(out_dir);
  }
  bool done = false;
  int code = kOk;
  Options o = parse(rargs, out, done, code);
  if (done) return code;
  if (m.contains("model_text") && m["model_text"].is_string()) {
    if (o.paper_defaults) throw UsageError("manifest holds both a model and --paper-defaults");
    o.model_text = m["model_text"].get<std::string>();
    o.model_file = m["model"].value("file", std::string{});
  }
  return execute(std::move(o), out, err);
}

}  // namespace

void finish_manifest(Context& c) {
  auto& m = c.manifest;
  Json opts;
  const Options& o = c.opt;
  opts["out_dir"] = o.out_dir;
  opts["convention"] = o.convention;
  opts["simd"] = o.simd;
  m["options"] = opts;
  m["rerun_args"] = o.effective_args;
  m["model_text"] = o.model_text ? Json(*o.model_text) : Json(nullptr);
  c.outputs.push_back("manifest.json");
  m["outputs"] = c.outputs;
  c.ensure_dir();
  write_json(c.dir / "manifest.json", m);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.empty()) {
      err << "usage: qbm <" ;
      for (std::size_t i = 0; i < kCommands.size(); ++i) err << (i ? "|" : "") << kCommands[i];
      err << "> [options]   (qbm --help for details)\n";
      return kUsageError;
    }
    if (args[0] == "--from-manifest") return rerun(args, out, err);
    bool done = false;
    int code = kOk;
    Options o = parse(args, out, done, code);
    if (done) return code;
    return execute(std::move(o), out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ModelError& e) {
    err << "error: invalid model: " << e.what() << '\n';
    return kUsageError;
  } catch (const ValidationFailure& e) {
    err << "validation failed: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << '\n';
    return kValidationFailure;
  }
}

}  // namespace qbm::cli
