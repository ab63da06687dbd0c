#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "varapprox/error.hpp"
#include "varapprox/flowar.hpp"
#include "varapprox/json_io.hpp"
#include "varapprox/var_model.hpp"
#include "varapprox/verify.hpp"

namespace varapprox::cli {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::get("varapprox");
    if (!l) l = spdlog::stderr_logger_mt("varapprox");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("VARAPPROX_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string fmt_num(double x) {
  std::ostringstream os;
  os << std::setprecision(8) << x;
  return os.str();
}

std::string shape_str(Shape2 s) { return "(" + std::to_string(s.h) + "," + std::to_string(s.w) + ")"; }

void write_json(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("--out", "cannot write '" + path + "'");
  f << j.dump(2) << "\n";
}

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 0;
  std::size_t samples = 2000;
  std::string alpha = "l2";
  std::string report;
};

int cmd_verify(const VerifyArgs& a, const std::vector<std::string>& argv, std::ostream& out,
               std::ostream& err) {
  if (!is_suite(a.suite)) {
    err << "error: unknown suite '" << a.suite << "' (expected one of: ";
    for (const auto& s : suite_names()) err << s << ", ";
    err << "all)\n";
    return kUsage;
  }
  VerifyOptions opts;
  opts.seed = a.seed;
  opts.samples = a.samples;
  opts.norm = fn_norm_from_string(a.alpha);

  logger()->info("verify {} seed={} samples={} alpha={}", a.suite, a.seed, a.samples, a.alpha);
  const auto start = std::chrono::steady_clock::now();
  std::vector<CheckResult> checks;
  try {
    checks = run_suite(a.suite, opts);
  } catch (const Error& e) {
    err << "FAIL " << a.suite << ": " << e.what() << "\n";
    return kCheckFailed;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (c.pass) {
      out << "PASS " << c.name << "\n";
    } else {
      ++failed;
      out << "FAIL " << c.name << ": " << c.failure << "\n";
    }
  }
  out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  logger()->info("verify finished in {:.2f} s", secs);

  if (!a.report.empty()) {
    RunManifest m;
    m.command_line = argv;
    m.suite = a.suite;
    m.options = opts;
    m.timestamp = utc_timestamp();
    write_json(a.report, report_document(m, checks));
    logger()->info("report written to {}", a.report);
  }
  return failed == 0 ? kOk : kCheckFailed;
}

struct DemoArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::string out_path;
};

int demo_var(const DemoArgs& a, std::ostream& out) {
  const VarDemoConfig dc = var_config_from_json(read_json_file(a.config));
  const std::size_t d = dc.schedule.d;
  VarStackParams p;
  if (dc.levels) {
    p.schedule = dc.schedule;
    p.levels = *dc.levels;
    p.interp = dc.interp;
    p.order = dc.order;
  } else {
    Rng rng(dc.param_seed.value_or(a.seed), "demo/var/params");
    p = random_var_stack(dc.schedule, dc.head_size == 0 ? d : dc.head_size, dc.hidden, rng,
                         dc.interp, dc.order);
  }
  try {
    p.validate();
  } catch (const ShapeError& e) {
    throw ConfigError("$.levels", e.what());
  }
  const TokenMap x_init = dc.x_init ? *dc.x_init : Rng(a.seed, "demo/var/x_init").gaussian_map(1, 1, d);
  const VarForwardResult r = var_forward(x_init, p);

  out << "var-forward: d=" << d << " order=" << to_string(p.order)
      << " kernel=" << to_string(p.interp.kernel) << " stencil=" << to_string(p.interp.mode)
      << " seed=" << a.seed << "\n";
  std::size_t first = 0;
  for (std::size_t i = 0; i < r.row_ledger.size(); ++i) {
    const Shape2 s = dc.schedule.levels[i];
    const Matrix block = r.output.row_block(first, s.area());
    out << "level " << i + 1 << ": map " << shape_str(s) << " rows " << r.row_ledger[i]
        << " map_norm " << fmt_num(frobenius_norm(block)) << "\n";
    first += s.area();
  }
  out << "ledger:";
  for (std::size_t i = 0; i < r.row_ledger.size(); ++i) out << (i ? "," : " ") << r.row_ledger[i];
  out << "\n";
  out << "output: " << r.output.rows() << " x " << r.output.cols()
      << " frobenius " << fmt_num(frobenius_norm(r.output)) << "\n";
  if (!a.out_path.empty()) write_json(a.out_path, to_json(r.output));
  return kOk;
}

int demo_flowar(const DemoArgs& a, std::ostream& out) {
  const FlowArDemoConfig dc = flowar_config_from_json(read_json_file(a.config));
  FlowArConfig cfg;
  if (dc.tf) {
    cfg.scales = dc.scales;
    cfg.base = dc.base;
    cfg.h = dc.h;
    cfg.w = dc.w;
    cfg.c = dc.c;
    cfg.tf = *dc.tf;
    cfg.nn = *dc.nn;
  } else {
    Rng rng(dc.param_seed.value_or(a.seed), "demo/flowar/params");
    cfg = random_flowar_config(dc.scales, dc.base, dc.h, dc.w, dc.c, dc.hidden, rng);
  }
  cfg.interp = dc.interp;
  cfg.steps = a.steps > 0 ? a.steps : dc.steps;
  try {
    cfg.validate();
  } catch (const ShapeError& e) {
    throw ConfigError("$", e.what());
  }
  const Shape2 s1 = cfg.scale_shape(1);
  const TokenMap z_init =
      dc.z_init ? *dc.z_init : Rng(a.seed, "demo/flowar/z_init").gaussian_map(s1.h, s1.w, cfg.c);
  if (z_init.shape() != s1 || z_init.d() != cfg.c) {
    throw ConfigError("$.z_init", "expected shape " + shape_str(s1) + " x " + std::to_string(cfg.c));
  }
  const FlowArInference inf = flowar_infer(cfg, z_init, a.seed, cfg.steps);

  out << "flowar-infer: K=" << cfg.scales << " a=" << cfg.base << " c=" << cfg.c
      << " steps=" << cfg.steps << " seed=" << a.seed << "\n";
  for (std::size_t i = 0; i < inf.scales.size(); ++i) {
    const InferScale& sc = inf.scales[i];
    out << "scale " << i + 1 << ": shape " << shape_str(sc.shape) << " x " << cfg.c
        << " sequence " << sc.sequence_length << " |s| " << fmt_num(frobenius_norm(matricize(sc.cond)))
        << " |F0| " << fmt_num(frobenius_norm(matricize(sc.f0))) << " |s_hat| "
        << fmt_num(frobenius_norm(matricize(sc.s_hat))) << "\n";
  }
  out << "output: " << shape_str(inf.output.shape()) << " x " << inf.output.d() << " frobenius "
      << fmt_num(frobenius_norm(matricize(inf.output))) << "\n";
  if (!a.out_path.empty()) write_json(a.out_path, to_json(inf.output));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks for VAR and FlowAR transformers", "varapprox"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run a seeded verification suite");
  verify->add_option("suite", va.suite, "interp|attention|contextual|perturbation|universality|flowar|all")
      ->required();
  verify->add_option("--seed", va.seed, "Root seed")->capture_default_str();
  verify->add_option("--samples", va.samples, "Monte Carlo samples per bound check")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--alpha", va.alpha, "Function norm")
      ->check(CLI::IsMember({"l2", "sup"}))
      ->capture_default_str();
  verify->add_option("--report", va.report, "Write the JSON report here");

  DemoArgs da;
  std::string which;
  auto* demo = app.add_subcommand("demo", "Run a model forward pass from a JSON config");
  demo->add_option("which", which, "var-forward|flowar-infer")
      ->required()
      ->check(CLI::IsMember({"var-forward", "flowar-infer"}));
  demo->add_option("--config", da.config, "Model config JSON")->required();
  demo->add_option("--seed", da.seed, "Root seed")->capture_default_str();
  demo->add_option("--steps", da.steps, "Euler steps per scale (flowar-infer)")
      ->check(CLI::PositiveNumber);
  demo->add_option("--out", da.out_path, "Write the output tensor JSON here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(va, args, out, err);
    if (which == "var-forward") return demo_var(da, out);
    return demo_flowar(da, out);
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
}

}  // namespace varapprox::cli
