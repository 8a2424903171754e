// fractal: command-line front end for scan-order generation, locality
// metrics, SSM kernel dumps, block execution and the self-check suites.
//
// Exit codes: 0 success, 1 runtime or verification failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fractal/fractal.hpp"
#include "fractal/verify.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    std::cout.flush();
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  file << payload;
  if (!file) throw std::runtime_error("failed writing '" + out_path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << file.rdbuf();
  return ss.str();
}

// kind[:direction[:shift]][@RxC]
fractal::CurveSpec parse_spec_arg(const std::string& arg, fractal::GridShape default_shape) {
  std::string body = arg;
  fractal::CurveSpec spec;
  spec.shape = default_shape;
  try {
    if (const auto at = body.find('@'); at != std::string::npos) {
      const std::string shape = body.substr(at + 1);
      const auto x = shape.find('x');
      if (x == std::string::npos) throw UsageError("shape must look like RxC");
      spec.shape = {std::stoul(shape.substr(0, x)), std::stoul(shape.substr(x + 1))};
      body = body.substr(0, at);
    }
    std::vector<std::string> parts;
    std::stringstream ss(body);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.empty() || parts.size() > 3) throw UsageError("expected kind[:direction[:shift]]");
    spec.kind = fractal::parse_curve_kind(parts[0]);
    if (parts.size() > 1) spec.direction = std::stoi(parts[1]);
    if (parts.size() > 2) spec.shift = std::stoi(parts[2]);
  } catch (const UsageError& e) {
    throw UsageError("bad --spec '" + arg + "': " + e.what());
  } catch (const std::exception&) {
    throw UsageError("bad --spec '" + arg + "'");
  }
  return spec;
}

struct CurveArgs {
  std::string kind = "hilbert";
  std::optional<int> depth;
  std::optional<std::size_t> rows, cols;
  int direction = 1;
  int shift = 0;
  std::string format = "json";
  std::string out;
};

int run_curve(const CurveArgs& a) {
  fractal::CurveSpec spec;
  spec.kind = fractal::parse_curve_kind(a.kind);
  if (a.depth) {
    const std::size_t side = std::size_t{1} << *a.depth;
    spec.shape = {side, side};
  } else {
    spec.shape = {a.rows.value_or(8), a.cols.value_or(a.rows.value_or(8))};
  }
  spec.direction = a.direction;
  spec.shift = a.shift;
  emit(a.out, fractal::export_order(fractal::make_order(spec),
                                    fractal::parse_export_format(a.format)));
  return 0;
}

struct MetricsArgs {
  std::vector<std::string> specs;
  std::size_t rows = 8, cols = 8;
  std::string format = "csv";
  std::string out;
};

int run_metrics(const MetricsArgs& a) {
  std::vector<fractal::CurveSpec> specs;
  for (const auto& s : a.specs) specs.push_back(parse_spec_arg(s, {a.rows, a.cols}));
  const auto table = fractal::compare_orders(specs);
  emit(a.out, a.format == "json" ? fractal::reports_to_json(table).dump(2) + "\n"
                                 : fractal::reports_to_csv(table));
  return 0;
}

struct KernelArgs {
  std::vector<double> a, b, c;
  double delta = 0.1;
  std::size_t length = 16;
  std::size_t state_size = 4;
  std::uint64_t seed = 0;
  std::string rule = "zoh";
  std::string out;
};

int run_kernel(const KernelArgs& k) {
  fractal::SsmParams params{k.a, k.b, k.c, k.delta};
  if (params.a_diag.empty()) {
    fractal::SeededStream rng(k.seed);
    for (std::size_t i = 0; i < k.state_size; ++i) {
      params.a_diag.push_back(rng.uniform(-2.0, -0.1));
      params.b.push_back(rng.uniform(-1.0, 1.0));
      params.c.push_back(rng.uniform(-1.0, 1.0));
    }
  }
  const auto disc = k.rule == "euler" ? fractal::discretize_euler_b(params)
                                      : fractal::discretize_zoh(params);
  const auto kernel = fractal::build_kernel(disc, k.length);
  std::string header, values;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    if (i) {
      header += ',';
      values += ',';
    }
    header += "k" + std::to_string(i);
    values += fractal::format_number(kernel[i]);
  }
  emit(k.out, header + "\n" + values + "\n");
  return 0;
}

struct BlockArgs {
  std::string in;
  std::size_t rows = 8, cols = 8, channels = 1;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> param_seed;
  std::string curve = "hilbert";
  std::size_t state_size = 4;
  std::string merge = "sum";
  int shift = 0;
  bool identity = false;
  bool share = false;
  bool opcount = false;
  std::string out;
};

int run_block(const BlockArgs& b) {
  fractal::BlockConfig config;
  config.curve_kind = fractal::parse_curve_kind(b.curve);
  config.state_size = b.state_size;
  config.merge = fractal::parse_merge_rule(b.merge);
  config.shift = b.shift;
  config.param_seed = b.param_seed.value_or(b.seed);
  config.mode = b.identity ? fractal::ParamMode::identity : fractal::ParamMode::seeded;
  config.share_directions = b.share;

  const auto grid = b.in.empty()
                        ? fractal::random_grid({b.rows, b.cols}, b.channels, b.seed)
                        : fractal::grid_from_json(nlohmann::json::parse(read_file(b.in)));
  if (b.opcount) {
    emit(b.out, std::to_string(fractal::block_opcount(grid.shape(), config, grid.channels())) +
                    "\n");
    return 0;
  }
  emit(b.out, fractal::grid_to_json(fractal::block_forward(grid, config)).dump() + "\n");
  return 0;
}

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::string out;
};

int run_verify(const VerifyArgs& v) {
  std::vector<fractal::verify::SuiteResult> results;
  if (v.suite == "curves" || v.suite == "all") results.push_back(fractal::verify::run_curves());
  if (v.suite == "ssm" || v.suite == "all") results.push_back(fractal::verify::run_ssm(v.seed));
  if (v.suite == "block" || v.suite == "all") results.push_back(fractal::verify::run_block(v.seed));
  bool ok = true;
  for (const auto& r : results) {
    for (const auto& c : r.checks) {
      std::cerr << (c.passed ? "PASS " : "FAIL ") << r.suite << '/' << c.name << ": " << c.detail
                << '\n';
    }
    ok = ok && r.passed();
  }
  emit(v.out, fractal::verify::to_json(results, v.seed).dump(2) + "\n");
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Fractal scan orders, locality metrics and selective state space scans.\n"
      "Option precedence: command-line flags, then the --config file (TOML/INI, one\n"
      "[section] per command), then environment variables (FRACTAL_SEED, FRACTAL_FORMAT)."};
  app.set_config("--config", "", "Read option defaults from a TOML/INI file");
  app.require_subcommand(1, 1);

  CurveArgs curve;
  auto* curve_cmd = app.add_subcommand("curve", "Generate a scan order and export it");
  curve_cmd->add_option("--kind", curve.kind, "hilbert | raster | boustrophedon | morton")
      ->check(CLI::IsMember({"hilbert", "raster", "boustrophedon", "morton"}))
      ->capture_default_str();
  auto* depth_opt = curve_cmd->add_option("--depth", curve.depth, "Grid side 2^depth")
                        ->check(CLI::Range(0, fractal::kMaxHilbertDepth));
  curve_cmd->add_option("--rows", curve.rows, "Grid rows (default 8)")
      ->check(CLI::PositiveNumber)
      ->excludes(depth_opt);
  curve_cmd->add_option("--cols", curve.cols, "Grid columns (default: rows)")
      ->check(CLI::PositiveNumber)
      ->excludes(depth_opt);
  curve_cmd->add_option("--direction", curve.direction, "Hilbert direction 1..4")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  curve_cmd->add_option("--shift", curve.shift, "Vertical shift in cells (wraps)")
      ->capture_default_str();
  curve_cmd->add_option("--format", curve.format, "json | csv | svg")
      ->check(CLI::IsMember({"json", "csv", "svg"}))
      ->envname("FRACTAL_FORMAT")
      ->capture_default_str();
  curve_cmd->add_option("--out", curve.out, "Output path (default: standard output)");

  MetricsArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compare locality metrics of scan orders");
  metrics_cmd
      ->add_option("--spec", metrics.specs,
                   "Order as kind[:direction[:shift]][@RxC]; repeat for several")
      ->required();
  metrics_cmd->add_option("--rows", metrics.rows, "Default grid rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  metrics_cmd->add_option("--cols", metrics.cols, "Default grid columns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  metrics_cmd->add_option("--format", metrics.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  metrics_cmd->add_option("--out", metrics.out, "Output path (default: standard output)");

  KernelArgs kernel;
  auto* kernel_cmd = app.add_subcommand("kernel", "Dump the LTI convolution kernel as CSV");
  kernel_cmd->add_option("--a", kernel.a, "Diagonal of A, comma separated")->delimiter(',');
  kernel_cmd->add_option("--b", kernel.b, "B, comma separated")->delimiter(',');
  kernel_cmd->add_option("--c", kernel.c, "C, comma separated")->delimiter(',');
  kernel_cmd->add_option("--delta", kernel.delta, "Timescale")->capture_default_str();
  kernel_cmd->add_option("--length", kernel.length, "Kernel length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  kernel_cmd->add_option("--state-size", kernel.state_size, "N for seeded random parameters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  kernel_cmd->add_option("--seed", kernel.seed, "Seed for random parameters when --a is absent")
      ->envname("FRACTAL_SEED")
      ->capture_default_str();
  kernel_cmd->add_option("--rule", kernel.rule, "zoh | euler input discretization")
      ->check(CLI::IsMember({"zoh", "euler"}))
      ->capture_default_str();
  kernel_cmd->add_option("--out", kernel.out, "Output path (default: standard output)");

  BlockArgs block;
  auto* block_cmd = app.add_subcommand("block", "Run the four-direction scan block on a grid");
  block_cmd->add_option("--in", block.in, "Grid JSON input (default: random grid)");
  block_cmd->add_option("--rows", block.rows, "Random grid rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  block_cmd->add_option("--cols", block.cols, "Random grid columns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  block_cmd->add_option("--channels", block.channels, "Random grid channels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  block_cmd->add_option("--seed", block.seed, "Seed for the random grid and parameters")
      ->envname("FRACTAL_SEED")
      ->capture_default_str();
  block_cmd->add_option("--param-seed", block.param_seed, "Parameter seed (default: --seed)");
  block_cmd->add_option("--curve", block.curve, "Curve kind of the direction family")
      ->check(CLI::IsMember({"hilbert", "raster", "boustrophedon", "morton"}))
      ->capture_default_str();
  block_cmd->add_option("--state-size", block.state_size, "SSM state size N")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  block_cmd->add_option("--merge", block.merge, "sum | mean")
      ->check(CLI::IsMember({"sum", "mean"}))
      ->capture_default_str();
  block_cmd->add_option("--shift", block.shift, "Vertical curve shift")->capture_default_str();
  block_cmd->add_flag("--identity", block.identity, "Use the pass-through parameterization");
  block_cmd->add_flag("--share-directions", block.share, "Share parameters across directions");
  block_cmd->add_flag("--opcount", block.opcount, "Print the operation count instead of running");
  block_cmd->add_option("--out", block.out, "Output path (default: standard output)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in property suites");
  verify_cmd->add_option("--suite", verify.suite, "curves | ssm | block | all")
      ->check(CLI::IsMember({"curves", "ssm", "block", "all"}))
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "Seed for randomized checks")
      ->envname("FRACTAL_SEED")
      ->capture_default_str();
  verify_cmd->add_option("--out", verify.out, "JSON summary path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*curve_cmd) return run_curve(curve);
    if (*metrics_cmd) return run_metrics(metrics);
    if (*kernel_cmd) return run_kernel(kernel);
    if (*block_cmd) return run_block(block);
    if (*verify_cmd) return run_verify(verify);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fractal::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
