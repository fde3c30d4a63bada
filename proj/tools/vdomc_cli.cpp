// vdomc: compile templates, render state snapshots, run the benchmark suites.
//
// Exit status: 0 success, 2 usage error (grammar help on stderr), 1 any
// other failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vdomc/vdomc.hpp"

namespace {

using vdomc::Json;

constexpr int kUsageError = 2;
constexpr int kFailure = 1;

// Raised for bad option values that CLI11 cannot check itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << bytes;
}

// Inline JSON when the argument looks like JSON, otherwise a file path.
Json read_state(const std::string& arg) {
  const std::size_t first = arg.find_first_not_of(" \t\r\n");
  const bool inline_json = first != std::string::npos && (arg[first] == '{' || arg[first] == '[');
  const std::string text = inline_json ? arg : read_file(arg);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("state '" + arg + "' is not valid JSON");
  return j;
}

struct CompileArgs {
  std::string input;
  std::string output;
  bool no_hoist = false;
};

int run_compile(const CompileArgs& a) {
  const std::string source = read_file(a.input);
  const vdomc::CompiledModule module = vdomc::compile_source(source, vdomc::CompileOptions{!a.no_hoist});
  const std::string bytes = vdomc::emit(module);
  if (a.output.empty() || a.output == "-") {
    std::cout << bytes;
  } else {
    write_file(a.output, bytes);
  }
  return 0;
}

struct RenderArgs {
  std::string module;
  std::string state;
  std::string against;
  bool emit_patch = false;
  bool naive = false;
};

int run_render(const RenderArgs& a) {
  if (a.emit_patch && a.against.empty()) throw UsageError("--emit-patch requires --against");
  const vdomc::CompiledModule module = vdomc::load(read_file(a.module));
  const vdomc::VNode first = vdomc::instantiate(module, read_state(a.state));
  vdomc::Document doc;
  vdomc::mount(doc, first);
  if (!a.against.empty()) {
    const vdomc::VNode second = vdomc::instantiate(module, read_state(a.against));
    vdomc::DiffOptions options;
    options.fast_paths = !a.naive;
    const vdomc::DiffResult r = vdomc::diff(first, second, options);
    if (a.emit_patch) {
      std::cout << vdomc::to_json(r.patch).dump(2) << "\n";
      return 0;
    }
    vdomc::apply_patch(doc, r.patch);
  }
  std::cout << vdomc::serialize(doc) << "\n";
  return 0;
}

struct BenchArgs {
  std::size_t rows = 1000;
  std::size_t nodes = vdomc::bench::kAppendHeadline;
  std::vector<std::string> impls;
  std::uint64_t seed = 1;
  bool json = false;
  bool table = false;
  bool timing = false;
  std::size_t samples = 5;
  std::size_t warmup = 1;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int run_jsfb(const BenchArgs& a) {
  namespace b = vdomc::bench;
  std::vector<b::ImplKind> impls;
  for (const std::string& name : a.impls) {
    auto k = b::impl_from_string(name);
    if (!k) throw UsageError("unknown impl '" + name + "' (engine, naive, dom)");
    impls.push_back(*k);
  }
  if (impls.empty()) impls.assign(b::kAllImpls.begin(), b::kAllImpls.end());
  if (a.rows < b::kMinRows) throw UsageError("--rows must be at least " + std::to_string(b::kMinRows));
  if (a.samples < 5) throw UsageError("--samples must be at least 5");

  const b::JsfbReport report = b::run_jsfb_suite(a.rows, impls, a.seed, b::Protocol{a.warmup, a.samples});
  if (a.json) {
    std::cout << b::to_json(report, a.timing).dump(2) << "\n";
    return 0;
  }
  std::printf("%-44s %-7s %12s %8s %10s %9s %6s %9s\n", "case", "impl", "ops/s", "+-%", "structural", "attribute",
              "text", "visits");
  for (const b::BenchResult& r : report.results) {
    std::printf("%-44s %-7s %12s %8s %10llu %9llu %6llu %9llu\n", r.name.c_str(),
                std::string(b::to_string(r.impl)).c_str(), fixed(r.ops_per_sec, 1).c_str(),
                fixed(r.rel_stdev_pct, 1).c_str(), static_cast<unsigned long long>(r.dom_ops.structural),
                static_cast<unsigned long long>(r.dom_ops.attribute), static_cast<unsigned long long>(r.dom_ops.text),
                static_cast<unsigned long long>(r.diff_stats.nodes_visited));
  }
  for (b::ImplKind k : impls) {
    std::printf("%-44s %-7s %12s\n", "Geometric mean", std::string(b::to_string(k)).c_str(),
                fixed(report.geomean_ops(k), 1).c_str());
  }
  return 0;
}

int run_append(const BenchArgs& a) {
  namespace b = vdomc::bench;
  std::vector<b::AppendMode> modes;
  for (const std::string& name : a.impls) {
    auto m = b::append_mode_from_string(name);
    if (!m) throw UsageError("unknown mode '" + name + "' (dom, delta, keyed, vdom)");
    modes.push_back(*m);
  }
  if (modes.empty()) modes.assign(b::kAllAppendModes.begin(), b::kAllAppendModes.end());
  if (a.nodes == 0) throw UsageError("--nodes must be positive");

  const b::AppendReport report = b::run_append_suite(a.nodes, modes, a.seed);
  if (a.json) {
    std::cout << b::to_json(report, a.timing).dump(2) << "\n";
    return 0;
  }
  std::printf("%-6s %6s %12s %12s %10s\n", "mode", "n", "visits", "total ms", "slope");
  for (const b::AppendModeReport& m : report.modes) {
    const std::string mode(b::to_string(m.mode));
    for (const b::AppendRun& r : m.sweep) {
      std::printf("%-6s %6zu %12llu %12s\n", mode.c_str(), r.n, static_cast<unsigned long long>(r.visits),
                  fixed(r.total_ms, 2).c_str());
    }
    std::printf("%-6s %6zu %12llu %12s %10s\n", mode.c_str(), m.headline.n,
                static_cast<unsigned long long>(m.headline.visits), fixed(m.headline.total_ms, 2).c_str(),
                std::isnan(m.visit_slope) ? "-" : fixed(m.visit_slope, 3).c_str());
  }
  const b::AppendModeReport* vdom = report.find(b::AppendMode::Vdom);
  const b::AppendModeReport* delta = report.find(b::AppendMode::Delta);
  if (vdom && delta) {
    std::printf("vdom/delta time at n=%zu: %s\n", a.nodes,
                fixed(vdom->headline.total_ms / std::max(delta->headline.total_ms, 1e-9), 1).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vdomc: template compiler, renderer and benchmark harness"};
  app.require_subcommand(1);

  CompileArgs compile_args;
  CLI::App* compile = app.add_subcommand("compile", "Compile a template to a module file");
  compile->add_option("template", compile_args.input, "Template source file")->required();
  compile->add_option("-o,--output", compile_args.output, "Module output path (stdout when omitted)");
  compile->add_flag("--no-hoist", compile_args.no_hoist, "Disable static hoisting");

  RenderArgs render_args;
  CLI::App* render = app.add_subcommand("render", "Render a module against a state and print the DOM");
  render->add_option("module", render_args.module, "Compiled module file")->required();
  render->add_option("--state", render_args.state, "State as inline JSON or a file path")->required();
  render->add_option("--against", render_args.against, "Second state; the DOM is patched to it");
  render->add_flag("--emit-patch", render_args.emit_patch, "Print the patch from --state to --against instead");
  render->add_flag("--naive", render_args.naive, "Diff with every fast path disabled");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->require_subcommand(1);
  auto add_common = [&](CLI::App* sub, const char* impl_help) {
    sub->add_option("--impl", bench_args.impls, impl_help)->delimiter(',');
    sub->add_option("--seed", bench_args.seed, "Workload seed")->capture_default_str();
    CLI::Option* json = sub->add_flag("--json", bench_args.json, "Print the JSON report");
    CLI::Option* table = sub->add_flag("--table", bench_args.table, "Print a table (default)");
    json->excludes(table);
    sub->add_flag("--timing", bench_args.timing, "Include wall-clock fields in the JSON report");
  };
  CLI::App* jsfb = bench->add_subcommand("jsfb", "Table benchmark (9 cases)");
  jsfb->add_option("--rows", bench_args.rows, "Base table size")->capture_default_str();
  jsfb->add_option("--samples", bench_args.samples, "Timed samples per case (>= 5)")->capture_default_str();
  jsfb->add_option("--warmup", bench_args.warmup, "Untimed warm-up runs per case")->capture_default_str();
  add_common(jsfb, "engine, naive, dom (comma separated; default all)");
  CLI::App* append = bench->add_subcommand("append", "Append scaling benchmark");
  append->add_option("--nodes", bench_args.nodes, "Headline node count")->capture_default_str();
  add_common(append, "dom, delta, keyed, vdom (comma separated; default all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kUsageError;
  }

  try {
    if (compile->parsed()) return run_compile(compile_args);
    if (render->parsed()) return run_render(render_args);
    if (jsfb->parsed()) return run_jsfb(bench_args);
    if (append->parsed()) return run_append(bench_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
