// Command-line driver: compile, sim and report for one kernel.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "minihls/io.hpp"
#include "minihls/netlist.hpp"
#include "minihls/oracle.hpp"
#include "minihls/pipeline.hpp"
#include "minihls/simulator.hpp"
#include "minihls/vhdl.hpp"

namespace fs = std::filesystem;
using namespace minihls;

namespace {

struct Common {
  std::string input;
  std::vector<std::string> unroll, trips, luts;
  int bus_width = 32;
  int unroll_limit = 16;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("input", c.input, "kernel source")->required();
  cmd->add_option("--unroll", c.unroll, "loop=factor or loop=full");
  cmd->add_option("--trip", c.trips, "loop=count trip-count override");
  cmd->add_option("--lut", c.luts, "name=path lookup table init file");
  cmd->add_option("--bus-width,-B", c.bus_width, "memory bus width in bits")->check(CLI::IsMember({8, 16, 32, 64}));
  cmd->add_option("--unroll-limit", c.unroll_limit, "inner loops up to this trip count unroll fully");
}

std::pair<std::string, std::string> split_binding(const std::string &text, const char *what) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    fail(ErrorKind::Config, std::string(what) + " must be name=value: " + text);
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CompileOptions options(const Common &c) {
  CompileOptions o;
  o.design.bus_width = c.bus_width;
  o.unroll.limit = c.unroll_limit;
  for (const std::string &u : c.unroll) o.unroll.directives.insert(parse_unroll(u));
  for (const std::string &t : c.trips) {
    auto [loop, n] = split_binding(t, "--trip");
    try {
      o.trip_overrides[loop] = std::stoll(n);
    } catch (const std::exception &) {
      fail(ErrorKind::Config, "bad trip count '" + n + "' for loop " + loop);
    }
  }
  for (const std::string &l : c.luts) o.lut_bindings.insert(split_binding(l, "--lut"));
  return o;
}

// Files appear together and only once everything was generated.
class Outputs {
public:
  void add(const fs::path &path, std::string text) { files_.push_back({path, std::move(text)}); }
  void commit() {
    std::vector<fs::path> temps;
    for (const auto &[path, text] : files_) {
      fs::path tmp = path;
      tmp += ".tmp";
      std::ofstream out(tmp, std::ios::binary);
      out << text;
      if (!out.flush()) {
        for (const fs::path &t : temps) fs::remove(t);
        fail(ErrorKind::Config, "cannot write " + path.string());
      }
      temps.push_back(tmp);
    }
    for (size_t k = 0; k < files_.size(); ++k) fs::rename(temps[k], files_[k].first);
  }

private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

KernelIO load_vectors(const std::string &path, const KernelAst &ast, std::vector<std::string> &log) {
  if (!path.empty()) {
    log.push_back("vectors " + path);
    return parse_vectors_json(read_text(path));
  }
  uint64_t seed = vector_seed();
  log.push_back("vectors random seed=" + std::to_string(seed));
  return random_vectors(ast, seed);
}

std::string join(const std::vector<std::string> &lines) {
  std::string s;
  for (const std::string &l : lines) s += l + "\n";
  return s;
}

int cmd_compile(const Common &c, const std::string &output, const std::string &vectors, const std::string &lut_style,
                bool dump_ir, bool dump_netlist, bool dump_passes) {
  Compilation comp = compile(read_text(c.input), options(c));
  EmitConfig cfg;
  cfg.lut_style = lut_style == "rom" ? LutStyle::RomComponent : LutStyle::ConstantArray;
  fs::path out = output.empty() ? fs::path(comp.design.netlist.name + ".vhd") : fs::path(output);
  fs::path stem = out.parent_path() / out.stem();

  std::vector<std::string> log = comp.log;
  KernelIO in = load_vectors(vectors, comp.source, log);
  KernelIO want = interpret_oracle(comp.source, in, comp.luts);

  Outputs files;
  files.add(out, emit_vhdl(comp.design.netlist, cfg));
  fs::path tb = stem;
  tb += "_tb.vhd";
  files.add(tb, emit_testbench(comp.design.netlist, in, want, cfg));
  if (dump_ir) files.add(fs::path(stem) += ".ir", dump(comp.graph));
  if (dump_netlist) files.add(fs::path(stem) += ".net", dump(comp.design.netlist));
  if (dump_passes) files.add(fs::path(stem) += ".passes", pass_trace(comp));
  log.push_back("wrote " + out.string());
  log.push_back("wrote " + tb.string());
  files.add(fs::path(stem) += ".log", join(log));
  files.commit();
  std::cout << join(log);
  return 0;
}

int cmd_sim(const Common &c, const std::string &vectors, bool check_oracle, const std::string &trace,
            int64_t max_cycles) {
  Compilation comp = compile(read_text(c.input), options(c));
  std::vector<std::string> log;
  SimConfig cfg;
  cfg.inputs = load_vectors(vectors, comp.source, log);
  cfg.max_cycles = max_cycles;
  cfg.probes = {{"result", "dp.result_valid", "dp.result_data"}};
  SimResult r = simulate(comp.design.netlist, cfg);
  for (const std::string &l : log) std::cout << l << "\n";
  std::cout << "outputs " << to_json(r.outputs) << "\n";
  std::cout << metrics_text(measure(r.trace));
  if (!trace.empty()) {
    Outputs files;
    files.add(trace, trace_jsonl(r.trace));
    files.commit();
  }
  int status = 0;
  if (!r.trace.width_violations.empty()) {
    const WidthViolation &w = r.trace.width_violations.front();
    std::cout << "width violations=" << r.trace.width_violations.size() << " first " << w.signal << " at cycle "
              << w.cycle << "\n";
    status = 2;
  }
  if (check_oracle) {
    bool same = r.outputs == interpret_oracle(comp.source, cfg.inputs, comp.luts);
    std::cout << "oracle " << (same ? "PASS" : "FAIL") << "\n";
    if (!same && status == 0) status = 1;
  }
  return status;
}

int cmd_report(const Common &c) {
  Compilation comp = compile(read_text(c.input), options(c));
  const Design &d = comp.design;
  RegisterCensus rc = census(d.netlist);
  std::cout << "kernel " << d.netlist.name << "\n";
  std::cout << "trip " << d.trip << "\n";
  std::cout << "depth " << comp.graph.depth << "\n";
  std::cout << "registers " << rc.total();
  for (const auto &[role, k] : rc.by_role) std::cout << " " << reg_role_name(role) << "=" << k;
  std::cout << " fsm=" << rc.fsm_states << "\n";
  int64_t cadence = d.interval;
  for (const WindowSpec &ws : d.inputs) {
    std::cout << "input " << describe(ws) << "\n";
    cadence = std::max(cadence, ws.inner_advance());
  }
  int64_t per_firing = 0;
  for (const WindowSpec &ws : d.outputs) {
    std::cout << "output " << describe(ws) << "\n";
    per_firing += static_cast<int64_t>(ws.offsets.size());
  }
  for (const Port &p : comp.graph.outputs) {
    // The computed width, behind the coercion to the port type.
    const Node *src = &comp.graph.node(p.node);
    while (src->op == Opcode::Copy && !src->operands.empty()) src = &comp.graph.node(src->operands[0]);
    const int width = src->width;
    std::cout << "result " << p.name << " inferred " << width << (src->is_signed ? "s" : "u") << " port "
              << print_type(p.type) << "\n";
  }
  std::cout << "throughput 1 firing per " << std::max<int64_t>(cadence, 1) << " cycle(s), " << per_firing
            << " output element(s) per firing\n";
  std::cout << "widths\n" << dump(comp.graph);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"minihls: restricted C loop kernels to pipelined VHDL"};
  app.require_subcommand(1);

  Common common;
  std::string output, vectors, lut_style = "array", trace;
  bool dump_ir = false, dump_netlist = false, dump_passes = false, check_oracle = false;
  int64_t max_cycles = 100000;

  CLI::App *compile_cmd = app.add_subcommand("compile", "emit <kernel>.vhd, <kernel>_tb.vhd and a pass log");
  add_common(compile_cmd, common);
  compile_cmd->add_option("-o,--output", output, "VHDL output path");
  compile_cmd->add_option("--vectors", vectors, "test vectors for the bench (JSON)");
  compile_cmd->add_option("--lut-style", lut_style, "array or rom")->check(CLI::IsMember({"array", "rom"}));
  compile_cmd->add_flag("--dump-ir", dump_ir, "write the scheduled graph");
  compile_cmd->add_flag("--dump-netlist", dump_netlist, "write the linked netlist");
  compile_cmd->add_flag("--dump-passes", dump_passes, "write a snapshot after each pass");

  CLI::App *sim_cmd = app.add_subcommand("sim", "simulate the generated netlist");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--vectors", vectors, "input images (JSON); random when absent");
  sim_cmd->add_flag("--check-oracle", check_oracle, "compare with the reference interpreter");
  sim_cmd->add_option("--trace", trace, "write a JSON-lines trace");
  sim_cmd->add_option("--max-cycles", max_cycles, "cycle limit");

  CLI::App *report_cmd = app.add_subcommand("report", "widths, depth, registers, windows and throughput");
  add_common(report_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (compile_cmd->parsed())
      return cmd_compile(common, output, vectors, lut_style, dump_ir, dump_netlist, dump_passes);
    if (sim_cmd->parsed()) return cmd_sim(common, vectors, check_oracle, trace, max_cycles);
    return cmd_report(common);
  } catch (const Error &e) {
    std::cerr << "minihls: " << error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Internal ? 2 : 1;
  } catch (const std::exception &e) {
    std::cerr << "minihls: internal: " << e.what() << "\n";
    return 2;
  }
}
