#include "test_util.hpp"

#include <regex>

#include "minihls/memif.hpp"
#include "minihls/netlist.hpp"
#include "minihls/oracle.hpp"
#include "minihls/simulator.hpp"

using namespace minihls;
using testutil::read_corpus;

namespace {

struct Built {
  KernelAst ast;
  ScalarizedKernel sk;
  DataflowGraph g;
  LutTable luts;
  Design d;
};

Built build(const std::string &src, DesignConfig cfg = {}) {
  Built b;
  b.ast = testutil::front(src);
  b.sk = scalar_replace(testutil::transformed(src));
  b.g = testutil::scheduled_graph(b.sk);
  b.luts = testutil::corpus_luts(b.ast);
  b.d = build_design(b.sk, b.g, cfg, b.luts);
  return b;
}

SimConfig sim_config(const KernelIO &in) {
  SimConfig c;
  c.inputs = in;
  c.probes = {{"result", "dp.result_valid", "dp.result_data"}};
  return c;
}

}  // namespace

TEST_CASE("corpus netlists are well formed") {
  for (const std::string &name : testutil::corpus_kernels()) {
    CAPTURE(name);
    Built b = build(read_corpus(name + ".c"));
    auto report = check(b.d.netlist);
    for (const auto &line : report) MESSAGE(line);
    CHECK(report.empty());
  }
}

TEST_CASE("simulation matches the oracle on the corpus") {
  std::mt19937_64 rng(2024);
  for (const std::string &name : testutil::corpus_kernels()) {
    CAPTURE(name);
    Built b = build(read_corpus(name + ".c"));
    for (int v = 0; v < 25; ++v) {
      KernelIO in = testutil::random_inputs(b.ast, rng);
      SimResult r = simulate(b.d.netlist, sim_config(in));
      KernelIO want = interpret_oracle(b.ast, in, b.luts);
      CHECK(r.outputs == want);
      CHECK(r.trace.width_violations.empty());
      if (r.outputs != want) break;
    }
  }
}

namespace {

KernelIO tagged(const KernelAst &ast) {
  KernelIO io;
  for (const ArrayDecl &a : ast.arrays)
    if (a.direction == Direction::In)
      for (int64_t k = 0; k < a.size(); ++k) io.memories[a.name].push_back(k % (max_value(a.element.width, a.element.is_signed) + 1));
  return io;
}

WindowSpec input_window(const Built &b, const std::string &array) {
  for (const WindowSpec &ws : b.d.inputs)
    if (ws.array == array) return ws;
  FAIL("no window " << array);
  throw 0;
}

// The corpus FIR with a byte-wide result, so every bus width can carry it.
const char *kFir8 =
    "void fir8(uint8_t A[21], uint8_t C[17]) { for (int i = 0; i < 17; i++) {"
    " C[i] = 3*A[i] + 5*A[i+1] + 7*A[i+2] + 9*A[i+3] - A[i+4]; } }";

Netlist fragment(const std::string &name) {
  Netlist n;
  n.name = name;
  return n;
}

}  // namespace

TEST_CASE("address streams fetch every word once in order") {
  Built fir = build(read_corpus("fir.c"));
  WindowSpec ws = input_window(fir, "A");
  // 21 bytes on a 32-bit bus: words 0..5.
  CHECK(gen_address_stream(ws, fir.d.trip) == std::vector<int64_t>{0, 1, 2, 3, 4, 5});

  Built fir16 = build(kFir8, {16, 1024});
  auto words16 = gen_address_stream(input_window(fir16, "A"), fir16.d.trip);
  CHECK(words16.size() == 11);
  for (size_t k = 0; k < words16.size(); ++k) CHECK(words16[k] == static_cast<int64_t>(k));

  Built acc = build("void f(int A[4], int *o) { int s = 0; for (int i = 0; i < 4; i++) { s = s + A[i]; } *o = s; }");
  CHECK(gen_address_stream(input_window(acc, "A"), acc.d.trip) == std::vector<int64_t>{0, 1, 2, 3});

  // A window starting past the array origin skips the leading words.
  Built off = build("void f(uint8_t A[16], uint8_t B[8]) { for (int i = 0; i < 8; i++) { B[i] = A[i + 8]; } }");
  CHECK(gen_address_stream(input_window(off, "A"), off.d.trip) == std::vector<int64_t>{2, 3});
}

TEST_CASE("fir on a ramp") {
  Built b = build(read_corpus("fir.c"));
  KernelIO in = tagged(b.ast);
  SimResult r = simulate(b.d.netlist, sim_config(in));
  const auto &c = r.outputs.memories.at("C");
  REQUIRE(c.size() == 17);
  // 3*i + 5*(i+1) + 7*(i+2) + 9*(i+3) - (i+4) = 23*i + 42
  for (int64_t i = 0; i < 17; ++i) CHECK(written_value(r, "C", i) == 23 * i + 42);
  CHECK(c[0] == 42);
  CHECK(c[1] == 65);
}

TEST_CASE("each input element is fetched once") {
  for (int bus : {8, 16, 32, 64}) {
    CAPTURE(bus);
    Built b = build(kFir8, {bus, 1024});
    SimResult r = simulate(b.d.netlist, sim_config(tagged(b.ast)));
    Metrics m = measure(r.trace);
    CHECK(m.element_reads.at("A") == 21);
    CHECK(m.words_read.at("A") == (21 * 8 + bus - 1) / bus);
    CHECK(r.outputs == interpret_oracle(b.ast, tagged(b.ast)));
  }
}

TEST_CASE("windows carry the addressed elements") {
  for (int bus : {8, 16, 32, 64}) {
    CAPTURE(bus);
    Built b = build(kFir8, {bus, 1024});
    SimConfig cfg = sim_config(tagged(b.ast));
    cfg.probes.push_back({"window", "ctrl.fire", "buf_A.window_data"});
    SimResult r = simulate(b.d.netlist, cfg);
    int64_t k = 0;
    for (const SimCycle &c : r.trace.cycles)
      for (const ProbeHit &h : c.probes) {
        if (h.label != "window") continue;
        for (int j = 0; j < 5; ++j) CHECK(field(h, j, 8, false) == k + j);
        ++k;
      }
    CHECK(k == 17);
  }
}

TEST_CASE("throughput") {
  Built fir = build(read_corpus("fir.c"));
  Metrics m = measure(simulate(fir.d.netlist, sim_config(tagged(fir.ast))).trace);
  CHECK(m.results == 17);
  CHECK(m.steady_results_per_cycle == doctest::Approx(1.0));
  // Fill: one word fetch, then an element per cycle into the five slots.
  CHECK(m.first_result_cycle < 5 + 2 + fir.d.depth + 4);

  Built acc = build(read_corpus("accumulator.c"));
  Metrics ma = measure(simulate(acc.d.netlist, sim_config(tagged(acc.ast))).trace);
  CHECK(ma.results == 16);
  CHECK(ma.steady_results_per_cycle == doctest::Approx(1.0));
  CHECK(ma.total_cycles <= 16 + acc.d.depth + 8);

  Built dct = build(read_corpus("dct8.c"));
  Metrics md = measure(simulate(dct.d.netlist, sim_config(tagged(dct.ast))).trace);
  CHECK(md.results == 8);
  CHECK(md.outputs_per_firing == doctest::Approx(8.0));
  CHECK(md.elements_written == 64);
}

TEST_CASE("single firing needs no state machine") {
  Built b = build(read_corpus("identity.c"));
  CHECK(b.d.trip == 1);
  CHECK(b.d.netlist.fsms.empty());
  CHECK(census(b.d.netlist).fsm_states == 0);
  KernelIO in;
  in.scalars["a"] = -5;
  SimResult r = simulate(b.d.netlist, sim_config(in));
  CHECK(r.outputs.scalars.at("out") == -5);

  Built fir = build(read_corpus("fir.c"));
  REQUIRE(fir.d.netlist.fsms.size() == 1);
  CHECK(fir.d.netlist.fsms[0].states == std::vector<std::string>{"IDLE", "FILL", "STEADY", "DRAIN", "DONE"});
}

TEST_CASE("register census follows the register list") {
  for (const std::string &name : testutil::corpus_kernels()) {
    CAPTURE(name);
    Built b = build(read_corpus(name + ".c"));
    std::map<RegRole, int> want;
    for (const NetReg &r : b.d.netlist.regs) ++want[r.role];
    RegisterCensus got = census(b.d.netlist);
    for (const auto &[role, k] : want) CHECK(got.by_role[role] == k);
    CHECK(got.total() == static_cast<int>(b.d.netlist.regs.size() + b.d.netlist.fsms.size()));
    int delays = 0;
    for (const Node &n : b.g.nodes) delays += n.op == Opcode::Copy && n.registered();
    CHECK(got.by_role[RegRole::Delay] == delays);
  }
}

TEST_CASE("simulation is deterministic and bounded") {
  Built b = build(read_corpus("dct8.c"));
  std::mt19937_64 rng(5);
  KernelIO in = testutil::random_inputs(b.ast, rng);
  SimConfig cfg = sim_config(in);
  SimResult r1 = simulate(b.d.netlist, cfg);
  SimResult r2 = simulate(b.d.netlist, cfg);
  CHECK(trace_jsonl(r1.trace) == trace_jsonl(r2.trace));
  CHECK(r1.trace.total_cycles == r2.trace.total_cycles);

  cfg.max_cycles = 10;
  CHECK(testutil::error_kind([&] { simulate(b.d.netlist, cfg); }) == ErrorKind::Timeout);
}

TEST_CASE("input vectors must match the ports") {
  Built b = build(read_corpus("fir.c"));
  KernelIO in = tagged(b.ast);
  KernelIO missing;
  CHECK(testutil::error_kind([&] { simulate(b.d.netlist, sim_config(missing)); }) == ErrorKind::VectorShape);
  KernelIO shorter = in;
  shorter.memories["A"].pop_back();
  CHECK(testutil::error_message([&] { simulate(b.d.netlist, sim_config(shorter)); }).find("20 elements") !=
        std::string::npos);
  KernelIO wide = in;
  wide.memories["A"][3] = 256;
  CHECK(testutil::error_kind([&] { simulate(b.d.netlist, sim_config(wide)); }) == ErrorKind::VectorShape);

  Built id = build(read_corpus("identity.c"));
  CHECK(testutil::error_kind([&] { simulate(id.d.netlist, sim_config({})); }) == ErrorKind::VectorShape);
}

TEST_CASE("unwritten outputs are reported") {
  Built b = build("void f(uint8_t A[8], uint8_t B[16]) { for (int i = 0; i < 8; i++) { B[i + 4] = A[i]; } }");
  KernelIO in = tagged(b.ast);
  SimResult r = simulate(b.d.netlist, sim_config(in));
  CHECK(written_value(r, "B", 4) == 0);
  CHECK(written_value(r, "B", 11) == 7);
  CHECK(testutil::error_kind([&] { written_value(r, "B", 3); }) == ErrorKind::XValue);
  CHECK(testutil::error_kind([&] { written_value(r, "B", 12); }) == ErrorKind::XValue);
  CHECK(r.outputs == interpret_oracle(b.ast, in));
}

TEST_CASE("bus width and buffer limits") {
  CHECK(testutil::error_kind([] { build(read_corpus("fir.c"), {24, 1024}); }) == ErrorKind::Config);
  CHECK(testutil::error_kind([] { build(read_corpus("fir.c"), {32, 32}); }) == ErrorKind::Config);
}

TEST_CASE("unrolled variants still match the oracle") {
  std::mt19937_64 rng(99);
  struct Variant {
    std::string kernel, loop;
    int64_t factor;
  };
  for (const Variant &v : std::vector<Variant>{{"accumulator", "i", 4}, {"accumulator", "i", 16},
                                              {"fir", "i", 17}, {"bit_correlator", "i", 2}}) {
    CAPTURE(v.kernel);
    CAPTURE(v.factor);
    UnrollPolicy policy;
    policy.directives[v.loop].factor = v.factor;
    std::string src = read_corpus(v.kernel + ".c");
    KernelAst ast = testutil::front(src);
    ScalarizedKernel sk = scalar_replace(testutil::transformed(src, policy));
    DataflowGraph g = testutil::scheduled_graph(sk);
    Design d = build_design(sk, g, {});
    CHECK(check(d.netlist).empty());
    for (int k = 0; k < 10; ++k) {
      KernelIO in = testutil::random_inputs(ast, rng);
      CHECK(simulate(d.netlist, sim_config(in)).outputs == interpret_oracle(ast, in));
    }
  }
}

TEST_CASE("link reports driver conflicts") {
  Netlist a = fragment("a"), b = fragment("b");
  NetBuilder ba(a, ""), bb(b, "");
  ba.konst(1, {1, false});
  a.nodes.back().out = "result_valid";
  bb.konst(0, {1, false});
  b.nodes.back().out = "result_valid";
  CHECK(testutil::error_message([&] { link({a, b}, "top"); }).find("multiple drivers: result_valid") !=
        std::string::npos);

  Netlist c = fragment("c");
  NetBuilder bc(c, "");
  bc.import("missing", {4, false});
  CHECK(testutil::error_message([&] { link({c}, "top"); }).find("undriven signal: missing") != std::string::npos);

  Netlist d = fragment("d"), e = fragment("e");
  NetBuilder bd(d, ""), be(e, "");
  bd.konst(3, {4, false});
  d.nodes.back().out = "x";
  be.import("x", {8, false});
  CHECK(testutil::error_kind([&] { link({d, e}, "top"); }) == ErrorKind::Link);
  CHECK(testutil::error_message([&] { link({d, e}, "top"); }).find("width conflict: x") != std::string::npos);
}

TEST_CASE("check finds malformed netlists") {
  Netlist n = fragment("n");
  n.nodes.push_back({NetOp::Not, "a", {"b"}, {1, false}, 0, ""});
  n.nodes.push_back({NetOp::Not, "b", {"a"}, {1, false}, 0, ""});
  auto report = check(n);
  bool cycle = false;
  for (const auto &line : report) cycle = cycle || line.find("combinational cycle {a,b}") != std::string::npos;
  CHECK(cycle);

  Netlist w = fragment("w");
  w.ports.push_back({"x", PortDir::In, {8, false}});
  w.ports.push_back({"y", PortDir::In, {8, false}});
  w.nodes.push_back({NetOp::Add, "s", {"x", "y"}, {8, false}, 0, ""});
  report = check(w);
  bool mismatch = false;
  for (const auto &line : report) mismatch = mismatch || line.find("width mismatch") != std::string::npos;
  CHECK(mismatch);
  w.nodes.back().shape = {9, false};
  CHECK(check(w).empty());
}

TEST_CASE("netlist dump sections") {
  Built b = build(read_corpus("lut_pdf.c"));
  std::string text = dump(b.d.netlist);
  for (const char *section : {"PORTS\n", "REGS\n", "NODES\n", "FSMS\n", "MEMS\n"})
    CHECK(text.find(section) != std::string::npos);
  CHECK(std::regex_search(text, std::regex("\nrom pdf ")));
}

TEST_CASE("two rolled loops walk a 2D window") {
  const std::string src =
      "void blur(uint8_t A[6][7], uint16_t B[4][5]) {"
      " for (int i = 0; i < 4; i++) { for (int j = 0; j < 5; j++) {"
      " B[i][j] = A[i][j] + A[i][j+2] + A[i+2][j] + A[i+2][j+2]; } } }";
  UnrollPolicy policy;
  policy.directives["j"].factor = 1;
  KernelAst ast = testutil::front(src);
  ScalarizedKernel sk = scalar_replace(testutil::transformed(src, policy));
  CHECK(sk.loop.trip() == 20);
  DataflowGraph g = testutil::scheduled_graph(sk);
  Design d = build_design(sk, g, {});
  CHECK(check(d.netlist).empty());
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    KernelIO in = testutil::random_inputs(ast, rng);
    SimResult r = simulate(d.netlist, sim_config(in));
    CHECK(r.outputs == interpret_oracle(ast, in));
    // The last window ends on A[5][6], so the whole array streams in once.
    CHECK(measure(r.trace).element_reads.at("A") == 42);
  }
}
