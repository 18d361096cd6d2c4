#include <doctest.h>

#include <regex>
#include <set>

#include "minihls/oracle.hpp"
#include "test_util.hpp"

using namespace minihls;
using testutil::read_corpus;

namespace {

ScalarizedKernel scalarized(const std::string &src) { return scalar_replace(testutil::transformed(src)); }

DataflowGraph lowered(const std::string &src) {
  DataflowGraph g = lower(scalarized(src));
  infer_widths(g);
  return g;
}

DataflowGraph scheduled(const std::string &src) { return testutil::scheduled_graph(scalarized(src)); }

const Node &output_node(const DataflowGraph &g, const std::string &name) {
  for (const Port &p : g.outputs)
    if (p.name == name) return g.node(p.node);
  FAIL("no output " << name);
  throw 0;
}

// Register depths of every path from a source to each node. Chained edges
// inside the feedback region add no register.
std::vector<std::set<int>> path_depths(const DataflowGraph &g) {
  std::vector<std::set<int>> d(g.nodes.size());
  for (const Node &n : g.nodes) {
    auto &mine = d[static_cast<size_t>(n.id)];
    if (n.op == Opcode::Input || n.op == Opcode::Lpr) {
      mine.insert(n.stage);
      continue;
    }
    if (n.op == Opcode::Const) continue;
    for (int o : n.operands) {
      const Node &src = g.node(o);
      if (src.op == Opcode::Const) continue;
      bool chained = (n.in_feedback || n.op == Opcode::Snx) && src.in_feedback;
      int w = (n.registered() && !chained) || (n.op == Opcode::Snx && !chained) ? 1 : 0;
      if (n.op == Opcode::Snx) w = 0;
      for (int x : d[static_cast<size_t>(o)]) mine.insert(x + w);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("FIR compute lowers to the multiply-add graph") {
  DataflowGraph g = lowered(read_corpus("fir.c"));
  CHECK(g.count(Opcode::Mul) == 4);
  CHECK(g.count(Opcode::Add) == 3);
  CHECK(g.count(Opcode::Sub) == 1);
  REQUIRE(g.outputs.size() == 1);
  CHECK(g.outputs[0].name == "Tmp0");
  CHECK(g.inputs.size() == 5);
  for (const Node &n : g.nodes)
    if (n.op == Opcode::Mul) CHECK(g.node(n.operands[0]).op == Opcode::Const);
}

TEST_CASE("FIR schedule") {
  DataflowGraph g = scheduled(read_corpus("fir.c"));
  CHECK(g.count(Opcode::Mul) == 4);
  CHECK(g.count(Opcode::Add) == 3);
  CHECK(g.count(Opcode::Sub) == 1);
  // One multiply layer, then ceil(log2(5)) = 3 binary add/sub layers.
  CHECK(g.depth == 4);
}

TEST_CASE("identity is a single copy") {
  DataflowGraph g = lowered(read_corpus("identity.c"));
  CHECK(g.count(Opcode::Copy) == 1);
  CHECK(g.nodes.size() == 2);
  DataflowGraph s = scheduled(read_corpus("identity.c"));
  CHECK(s.depth == 1);
}

TEST_CASE("accumulator feedback is the only cycle") {
  DataflowGraph g = scheduled(read_corpus("accumulator.c"));
  REQUIRE(g.feedbacks.size() == 1);
  const FeedbackPair &f = g.feedbacks[0];
  CHECK(g.node(f.lpr).op == Opcode::Lpr);
  CHECK(g.node(f.snx).op == Opcode::Snx);
  // Walk back from SNX to LPR through the one adder.
  int add = -1;
  std::vector<int> work{g.node(f.snx).operands[0]};
  std::set<int> seen;
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    if (!seen.insert(id).second) continue;
    if (g.node(id).op == Opcode::Add) add = id;
    for (int o : g.node(id).operands) work.push_back(o);
  }
  REQUIRE(add >= 0);
  CHECK(seen.count(f.lpr));
  CHECK(g.node(add).in_feedback);
  CHECK(g.feedback_stage == g.node(f.lpr).stage + 1);
  // Every edge other than SNX -> LPR points backwards in id order.
  for (const Node &n : g.nodes)
    for (int o : n.operands) CHECK(o < n.id);
}

TEST_CASE("mul_acc predicates the accumulation into a select") {
  DataflowGraph g = lowered(read_corpus("mul_acc.c"));
  REQUIRE(g.feedbacks.size() == 1);
  int lpr = g.feedbacks[0].lpr;
  const Node &next = g.node(g.node(g.feedbacks[0].snx).operands[0]);
  REQUIRE(next.op == Opcode::Select);
  CHECK(next.operands[2] == lpr);
  const Node &cond = g.node(next.operands[0]);
  CHECK(g.node(cond.operands[0]).name == "nd0");
  CHECK(g.count(Opcode::Mul) == 1);
}

TEST_CASE("if without else keeps the prior value") {
  DataflowGraph g = lowered("void k(int a, int b, int *o) { int r = b; if (a > 0) r = a; *o = r; }");
  REQUIRE(g.count(Opcode::Select) == 1);
  for (const Node &n : g.nodes)
    if (n.op == Opcode::Select) {
      int e = n.operands[2];
      while (g.node(e).op == Opcode::Copy) e = g.node(e).operands[0];
      CHECK(g.node(e).name == "b");
    }
}

TEST_CASE("nested ifs cascade selects and match the oracle on every condition") {
  const char *src = R"(
void k(int a, int b, int8_t x, int8_t y, int *o) {
  int r = x;
  if (a > 0) {
    if (b > 0) r = x + y;
    else r = x - y;
  } else {
    r = y;
  }
  *o = r;
})";
  KernelAst ast = testutil::front(src);
  ScalarizedKernel sk = scalarized(src);
  DataflowGraph g = testutil::scheduled_graph(sk);
  CHECK(g.count(Opcode::Select) == 2);
  for (int a : {-1, 1})
    for (int b : {-1, 1}) {
      KernelIO in;
      in.scalars = {{"a", a}, {"b", b}, {"x", 100}, {"y", -7}};
      CHECK(testutil::run_graph(sk, g, in) == interpret_oracle(ast, in));
    }
}

TEST_CASE("select totality over four condition bits") {
  const char *src = R"(
void k(uint1_t c0, uint1_t c1, uint1_t c2, uint1_t c3, int8_t x, int *o) {
  int r = 0;
  if (c0) r = x;
  if (c1) { if (c2) r = r + 1; else r = r - 1; }
  if (c3) r = r * 2;
  *o = r;
})";
  KernelAst ast = testutil::front(src);
  ScalarizedKernel sk = scalarized(src);
  DataflowGraph g = testutil::scheduled_graph(sk);
  for (int bits = 0; bits < 16; ++bits) {
    KernelIO in;
    in.scalars = {{"c0", bits & 1}, {"c1", (bits >> 1) & 1}, {"c2", (bits >> 2) & 1}, {"c3", (bits >> 3) & 1},
                  {"x", 37}};
    CHECK(testutil::run_graph(sk, g, in) == interpret_oracle(ast, in));
  }
}

TEST_CASE("a*b + c schedules in two stages") {
  DataflowGraph g = scheduled("void k(int8_t a, int8_t b, int8_t c, int *o) { *o = a*b + c; }");
  CHECK(g.depth == 2);
  int c_input = -1;
  for (const Port &p : g.inputs)
    if (p.name == "c") c_input = p.node;
  bool delayed = false;
  for (const Node &n : g.nodes) {
    if (n.op == Opcode::Mul) CHECK(n.stage == 1);
    if (n.op == Opcode::Add) CHECK(n.stage == 2);
    if (n.op == Opcode::Copy && n.latched && n.operands[0] == c_input) {
      delayed = true;
      CHECK(n.stage == 1);
    }
  }
  CHECK(delayed);
}

TEST_CASE("width rules") {
  auto out_width = [](const std::string &decl, const std::string &expr) {
    DataflowGraph g = lowered("void k(" + decl + ", int *o) { *o = " + expr + "; }");
    const Node &n = output_node(g, "o");
    return g.node(n.op == Opcode::Copy ? n.operands[0] : n.id);
  };
  CHECK(out_width("uint8_t a, uint8_t b", "a + b").width == 9);
  CHECK(out_width("uint8_t a, uint8_t b", "a * b").width == 16);
  CHECK(out_width("uint8_t a, uint8_t b", "a - b").width == 9);
  CHECK(out_width("uint8_t a, uint8_t b", "a - b").is_signed);
  CHECK(out_width("uint8_t a, int8_t b", "a + b").width == 10);
  CHECK(out_width("uint8_t a, uint8_t b", "a & b").width == 8);
  CHECK(out_width("uint8_t a, uint8_t b", "a << 3").width == 11);
  CHECK(out_width("uint8_t a, uint8_t b", "a < b").width == 1);

  // 3*A0 with A0 unsigned 8 bits: width(3) = 2, product 10 bits, and the
  // largest product 3*255 = 765 fits below 1024.
  DataflowGraph g = lowered("void k(uint8_t A[4], int C[4]) { for (int i = 0; i < 4; i++) C[i] = 3*A[i]; }");
  const Node &mul = g.node(output_node(g, "Tmp0").operands[0]);
  REQUIRE(mul.op == Opcode::Mul);
  CHECK(g.node(mul.operands[0]).width == 2);
  CHECK(mul.width == 10);
  CHECK(3 * 255 < (1 << mul.width));
  CHECK(3 * 255 >= (1 << (mul.width - 1)));
}

TEST_CASE("feedback keeps its declared width") {
  DataflowGraph g = scheduled(read_corpus("accumulator.c"));
  const Node &lpr = g.node(g.feedbacks[0].lpr);
  CHECK(lpr.width == 32);
  CHECK(g.node(g.feedbacks[0].snx).width == 32);
}

TEST_CASE("width overflow and feedback depth errors") {
  CHECK(testutil::error_kind([] {
          lowered("void k(int a, int b, int c, int *o) { *o = a*b*c; }");
        }) == ErrorKind::WidthOverflow);
  CHECK(testutil::error_kind([] {
          scheduled("void k(int8_t A[4], int *o) { int s = 1; for (int i = 0; i < 4; i++) s = s * A[i]; *o = s; }");
        }) == ErrorKind::FeedbackTooDeep);
  CHECK(testutil::error_kind([] { lowered("void k(int a, int *o) { *o = a / 3; }"); }) == ErrorKind::Lowering);
  CHECK(testutil::error_kind([] { lowered("void k(int a, int b, int *o) { *o = a << b; }"); }) ==
        ErrorKind::Lowering);
}

TEST_CASE("unrolled accumulation keeps one adder in the feedback cycle") {
  DataflowGraph g = scheduled(R"(
void k(int8_t A[16], int *o) {
  int s = 0;
  for (int i = 0; i < 16; i = i + 4) {
    s = s + A[i];
    s = s + A[i+1];
    s = s + A[i+2];
    s = s + A[i+3];
  }
  *o = s;
})");
  int chained = 0;
  for (const Node &n : g.nodes) chained += n.in_feedback && n.registered();
  CHECK(chained == 1);
}

TEST_CASE("lookup tables bind and read entries") {
  ScalarizedKernel sk = scalarized(read_corpus("lut_cos.c"));
  DataflowGraph g = testutil::scheduled_graph(sk);
  REQUIRE(g.count(Opcode::Lut) == 1);
  for (const Node &n : g.nodes)
    if (n.op == Opcode::Lut) {
      CHECK(n.contents.size() == 1024);
      CHECK(n.address_width == 10);
      CHECK(n.width == 16);
    }
  KernelIO in;
  in.memories["phase"].assign(32, 0);
  in.memories["phase"][1] = 256;
  KernelIO out = testutil::run_graph(sk, g, in);
  CHECK(out.memories["out"][0] == 32767);
  CHECK(out.memories["out"][1] == 0);

  std::string short_file;
  for (int k = 0; k < 1023; ++k) short_file += "1\n";
  CHECK(testutil::error_message([&] { parse_init_text(short_file, 1024, {false, 16}); })
            .find("expected 1024 entries") != std::string::npos);
  CHECK(testutil::error_message([&] { parse_init_text("70000\n", 1, {false, 16}); }).find("exceeds 16 bits") !=
        std::string::npos);
}

TEST_CASE("dump format") {
  DataflowGraph g = scheduled(read_corpus("fir.c"));
  std::string text = dump(g);
  std::regex node_line(R"(^\d+: [A-Z]+\(\d+,[su],\d+\)( .*)?$)");
  std::istringstream in(text);
  std::string line;
  int nodes = 0;
  while (std::getline(in, line)) {
    if (line.rfind("in ", 0) == 0 || line.rfind("out ", 0) == 0 || line.rfind("feedback ", 0) == 0 ||
        line.rfind("depth ", 0) == 0)
      continue;
    CHECK_MESSAGE(std::regex_match(line, node_line), line);
    ++nodes;
  }
  CHECK(nodes == static_cast<int>(g.nodes.size()));
  CHECK(dump(scheduled(read_corpus("fir.c"))) == text);
}

TEST_CASE("corpus graph properties") {
  std::mt19937_64 rng(77);
  for (const std::string &name : testutil::corpus_kernels()) {
    CAPTURE(name);
    KernelAst ast = testutil::front(read_corpus(name + ".c"));
    ScalarizedKernel sk = scalarized(read_corpus(name + ".c"));
    DataflowGraph g = testutil::scheduled_graph(sk);
    LutTable luts = testutil::corpus_luts(ast);

    // SSA and acyclicity: ids are positions and operands precede users.
    for (size_t k = 0; k < g.nodes.size(); ++k) {
      CHECK(g.nodes[k].id == static_cast<int>(k));
      for (int o : g.nodes[k].operands) CHECK(o < g.nodes[k].id);
    }

    // Balance: every node sees a single register depth on all paths.
    auto depths = path_depths(g);
    for (const Node &n : g.nodes) {
      if (n.op == Opcode::Const) continue;
      const auto &d = depths[static_cast<size_t>(n.id)];
      CHECK_MESSAGE(d.size() == 1, "node " << n.id);
      if (d.size() == 1) CHECK(*d.begin() == n.stage);
    }
    for (const Port &p : g.outputs) CHECK(g.node(p.node).stage == g.depth);

    // Functional equivalence with the oracle, and width safety on the way.
    for (int v = 0; v < 25; ++v) {
      KernelIO in = testutil::random_inputs(ast, rng);
      CHECK(testutil::run_graph(sk, g, in) == interpret_oracle(ast, in, luts));
    }
    auto state = initial_state(g);
    for (int v = 0; v < 100; ++v) {
      std::map<std::string, int64_t> values;
      for (const Port &p : g.inputs) {
        std::uniform_int_distribution<int64_t> d(min_value(p.type.width, p.type.is_signed),
                                                 max_value(p.type.width, p.type.is_signed));
        values[p.name] = d(rng);
      }
      auto exact = evaluate_nodes(g, values, state);
      for (const Node &n : g.nodes)
        CHECK_MESSAGE(fits(exact[static_cast<size_t>(n.id)], n.width, n.is_signed), name << " node " << n.id);
      evaluate(g, values, state);
    }
  }
}
