#include <doctest.h>

#include <map>
#include <set>

#include "minihls/oracle.hpp"
#include "test_util.hpp"

using namespace minihls;
using testutil::front;
using testutil::read_corpus;
using testutil::transformed;

namespace {

std::string folded_rhs(const std::string &expr) {
  KernelAst ast = fold_constants(front("void k(int x, int *o) { *o = " + expr + "; }"));
  return print(*ast.kernel().body.at(0).rhs);
}

int count_loops(const std::vector<Stmt> &body) {
  int n = 0;
  visit_stmts(body, [&](const Stmt &s) { n += s.kind == StmtKind::For; });
  return n;
}

ScalarizedKernel scalarized(const std::string &src, const UnrollPolicy &policy = {}) {
  return scalar_replace(transformed(src, policy));
}

}  // namespace

TEST_CASE("folding evaluates constant subtrees") {
  CHECK(folded_rhs("3*2+x") == "6 + x");
  CHECK(folded_rhs("(1<<4)-1") == "15");
  CHECK(folded_rhs("x*1") == "x");
  CHECK(folded_rhs("x+0") == "x");
  CHECK(folded_rhs("0+x*1-0") == "x");
  CHECK(folded_rhs("x*(2-2)") == "0");
}

TEST_CASE("folding rejects literals beyond 32 bits") {
  CHECK(testutil::error_kind([] { folded_rhs("65536*65536"); }) == ErrorKind::Overflow);
}

TEST_CASE("full unrolling of a two-trip loop") {
  const char *src = R"(
void k(int8_t A[2], int *o) {
  int s = 0;
  for (int j = 0; j < 2; j++) s = s + A[j];
  *o = s;
})";
  KernelAst ast = unroll_full(front(src), "j");
  CHECK(count_loops(ast.kernel().body) == 0);
  ScalarizedKernel sk = scalar_replace(fold_constants(ast));
  CHECK(sk.loop.indices.empty());
  std::string body = print(sk.compute);
  CHECK(body.find("s = s + A0;\ns = s + A1;") != std::string::npos);
}

TEST_CASE("DCT inner loops unroll into replicated bodies") {
  KernelAst ast = transformed(read_corpus("dct8.c"));
  const Stmt &outer = ast.kernel().body.at(0);
  REQUIRE(outer.kind == StmtKind::For);
  CHECK(outer.name == "b");
  CHECK(count_loops(outer.body) == 0);
  ScalarizedKernel sk = scalar_replace(ast);
  CHECK(sk.loads.size() == 8);
  CHECK(sk.stores.size() == 8);
  CHECK(sk.loop.trip() == 8);
}

TEST_CASE("trip count one leaves the body once") {
  KernelAst ast = unroll_full(front("void k(int a, int *o) { for (int j = 0; j < 1; j++) *o = a + j; }"), "j");
  REQUIRE(ast.kernel().body.size() == 1);
  CHECK(print(*ast.kernel().body[0].rhs) == "a + 0");
}

TEST_CASE("partial unrolling and policy directives") {
  const char *src = "void k(int8_t A[8], int8_t B[8]) { for (int i = 0; i < 8; i++) B[i] = A[i]; }";
  KernelAst by2 = unroll_by(front(src), "i", 2);
  CHECK(by2.kernel().body[0].step == 2);
  CHECK(by2.kernel().body[0].body.size() == 2);
  CHECK(testutil::error_kind([&] { unroll_by(front(src), "i", 3); }) == ErrorKind::Restriction);
  CHECK(testutil::error_kind([&] { unroll_full(front(src), "q"); }) == ErrorKind::Config);

  UnrollPolicy keep;
  CHECK(count_loops(apply_unroll_policy(front(src), keep).kernel().body) == 1);
  UnrollPolicy full;
  full.directives["i"] = {0};
  CHECK(count_loops(apply_unroll_policy(front(src), full).kernel().body) == 0);
}

TEST_CASE("non-constant bounds cannot be unrolled") {
  Stmt loop;
  loop.kind = StmtKind::For;
  loop.name = "i";
  loop.lower = Expr::lit(0);
  loop.bound = Expr::var("n");
  CHECK(testutil::error_kind([&] { trip_count(loop); }) == ErrorKind::NotConstantBounds);
}

TEST_CASE("FIR scalar replacement") {
  ScalarizedKernel sk = scalarized(read_corpus("fir.c"));
  REQUIRE(sk.loads.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(sk.loads[k].scalar == "A" + std::to_string(k));
    CHECK(sk.loads[k].array == "A");
    CHECK(sk.loads[k].subscripts[0].coeff("i") == 1);
    CHECK(sk.loads[k].subscripts[0].constant == k);
  }
  CHECK(print(sk.compute) == "int Tmp0 = 3 * A0 + 5 * A1 + 7 * A2 + 9 * A3 - A4;\n");
  REQUIRE(sk.stores.size() == 1);
  CHECK(sk.stores[0].array == "C");
  CHECK(sk.stores[0].scalar == "Tmp0");
  CHECK(sk.stores[0].subscripts[0].constant == 0);
  CHECK(sk.loop.indices == std::vector<LoopIndex>{{"i", 0, 17, 1}});
  CHECK(sk.feedbacks.empty());
}

TEST_CASE("a body without array access is left alone") {
  ScalarizedKernel sk = scalarized(read_corpus("identity.c"));
  CHECK(sk.loads.empty());
  CHECK(sk.stores.empty());
  CHECK(print(sk.compute) == "out = a;\n");
}

TEST_CASE("accumulator sum is a feedback signal") {
  ScalarizedKernel sk = scalarized(read_corpus("accumulator.c"));
  REQUIRE(sk.feedbacks.size() == 1);
  const Feedback &f = sk.feedbacks[0];
  CHECK(f.var == "sum");
  CHECK(f.prev_name == "sum_prev");
  CHECK(f.next_name == "sum_next");
  CHECK(f.init == 0);
  CHECK(f.type == ScalarType{true, 32});
  REQUIRE(sk.loads.size() == 1);
  CHECK(sk.loads[0].scalar == "A0");
  CHECK(print(sk.compute) == "sum = sum + A0;\nout = sum;\n");
}

TEST_CASE("feedback detection") {
  SUBCASE("conditional update carries the value") {
    ScalarizedKernel sk = scalarized(read_corpus("mul_acc.c"));
    REQUIRE(sk.feedbacks.size() == 1);
    CHECK(sk.feedbacks[0].var == "sum");
  }
  SUBCASE("a local written before it is read is not carried") {
    ScalarizedKernel sk =
        scalarized("void k(int8_t A[4], int *o) { int t = 0; for (int i = 0; i < 4; i++) { t = A[i]; } *o = t; }");
    CHECK(sk.feedbacks.empty());
  }
  SUBCASE("conditionally written local read after the loop is carried") {
    ScalarizedKernel sk = scalarized(
        "void k(int8_t A[4], int *o) { int t = 7; for (int i = 0; i < 4; i++) { if (A[i] > 0) t = A[i]; } *o = t; }");
    REQUIRE(sk.feedbacks.size() == 1);
    CHECK(sk.feedbacks[0].init == 7);
  }
  SUBCASE("explicit intrinsics") {
    ScalarizedKernel sk = scalarized(R"(
void k(int8_t A[4], int *o) {
  int s = 3;
  for (int i = 0; i < 4; i++) {
    ROCCC_store2next(s, ROCCC_load_prev(s) + A[i]);
  }
  *o = s;
})");
    REQUIRE(sk.feedbacks.size() == 1);
    CHECK(sk.feedbacks[0].init == 3);
  }
  SUBCASE("initial value must be constant") {
    CHECK(testutil::error_kind([] {
            scalarized("void k(int a, int8_t A[4], int *o) { int s = a; for (int i = 0; i < 4; i++) s = s + A[i]; *o = s; }");
          }) == ErrorKind::Restriction);
  }
}

TEST_CASE("store aliasing") {
  auto kind = [](const std::string &body) {
    return testutil::error_kind([&] {
      scalarized("void k(int8_t A[16], int8_t C[16]) { for (int i = 0; i < 4; i++) { " + body + " } }");
    });
  };
  CHECK(kind("C[i] = A[i]; C[i] = A[i+1];") == ErrorKind::Restriction);
  CHECK(kind("C[i] = A[i]; C[2*i] = A[i+1];") == ErrorKind::Restriction);
  CHECK(kind("C[2*i] = A[i]; C[2*i+1] = A[i+1];") == ErrorKind::Internal);
  CHECK(kind("if (A[i] > 0) C[i] = A[i];") == ErrorKind::Restriction);
}

TEST_CASE("scalar replacement is idempotent on the corpus") {
  for (const std::string &name : testutil::corpus_kernels()) {
    CAPTURE(name);
    ScalarizedKernel once = scalarized(read_corpus(name + ".c"));
    ScalarizedKernel twice = scalar_replace(to_ast(once));
    CHECK(dump(twice) == dump(once));
    CHECK(twice == once);
  }
}

TEST_CASE("transforms preserve semantics on random vectors") {
  std::mt19937_64 rng(20240611);
  for (const std::string &name : testutil::corpus_kernels()) {
    CAPTURE(name);
    KernelAst base = front(read_corpus(name + ".c"));
    LutTable luts = testutil::corpus_luts(base);
    std::vector<std::pair<std::string, KernelAst>> stages;
    stages.emplace_back("fold", fold_constants(base));
    stages.emplace_back("unroll", apply_unroll_policy(stages.back().second, {}));
    stages.emplace_back("refold", fold_constants(stages.back().second));
    stages.emplace_back("scalarize", to_ast(scalar_replace(stages.back().second)));
    UnrollPolicy all;
    for (const Stmt &s : base.kernel().body)
      if (s.kind == StmtKind::For && trip_count(s) <= 32) all.directives[s.name] = {0};
    stages.emplace_back("unroll-all", fold_constants(apply_unroll_policy(fold_constants(base), all)));
    stages.emplace_back("scalarize-all", to_ast(scalar_replace(stages.back().second)));
    for (int v = 0; v < 25; ++v) {
      KernelIO in = testutil::random_inputs(base, rng);
      KernelIO want = interpret_oracle(base, in, luts);
      for (const auto &[stage, ast] : stages) {
        CAPTURE(stage);
        CHECK(interpret_oracle(ast, in, luts) == want);
      }
    }
  }
}

TEST_CASE("FIR window") {
  ScalarizedKernel sk = scalarized(read_corpus("fir.c"));
  WindowSpec ws = detect_window(sk, "A", 32);
  CHECK(ws.shape == std::vector<int64_t>{5});
  CHECK(ws.stride == std::vector<int64_t>{1});
  CHECK(ws.overlap() == 4);
  CHECK(ws.elements_per_word() == 4);
  CHECK(ws.first_element() == 0);
  CHECK(ws.last_element() == 20);
  WindowSpec out = detect_window(sk, "C", 32);
  CHECK(out.span == 1);
}

TEST_CASE("single load window") {
  ScalarizedKernel sk = scalarized("void k(int8_t A[8], int8_t C[8]) { for (int i = 0; i < 8; i++) C[i] = A[i] + 1; }");
  WindowSpec ws = detect_window(sk, "A", 32);
  CHECK(ws.shape[0] == 1);
  CHECK(ws.stride[0] == 1);
  CHECK(ws.overlap() == 0);
}

TEST_CASE("strided window agrees with enumerated addresses") {
  ScalarizedKernel sk =
      scalarized("void k(int8_t A[8], int C[4]) { for (int i = 0; i < 4; i++) C[i] = A[2*i] + A[2*i+1]; }");
  WindowSpec ws = detect_window(sk, "A", 32);
  // Enumerate the accessed addresses per iteration and compare consecutive windows.
  std::vector<std::set<int64_t>> windows;
  for (int64_t i = 0; i < 4; ++i) windows.push_back({2 * i, 2 * i + 1});
  for (size_t k = 0; k + 1 < windows.size(); ++k) {
    int64_t w = *windows[k].rbegin() - *windows[k].begin() + 1;
    int64_t s = *windows[k + 1].begin() - *windows[k].begin();
    std::set<int64_t> common;
    for (int64_t a : windows[k])
      if (windows[k + 1].count(a)) common.insert(a);
    CHECK(ws.shape[0] == w);
    CHECK(ws.stride[0] == s);
    CHECK(ws.overlap() == static_cast<int64_t>(common.size()));
  }
  CHECK(ws.shape[0] == 2);
  CHECK(ws.stride[0] == 2);
}

TEST_CASE("window errors") {
  ScalarizedKernel mixed =
      scalarized("void k(int8_t A[16], int C[4]) { for (int i = 0; i < 4; i++) C[i] = A[i] + A[2*i]; }");
  CHECK(testutil::error_kind([&] { detect_window(mixed, "A", 32); }) == ErrorKind::NonUniformPattern);
  ScalarizedKernel fir = scalarized(read_corpus("fir.c"));
  CHECK(testutil::error_kind([&] { detect_window(fir, "A", 12); }) == ErrorKind::Config);
  CHECK(testutil::error_kind([&] { detect_window(fir, "A", 0); }) == ErrorKind::Config);
  ScalarizedKernel wide = scalarized("void k(int16_t A[4], int C[4]) { for (int i = 0; i < 4; i++) C[i] = A[i]; }");
  CHECK(testutil::error_kind([&] { detect_window(wide, "A", 8); }) == ErrorKind::Config);
  ScalarizedKernel back = scalarized("void k(int8_t A[4], int C[4]) { for (int i = 0; i < 4; i++) C[i] = A[3-i]; }");
  CHECK(testutil::error_kind([&] { detect_window(back, "A", 32); }) == ErrorKind::NonUniformPattern);
}

TEST_CASE("two-dimensional window is linearized") {
  UnrollPolicy rolled;
  rolled.directives["c"] = {1};
  ScalarizedKernel sk = scalarized(R"(
void diag(uint8_t a[6][8], int o[4][6]) {
  for (int r = 0; r < 4; r++)
    for (int c = 0; c < 6; c++)
      o[r][c] = a[r][c] + a[r+1][c+1] + a[r+2][c+2];
})",
                                   rolled);
  REQUIRE(sk.loop.indices.size() == 2);
  WindowSpec ws = detect_window(sk, "a", 32);
  CHECK(ws.shape == std::vector<int64_t>{3, 3});
  CHECK(ws.span == 19);
  CHECK(ws.inner_advance() == 1);
  CHECK(ws.wrap_advance() == 3);
  CHECK(ws.offsets == std::vector<int64_t>{0, 9, 18});
  CHECK(detect_window(sk, "o", 32).span == 1);
}

TEST_CASE("windows cover exactly the replayed accesses") {
  std::vector<std::string> sources;
  for (const std::string &name : testutil::corpus_kernels()) sources.push_back(read_corpus(name + ".c"));
  sources.push_back("void k(int8_t A[40], int C[6]) { for (int i = 0; i < 6; i++) C[i] = A[5*i+1] + A[5*i+3]; }");
  sources.push_back("void k(int8_t A[30], int C[5]) { for (int i = 1; i < 6; i++) C[i-1] = A[4*i] - A[4*i+6]; }");
  for (const std::string &src : sources) {
    ScalarizedKernel sk = scalarized(src);
    for (const ArrayDecl &arr : sk.arrays) {
      if (arr.direction != Direction::In) continue;
      CAPTURE(arr.name);
      WindowSpec ws = detect_window(sk, arr.name, 32);
      std::vector<int64_t> mult(arr.extents.size(), 1);
      for (size_t d = arr.extents.size(); d-- > 1;) mult[d - 1] = mult[d] * arr.extents[d];

      // Replay every load subscript over the iteration space.
      std::map<int64_t, std::set<int64_t>> readers;  // address -> iterations
      std::vector<std::map<std::string, int64_t>> points{{}};
      for (const LoopIndex &li : sk.loop.indices) {
        std::vector<std::map<std::string, int64_t>> next;
        for (const auto &p : points)
          for (int64_t k = 0; k < li.count; ++k) {
            auto q = p;
            q[li.name] = li.lower + k * li.step;
            next.push_back(q);
          }
        points = next;
      }
      REQUIRE(static_cast<int64_t>(points.size()) == ws.trip());
      for (size_t k = 0; k < points.size(); ++k)
        for (const ScalarLoad &l : sk.loads) {
          if (l.array != arr.name) continue;
          int64_t addr = 0;
          for (size_t d = 0; d < l.subscripts.size(); ++d) addr += mult[d] * l.subscripts[d].evaluate(points[k]);
          readers[addr].insert(static_cast<int64_t>(k));
        }
      std::map<int64_t, std::set<int64_t>> covered;
      for (int64_t k = 0; k < ws.trip(); ++k)
        for (int64_t o : ws.offsets) covered[ws.anchor(k) + o].insert(k);
      CHECK(covered == readers);
    }
  }
}
