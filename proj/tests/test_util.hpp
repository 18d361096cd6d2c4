#pragma once

#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "minihls/dataflow.hpp"
#include "minihls/frontend.hpp"
#include "minihls/io.hpp"
#include "minihls/lut.hpp"
#include "minihls/transforms.hpp"

namespace testutil {

inline std::string read_file(const std::string &path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_path(const std::string &name) { return std::string(MINIHLS_CORPUS_DIR) + "/" + name; }
inline std::string read_corpus(const std::string &name) { return read_file(corpus_path(name)); }

inline const std::vector<std::string> &corpus_kernels() {
  static const std::vector<std::string> names = {"fir",     "accumulator", "bit_correlator", "mul_acc",
                                                 "dct8",    "lut_pdf",     "lut_cos",        "identity"};
  return names;
}

/// parse, check and inline.
inline minihls::KernelAst front(const std::string &src) {
  return minihls::inline_calls(minihls::check_restrictions(minihls::parse(src)));
}

/// Front end plus folding and the default unroll policy.
inline minihls::KernelAst transformed(const std::string &src, const minihls::UnrollPolicy &policy = {}) {
  using namespace minihls;
  return fold_constants(apply_unroll_policy(fold_constants(front(src)), policy));
}

inline minihls::LutTable corpus_luts(const minihls::KernelAst &ast) {
  return minihls::resolve_luts(ast, {{"pdf", corpus_path("pdf.lut")}});
}

/// Uniform values over each input's declared range.
inline minihls::KernelIO random_inputs(const minihls::KernelAst &ast, std::mt19937_64 &rng) {
  using namespace minihls;
  KernelIO io;
  for (const ArrayDecl &a : ast.arrays) {
    if (a.direction != Direction::In) continue;
    std::uniform_int_distribution<int64_t> d(min_value(a.element.width, a.element.is_signed),
                                             max_value(a.element.width, a.element.is_signed));
    auto &mem = io.memories[a.name];
    for (int64_t i = 0; i < a.size(); ++i) mem.push_back(d(rng));
  }
  for (const Param &p : ast.kernel().params) {
    if (p.kind != ParamKind::Scalar) continue;
    std::uniform_int_distribution<int64_t> d(min_value(p.type.width, p.type.is_signed),
                                             max_value(p.type.width, p.type.is_signed));
    io.scalars[p.name] = d(rng);
  }
  return io;
}

/// Every point of the rolled iteration space, outermost index slowest.
inline std::vector<std::map<std::string, int64_t>> iteration_points(const minihls::LoopSpec &loop) {
  std::vector<std::map<std::string, int64_t>> points{{}};
  for (const minihls::LoopIndex &li : loop.indices) {
    std::vector<std::map<std::string, int64_t>> next;
    for (const auto &p : points)
      for (int64_t k = 0; k < li.count; ++k) {
        auto q = p;
        q[li.name] = li.lower + k * li.step;
        next.push_back(q);
      }
    points = std::move(next);
  }
  return points;
}

inline int64_t linear_address(const minihls::ArrayDecl &arr, const std::vector<minihls::Affine> &subs,
                              const std::map<std::string, int64_t> &at) {
  int64_t a = 0;
  for (size_t d = 0; d < subs.size(); ++d) a = a * arr.extents[d] + subs[d].evaluate(at);
  return a;
}

inline const minihls::ArrayDecl &array_named(const minihls::ScalarizedKernel &sk, const std::string &name) {
  for (const minihls::ArrayDecl &a : sk.arrays)
    if (a.name == name) return a;
  FAIL("no array " << name);
  throw 0;
}

/// Runs the dataflow graph once per iteration, feeding loads and collecting
/// stores straight from the subscripts. No memory interface involved.
inline minihls::KernelIO run_graph(const minihls::ScalarizedKernel &sk, const minihls::DataflowGraph &g,
                                   const minihls::KernelIO &in) {
  using namespace minihls;
  KernelIO out;
  for (const ArrayDecl &a : sk.arrays)
    if (a.direction == Direction::Out) out.memories[a.name].assign(static_cast<size_t>(a.size()), 0);
  for (const Param &p : sk.scalar_outputs) out.scalars[p.name] = 0;
  auto state = initial_state(g);
  for (const auto &at : iteration_points(sk.loop)) {
    std::map<std::string, int64_t> values;
    for (const ScalarLoad &l : sk.loads)
      values[l.scalar] = in.memories.at(l.array).at(static_cast<size_t>(linear_address(array_named(sk, l.array), l.subscripts, at)));
    for (const Param &p : sk.scalar_inputs) values[p.name] = wrap_to(in.scalars.at(p.name), p.type);
    auto res = evaluate(g, values, state);
    for (const ScalarStore &st : sk.stores) {
      const ArrayDecl &arr = array_named(sk, st.array);
      out.memories[st.array].at(static_cast<size_t>(linear_address(arr, st.subscripts, at))) =
          wrap_to(res.at(st.scalar), arr.element);
    }
    for (const Param &p : sk.scalar_outputs) out.scalars[p.name] = res.at(p.name);
  }
  return out;
}

/// Full front end through scheduling with the corpus LUT bindings.
inline minihls::DataflowGraph scheduled_graph(const minihls::ScalarizedKernel &sk) {
  using namespace minihls;
  DataflowGraph g = lower(sk);
  infer_widths(g);
  schedule(g);
  bind_luts(g, resolve_luts(to_ast(sk), {{"pdf", corpus_path("pdf.lut")}}));
  return g;
}

template <typename F>
minihls::ErrorKind error_kind(F &&f) {
  try {
    f();
  } catch (const minihls::Error &e) {
    return e.kind();
  }
  return minihls::ErrorKind::Internal;
}

template <typename F>
std::string error_message(F &&f) {
  try {
    f();
  } catch (const minihls::Error &e) {
    return e.what();
  }
  return "";
}

}  // namespace testutil
