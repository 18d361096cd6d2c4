#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minihls/ast.hpp"
#include "minihls/frontend.hpp"

namespace minihls {

/// Folds every all-constant subtree, reads of constant arrays at constant
/// subscripts and `const` scalar locals, and the identities x*1, x+0, x-0,
/// x*0, x<<0, x>>0, x|0, x^0. OverflowError if a folded literal leaves the
/// 32-bit range.
KernelAst fold_constants(KernelAst ast);

/// Replaces every loop indexed by `loop` with `count` copies of its body.
/// Locals declared in the body are renamed per copy.
KernelAst unroll_full(KernelAst ast, const std::string &loop);

/// Unrolls `loop` by `factor`: the body is replicated `factor` times and the
/// step multiplied. The trip count must be divisible by `factor`.
KernelAst unroll_by(KernelAst ast, const std::string &loop, int64_t factor);

/// `factor == 0` means full unrolling; 1 keeps the loop rolled.
struct UnrollDirective {
  int64_t factor = 0;
};

struct UnrollPolicy {
  std::map<std::string, UnrollDirective> directives;
  int64_t limit = 16;  // inner loops with a trip count up to this unroll fully
};

/// Outermost loops stay rolled unless a directive says otherwise; inner loops
/// unroll fully when their trip count is within the limit.
KernelAst apply_unroll_policy(KernelAst ast, const UnrollPolicy &policy);

/// Rewrites the bound of `loop` so that it runs exactly `count` iterations.
KernelAst set_trip_count(KernelAst ast, const std::string &loop, int64_t count);

/// Constant trip count of a `for` statement; NotConstantBounds otherwise.
int64_t trip_count(const Stmt &loop);

struct LoopIndex {
  std::string name;
  int64_t lower = 0;
  int64_t count = 1;
  int64_t step = 1;

  bool operator==(const LoopIndex &) const = default;
};

/// Rolled loop nest, outermost first. Empty when the kernel has no rolled
/// loop (a single firing).
struct LoopSpec {
  std::vector<LoopIndex> indices;

  int64_t trip() const {
    int64_t n = 1;
    for (const LoopIndex &i : indices) n *= i.count;
    return n;
  }
  bool operator==(const LoopSpec &) const = default;
};

struct ScalarLoad {
  std::string scalar;
  std::string array;
  std::vector<Affine> subscripts;  // affine in the rolled indices
  ScalarType type;

  bool operator==(const ScalarLoad &) const = default;
};

struct ScalarStore {
  std::string array;
  std::vector<Affine> subscripts;
  std::string scalar;

  bool operator==(const ScalarStore &) const = default;
};

struct Feedback {
  std::string var;
  std::string prev_name;
  std::string next_name;
  ScalarType type;
  int64_t init = 0;

  bool operator==(const Feedback &) const = default;
};

/// Memory access isolated from computation: the compute fragment refers only
/// to scalars (loads, scalar inputs, locals, feedback variables).
struct ScalarizedKernel {
  std::string name;
  std::vector<ScalarLoad> loads;
  std::vector<Stmt> compute;
  std::vector<ScalarStore> stores;
  LoopSpec loop;
  std::vector<Feedback> feedbacks;

  std::vector<Param> params;  // kernel signature, in order
  std::vector<Param> scalar_inputs;
  std::vector<Param> scalar_outputs;
  std::vector<ArrayDecl> arrays;
  std::vector<LutDecl> luts;
  std::map<std::string, ScalarType> store_types;  // store temp -> element type

  bool operator==(const ScalarizedKernel &o) const {
    return name == o.name && params == o.params && loads == o.loads && compute == o.compute && stores == o.stores &&
           loop == o.loop && feedbacks == o.feedbacks && scalar_inputs == o.scalar_inputs &&
           scalar_outputs == o.scalar_outputs && arrays == o.arrays && luts == o.luts && store_types == o.store_types;
  }
};

/// Splits the kernel into loads, a scalar compute fragment and stores, and
/// detects loop-carried scalars as feedback pairs.
ScalarizedKernel scalar_replace(const KernelAst &ast);

/// Re-expresses a scalarized kernel as C in the hoisted-loads form
/// (`T A0 = A[i]; ... C[i] = Tmp0;`). `scalar_replace(to_ast(sk)) == sk`.
KernelAst to_ast(const ScalarizedKernel &sk);

std::string dump(const ScalarizedKernel &sk);

/// Sliding-window access pattern of one array, per dimension and linearized.
struct WindowSpec {
  std::string array;
  std::vector<int64_t> shape;    // W per dimension
  std::vector<int64_t> stride;   // S per dimension
  std::vector<int64_t> base;     // minimum subscript offset per dimension
  int data_width = 8;            // D
  int bus_width = 32;            // B
  bool is_signed = false;

  // Row-major linearization.
  int64_t span = 1;                    // window extent in linear elements
  int64_t first_offset = 0;            // linear offset of the window origin
  std::vector<int64_t> index_deltas;   // linear advance per iteration of each rolled index
  std::vector<int64_t> index_counts;   // trip count of each rolled index
  std::vector<int64_t> offsets;        // distinct accessed linear offsets, relative to the origin
  int64_t array_size = 0;

  int64_t elements_per_word() const { return bus_width / data_width; }
  int64_t trip() const;
  /// Linear address of the window origin at iteration `k` (row-major over
  /// the rolled nest).
  int64_t anchor(int64_t k) const;
  /// Elements dropped between iteration k and k+1 for the inner index and on
  /// the wrap of the inner index.
  int64_t inner_advance() const { return index_deltas.empty() ? 0 : index_deltas.back(); }
  int64_t wrap_advance() const;
  int64_t overlap() const;
  int64_t first_element() const { return anchor(0); }
  int64_t last_element() const { return anchor(trip() - 1) + span - 1; }
};

/// Window of `array` as read (input) or written (output) by the kernel.
WindowSpec detect_window(const ScalarizedKernel &sk, const std::string &array, int bus_width);

std::string describe(const WindowSpec &ws);

}  // namespace minihls
