#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minihls/ast.hpp"
#include "minihls/dataflow.hpp"
#include "minihls/io.hpp"
#include "minihls/memif.hpp"
#include "minihls/transforms.hpp"

namespace minihls {

struct CompileOptions {
  UnrollPolicy unroll;
  DesignConfig design;
  std::map<std::string, int64_t> trip_overrides;   // loop index -> trip count
  std::map<std::string, std::string> lut_bindings;  // table -> init file
};

/// Text snapshot taken after one pass.
struct PassDump {
  std::string pass;
  std::string text;
};

struct Compilation {
  KernelAst source;  // checked and inlined, trip overrides applied: what the oracle runs
  KernelAst transformed;
  ScalarizedKernel scalarized;
  LutTable luts;
  DataflowGraph graph;
  Design design;
  std::vector<std::string> log;  // one line per pass, defaults first
  std::vector<PassDump> dumps;
};

/// The fixed pass sequence from source text to a checked netlist. A failing
/// pass rethrows its error with the pass name prefixed; a non-empty netlist
/// check is an Internal error.
Compilation compile(const std::string &source, const CompileOptions &opts);

/// Pass dumps as one text with a header line per pass.
std::string pass_trace(const Compilation &c);

/// Seed for generated vectors: MINIHLS_SEED when set, otherwise a fixed
/// default.
uint64_t vector_seed();

/// Uniform values over each input's declared range, arrays in declaration
/// order then scalar parameters.
KernelIO random_vectors(const KernelAst &ast, uint64_t seed);

/// Parses `name=factor` or `name=full`.
std::pair<std::string, UnrollDirective> parse_unroll(const std::string &text);

}  // namespace minihls
