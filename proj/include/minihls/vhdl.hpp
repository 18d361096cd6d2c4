#pragma once

#include <string>
#include <vector>

#include "minihls/io.hpp"
#include "minihls/netlist.hpp"

namespace minihls {

enum class LutStyle { ConstantArray, RomComponent };

struct EmitConfig {
  std::string entity;  // empty: the netlist name
  std::string clock = "clk";
  std::string reset = "rst";
  LutStyle lut_style = LutStyle::ConstantArray;
};

/// Legal VHDL basic identifier for a hierarchical signal name: `.` and other
/// separators become single underscores, reserved words get a suffix.
std::string vhdl_identifier(const std::string &name);

/// One entity and architecture in VHDL-93 with numeric_std. Registers live
/// in one clocked process with synchronous active-high reset; each FSM gets
/// a case-based next-state process. Emit error when two names sanitize to
/// the same identifier.
std::string emit_vhdl(const Netlist &n, const EmitConfig &cfg = {});

/// Self-checking bench for an external simulator: preloads the input
/// memories, pulses start, waits for done and asserts every output word and
/// scalar against `expected`.
std::string emit_testbench(const Netlist &n, const KernelIO &inputs, const KernelIO &expected,
                           const EmitConfig &cfg = {});

/// Lexical sanity of emitted text: balanced parentheses and block
/// keywords, one `begin` per body, identifiers declared before use.
/// Returns one line per problem.
std::vector<std::string> lint_vhdl(const std::string &text);

/// Structure recovered from emitted text.
struct VhdlCounts {
  int entities = 0;
  int clocked_processes = 0;
  int registers = 0;  // reset assignments in the clocked process
  int multiplies = 0;
  int adders = 0;
  int fsm_states = 0;
};

VhdlCounts count_vhdl(const std::string &text);

}  // namespace minihls
