#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minihls/lut.hpp"
#include "minihls/transforms.hpp"

namespace minihls {

enum class Opcode {
  Input,  // scalar input port (a load scalar or a scalar parameter)
  Const,
  Add, Sub, Mul, And, Or, Xor, Not, Shl, Shr,
  Eq, Ne, Lt, Le, Gt, Ge,
  Select,  // operands: cond, then, else
  Lut,
  Lpr,
  Snx,
  Copy,
};

const char *opcode_name(Opcode op);

/// Registered result: one pipeline stage. Delay COPYs carry `latched`.
bool is_latched_op(Opcode op);

struct Node {
  int id = 0;
  Opcode op = Opcode::Const;
  std::vector<int> operands;
  int64_t value = 0;  // CONST value, shift amount, LPR initial value
  std::string name;   // INPUT port, LPR/SNX variable, LUT table

  int width = 0;
  bool is_signed = false;
  int stage = 0;
  bool latched = false;                // COPY inserted as a delay register
  std::optional<ScalarType> declared;  // COPY: type of the assigned variable
  bool in_feedback = false;            // chained into the single-cycle feedback region

  // LUT binding.
  int address_width = 0;
  std::vector<int64_t> contents;

  bool registered() const { return latched || is_latched_op(op); }
};

struct Port {
  std::string name;
  ScalarType type;
  int node = -1;
};

struct FeedbackPair {
  std::string var;
  int lpr = -1;
  int snx = -1;
};

/// SSA dataflow graph of one loop iteration. `nodes[k].id == k` and operands
/// always precede their users.
struct DataflowGraph {
  std::vector<Node> nodes;
  std::vector<Port> inputs;
  std::vector<Port> outputs;
  std::vector<FeedbackPair> feedbacks;

  int depth = 0;           // pipeline depth after scheduling
  int feedback_stage = 0;  // stage of the feedback region, 0 without feedback

  Node &node(int id) { return nodes.at(static_cast<size_t>(id)); }
  const Node &node(int id) const { return nodes.at(static_cast<size_t>(id)); }
  int count(Opcode op) const;
};

/// SSA conversion of the compute fragment with if/else predicated into
/// SELECTs: both arms are always evaluated.
DataflowGraph lower(const ScalarizedKernel &sk);

/// Bit widths by the per-opcode rules; mixed signedness promotes to signed
/// with one extra bit. WidthOverflow beyond 64 bits.
void infer_widths(DataflowGraph &g);

/// Rebuilds chains of associative operators into minimum-depth trees,
/// combining the earliest-available operands first. Terms that depend on a
/// feedback value are combined last so the feedback cycle stays short.
void rebalance(DataflowGraph &g);

/// Rebalances, re-infers widths and assigns ASAP stages; inserts delay COPYs
/// so that every converging path has the same register depth.
void schedule(DataflowGraph &g);

/// Longest chain of operators allowed inside the one-cycle feedback region.
inline constexpr int kMaxFeedbackChain = 4;

/// Attaches table contents to every LUT node.
void bind_luts(DataflowGraph &g, const LutTable &luts);

/// Value of every output for one firing. `state` maps feedback variables to
/// their committed values and is advanced to the next values.
std::map<std::string, int64_t> evaluate(const DataflowGraph &g, const std::map<std::string, int64_t> &inputs,
                                        std::map<std::string, int64_t> &state);

/// Exact value of every node for one firing (index = node id), without any
/// wraparound except where C assignment semantics demand it.
std::vector<int64_t> evaluate_nodes(const DataflowGraph &g, const std::map<std::string, int64_t> &inputs,
                                    const std::map<std::string, int64_t> &state);

/// Initial feedback state (the C initializers).
std::map<std::string, int64_t> initial_state(const DataflowGraph &g);

/// Stable text form, one line per node: `id: OPCODE(width,s|u,stage) operands`.
std::string dump(const DataflowGraph &g);

/// Removes nodes that reach no output and no SNX, renumbering in topological
/// order.
void prune(DataflowGraph &g);

}  // namespace minihls
