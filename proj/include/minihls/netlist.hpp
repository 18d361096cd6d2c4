#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minihls/lut.hpp"

namespace minihls {

/// Combinational operators. Arithmetic is exact on the operand values and
/// the result is wrapped to the node's declared width; the checker insists
/// that the declared width holds every possible result, so any truncation
/// goes through an explicit Resize or Slice.
enum class NetOp {
  Const,
  Add, Sub, Mul, And, Or, Xor, Not,
  Shl, Shr,  // constant amount in `value`
  Eq, Ne, Lt, Le, Gt, Ge,
  Mux,     // in: cond, then, else
  Lut,     // in: address; table in `lut`
  Resize,  // sign- or zero-extends by the operand's signedness, or truncates
  Slice,   // bits [value + width - 1 : value] of the operand
  Concat,  // in[0] is the most significant part
};

const char *net_op_name(NetOp op);

struct NetShape {
  int width = 1;
  bool is_signed = false;

  bool operator==(const NetShape &) const = default;
};

struct NetNode {
  NetOp op = NetOp::Const;
  std::string out;
  std::vector<std::string> in;
  NetShape shape;
  int64_t value = 0;
  std::string lut;
};

enum class PortDir { In, Out };

struct NetPort {
  std::string name;
  PortDir dir = PortDir::In;
  NetShape shape;
};

/// What a register is for; the register census is recomputed per role.
enum class RegRole {
  Datapath,  // latched data-path operator or feedback register
  Delay,     // balancing COPY
  Buffer,    // smart-buffer slot or unpacking lane
  Control,   // counters, flags, valid pipeline
  Output,    // output latch or packing lane
};

const char *reg_role_name(RegRole r);

struct NetReg {
  std::string name;
  NetShape shape;
  int64_t reset = 0;
  std::string d;
  std::string enable;  // empty: loads every cycle
  RegRole role = RegRole::Control;
};

struct FsmTransition {
  std::string from;
  std::string cond;  // 1-bit signal
  std::string to;
};

/// Moore FSM. The first matching transition out of the current state fires;
/// otherwise the state holds. Each output is 1 in the listed states.
struct NetFsm {
  std::string name;
  std::string state;  // state register signal
  std::vector<std::string> states;  // states[0] is the reset state
  std::vector<FsmTransition> transitions;
  std::map<std::string, std::vector<std::string>> outputs;

  int state_width() const;
};

enum class MemKind { Read, Write };

/// External single-port memory attached to boundary ports. A read port
/// returns the word addressed in the previous cycle while `enable` was high;
/// a write port stores `data` when `enable` is high.
struct NetMem {
  std::string array;
  MemKind kind = MemKind::Read;
  int word_width = 32;
  int64_t depth = 1;
  std::string addr, enable, data;
  // Element packing: element k sits in word k / per_word at lane k % per_word.
  int element_width = 8;
  bool element_signed = false;
  int64_t elements = 0;

  int64_t per_word() const { return word_width / element_width; }
};

/// Boundary signal a fragment expects another fragment to drive.
struct NetImport {
  std::string name;
  NetShape shape;
};

struct Netlist {
  std::string name;
  std::vector<NetPort> ports;
  std::vector<NetReg> regs;
  std::vector<NetNode> nodes;
  std::vector<NetFsm> fsms;
  std::vector<NetMem> mems;
  std::vector<LutSpec> luts;
  std::vector<NetImport> imports;  // fragments only; empty after link

  const LutSpec *find_lut(const std::string &name) const;
};

enum class DriverKind { InPort, Register, Node, FsmState, FsmOutput };

struct SignalInfo {
  NetShape shape;
  DriverKind driver = DriverKind::Node;
  int index = 0;  // into ports, regs, nodes or fsms
};

/// Every driven signal with its shape. Throws Link on a second driver.
std::map<std::string, SignalInfo> signal_table(const Netlist &n);

/// Smallest shape that holds every result of `op` on operands of the given
/// shapes (Const: of `value`). Resize, Slice, Concat and Lut have no natural
/// shape and return their declared one.
NetShape natural_shape(const NetNode &node, const std::vector<NetShape> &operands);

/// Merges fragments into one netlist. LinkError names the offending signal
/// on a second driver, an undriven signal or an import whose width differs
/// from its driver.
Netlist link(const std::vector<Netlist> &fragments, const std::string &name);

/// Invariant violations, one line each; empty for a well-formed netlist.
std::vector<std::string> check(const Netlist &n);

/// Combinational nodes in evaluation order. Internal error on a cycle.
std::vector<int> topo_order(const Netlist &n);

std::string dump(const Netlist &n);

struct RegisterCensus {
  std::map<RegRole, int> by_role;
  int fsm_states = 0;  // one state register per FSM
  int total() const;
};

RegisterCensus census(const Netlist &n);

/// Builds one fragment with hierarchical `prefix.signal` names and natural
/// widths for every arithmetic node.
class NetBuilder {
public:
  NetBuilder(Netlist &target, std::string prefix) : n_(target), prefix_(std::move(prefix)) {}

  std::string name(const std::string &local) const { return prefix_.empty() ? local : prefix_ + "." + local; }
  NetShape shape(const std::string &signal) const;

  std::string konst(int64_t v, NetShape s);
  std::string konst(int64_t v);  // natural shape
  /// Any operator; the width defaults to the natural one.
  std::string op(NetOp op, std::vector<std::string> in, int64_t value = 0, const std::string &out = {});
  std::string node(NetNode n);
  std::string resize(const std::string &x, NetShape s, const std::string &out = {});
  std::string slice(const std::string &x, int low, int width, const std::string &out = {});
  std::string mux(const std::string &c, const std::string &a, const std::string &b, const std::string &out = {});
  std::string eq(const std::string &a, int64_t v);
  std::string logic_and(const std::vector<std::string> &bits);
  std::string logic_or(const std::vector<std::string> &bits);
  std::string logic_not(const std::string &bit);
  /// (x + 1) truncated to x's width.
  std::string increment(const std::string &x);

  /// Declares a register; `d` and `enable` may be connected later.
  std::string reg(const std::string &local, NetShape s, RegRole role, int64_t reset = 0);
  void connect(const std::string &reg_name, const std::string &d, const std::string &enable = {});
  void port(const std::string &name, PortDir dir, NetShape s);
  void import(const std::string &name, NetShape s);
  void fsm(NetFsm f);

  Netlist &netlist() { return n_; }

private:
  std::string fresh();

  Netlist &n_;
  std::string prefix_;
  std::map<std::string, NetShape> shapes_;
  int next_ = 0;
};

}  // namespace minihls
