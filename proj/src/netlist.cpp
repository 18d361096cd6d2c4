#include "minihls/netlist.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "minihls/common.hpp"

namespace minihls {

const char *net_op_name(NetOp op) {
  switch (op) {
    case NetOp::Const: return "CONST";
    case NetOp::Add: return "ADD";
    case NetOp::Sub: return "SUB";
    case NetOp::Mul: return "MUL";
    case NetOp::And: return "AND";
    case NetOp::Or: return "OR";
    case NetOp::Xor: return "XOR";
    case NetOp::Not: return "NOT";
    case NetOp::Shl: return "SHL";
    case NetOp::Shr: return "SHR";
    case NetOp::Eq: return "EQ";
    case NetOp::Ne: return "NE";
    case NetOp::Lt: return "LT";
    case NetOp::Le: return "LE";
    case NetOp::Gt: return "GT";
    case NetOp::Ge: return "GE";
    case NetOp::Mux: return "MUX";
    case NetOp::Lut: return "LUT";
    case NetOp::Resize: return "RESIZE";
    case NetOp::Slice: return "SLICE";
    case NetOp::Concat: return "CONCAT";
  }
  return "?";
}

const char *reg_role_name(RegRole r) {
  switch (r) {
    case RegRole::Datapath: return "datapath";
    case RegRole::Delay: return "delay";
    case RegRole::Buffer: return "buffer";
    case RegRole::Control: return "control";
    case RegRole::Output: return "output";
  }
  return "?";
}

int NetFsm::state_width() const { return clog2(states.size()); }

const LutSpec *Netlist::find_lut(const std::string &name) const {
  for (const LutSpec &l : luts)
    if (l.name == name) return &l;
  return nullptr;
}

namespace {

bool is_arith(NetOp op) {
  return op != NetOp::Const && op != NetOp::Lut && op != NetOp::Resize && op != NetOp::Slice && op != NetOp::Concat;
}

std::pair<NetShape, NetShape> promote(NetShape a, NetShape b) {
  if (a.is_signed && !b.is_signed) b = {b.width + 1, true};
  if (b.is_signed && !a.is_signed) a = {a.width + 1, true};
  return {a, b};
}

// Range of `inner` contained in the range of `outer`.
bool holds(NetShape outer, NetShape inner) {
  if (outer.is_signed == inner.is_signed) return outer.width >= inner.width;
  if (outer.is_signed) return outer.width > inner.width;
  return false;
}

std::string shape_text(NetShape s) { return std::to_string(s.width) + (s.is_signed ? "s" : "u"); }

}  // namespace

NetShape natural_shape(const NetNode &n, const std::vector<NetShape> &in) {
  auto two = [&] { return promote(in.at(0), in.at(1)); };
  switch (n.op) {
    case NetOp::Const: return {bits_for_constant(n.value), n.value < 0};
    case NetOp::Add: {
      auto [a, b] = two();
      return {std::max(a.width, b.width) + 1, a.is_signed};
    }
    case NetOp::Sub: {
      auto [a, b] = two();
      return {std::max(a.width, b.width) + 1, true};
    }
    case NetOp::Mul: {
      auto [a, b] = two();
      return {a.width + b.width, a.is_signed};
    }
    case NetOp::And:
    case NetOp::Or:
    case NetOp::Xor: {
      auto [a, b] = two();
      return {std::max(a.width, b.width), a.is_signed};
    }
    case NetOp::Not: return in.at(0).is_signed ? in[0] : NetShape{in[0].width + 1, true};
    case NetOp::Shl: return {in.at(0).width + static_cast<int>(n.value), in[0].is_signed};
    case NetOp::Shr: return {std::max(1, in.at(0).width - static_cast<int>(n.value)), in[0].is_signed};
    case NetOp::Eq:
    case NetOp::Ne:
    case NetOp::Lt:
    case NetOp::Le:
    case NetOp::Gt:
    case NetOp::Ge: return {1, false};
    case NetOp::Mux: {
      auto [a, b] = promote(in.at(1), in.at(2));
      return {std::max(a.width, b.width), a.is_signed};
    }
    case NetOp::Lut:
    case NetOp::Resize:
    case NetOp::Slice:
    case NetOp::Concat: return n.shape;
  }
  return n.shape;
}

std::map<std::string, SignalInfo> signal_table(const Netlist &n) {
  std::map<std::string, SignalInfo> t;
  auto add = [&](const std::string &name, NetShape s, DriverKind k, size_t idx) {
    if (!t.emplace(name, SignalInfo{s, k, static_cast<int>(idx)}).second)
      fail(ErrorKind::Link, "multiple drivers: " + name);
  };
  for (size_t i = 0; i < n.ports.size(); ++i)
    if (n.ports[i].dir == PortDir::In) add(n.ports[i].name, n.ports[i].shape, DriverKind::InPort, i);
  for (size_t i = 0; i < n.regs.size(); ++i) add(n.regs[i].name, n.regs[i].shape, DriverKind::Register, i);
  for (size_t i = 0; i < n.nodes.size(); ++i) add(n.nodes[i].out, n.nodes[i].shape, DriverKind::Node, i);
  for (size_t i = 0; i < n.fsms.size(); ++i) {
    const NetFsm &f = n.fsms[i];
    add(f.state, {f.state_width(), false}, DriverKind::FsmState, i);
    for (const auto &[sig, states] : f.outputs) add(sig, {1, false}, DriverKind::FsmOutput, i);
  }
  return t;
}

namespace {

// Signals read anywhere, with what is expected of them (width 0: any).
struct Use {
  std::string signal;
  NetShape expect;
  bool exact = false;
  std::string where;
};

std::vector<Use> uses(const Netlist &n) {
  std::vector<Use> u;
  for (const NetNode &x : n.nodes)
    for (const std::string &s : x.in) u.push_back({s, {}, false, x.out});
  for (const NetReg &r : n.regs) {
    u.push_back({r.d, r.shape, true, r.name});
    if (!r.enable.empty()) u.push_back({r.enable, {1, false}, true, r.name});
  }
  for (const NetFsm &f : n.fsms)
    for (const FsmTransition &t : f.transitions) u.push_back({t.cond, {1, false}, true, f.name});
  for (const NetPort &p : n.ports)
    if (p.dir == PortDir::Out) u.push_back({p.name, p.shape, true, "port " + p.name});
  for (const NetMem &m : n.mems) {
    NetShape addr{clog2(static_cast<uint64_t>(m.depth)), false};
    u.push_back({m.addr, addr, true, "memory " + m.array});
    u.push_back({m.enable, {1, false}, true, "memory " + m.array});
    u.push_back({m.data, {m.word_width, false}, true, "memory " + m.array});
  }
  return u;
}

}  // namespace

std::vector<int> topo_order(const Netlist &n) {
  std::map<std::string, int> producer;
  for (size_t i = 0; i < n.nodes.size(); ++i) producer[n.nodes[i].out] = static_cast<int>(i);
  std::vector<int> state(n.nodes.size(), 0), order;
  order.reserve(n.nodes.size());
  // Iterative DFS so long chains do not exhaust the stack.
  for (size_t root = 0; root < n.nodes.size(); ++root) {
    if (state[root]) continue;
    std::vector<std::pair<int, size_t>> stack{{static_cast<int>(root), 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto &[id, k] = stack.back();
      const NetNode &x = n.nodes[static_cast<size_t>(id)];
      if (k < x.in.size()) {
        auto it = producer.find(x.in[k++]);
        if (it == producer.end()) continue;
        int p = it->second;
        if (state[static_cast<size_t>(p)] == 1) fail(ErrorKind::Internal, "combinational cycle through " + x.out);
        if (state[static_cast<size_t>(p)] == 0) {
          state[static_cast<size_t>(p)] = 1;
          stack.push_back({p, 0});
        }
        continue;
      }
      state[static_cast<size_t>(id)] = 2;
      order.push_back(id);
      stack.pop_back();
    }
  }
  return order;
}

std::vector<std::string> check(const Netlist &n) {
  std::vector<std::string> report;
  std::map<std::string, SignalInfo> table;
  try {
    table = signal_table(n);
  } catch (const Error &e) {
    report.push_back(e.what());
    return report;
  }

  std::set<std::string> undriven;
  for (const Use &u : uses(n)) {
    auto it = table.find(u.signal);
    if (it == table.end()) {
      if (undriven.insert(u.signal).second) report.push_back("undriven signal: " + u.signal);
      continue;
    }
    if (u.exact && !(it->second.shape == u.expect))
      report.push_back("width mismatch: " + u.signal + " is " + shape_text(it->second.shape) + ", " + u.where +
                       " expects " + shape_text(u.expect));
  }

  for (const NetNode &x : n.nodes) {
    std::vector<NetShape> in;
    bool known = true;
    for (const std::string &s : x.in) {
      auto it = table.find(s);
      if (it == table.end()) {
        known = false;
        break;
      }
      in.push_back(it->second.shape);
    }
    if (!known) continue;
    auto bad = [&](const std::string &why) { report.push_back("width mismatch: " + x.out + " " + why); };
    size_t arity = 2;
    switch (x.op) {
      case NetOp::Const: arity = 0; break;
      case NetOp::Not:
      case NetOp::Shl:
      case NetOp::Shr:
      case NetOp::Lut:
      case NetOp::Resize:
      case NetOp::Slice: arity = 1; break;
      case NetOp::Mux: arity = 3; break;
      case NetOp::Concat: arity = in.size(); break;
      default: break;
    }
    if (in.size() != arity || (x.op == NetOp::Concat && in.empty())) {
      report.push_back("bad operand count: " + x.out);
      continue;
    }
    if (is_arith(x.op)) {
      if (x.shape.width > 64) bad("exceeds 64 bits");
      for (NetShape s : in)
        if (s.width > 64) bad("has an operand wider than 64 bits");
      if (x.op == NetOp::Mux && !(in[0] == NetShape{1, false})) bad("needs a 1-bit select");
      if (!holds(x.shape, natural_shape(x, in)))
        bad("is " + shape_text(x.shape) + " but needs " + shape_text(natural_shape(x, in)));
    }
    switch (x.op) {
      case NetOp::Const:
        if (x.shape.width <= 64 && !fits(x.value, x.shape.width, x.shape.is_signed)) bad("constant does not fit");
        break;
      case NetOp::Slice:
        if (x.value < 0 || x.value + x.shape.width > in[0].width) bad("slice out of range");
        break;
      case NetOp::Concat: {
        int sum = 0;
        for (NetShape s : in) sum += s.width;
        if (sum != x.shape.width) bad("concat width " + std::to_string(sum));
        break;
      }
      case NetOp::Lut: {
        const LutSpec *l = n.find_lut(x.lut);
        if (!l) {
          report.push_back("unbound lookup table '" + x.lut + "'");
          break;
        }
        if (!(in[0] == NetShape{l->address_width, false})) bad("address is not " + std::to_string(l->address_width) + "u");
        if (!(x.shape == NetShape{l->data.width, l->data.is_signed})) bad("does not match the table data type");
        break;
      }
      default: break;
    }
  }

  for (const NetMem &m : n.mems)
    if (m.element_width > m.word_width) report.push_back("width mismatch: memory " + m.array + " element wider than word");

  // Combinational cycles: strongly connected components over node edges.
  std::map<std::string, int> producer;
  for (size_t i = 0; i < n.nodes.size(); ++i) producer[n.nodes[i].out] = static_cast<int>(i);
  const int count = static_cast<int>(n.nodes.size());
  std::vector<int> index(n.nodes.size(), -1), low(n.nodes.size(), 0);
  std::vector<bool> on(n.nodes.size(), false);
  std::vector<int> stack;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[static_cast<size_t>(v)] = low[static_cast<size_t>(v)] = counter++;
    stack.push_back(v);
    on[static_cast<size_t>(v)] = true;
    for (const std::string &s : n.nodes[static_cast<size_t>(v)].in) {
      auto it = producer.find(s);
      if (it == producer.end()) continue;
      int w = it->second;
      if (index[static_cast<size_t>(w)] < 0) {
        visit(w);
        low[static_cast<size_t>(v)] = std::min(low[static_cast<size_t>(v)], low[static_cast<size_t>(w)]);
      } else if (on[static_cast<size_t>(w)]) {
        low[static_cast<size_t>(v)] = std::min(low[static_cast<size_t>(v)], index[static_cast<size_t>(w)]);
      }
    }
    if (low[static_cast<size_t>(v)] != index[static_cast<size_t>(v)]) return;
    std::vector<std::string> members;
    int w;
    do {
      w = stack.back();
      stack.pop_back();
      on[static_cast<size_t>(w)] = false;
      members.push_back(n.nodes[static_cast<size_t>(w)].out);
    } while (w != v);
    bool self = false;
    for (const std::string &s : n.nodes[static_cast<size_t>(v)].in) self = self || s == n.nodes[static_cast<size_t>(v)].out;
    if (members.size() > 1 || self) {
      std::sort(members.begin(), members.end());
      std::string text;
      for (const std::string &m : members) text += (text.empty() ? "" : ",") + m;
      report.push_back("combinational cycle {" + text + "}");
    }
  };
  for (int v = 0; v < count; ++v)
    if (index[static_cast<size_t>(v)] < 0) visit(v);
  return report;
}

Netlist link(const std::vector<Netlist> &fragments, const std::string &name) {
  Netlist out;
  out.name = name;
  std::vector<NetImport> imports;
  std::set<std::string> ports;
  for (const Netlist &f : fragments) {
    for (const NetPort &p : f.ports)
      if (ports.insert(p.name).second) out.ports.push_back(p);
      else fail(ErrorKind::Link, "multiple drivers: " + p.name);
    out.regs.insert(out.regs.end(), f.regs.begin(), f.regs.end());
    out.nodes.insert(out.nodes.end(), f.nodes.begin(), f.nodes.end());
    out.fsms.insert(out.fsms.end(), f.fsms.begin(), f.fsms.end());
    out.mems.insert(out.mems.end(), f.mems.begin(), f.mems.end());
    for (const LutSpec &l : f.luts)
      if (!out.find_lut(l.name)) out.luts.push_back(l);
    imports.insert(imports.end(), f.imports.begin(), f.imports.end());
  }
  auto table = signal_table(out);
  for (const NetImport &i : imports) {
    auto it = table.find(i.name);
    if (it == table.end()) fail(ErrorKind::Link, "undriven signal: " + i.name);
    if (!(it->second.shape == i.shape))
      fail(ErrorKind::Link, "width conflict: " + i.name + " is " + shape_text(it->second.shape) + ", expected " +
                                shape_text(i.shape));
  }
  for (const Use &u : uses(out))
    if (!table.count(u.signal)) fail(ErrorKind::Link, "undriven signal: " + u.signal);
  return out;
}

std::string dump(const Netlist &n) {
  std::ostringstream os;
  os << "netlist " << n.name << "\n";
  os << "PORTS\n";
  for (const NetPort &p : n.ports)
    os << (p.dir == PortDir::In ? "in " : "out ") << p.name << " " << shape_text(p.shape) << "\n";
  os << "REGS\n";
  for (const NetReg &r : n.regs) {
    os << r.name << " " << shape_text(r.shape) << " " << reg_role_name(r.role) << " d=" << r.d;
    if (!r.enable.empty()) os << " en=" << r.enable;
    if (r.reset) os << " reset=" << r.reset;
    os << "\n";
  }
  os << "NODES\n";
  for (const NetNode &x : n.nodes) {
    os << x.out << " " << shape_text(x.shape) << " = " << net_op_name(x.op);
    if (x.op == NetOp::Const) os << " " << x.value;
    if (x.op == NetOp::Shl || x.op == NetOp::Shr || x.op == NetOp::Slice) os << " #" << x.value;
    if (x.op == NetOp::Lut) os << " @" << x.lut;
    for (const std::string &s : x.in) os << " " << s;
    os << "\n";
  }
  os << "FSMS\n";
  for (const NetFsm &f : n.fsms) {
    os << "fsm " << f.name << " state=" << f.state << " states=";
    for (size_t k = 0; k < f.states.size(); ++k) os << (k ? "," : "") << f.states[k];
    os << "\n";
    for (const FsmTransition &t : f.transitions) os << "  " << t.from << " -> " << t.to << " when " << t.cond << "\n";
    for (const auto &[sig, states] : f.outputs) {
      os << "  out " << sig << " =";
      for (size_t k = 0; k < states.size(); ++k) os << (k ? "|" : " ") << states[k];
      os << "\n";
    }
  }
  os << "MEMS\n";
  for (const NetMem &m : n.mems)
    os << (m.kind == MemKind::Read ? "read " : "write ") << m.array << " word=" << m.word_width << " depth=" << m.depth
       << " addr=" << m.addr << " en=" << m.enable << " data=" << m.data << " element="
       << shape_text({m.element_width, m.element_signed}) << " elements=" << m.elements << "\n";
  for (const LutSpec &l : n.luts)
    os << "rom " << l.name << " address=" << l.address_width << " data=" << shape_text({l.data.width, l.data.is_signed})
       << " source=" << (l.source == LutSpec::Source::Builtin ? "builtin" : "init") << "\n";
  return os.str();
}

int RegisterCensus::total() const {
  int t = fsm_states;
  for (const auto &[role, k] : by_role) t += k;
  return t;
}

RegisterCensus census(const Netlist &n) {
  RegisterCensus c;
  for (const NetReg &r : n.regs) ++c.by_role[r.role];
  c.fsm_states = static_cast<int>(n.fsms.size());
  return c;
}

// ---------------------------------------------------------------------------
// Builder

NetShape NetBuilder::shape(const std::string &signal) const {
  auto it = shapes_.find(signal);
  if (it == shapes_.end()) fail(ErrorKind::Internal, "builder: unknown signal " + signal);
  return it->second;
}

std::string NetBuilder::fresh() { return name("t" + std::to_string(next_++)); }

std::string NetBuilder::node(NetNode x) {
  if (x.out.empty()) x.out = fresh();
  shapes_[x.out] = x.shape;
  n_.nodes.push_back(x);
  return x.out;
}

std::string NetBuilder::konst(int64_t v, NetShape s) {
  NetNode x;
  x.op = NetOp::Const;
  x.value = v;
  x.shape = s;
  return node(x);
}

std::string NetBuilder::konst(int64_t v) { return konst(v, {bits_for_constant(v), v < 0}); }

std::string NetBuilder::op(NetOp o, std::vector<std::string> in, int64_t value, const std::string &out) {
  NetNode x;
  x.op = o;
  x.in = std::move(in);
  x.value = value;
  x.out = out;
  std::vector<NetShape> s;
  for (const std::string &i : x.in) s.push_back(shape(i));
  x.shape = natural_shape(x, s);
  return node(x);
}

std::string NetBuilder::resize(const std::string &x, NetShape s, const std::string &out) {
  if (out.empty() && shape(x) == s) return x;
  NetNode r;
  r.op = NetOp::Resize;
  r.in = {x};
  r.shape = s;
  r.out = out;
  return node(r);
}

std::string NetBuilder::slice(const std::string &x, int low, int width, const std::string &out) {
  NetNode r;
  r.op = NetOp::Slice;
  r.in = {x};
  r.value = low;
  r.shape = {width, false};
  r.out = out;
  return node(r);
}

std::string NetBuilder::mux(const std::string &c, const std::string &a, const std::string &b, const std::string &out) {
  return op(NetOp::Mux, {c, a, b}, 0, out);
}

std::string NetBuilder::eq(const std::string &a, int64_t v) {
  NetShape s = shape(a);
  return op(NetOp::Eq, {a, konst(v, fits(v, s.width, s.is_signed) ? s : NetShape{bits_for_constant(v), v < 0})});
}

std::string NetBuilder::logic_and(const std::vector<std::string> &bits) {
  if (bits.empty()) return konst(1, {1, false});
  std::string acc = bits[0];
  for (size_t k = 1; k < bits.size(); ++k) acc = op(NetOp::And, {acc, bits[k]});
  return acc;
}

std::string NetBuilder::logic_or(const std::vector<std::string> &bits) {
  if (bits.empty()) return konst(0, {1, false});
  std::string acc = bits[0];
  for (size_t k = 1; k < bits.size(); ++k) acc = op(NetOp::Or, {acc, bits[k]});
  return acc;
}

std::string NetBuilder::logic_not(const std::string &bit) { return op(NetOp::Xor, {bit, konst(1, {1, false})}); }

std::string NetBuilder::increment(const std::string &x) {
  return resize(op(NetOp::Add, {x, konst(1, {1, false})}), shape(x));
}

std::string NetBuilder::reg(const std::string &local, NetShape s, RegRole role, int64_t reset) {
  NetReg r;
  r.name = name(local);
  r.shape = s;
  r.role = role;
  r.reset = reset;
  shapes_[r.name] = s;
  n_.regs.push_back(r);
  return r.name;
}

void NetBuilder::connect(const std::string &reg_name, const std::string &d, const std::string &enable) {
  for (NetReg &r : n_.regs)
    if (r.name == reg_name) {
      r.d = d;
      r.enable = enable;
      return;
    }
  fail(ErrorKind::Internal, "builder: no register " + reg_name);
}

void NetBuilder::port(const std::string &pname, PortDir dir, NetShape s) {
  n_.ports.push_back({pname, dir, s});
  shapes_[pname] = s;
}

void NetBuilder::import(const std::string &iname, NetShape s) {
  n_.imports.push_back({iname, s});
  shapes_[iname] = s;
}

void NetBuilder::fsm(NetFsm f) {
  shapes_[f.state] = {f.state_width(), false};
  for (const auto &[sig, states] : f.outputs) shapes_[sig] = {1, false};
  n_.fsms.push_back(std::move(f));
}

}  // namespace minihls
