#include "minihls/memif.hpp"

#include <algorithm>

#include "minihls/common.hpp"

namespace minihls {

namespace {

NetShape u(int w) { return {w, false}; }

// Bits for the unsigned range 0..max.
int bits_upto(int64_t max) { return clog2(static_cast<uint64_t>(max) + 1); }

const NetShape kBit{1, false};

std::string buffer_prefix(const std::string &array) { return "buf_" + array; }
std::string agen_prefix(const std::string &array) { return "agen_" + array; }

}  // namespace

AddressGenerator plan_addresses(const WindowSpec &ws, int64_t trip) {
  AddressGenerator a;
  a.per_word = ws.elements_per_word();
  a.first_element = ws.anchor(0);
  int64_t last = ws.anchor(trip - 1) + ws.span - 1;
  a.element_count = last - a.first_element + 1;
  a.base = a.first_element / a.per_word;
  a.word_count = last / a.per_word - a.base + 1;
  return a;
}

std::vector<int64_t> gen_address_stream(const WindowSpec &ws, int64_t trip) {
  AddressGenerator a = plan_addresses(ws, trip);
  std::vector<int64_t> out;
  for (int64_t w = 0; w < a.word_count; ++w) out.push_back(a.base + w);
  return out;
}

MemPorts memory_ports(bool input, const std::string &array, bool suffixed) {
  std::string s = suffixed ? "_" + array : "";
  std::string p = input ? "mem_in_" : "mem_out_";
  return {p + "addr" + s, p + (input ? "en" : "we") + s, p + "data" + s};
}

int64_t memory_depth(const WindowSpec &ws) {
  int64_t per = ws.elements_per_word();
  return (ws.array_size + per - 1) / per;
}

Netlist build_address_generator(const WindowSpec &ws, int64_t trip, const MemPorts &ports) {
  Netlist f;
  NetBuilder b(f, agen_prefix(ws.array));
  AddressGenerator plan = plan_addresses(ws, trip);
  const int64_t depth = memory_depth(ws);
  const int aw = clog2(static_cast<uint64_t>(depth));

  b.port(ports.addr, PortDir::Out, u(aw));
  b.port(ports.enable, PortDir::Out, kBit);
  b.port(ports.data, PortDir::In, u(ws.bus_width));
  b.import("ctrl.fetch", kBit);
  const std::string space = buffer_prefix(ws.array) + ".space";
  b.import(space, kBit);

  std::string widx = b.reg("widx", u(bits_upto(plan.word_count)), RegRole::Control);
  std::string more = b.op(NetOp::Ne, {widx, b.konst(plan.word_count, b.shape(widx))});
  std::string issue = b.op(NetOp::And, {b.op(NetOp::And, {"ctrl.fetch", space}), more}, 0, b.name("issue"));
  b.connect(widx, b.increment(widx), issue);
  b.resize(b.op(NetOp::Add, {b.konst(plan.base), widx}), u(aw), ports.addr);
  b.resize(issue, kBit, ports.enable);

  NetMem m;
  m.array = ws.array;
  m.kind = MemKind::Read;
  m.word_width = ws.bus_width;
  m.depth = depth;
  m.addr = ports.addr;
  m.enable = ports.enable;
  m.data = ports.data;
  m.element_width = ws.data_width;
  m.element_signed = ws.is_signed;
  m.elements = ws.array_size;
  f.mems.push_back(m);
  return f;
}

Netlist build_smart_buffer(const WindowSpec &ws, int64_t trip, const std::string &data_port,
                           const DesignConfig &cfg) {
  const int64_t P = ws.elements_per_word();
  const int D = ws.data_width;
  const int64_t L = ws.span;
  if (L * D > cfg.max_export_width)
    fail(ErrorKind::Config, "window of '" + ws.array + "' needs " + std::to_string(L * D) +
                                " export bits, above the limit of " + std::to_string(cfg.max_export_width));
  // Each window must end strictly after the previous one; a window that
  // re-reads old elements would need them fetched twice.
  for (size_t j = 0; j < ws.index_counts.size(); ++j) {
    if (ws.index_counts[j] < 2) continue;
    bool inner = j + 1 == ws.index_counts.size();
    int64_t adv = inner ? ws.inner_advance() : ws.wrap_advance();
    if (adv < 1) fail(ErrorKind::NonUniformPattern, "window of '" + ws.array + "' does not advance");
  }

  Netlist f;
  NetBuilder b(f, buffer_prefix(ws.array));
  AddressGenerator plan = plan_addresses(ws, trip);
  b.import(agen_prefix(ws.array) + ".issue", kBit);
  b.import("ctrl.fire", kBit);
  b.import(data_port, u(ws.bus_width));

  std::string pend = b.reg("pend", kBit, RegRole::Control);
  b.connect(pend, agen_prefix(ws.array) + ".issue");
  std::string have = b.reg("have", u(bits_upto(2 * P)), RegRole::Control);
  std::string ready = b.reg("window_valid", kBit, RegRole::Control);

  std::string shift = b.op(NetOp::And, {b.op(NetOp::Ne, {have, b.konst(0, b.shape(have))}),
                                        b.op(NetOp::Or, {b.logic_not(ready), "ctrl.fire"})},
                           0, b.name("shift"));
  std::string after = b.resize(b.op(NetOp::Sub, {have, shift}), b.shape(have));
  std::string loaded = b.mux(pend, b.konst(P, b.shape(have)), b.konst(0, b.shape(have)));
  std::string next_have = b.resize(b.op(NetOp::Add, {after, loaded}), b.shape(have));
  b.connect(have, next_have);
  b.op(NetOp::Le, {next_have, b.konst(P, b.shape(have))}, 0, b.name("space"));

  // Unpacking lanes: lane 0 is the next element to shift in.
  std::vector<std::string> lane, incoming, at;
  for (int64_t j = 0; j < 2 * P; ++j) lane.push_back(b.reg("lane" + std::to_string(j), u(D), RegRole::Buffer));
  for (int64_t l = 0; l < P; ++l) incoming.push_back(b.slice(data_port, static_cast<int>(l * D), D));
  for (int64_t h = 0; h <= P; ++h) at.push_back(b.op(NetOp::And, {pend, b.eq(after, h)}));
  for (int64_t j = 0; j < 2 * P; ++j) {
    std::string above = j + 1 < 2 * P ? lane[static_cast<size_t>(j + 1)] : b.konst(0, u(D));
    std::string v = b.mux(shift, above, lane[static_cast<size_t>(j)]);
    for (int64_t h = 0; h <= P; ++h)
      if (j - h >= 0 && j - h < P) v = b.mux(at[static_cast<size_t>(h)], incoming[static_cast<size_t>(j - h)], v);
    b.connect(lane[static_cast<size_t>(j)], v);
  }

  // Window slots: slot 0 holds the window origin.
  std::vector<std::string> slot;
  for (int64_t j = 0; j < L; ++j) slot.push_back(b.reg("slot" + std::to_string(j), u(D), RegRole::Buffer));
  for (int64_t j = 0; j < L; ++j)
    b.connect(slot[static_cast<size_t>(j)], j + 1 < L ? slot[static_cast<size_t>(j + 1)] : lane[0], shift);

  // Elements shifted so far, counted from the first fetched word.
  std::string count = b.reg("count", u(bits_upto(plan.word_count * P)), RegRole::Control);
  b.connect(count, b.increment(count), shift);

  // Index of the last element of the next window, relative to the stream.
  // It advances by a constant per window that depends on which index carries.
  std::vector<std::string> idx(ws.index_counts.size()), at_max(ws.index_counts.size());
  std::vector<size_t> active;
  for (size_t j = 0; j < ws.index_counts.size(); ++j) {
    if (ws.index_counts[j] < 2) continue;
    active.push_back(j);
    idx[j] = b.reg("i" + std::to_string(j), u(bits_upto(ws.index_counts[j] - 1)), RegRole::Control);
    at_max[j] = b.eq(idx[j], ws.index_counts[j] - 1);
  }
  const int64_t first_target = ws.anchor(0) + L - 1 - plan.base * P;
  const int64_t last_target = ws.anchor(trip - 1) + L - 1 - plan.base * P;
  std::string target;
  std::string done_one;
  if (active.empty()) {
    target = b.konst(first_target);
    done_one = b.op(NetOp::And, {shift, b.op(NetOp::Eq, {count, target})});
  } else {
    target = b.reg("target", u(bits_upto(std::max(first_target, last_target))), RegRole::Control, first_target);
    done_one = b.op(NetOp::And, {shift, b.op(NetOp::Eq, {count, target})});
    auto step_of = [&](size_t j) {
      int64_t s = ws.index_deltas[j];
      for (size_t k = j + 1; k < ws.index_counts.size(); ++k) s -= ws.index_deltas[k] * (ws.index_counts[k] - 1);
      return s;
    };
    std::string step = b.konst(step_of(active.front()));
    for (size_t a = 1; a < active.size(); ++a)
      step = b.mux(at_max[active[a]], step, b.konst(step_of(active[a])));
    b.connect(target, b.resize(b.op(NetOp::Add, {target, step}), b.shape(target)), done_one);
  }
  for (size_t j = 0; j < idx.size(); ++j) {
    if (idx[j].empty()) continue;
    std::vector<std::string> carry{done_one};
    for (size_t k = j + 1; k < idx.size(); ++k)
      if (!idx[k].empty()) carry.push_back(at_max[k]);
    b.connect(idx[j], b.mux(at_max[j], b.konst(0, b.shape(idx[j])), b.increment(idx[j])), b.logic_and(carry));
  }
  b.connect(ready, b.op(NetOp::Or, {done_one, b.op(NetOp::And, {ready, b.logic_not("ctrl.fire")})}));

  NetNode cat;
  cat.op = NetOp::Concat;
  cat.out = b.name("window_data");
  cat.shape = u(static_cast<int>(L * D));
  for (int64_t j = L; j-- > 0;) cat.in.push_back(slot[static_cast<size_t>(j)]);
  b.node(cat);
  return f;
}

Netlist build_output_packer(const WindowSpec &ws, int64_t trip, const MemPorts &ports,
                            const std::vector<ResultField> &elements, int result_width) {
  const int64_t P = ws.elements_per_word();
  const int D = ws.data_width;
  const int64_t E = ws.span;
  const int64_t M = trip * E;
  const int64_t f0 = ws.anchor(0);
  const int64_t s0 = f0 % P;
  const int64_t base = f0 / P;
  const int64_t words = (f0 + M - 1) / P - base + 1;
  const int64_t depth = memory_depth(ws);
  const int aw = clog2(static_cast<uint64_t>(depth));

  Netlist f;
  NetBuilder b(f, "out_" + ws.array);
  b.import("dp.result_valid", kBit);
  b.import("dp.result_data", u(result_width));
  b.port(ports.addr, PortDir::Out, u(aw));
  b.port(ports.enable, PortDir::Out, kBit);
  b.port(ports.data, PortDir::Out, u(ws.bus_width));
  const std::string rv = "dp.result_valid";

  std::vector<std::string> value;
  for (const ResultField &e : elements) value.push_back(b.slice("dp.result_data", e.offset, D));

  // Holding register, emptied one element per cycle from slot 0.
  std::string pending = b.reg("pending", u(bits_upto(E)), RegRole::Control);
  std::string emit = b.op(NetOp::Ne, {pending, b.konst(0, b.shape(pending))});
  std::vector<std::string> hold;
  for (int64_t j = 0; j < E; ++j) hold.push_back(b.reg("hold" + std::to_string(j), u(D), RegRole::Output));
  for (int64_t j = 0; j < E; ++j) {
    std::string next = j + 1 < E ? hold[static_cast<size_t>(j + 1)] : hold[static_cast<size_t>(j)];
    b.connect(hold[static_cast<size_t>(j)], b.mux(rv, value[static_cast<size_t>(j)], next), b.logic_or({rv, emit}));
  }
  std::string drained = b.resize(b.op(NetOp::Sub, {pending, emit}), b.shape(pending));
  b.connect(pending, b.mux(rv, b.konst(E, b.shape(pending)), drained));
  b.op(NetOp::Eq, {pending, b.konst(0, b.shape(pending))}, 0, b.name("idle"));

  std::string sent = b.reg("sent", u(bits_upto(M)), RegRole::Control);
  b.connect(sent, b.increment(sent), emit);
  std::string last = b.eq(sent, M - 1);
  const std::string &e = hold[0];

  // Lane of the element being emitted, kept relative to the first lane so
  // the counter can reset to zero.
  std::string lane;
  if (P > 1) {
    lane = b.reg("lane", u(bits_upto(P - 1)), RegRole::Control);
    b.connect(lane, b.mux(b.eq(lane, P - 1), b.konst(0, b.shape(lane)), b.increment(lane)), emit);
  }
  auto lane_is = [&](int64_t l) { return P > 1 ? b.eq(lane, ((l - s0) % P + P) % P) : b.konst(1, kBit); };
  auto lane_above = [&](int64_t l) {
    std::vector<std::string> any;
    for (int64_t m = l + 1; m < P; ++m) any.push_back(lane_is(m));
    return b.logic_or(any);
  };

  std::vector<std::string> parts;
  for (int64_t l = 0; l + 1 < P; ++l) {
    std::string part = b.reg("part" + std::to_string(l), u(D), RegRole::Output);
    std::string here = lane_is(l);
    b.connect(part, e, b.op(NetOp::And, {emit, here}));
    parts.push_back(b.mux(here, e, b.mux(lane_above(l), part, b.konst(0, u(D)))));
  }
  parts.push_back(b.mux(lane_is(P - 1), e, b.konst(0, u(D))));
  std::string write = b.op(NetOp::And, {emit, b.logic_or({lane_is(P - 1), last})});

  NetNode cat;
  cat.op = NetOp::Concat;
  cat.out = ports.data;
  cat.shape = u(ws.bus_width);
  if (ws.bus_width > P * D) cat.in.push_back(b.konst(0, u(static_cast<int>(ws.bus_width - P * D))));
  for (int64_t l = P; l-- > 0;) cat.in.push_back(parts[static_cast<size_t>(l)]);
  b.node(cat);

  std::string waddr = b.reg("waddr", u(bits_upto(words)), RegRole::Control);
  b.connect(waddr, b.increment(waddr), write);
  b.resize(b.op(NetOp::Add, {b.konst(base), waddr}), u(aw), ports.addr);
  b.resize(write, kBit, ports.enable);

  NetMem m;
  m.array = ws.array;
  m.kind = MemKind::Write;
  m.word_width = ws.bus_width;
  m.depth = depth;
  m.addr = ports.addr;
  m.enable = ports.enable;
  m.data = ports.data;
  m.element_width = ws.data_width;
  m.element_signed = ws.is_signed;
  m.elements = ws.array_size;
  f.mems.push_back(m);
  return f;
}

Netlist build_controller(const ControllerPlan &plan) {
  Netlist f;
  NetBuilder b(f, "ctrl");
  b.port("start", PortDir::In, kBit);
  b.port("done", PortDir::Out, kBit);
  b.import("dp.result_valid", kBit);
  for (const std::string &v : plan.window_valids) b.import(v, kBit);
  for (const std::string &i : plan.idle) b.import(i, kBit);

  std::string gap_ok = b.konst(1, kBit), gap;
  if (plan.interval > 1) {
    gap = b.reg("gap", u(bits_upto(plan.interval - 1)), RegRole::Control);
    gap_ok = b.eq(gap, 0);
  }

  std::string fire;
  if (plan.trip > 1) {
    NetFsm m;
    m.name = "ctrl";
    m.state = b.name("state");
    m.states = {"IDLE", "FILL", "STEADY", "DRAIN", "DONE"};
    m.outputs[b.name("fetch")] = {"FILL", "STEADY"};
    m.outputs[b.name("run")] = {"FILL", "STEADY"};
    m.outputs["done"] = {"DONE"};

    std::vector<std::string> all{b.name("run"), gap_ok};
    all.insert(all.end(), plan.window_valids.begin(), plan.window_valids.end());
    b.fsm(m);
    fire = b.resize(b.logic_and(all), kBit, b.name("fire"));

    std::string fires = b.reg("fires", u(bits_upto(plan.trip)), RegRole::Control);
    b.connect(fires, b.increment(fires), fire);
    std::string results = b.reg("results", u(bits_upto(plan.trip)), RegRole::Control);
    b.connect(results, b.increment(results), "dp.result_valid");
    std::string last_fire = b.op(NetOp::And, {fire, b.eq(fires, plan.trip - 1)}, 0, b.name("last_fire"));
    std::vector<std::string> fin{b.eq(results, plan.trip)};
    fin.insert(fin.end(), plan.idle.begin(), plan.idle.end());
    std::string finished = b.resize(b.logic_and(fin), kBit, b.name("finished"));

    NetFsm &fsm = f.fsms.back();
    fsm.transitions = {{"IDLE", "start", "FILL"},
                       {"FILL", last_fire, "DRAIN"},
                       {"FILL", fire, "STEADY"},
                       {"STEADY", last_fire, "DRAIN"},
                       {"DRAIN", finished, "DONE"}};
  } else {
    // A single firing needs no iteration state: start arms, done latches.
    std::string busy = b.reg("busy", kBit, RegRole::Control);
    b.connect(busy, b.logic_or({busy, "start"}));
    std::string fired = b.reg("fired", kBit, RegRole::Control);
    std::vector<std::string> all{busy, b.logic_not(fired), gap_ok};
    all.insert(all.end(), plan.window_valids.begin(), plan.window_valids.end());
    fire = b.resize(b.logic_and(all), kBit, b.name("fire"));
    b.connect(fired, b.konst(1, kBit), fire);
    std::string got = b.reg("got", kBit, RegRole::Control);
    b.connect(got, b.konst(1, kBit), "dp.result_valid");
    std::vector<std::string> fin{got};
    fin.insert(fin.end(), plan.idle.begin(), plan.idle.end());
    std::string done = b.reg("done", kBit, RegRole::Control);
    b.connect(done, b.logic_or({done, b.logic_and(fin)}));
    b.resize(busy, kBit, b.name("fetch"));
    b.resize(done, kBit, "done");
  }
  if (!gap.empty()) {
    std::string down = b.resize(b.op(NetOp::Sub, {gap, b.konst(1, kBit)}), b.shape(gap));
    b.connect(gap, b.mux(fire, b.konst(plan.interval - 1, b.shape(gap)), down),
              b.logic_or({fire, b.op(NetOp::Ne, {gap, b.konst(0, b.shape(gap))})}));
  }
  return f;
}

std::string scalar_port(const Param &p, bool input) { return (input ? "in_" : "out_") + p.name; }

namespace {

int64_t linear_constant(const ArrayDecl &arr, const std::vector<Affine> &subs,
                        const std::map<std::string, int64_t> &origin) {
  int64_t a = 0;
  for (size_t d = 0; d < subs.size(); ++d) a = a * arr.extents[d] + subs[d].evaluate(origin);
  return a;
}

const ArrayDecl &find_array(const ScalarizedKernel &sk, const std::string &name) {
  for (const ArrayDecl &a : sk.arrays)
    if (a.name == name) return a;
  fail(ErrorKind::Internal, "no array " + name);
}

std::map<std::string, int64_t> loop_origin(const ScalarizedKernel &sk) {
  std::map<std::string, int64_t> o;
  for (const LoopIndex &i : sk.loop.indices) o[i.name] = i.lower;
  return o;
}

NetOp net_op(Opcode op) {
  switch (op) {
    case Opcode::Add: return NetOp::Add;
    case Opcode::Sub: return NetOp::Sub;
    case Opcode::Mul: return NetOp::Mul;
    case Opcode::And: return NetOp::And;
    case Opcode::Or: return NetOp::Or;
    case Opcode::Xor: return NetOp::Xor;
    case Opcode::Not: return NetOp::Not;
    case Opcode::Shl: return NetOp::Shl;
    case Opcode::Shr: return NetOp::Shr;
    case Opcode::Eq: return NetOp::Eq;
    case Opcode::Ne: return NetOp::Ne;
    case Opcode::Lt: return NetOp::Lt;
    case Opcode::Le: return NetOp::Le;
    case Opcode::Gt: return NetOp::Gt;
    case Opcode::Ge: return NetOp::Ge;
    case Opcode::Select: return NetOp::Mux;
    default: fail(ErrorKind::Internal, std::string("no netlist operator for ") + opcode_name(op));
  }
}

}  // namespace

Netlist build_datapath(const DataflowGraph &g, const ScalarizedKernel &sk, const std::vector<WindowSpec> &inputs,
                       std::vector<ResultField> &layout, const LutTable &luts) {
  Netlist f;
  NetBuilder b(f, "dp");
  b.import("ctrl.fire", kBit);
  const auto origin = loop_origin(sk);

  // Valid bit per stage; the last one is the result strobe.
  std::vector<std::string> valid{"ctrl.fire"};
  for (int s = 1; s <= g.depth; ++s) {
    std::string v = b.reg(s == g.depth ? "result_valid" : "v" + std::to_string(s), kBit, RegRole::Control);
    b.connect(v, valid.back());
    valid.push_back(v);
  }

  // Sources for INPUT nodes.
  std::map<std::string, std::string> source;
  for (const WindowSpec &ws : inputs) {
    std::string data = buffer_prefix(ws.array) + ".window_data";
    b.import(data, u(static_cast<int>(ws.span * ws.data_width)));
    const ArrayDecl &arr = find_array(sk, ws.array);
    int64_t low = INT64_MAX;
    for (const ScalarLoad &l : sk.loads)
      if (l.array == ws.array) low = std::min(low, linear_constant(arr, l.subscripts, origin));
    for (const ScalarLoad &l : sk.loads) {
      if (l.array != ws.array) continue;
      int64_t slot = linear_constant(arr, l.subscripts, origin) - low;
      std::string raw = b.slice(data, static_cast<int>(slot * ws.data_width), ws.data_width);
      source[l.scalar] = b.resize(raw, {l.type.width, l.type.is_signed});
    }
  }
  for (const Param &p : sk.scalar_inputs) {
    b.port(scalar_port(p, true), PortDir::In, {p.type.width, p.type.is_signed});
    source[p.name] = scalar_port(p, true);
  }

  std::vector<std::string> q(g.nodes.size()), c(g.nodes.size());
  std::map<int, std::string> fb_reg;
  auto view = [&](const Node &user, int operand) -> std::string {
    const Node &o = g.node(operand);
    bool chained = user.in_feedback && (o.in_feedback || o.op == Opcode::Lpr);
    return chained ? c[static_cast<size_t>(operand)] : q[static_cast<size_t>(operand)];
  };
  auto qview = [&](int operand) { return q[static_cast<size_t>(operand)]; };

  for (const Node &n : g.nodes) {
    const size_t id = static_cast<size_t>(n.id);
    const NetShape shape{n.width, n.is_signed};
    const std::string tag = std::to_string(n.id);
    auto build = [&](auto operand, const std::string &out) -> std::string {
      switch (n.op) {
        case Opcode::Copy: return b.resize(operand(n.operands[0]), shape, out);
        case Opcode::Lut: {
          if (!f.find_lut(n.name)) {
            auto it = luts.find(n.name);
            if (it != luts.end()) {
              f.luts.push_back(it->second);
            } else {
              LutSpec spec;
              spec.name = n.name;
              spec.address_width = n.address_width;
              spec.data = {n.is_signed, n.width};
              spec.contents = n.contents;
              f.luts.push_back(spec);
            }
          }
          NetNode x;
          x.op = NetOp::Lut;
          x.lut = n.name;
          x.in = {b.resize(operand(n.operands[0]), u(n.address_width))};
          x.shape = shape;
          x.out = out;
          return b.node(x);
        }
        default: {
          NetNode x;
          x.op = net_op(n.op);
          for (int o : n.operands) x.in.push_back(operand(o));
          x.value = n.value;
          x.shape = shape;
          x.out = out;
          return b.node(x);
        }
      }
    };
    switch (n.op) {
      case Opcode::Const: q[id] = c[id] = b.konst(n.value, shape); continue;
      case Opcode::Input: {
        auto it = source.find(n.name);
        if (it == source.end()) fail(ErrorKind::Internal, "no source for input " + n.name);
        q[id] = c[id] = b.resize(it->second, shape);
        continue;
      }
      case Opcode::Lpr: {
        std::string r = b.reg("fb_" + n.name, shape, RegRole::Datapath, n.value);
        fb_reg[n.id] = r;
        q[id] = c[id] = r;
        continue;
      }
      case Opcode::Snx: continue;
      default: break;
    }
    auto chained_operand = [&](int o) { return view(n, o); };
    if (n.registered()) {
      std::string d = build(chained_operand, b.name((n.in_feedback ? "c" : "d") + tag));
      std::string r = b.reg("r" + tag, shape, n.op == Opcode::Copy ? RegRole::Delay : RegRole::Datapath);
      b.connect(r, d);
      q[id] = r;
      c[id] = d;
    } else if (n.in_feedback) {
      c[id] = build(chained_operand, b.name("c" + tag));
      q[id] = build(qview, b.name("n" + tag));
    } else {
      q[id] = c[id] = build(qview, b.name("n" + tag));
    }
  }

  for (const FeedbackPair &fp : g.feedbacks) {
    const Node &lpr = g.node(fp.lpr);
    const Node &snx = g.node(fp.snx);
    // The chained value: ready in the cycle the enable stage fires.
    std::string next = b.resize(c[static_cast<size_t>(snx.operands[0])], {lpr.width, lpr.is_signed});
    int stage = std::max(0, g.feedback_stage - 1);
    b.connect(fb_reg.at(fp.lpr), next, valid.at(static_cast<size_t>(stage)));
  }

  // Result bundle: output k occupies the bits above output k-1.
  layout.clear();
  NetNode cat;
  cat.op = NetOp::Concat;
  cat.out = b.name("result_data");
  int offset = 0;
  std::vector<std::string> fields;
  for (const Port &p : g.outputs) {
    NetShape s{p.type.width, p.type.is_signed};
    fields.push_back(b.resize(q[static_cast<size_t>(p.node)], s));
    layout.push_back({p.name, offset, s});
    offset += s.width;
  }
  if (fields.empty()) {
    fields.push_back(b.konst(0, kBit));
    offset = 1;
  }
  for (size_t k = fields.size(); k-- > 0;) cat.in.push_back(fields[k]);
  cat.shape = u(offset);
  b.node(cat);
  return f;
}

Design build_design(const ScalarizedKernel &sk, const DataflowGraph &g, const DesignConfig &cfg,
                    const LutTable &luts) {
  if (cfg.bus_width != 8 && cfg.bus_width != 16 && cfg.bus_width != 32 && cfg.bus_width != 64)
    fail(ErrorKind::Config, "bus width must be 8, 16, 32 or 64");
  Design d;
  d.trip = sk.loop.trip();
  d.depth = g.depth;

  std::vector<std::string> read, written;
  for (const ArrayDecl &a : sk.arrays) {
    bool used = false;
    if (a.direction == Direction::In)
      for (const ScalarLoad &l : sk.loads) used = used || l.array == a.name;
    else
      for (const ScalarStore &s : sk.stores) used = used || s.array == a.name;
    if (used) (a.direction == Direction::In ? read : written).push_back(a.name);
  }
  for (const std::string &a : read) d.inputs.push_back(detect_window(sk, a, cfg.bus_width));
  for (const std::string &a : written) d.outputs.push_back(detect_window(sk, a, cfg.bus_width));
  for (const WindowSpec &ws : d.outputs) d.interval = std::max(d.interval, ws.span);

  std::vector<Netlist> frags;
  ControllerPlan plan;
  plan.trip = d.trip;
  plan.depth = d.depth;
  plan.interval = d.interval;

  for (const WindowSpec &ws : d.inputs) {
    MemPorts ports = memory_ports(true, ws.array, d.inputs.size() > 1);
    d.ports[ws.array] = ports;
    frags.push_back(build_address_generator(ws, d.trip, ports));
    frags.push_back(build_smart_buffer(ws, d.trip, ports.data, cfg));
    plan.window_valids.push_back(buffer_prefix(ws.array) + ".window_valid");
  }

  std::vector<ResultField> layout;
  Netlist dp = build_datapath(g, sk, d.inputs, layout, luts);
  d.results = layout;
  int result_width = 0;
  for (const ResultField &r : layout) result_width = std::max(result_width, r.offset + r.shape.width);
  result_width = std::max(result_width, 1);

  const auto origin = loop_origin(sk);
  for (const WindowSpec &ws : d.outputs) {
    MemPorts ports = memory_ports(false, ws.array, d.outputs.size() > 1);
    d.ports[ws.array] = ports;
    const ArrayDecl &arr = find_array(sk, ws.array);
    std::vector<ResultField> elements(static_cast<size_t>(ws.span));
    int64_t low = INT64_MAX;
    for (const ScalarStore &s : sk.stores)
      if (s.array == ws.array) low = std::min(low, linear_constant(arr, s.subscripts, origin));
    for (const ScalarStore &s : sk.stores) {
      if (s.array != ws.array) continue;
      auto it = std::find_if(layout.begin(), layout.end(), [&](const ResultField &r) { return r.name == s.scalar; });
      if (it == layout.end()) fail(ErrorKind::Internal, "no result for store of " + s.scalar);
      elements[static_cast<size_t>(linear_constant(arr, s.subscripts, origin) - low)] = *it;
    }
    frags.push_back(build_output_packer(ws, d.trip, ports, elements, result_width));
    plan.idle.push_back("out_" + ws.array + ".idle");
  }

  if (!sk.scalar_outputs.empty()) {
    Netlist res;
    NetBuilder b(res, "res");
    b.import("dp.result_valid", kBit);
    b.import("dp.result_data", u(result_width));
    for (const Param &p : sk.scalar_outputs) {
      auto it = std::find_if(layout.begin(), layout.end(), [&](const ResultField &r) { return r.name == p.name; });
      if (it == layout.end()) fail(ErrorKind::Internal, "no result for output " + p.name);
      NetShape s{p.type.width, p.type.is_signed};
      std::string r = b.reg(p.name, s, RegRole::Output);
      b.connect(r, b.resize(b.slice("dp.result_data", it->offset, s.width), s), "dp.result_valid");
      b.port(scalar_port(p, false), PortDir::Out, s);
      b.resize(r, s, scalar_port(p, false));
    }
    frags.push_back(res);
  }

  frags.insert(frags.begin(), build_controller(plan));
  frags.push_back(dp);
  d.netlist = link(frags, sk.name);
  return d;
}

}  // namespace minihls
