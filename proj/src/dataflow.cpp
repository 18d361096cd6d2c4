#include <algorithm>
#include <sstream>

#include "minihls/dataflow.hpp"

namespace minihls {

const char *opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Input: return "INPUT";
    case Opcode::Const: return "CONST";
    case Opcode::Add: return "ADD";
    case Opcode::Sub: return "SUB";
    case Opcode::Mul: return "MUL";
    case Opcode::And: return "AND";
    case Opcode::Or: return "OR";
    case Opcode::Xor: return "XOR";
    case Opcode::Not: return "NOT";
    case Opcode::Shl: return "SHL";
    case Opcode::Shr: return "SHR";
    case Opcode::Eq: return "EQ";
    case Opcode::Ne: return "NE";
    case Opcode::Lt: return "LT";
    case Opcode::Le: return "LE";
    case Opcode::Gt: return "GT";
    case Opcode::Ge: return "GE";
    case Opcode::Select: return "SELECT";
    case Opcode::Lut: return "LUT";
    case Opcode::Lpr: return "LPR";
    case Opcode::Snx: return "SNX";
    case Opcode::Copy: return "COPY";
  }
  return "?";
}

bool is_latched_op(Opcode op) {
  switch (op) {
    case Opcode::Input:
    case Opcode::Const:
    case Opcode::Lpr:
    case Opcode::Snx:
    case Opcode::Copy: return false;
    default: return true;
  }
}

int DataflowGraph::count(Opcode op) const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [&](const Node &n) { return n.op == op; }));
}

// ---------------------------------------------------------------------------
// Widths

namespace {

struct Shape {
  int width;
  bool is_signed;
};

Shape shape_of(const Node &n) { return {n.width, n.is_signed}; }

// Mixed signedness: the unsigned side gains a sign bit.
std::pair<Shape, Shape> promote(Shape a, Shape b) {
  if (a.is_signed == b.is_signed) return {a, b};
  if (!a.is_signed) a = {a.width + 1, true};
  if (!b.is_signed) b = {b.width + 1, true};
  return {a, b};
}

bool range_within(Shape s, ScalarType t) {
  return min_value(std::min(s.width, 64), s.is_signed) >= min_value(t.width, t.is_signed) &&
         max_value(std::min(s.width, 64), s.is_signed) <= max_value(t.width, t.is_signed);
}

Shape const_shape(int64_t v) { return {bits_for_constant(v), v < 0}; }

}  // namespace

void infer_widths(DataflowGraph &g) {
  for (Node &n : g.nodes) {
    auto opnd = [&](size_t k) { return shape_of(g.node(n.operands.at(k))); };
    Shape r{1, false};
    switch (n.op) {
      case Opcode::Input:
      case Opcode::Lpr:
      case Opcode::Lut: r = shape_of(n); break;
      case Opcode::Const: r = const_shape(n.value); break;
      case Opcode::Add: {
        auto [a, b] = promote(opnd(0), opnd(1));
        r = {std::max(a.width, b.width) + 1, a.is_signed};
        break;
      }
      case Opcode::Sub: {
        auto [a, b] = promote(opnd(0), opnd(1));
        r = {std::max(a.width, b.width) + 1, true};
        break;
      }
      case Opcode::Mul: {
        auto [a, b] = promote(opnd(0), opnd(1));
        r = {a.width + b.width, a.is_signed};
        break;
      }
      case Opcode::And:
      case Opcode::Or:
      case Opcode::Xor: {
        auto [a, b] = promote(opnd(0), opnd(1));
        r = {std::max(a.width, b.width), a.is_signed};
        break;
      }
      case Opcode::Not: {
        Shape a = opnd(0);
        r = a.is_signed ? a : Shape{a.width + 1, true};
        break;
      }
      case Opcode::Shl: r = {opnd(0).width + static_cast<int>(n.value), opnd(0).is_signed}; break;
      case Opcode::Shr: r = {std::max(1, opnd(0).width - static_cast<int>(n.value)), opnd(0).is_signed}; break;
      case Opcode::Eq:
      case Opcode::Ne:
      case Opcode::Lt:
      case Opcode::Le:
      case Opcode::Gt:
      case Opcode::Ge: r = {1, false}; break;
      case Opcode::Select: {
        auto [a, b] = promote(opnd(1), opnd(2));
        r = {std::max(a.width, b.width), a.is_signed};
        break;
      }
      case Opcode::Snx: r = shape_of(g.node(n.operands[0])); break;
      case Opcode::Copy:
        r = opnd(0);
        if (n.declared && !range_within(r, *n.declared)) r = {n.declared->width, n.declared->is_signed};
        break;
    }
    if (n.op == Opcode::Snx) {
      // The feedback register holds the declared type.
      const Node &lpr = g.node(std::find_if(g.feedbacks.begin(), g.feedbacks.end(),
                                            [&](const FeedbackPair &f) { return f.snx == n.id; })
                                   ->lpr);
      r = shape_of(lpr);
    }
    if (r.width > 64)
      fail(ErrorKind::WidthOverflow, std::string(opcode_name(n.op)) + " node " + std::to_string(n.id) + " needs " +
                                         std::to_string(r.width) + " bits");
    n.width = r.width;
    n.is_signed = r.is_signed;
  }
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int64_t floor_shift(int64_t v, int64_t k) { return v >> k; }

}  // namespace

std::map<std::string, int64_t> initial_state(const DataflowGraph &g) {
  std::map<std::string, int64_t> s;
  for (const FeedbackPair &f : g.feedbacks) s[f.var] = g.node(f.lpr).value;
  return s;
}

std::vector<int64_t> evaluate_nodes(const DataflowGraph &g, const std::map<std::string, int64_t> &inputs,
                                    const std::map<std::string, int64_t> &state) {
  std::vector<int64_t> v(g.nodes.size(), 0);
  for (const Node &n : g.nodes) {
    auto a = [&](size_t k) { return v[static_cast<size_t>(n.operands.at(k))]; };
    int64_t r = 0;
    switch (n.op) {
      case Opcode::Input: {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) fail(ErrorKind::Internal, "no value for input '" + n.name + "'");
        r = it->second;
        break;
      }
      case Opcode::Const: r = n.value; break;
      case Opcode::Add: r = static_cast<int64_t>(static_cast<uint64_t>(a(0)) + static_cast<uint64_t>(a(1))); break;
      case Opcode::Sub: r = static_cast<int64_t>(static_cast<uint64_t>(a(0)) - static_cast<uint64_t>(a(1))); break;
      case Opcode::Mul: r = static_cast<int64_t>(static_cast<uint64_t>(a(0)) * static_cast<uint64_t>(a(1))); break;
      case Opcode::And: r = a(0) & a(1); break;
      case Opcode::Or: r = a(0) | a(1); break;
      case Opcode::Xor: r = a(0) ^ a(1); break;
      case Opcode::Not: r = ~a(0); break;
      case Opcode::Shl: r = static_cast<int64_t>(static_cast<uint64_t>(a(0)) << n.value); break;
      case Opcode::Shr: r = floor_shift(a(0), n.value); break;
      case Opcode::Eq: r = a(0) == a(1); break;
      case Opcode::Ne: r = a(0) != a(1); break;
      case Opcode::Lt: r = a(0) < a(1); break;
      case Opcode::Le: r = a(0) <= a(1); break;
      case Opcode::Gt: r = a(0) > a(1); break;
      case Opcode::Ge: r = a(0) >= a(1); break;
      case Opcode::Select: r = a(0) != 0 ? a(1) : a(2); break;
      case Opcode::Lut: {
        if (n.contents.empty()) fail(ErrorKind::Internal, "lookup table '" + n.name + "' is not bound");
        r = n.contents[static_cast<uint64_t>(a(0)) & low_mask(n.address_width)];
        break;
      }
      case Opcode::Lpr: {
        auto it = state.find(n.name);
        r = it == state.end() ? n.value : it->second;
        break;
      }
      case Opcode::Snx: r = a(0); break;
      case Opcode::Copy: r = n.declared ? wrap_to(a(0), *n.declared) : a(0); break;
    }
    v[static_cast<size_t>(n.id)] = r;
  }
  return v;
}

std::map<std::string, int64_t> evaluate(const DataflowGraph &g, const std::map<std::string, int64_t> &inputs,
                                        std::map<std::string, int64_t> &state) {
  std::vector<int64_t> v = evaluate_nodes(g, inputs, state);
  std::map<std::string, int64_t> out;
  for (const Port &p : g.outputs) out[p.name] = wrap_to(v[static_cast<size_t>(p.node)], p.type);
  for (const FeedbackPair &f : g.feedbacks) state[f.var] = v[static_cast<size_t>(f.snx)];
  return out;
}

// ---------------------------------------------------------------------------
// LUT binding

void bind_luts(DataflowGraph &g, const LutTable &luts) {
  for (Node &n : g.nodes) {
    if (n.op != Opcode::Lut) continue;
    auto it = luts.find(n.name);
    if (it == luts.end()) fail(ErrorKind::Config, "unbound lookup table '" + n.name + "'");
    const LutSpec &spec = it->second;
    if (spec.data.width != n.width || spec.data.is_signed != n.is_signed)
      fail(ErrorKind::InitFile, "lookup table '" + n.name + "' holds " + spec.data.to_string() +
                                    " but the kernel declares " + ScalarType{n.is_signed, n.width}.to_string());
    n.address_width = spec.address_width;
    n.contents = spec.contents;
  }
}

// ---------------------------------------------------------------------------
// Pruning and text form

void prune(DataflowGraph &g) {
  const size_t n = g.nodes.size();
  std::vector<bool> live(n, false);
  std::vector<int> work;
  auto mark = [&](int id) {
    if (!live[static_cast<size_t>(id)]) {
      live[static_cast<size_t>(id)] = true;
      work.push_back(id);
    }
  };
  for (const Port &p : g.outputs) mark(p.node);
  for (const FeedbackPair &f : g.feedbacks) {
    mark(f.snx);
    mark(f.lpr);
  }
  for (const Port &p : g.inputs) mark(p.node);
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    for (int o : g.node(id).operands) mark(o);
  }

  // Kahn's order, smallest old id first, so untouched graphs keep their numbering.
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> users(n);
  for (const Node &nd : g.nodes) {
    if (!live[static_cast<size_t>(nd.id)]) continue;
    for (int o : nd.operands) {
      ++indegree[static_cast<size_t>(nd.id)];
      users[static_cast<size_t>(o)].push_back(nd.id);
    }
  }
  std::vector<int> ready;
  for (const Node &nd : g.nodes)
    if (live[static_cast<size_t>(nd.id)] && indegree[static_cast<size_t>(nd.id)] == 0) ready.push_back(nd.id);
  std::vector<int> order;
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    int id = *it;
    ready.erase(it);
    order.push_back(id);
    for (int u : users[static_cast<size_t>(id)])
      if (--indegree[static_cast<size_t>(u)] == 0) ready.push_back(u);
  }

  std::vector<int> remap(n, -1);
  for (size_t k = 0; k < order.size(); ++k) remap[static_cast<size_t>(order[k])] = static_cast<int>(k);
  std::vector<Node> nodes;
  for (int old : order) {
    Node nd = g.node(old);
    nd.id = remap[static_cast<size_t>(old)];
    for (int &o : nd.operands) o = remap[static_cast<size_t>(o)];
    nodes.push_back(std::move(nd));
  }
  g.nodes = std::move(nodes);
  for (Port &p : g.inputs) p.node = remap[static_cast<size_t>(p.node)];
  for (Port &p : g.outputs) p.node = remap[static_cast<size_t>(p.node)];
  for (FeedbackPair &f : g.feedbacks) {
    f.lpr = remap[static_cast<size_t>(f.lpr)];
    f.snx = remap[static_cast<size_t>(f.snx)];
  }
}

std::string dump(const DataflowGraph &g) {
  std::ostringstream os;
  for (const Node &n : g.nodes) {
    os << n.id << ": " << opcode_name(n.op) << '(' << n.width << ',' << (n.is_signed ? 's' : 'u') << ','
       << n.stage << ')';
    for (int o : n.operands) os << " %" << o;
    switch (n.op) {
      case Opcode::Input: os << ' ' << n.name; break;
      case Opcode::Const: os << ' ' << n.value; break;
      case Opcode::Shl:
      case Opcode::Shr: os << " #" << n.value; break;
      case Opcode::Lut: os << " @" << n.name; break;
      case Opcode::Lpr: os << ' ' << n.name << " init=" << n.value; break;
      case Opcode::Snx: os << ' ' << n.name; break;
      case Opcode::Copy:
        if (n.declared) os << " as " << n.declared->to_string();
        if (n.latched) os << " reg";
        break;
      default: break;
    }
    if (n.in_feedback) os << " chained";
    os << '\n';
  }
  for (const Port &p : g.inputs) os << "in " << p.name << ' ' << p.type.to_string() << " = %" << p.node << '\n';
  for (const Port &p : g.outputs) os << "out " << p.name << ' ' << p.type.to_string() << " = %" << p.node << '\n';
  for (const FeedbackPair &f : g.feedbacks) os << "feedback " << f.var << " %" << f.lpr << " -> %" << f.snx << '\n';
  os << "depth " << g.depth << '\n';
  return os.str();
}

}  // namespace minihls
