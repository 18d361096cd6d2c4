#include <algorithm>
#include <functional>
#include <limits>
#include <set>

#include "minihls/dataflow.hpp"

namespace minihls {

namespace {

enum class Chain { None, AddSub, Mul, And, Or, Xor };

Chain chain_of(Opcode op) {
  switch (op) {
    case Opcode::Add:
    case Opcode::Sub: return Chain::AddSub;
    case Opcode::Mul: return Chain::Mul;
    case Opcode::And: return Chain::And;
    case Opcode::Or: return Chain::Or;
    case Opcode::Xor: return Chain::Xor;
    default: return Chain::None;
  }
}

std::vector<int> use_counts(const DataflowGraph &g) {
  std::vector<int> uses(g.nodes.size(), 0);
  for (const Node &n : g.nodes)
    for (int o : n.operands) ++uses[static_cast<size_t>(o)];
  for (const Port &p : g.outputs) ++uses[static_cast<size_t>(p.node)];
  return uses;
}

std::vector<bool> reachable_from_lpr(const DataflowGraph &g) {
  // Operands do not always precede users while a rebalance is in progress,
  // so iterate to a fixed point.
  std::vector<bool> r(g.nodes.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Node &n : g.nodes) {
      if (r[static_cast<size_t>(n.id)]) continue;
      bool hit = false;
      for (int o : n.operands) hit = hit || r[static_cast<size_t>(o)] || g.node(o).op == Opcode::Lpr;
      if (hit) {
        r[static_cast<size_t>(n.id)] = true;
        changed = true;
      }
    }
  }
  return r;
}

class Rebalancer {
public:
  explicit Rebalancer(DataflowGraph &g) : g_(g) {}

  void run() {
    uses_ = use_counts(g_);
    lpr_dep_ = reachable_from_lpr(g_);
    const size_t original = g_.nodes.size();
    for (size_t id = 0; id < original; ++id) {
      const Node &n = g_.nodes[id];
      Chain c = chain_of(n.op);
      if (c == Chain::None || absorbed(n.id, c)) continue;
      rebuild(n.id, c);
    }
    prune(g_);
    infer_widths(g_);
  }

private:
  static constexpr int kLate = std::numeric_limits<int>::max() / 4;

  const Node &at(int id) const { return g_.nodes[static_cast<size_t>(id)]; }

  bool transparent_copy(int id) const {
    const Node &n = at(id);
    if (n.op != Opcode::Copy || n.latched) return false;
    const Node &src = at(n.operands[0]);
    return n.width == src.width && n.is_signed == src.is_signed;
  }

  int single_user(int id) const {
    for (const Node &n : g_.nodes)
      for (int o : n.operands)
        if (o == id) return n.id;
    return -1;
  }

  // Unlatched copy that drops bits. Wrapping commutes with add, sub and the
  // bitwise ops, so such a copy may sit inside a chain whose result is
  // wrapped to the same or a narrower width anyway.
  bool wrapping_copy(int id) const {
    const Node &n = at(id);
    return n.op == Opcode::Copy && !n.latched && !transparent_copy(id);
  }

  static constexpr int kNoSink = std::numeric_limits<int>::max();

  // Width the chain topped by `top` is finally wrapped to, or kNoSink.
  int sink_width(int top, Chain c) const {
    if (c == Chain::Mul || c == Chain::None) return kNoSink;
    int u = top;
    while (uses_[static_cast<size_t>(u)] == 1) {
      int next = single_user(u);
      if (next < 0) break;
      if (wrapping_copy(next)) return at(next).width;
      if (!transparent_copy(next)) break;
      u = next;
    }
    return kNoSink;
  }

  bool passable(int copy, int sink) const {
    return transparent_copy(copy) || (wrapping_copy(copy) && sink != kNoSink && at(copy).width >= sink);
  }

  // Expanded by the chain of its only consumer.
  bool absorbed(int id, Chain c) const {
    // Climb to the top of the chain, noting the narrowest wrap on the way.
    int narrowest = kNoSink, cur = id, top = -1;
    while (uses_[static_cast<size_t>(cur)] == 1) {
      int u = single_user(cur);
      int wrap = kNoSink;
      while (u >= 0 && at(u).op == Opcode::Copy && !at(u).latched && uses_[static_cast<size_t>(u)] == 1) {
        if (wrapping_copy(u)) wrap = std::min(wrap, at(u).width);
        u = single_user(u);
      }
      if (u < 0 || chain_of(at(u).op) != c) break;
      narrowest = std::min(narrowest, wrap);
      top = cur = u;
    }
    if (top < 0) return false;
    if (narrowest == kNoSink) return true;
    int sink = sink_width(top, c);
    return sink != kNoSink && narrowest >= sink;
  }

  bool expandable(int id, Chain c) const {
    if (uses_[static_cast<size_t>(id)] != 1) return false;
    if (at(id).op == Opcode::Copy && passable(id, sink_)) return expandable(at(id).operands[0], c);
    return chain_of(at(id).op) == c;
  }

  struct Term {
    int node;
    int sign;
  };

  void collect(int id, int sign, Chain c, bool root, std::vector<Term> &out) const {
    if (!root && !expandable(id, c)) {
      out.push_back({id, sign});
      return;
    }
    const Node &n = at(id);
    if (n.op == Opcode::Copy) {
      collect(n.operands[0], sign, c, false, out);
      return;
    }
    collect(n.operands[0], sign, c, false, out);
    collect(n.operands[1], n.op == Opcode::Sub ? -sign : sign, c, false, out);
  }

  int arrival(int id, std::map<int, int> &memo) const {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const Node &n = at(id);
    int a = 0;
    for (int o : n.operands) a = std::max(a, arrival(o, memo));
    if (n.registered()) ++a;
    memo[id] = a;
    return a;
  }

  int add(Node n) {
    n.id = static_cast<int>(g_.nodes.size());
    g_.nodes.push_back(std::move(n));
    uses_.push_back(0);
    lpr_dep_.push_back(false);
    return g_.nodes.back().id;
  }

  int make(Opcode op, int a, int b) {
    Node n;
    n.op = op;
    n.operands = {a, b};
    int id = add(n);
    ++uses_[static_cast<size_t>(a)];
    ++uses_[static_cast<size_t>(b)];
    lpr_dep_[static_cast<size_t>(id)] = lpr_dep_[static_cast<size_t>(a)] || lpr_dep_[static_cast<size_t>(b)];
    return id;
  }

  int make_const(int64_t v) {
    Node n;
    n.op = Opcode::Const;
    n.value = v;
    return add(n);
  }

  void rebuild(int root, Chain c) {
    std::vector<Term> terms;
    sink_ = sink_width(root, c);
    collect(root, 1, c, true, terms);
    if (terms.size() < 3) return;

    // Fold constant terms together.
    std::vector<Term> vars;
    std::optional<int64_t> folded;
    for (const Term &t : terms) {
      const Node &n = at(t.node);
      if (n.op != Opcode::Const) {
        vars.push_back(t);
        continue;
      }
      int64_t v = n.value * t.sign;
      if (!folded) {
        folded = v;
        continue;
      }
      switch (c) {
        case Chain::AddSub: *folded += v; break;
        case Chain::Mul: *folded *= v; break;
        case Chain::And: *folded &= v; break;
        case Chain::Or: *folded |= v; break;
        case Chain::Xor: *folded ^= v; break;
        case Chain::None: break;
      }
    }
    bool identity = folded && ((c == Chain::AddSub && *folded == 0) || (c == Chain::Mul && *folded == 1) ||
                               ((c == Chain::Or || c == Chain::Xor) && *folded == 0));
    if (folded && !identity) vars.push_back({make_const(*folded), 1});
    if (vars.empty()) vars.push_back({make_const(folded.value_or(0)), 1});

    std::map<int, int> memo;
    struct Item {
      int node;
      int sign;
      int time;
      size_t order;
    };
    std::vector<Item> items;
    for (size_t k = 0; k < vars.size(); ++k) {
      bool late = lpr_dep_[static_cast<size_t>(vars[k].node)] || at(vars[k].node).op == Opcode::Lpr;
      int t = late ? kLate : arrival(vars[k].node, memo);
      items.push_back({vars[k].node, vars[k].sign, t, k});
    }
    size_t order = items.size();
    auto earliest = [&] {
      auto it = std::min_element(items.begin(), items.end(), [](const Item &a, const Item &b) {
        return std::tie(a.time, a.order) < std::tie(b.time, b.order);
      });
      Item i = *it;
      items.erase(it);
      return i;
    };
    while (items.size() > 1) {
      Item a = earliest();
      Item b = earliest();
      int id, sign = 1;
      if (c != Chain::AddSub) {
        static const std::map<Chain, Opcode> ops = {
            {Chain::Mul, Opcode::Mul}, {Chain::And, Opcode::And}, {Chain::Or, Opcode::Or}, {Chain::Xor, Opcode::Xor}};
        id = make(ops.at(c), a.node, b.node);
      } else if (a.sign > 0 && b.sign > 0) {
        id = make(Opcode::Add, a.node, b.node);
      } else if (a.sign > 0) {
        id = make(Opcode::Sub, a.node, b.node);
      } else if (b.sign > 0) {
        id = make(Opcode::Sub, b.node, a.node);
      } else {
        id = make(Opcode::Add, a.node, b.node);
        sign = -1;
      }
      int t = std::max(a.time, b.time);
      items.push_back({id, sign, t >= kLate ? kLate : t + 1, order++});
    }
    int top = items[0].node;
    if (items[0].sign < 0) top = make(Opcode::Sub, make_const(0), top);
    redirect(root, top);
  }

  void redirect(int from, int to) {
    for (Node &n : g_.nodes)
      if (n.id != to)
        for (int &o : n.operands)
          if (o == from) o = to;
    for (Port &p : g_.outputs)
      if (p.node == from) p.node = to;
    uses_[static_cast<size_t>(to)] = uses_[static_cast<size_t>(from)];
    uses_[static_cast<size_t>(from)] = 0;
  }

  DataflowGraph &g_;
  std::vector<int> uses_;
  std::vector<bool> lpr_dep_;
  int sink_ = kNoSink;
};

}  // namespace

void rebalance(DataflowGraph &g) { Rebalancer(g).run(); }

void schedule(DataflowGraph &g) {
  rebalance(g);
  const size_t n = g.nodes.size();
  auto idx = [](int id) { return static_cast<size_t>(id); };

  // Feedback region: reachable from an LPR and reaching an SNX.
  std::vector<bool> fwd = reachable_from_lpr(g);
  std::vector<bool> bwd(n, false);
  for (const FeedbackPair &f : g.feedbacks) bwd[idx(g.node(f.snx).operands[0])] = true;
  for (size_t k = n; k-- > 0;)
    if (bwd[k])
      for (int o : g.nodes[k].operands) bwd[idx(o)] = true;
  std::vector<bool> region(n, false);
  for (const Node &nd : g.nodes) {
    bool r = fwd[idx(nd.id)] && bwd[idx(nd.id)] && nd.op != Opcode::Const && nd.op != Opcode::Lpr &&
             nd.op != Opcode::Snx;
    region[idx(nd.id)] = r;
    g.node(nd.id).in_feedback = r;
  }

  std::vector<int> chain(n, 0);
  for (const Node &nd : g.nodes) {
    if (!region[idx(nd.id)]) continue;
    if (nd.op == Opcode::Mul || nd.op == Opcode::Lut) {
      fail(ErrorKind::FeedbackTooDeep, std::string("feedback cycle contains a ") +
                                           (nd.op == Opcode::Mul ? "multiplier" : "lookup table") +
                                           " and cannot close in one cycle");
    }
    int longest = 0;
    for (int o : nd.operands)
      if (region[idx(o)]) longest = std::max(longest, chain[idx(o)]);
    chain[idx(nd.id)] = longest + (nd.registered() ? 1 : 0);
    if (chain[idx(nd.id)] > kMaxFeedbackChain)
      fail(ErrorKind::FeedbackTooDeep, "feedback cycle chains " + std::to_string(chain[idx(nd.id)]) +
                                           " operators; at most " + std::to_string(kMaxFeedbackChain) +
                                           " close in one cycle");
  }

  auto asap = [&](Node &nd) {
    int s = 0;
    for (int o : nd.operands) s = std::max(s, g.node(o).stage);
    nd.stage = nd.registered() ? s + 1 : s;
  };
  auto is_lpr = [&](int id) { return g.node(id).op == Opcode::Lpr; };
  for (Node &nd : g.nodes)
    if (!fwd[idx(nd.id)] && nd.op != Opcode::Lpr) asap(nd);

  int s_fb = 0;
  if (!g.feedbacks.empty()) {
    int ready = 0;
    for (const Node &nd : g.nodes) {
      if (region[idx(nd.id)])
        for (int o : nd.operands)
          if (!region[idx(o)] && !is_lpr(o)) ready = std::max(ready, g.node(o).stage);
      if (nd.op == Opcode::Snx) {
        int o = nd.operands[0];
        if (!region[idx(o)] && !is_lpr(o)) ready = std::max(ready, g.node(o).stage);
      }
    }
    s_fb = ready + 1;
  }
  for (Node &nd : g.nodes) {
    if (nd.op == Opcode::Lpr) nd.stage = s_fb - 1;
    else if (region[idx(nd.id)]) nd.stage = s_fb;
    else if (fwd[idx(nd.id)]) asap(nd);
  }

  // Delay registers, shared per source.
  std::map<int, std::vector<int>> delays;
  auto delayed = [&](int src, int stage) {
    int have = g.node(src).stage;
    if (have > stage) fail(ErrorKind::Internal, "operand scheduled after its user");
    if (have == stage) return src;
    auto &chain_of_src = delays[src];
    while (static_cast<int>(chain_of_src.size()) < stage - have) {
      int prev = chain_of_src.empty() ? src : chain_of_src.back();
      Node d;
      d.op = Opcode::Copy;
      d.latched = true;
      d.operands = {prev};
      d.width = g.node(src).width;
      d.is_signed = g.node(src).is_signed;
      d.stage = g.node(prev).stage + 1;
      d.id = static_cast<int>(g.nodes.size());
      g.nodes.push_back(d);
      chain_of_src.push_back(d.id);
    }
    return chain_of_src[static_cast<size_t>(stage - have - 1)];
  };
  for (size_t k = 0; k < n; ++k) {
    Node nd = g.nodes[k];
    bool changed = false;
    for (int &o : nd.operands) {
      if (g.node(o).op == Opcode::Const) continue;
      int required;
      if (nd.op == Opcode::Snx || nd.in_feedback) {
        if (region[idx(o)] || is_lpr(o)) continue;
        required = s_fb - 1;
      } else if (nd.registered()) {
        required = nd.stage - 1;
      } else {
        continue;
      }
      int d = delayed(o, required);
      changed = changed || d != o;
      o = d;
    }
    if (changed) g.nodes[k].operands = nd.operands;
  }

  int depth = 1;
  for (const Port &p : g.outputs) depth = std::max(depth, g.node(p.node).stage);
  for (Port &p : g.outputs) p.node = delayed(p.node, depth);
  g.depth = depth;
  g.feedback_stage = s_fb;
  prune(g);
}

}  // namespace minihls
