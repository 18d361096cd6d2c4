#include <set>

#include "minihls/dataflow.hpp"

namespace minihls {

namespace {

[[noreturn]] void lowering(const std::string &msg, SourceLoc loc = {}) { fail(ErrorKind::Lowering, msg, loc); }

bool is_compare(Opcode op) {
  return op == Opcode::Eq || op == Opcode::Ne || op == Opcode::Lt || op == Opcode::Le || op == Opcode::Gt ||
         op == Opcode::Ge;
}

std::optional<int> log2_exact(int64_t v) {
  if (v <= 0 || (v & (v - 1)) != 0) return std::nullopt;
  int k = 0;
  while ((int64_t{1} << k) != v) ++k;
  return k;
}

class Lowerer {
public:
  explicit Lowerer(const ScalarizedKernel &sk) : sk_(sk) {}

  DataflowGraph run() {
    for (const ScalarLoad &l : sk_.loads) input(l.scalar, l.type);
    for (const Param &p : sk_.scalar_inputs) input(p.name, p.type);
    for (const Param &p : sk_.scalar_outputs) types_[p.name] = p.type;
    for (const Feedback &f : sk_.feedbacks) {
      Node n;
      n.op = Opcode::Lpr;
      n.name = f.var;
      n.value = f.init;
      n.width = f.type.width;
      n.is_signed = f.type.is_signed;
      int id = add(n);
      lpr_[f.var] = id;
      env_[f.var] = id;
      env_[next_key(f.var)] = id;
      types_[f.var] = f.type;
    }
    collect_macro_vars(sk_.compute);

    body(sk_.compute);

    std::set<std::string> seen;
    for (const ScalarStore &st : sk_.stores) {
      if (!seen.insert(st.scalar).second) continue;
      auto it = env_.find(st.scalar);
      if (it == env_.end()) lowering("stored value '" + st.scalar + "' is never computed");
      g_.outputs.push_back({st.scalar, sk_.store_types.at(st.scalar), it->second});
    }
    for (const Param &p : sk_.scalar_outputs) {
      auto it = env_.find(p.name);
      if (it == env_.end()) lowering("output '" + p.name + "' is never assigned");
      g_.outputs.push_back({p.name, p.type, it->second});
    }
    for (const Feedback &f : sk_.feedbacks) {
      int next = macro_vars_.count(f.var) ? env_.at(next_key(f.var)) : env_.at(f.var);
      Node n;
      n.op = Opcode::Snx;
      n.name = f.var;
      n.operands = {next};
      int snx = add(n);
      g_.feedbacks.push_back({f.var, lpr_.at(f.var), snx});
    }
    prune(g_);
    return g_;
  }

private:
  static std::string next_key(const std::string &v) { return v + "'next"; }

  void collect_macro_vars(const std::vector<Stmt> &b) {
    visit_stmts(b, [&](const Stmt &s) {
      if (s.kind == StmtKind::ExprStmt && s.rhs && s.rhs->kind == ExprKind::StoreNext) macro_vars_.insert(s.rhs->name);
    });
  }

  int add(Node n) {
    n.id = static_cast<int>(g_.nodes.size());
    g_.nodes.push_back(std::move(n));
    return g_.nodes.back().id;
  }

  void input(const std::string &name, ScalarType t) {
    Node n;
    n.op = Opcode::Input;
    n.name = name;
    n.width = t.width;
    n.is_signed = t.is_signed;
    int id = add(n);
    g_.inputs.push_back({name, t, id});
    env_[name] = id;
    types_[name] = t;
  }

  const Node &at(int id) const { return g_.nodes[static_cast<size_t>(id)]; }
  bool is_const(int id, int64_t v) const { return at(id).op == Opcode::Const && at(id).value == v; }
  bool is_const(int id) const { return at(id).op == Opcode::Const; }

  int constant(int64_t v) {
    auto it = consts_.find(v);
    if (it != consts_.end()) return it->second;
    Node n;
    n.op = Opcode::Const;
    n.value = v;
    int id = add(n);
    consts_[v] = id;
    return id;
  }

  int node(Opcode op, std::vector<int> operands, int64_t value = 0) {
    Node n;
    n.op = op;
    n.operands = std::move(operands);
    n.value = value;
    return add(n);
  }

  int binop(Opcode op, int a, int b) {
    if (is_const(a) && is_const(b)) {
      int64_t x = at(a).value, y = at(b).value;
      switch (op) {
        case Opcode::Add: return constant(x + y);
        case Opcode::Sub: return constant(x - y);
        case Opcode::Mul: return constant(x * y);
        case Opcode::And: return constant(x & y);
        case Opcode::Or: return constant(x | y);
        case Opcode::Xor: return constant(x ^ y);
        case Opcode::Eq: return constant(x == y);
        case Opcode::Ne: return constant(x != y);
        case Opcode::Lt: return constant(x < y);
        case Opcode::Le: return constant(x <= y);
        case Opcode::Gt: return constant(x > y);
        case Opcode::Ge: return constant(x >= y);
        default: break;
      }
    }
    switch (op) {
      case Opcode::Add:
        if (is_const(a, 0)) return b;
        if (is_const(b, 0)) return a;
        break;
      case Opcode::Sub:
        if (is_const(b, 0)) return a;
        break;
      case Opcode::Mul:
        if (is_const(a, 1)) return b;
        if (is_const(b, 1)) return a;
        if (is_const(a, 0) || is_const(b, 0)) return constant(0);
        break;
      case Opcode::And:
        if (is_const(a, 0) || is_const(b, 0)) return constant(0);
        break;
      case Opcode::Or:
      case Opcode::Xor:
        if (is_const(a, 0)) return b;
        if (is_const(b, 0)) return a;
        break;
      default: break;
    }
    return node(op, {a, b});
  }

  int shift(Opcode op, int a, int64_t k) {
    if (k == 0) return a;
    if (is_const(a)) return constant(op == Opcode::Shl ? at(a).value * (int64_t{1} << k) : at(a).value >> k);
    return node(op, {a}, k);
  }

  int coerce(int v, ScalarType t) {
    if (is_const(v)) return constant(wrap_to(at(v).value, t));
    if (at(v).op == Opcode::Copy && at(v).declared == t) return v;
    Node n;
    n.op = Opcode::Copy;
    n.operands = {v};
    n.declared = t;
    return add(n);
  }

  int condition(int c) {
    if (is_const(c)) return constant(at(c).value != 0);
    if (is_compare(at(c).op)) return c;
    return binop(Opcode::Ne, c, constant(0));
  }

  int select(int c, int t, int e) {
    if (t == e) return t;
    if (is_const(c)) return at(c).value ? t : e;
    return node(Opcode::Select, {c, t, e});
  }

  int constant_operand(const Expr &e, const char *what) {
    int v = expr(e);
    if (!is_const(v)) lowering(std::string(what) + " by a non-constant amount", e.loc);
    return v;
  }

  int expr(const Expr &e) {
    switch (e.kind) {
      case ExprKind::IntLit: return constant(e.value);
      case ExprKind::Var: {
        auto it = env_.find(e.name);
        if (it == env_.end()) lowering("use of '" + e.name + "' before assignment", e.loc);
        return it->second;
      }
      case ExprKind::LoadPrev: {
        auto it = lpr_.find(e.name);
        if (it == lpr_.end()) lowering("'" + e.name + "' is not a feedback variable", e.loc);
        return it->second;
      }
      case ExprKind::Lut: {
        int idx = expr(e.args[0]);
        ScalarType t;
        bool found = false;
        for (const LutDecl &d : sk_.luts)
          if (d.name == e.name) {
            t = d.type;
            found = true;
          }
        if (!found && e.name == "cos") {
          t = builtin_cos().data;
          found = true;
        }
        if (!found) lowering("undeclared lookup table '" + e.name + "'", e.loc);
        Node n;
        n.op = Opcode::Lut;
        n.name = e.name;
        n.operands = {idx};
        n.width = t.width;
        n.is_signed = t.is_signed;
        return add(n);
      }
      case ExprKind::Unary: {
        int a = expr(e.args[0]);
        switch (e.op) {
          case Op::Neg: return binop(Opcode::Sub, constant(0), a);
          case Op::LogicalNot: return binop(Opcode::Eq, a, constant(0));
          case Op::BitNot: return is_const(a) ? constant(~at(a).value) : node(Opcode::Not, {a});
          default: break;
        }
        break;
      }
      case ExprKind::Binary: {
        int a = expr(e.args[0]);
        switch (e.op) {
          case Op::Div: {
            int64_t d = at(constant_operand(e.args[1], "division")).value;
            auto k = log2_exact(d);
            if (!k) lowering("division by " + std::to_string(d) + " is not a power of two", e.loc);
            return shift(Opcode::Shr, a, *k);
          }
          case Op::Mod: {
            int64_t d = at(constant_operand(e.args[1], "remainder")).value;
            auto k = log2_exact(d);
            if (!k) lowering("remainder by " + std::to_string(d) + " is not a power of two", e.loc);
            return binop(Opcode::And, a, constant(d - 1));
          }
          case Op::Shl:
          case Op::Shr: {
            int64_t k = at(constant_operand(e.args[1], "shift")).value;
            if (k < 0 || k > 63) lowering("shift amount out of range", e.loc);
            return shift(e.op == Op::Shl ? Opcode::Shl : Opcode::Shr, a, k);
          }
          default: break;
        }
        int b = expr(e.args[1]);
        switch (e.op) {
          case Op::Add: return binop(Opcode::Add, a, b);
          case Op::Sub: return binop(Opcode::Sub, a, b);
          case Op::Mul: return binop(Opcode::Mul, a, b);
          case Op::And: return binop(Opcode::And, a, b);
          case Op::Or: return binop(Opcode::Or, a, b);
          case Op::Xor: return binop(Opcode::Xor, a, b);
          case Op::Eq: return binop(Opcode::Eq, a, b);
          case Op::Ne: return binop(Opcode::Ne, a, b);
          case Op::Lt: return binop(Opcode::Lt, a, b);
          case Op::Le: return binop(Opcode::Le, a, b);
          case Op::Gt: return binop(Opcode::Gt, a, b);
          case Op::Ge: return binop(Opcode::Ge, a, b);
          default: break;
        }
        break;
      }
      case ExprKind::Index: lowering("array access '" + e.name + "' left in the compute fragment", e.loc);
      case ExprKind::Call: lowering("call to '" + e.name + "' left in the compute fragment", e.loc);
      case ExprKind::StoreNext: lowering("ROCCC_store2next used as a value", e.loc);
    }
    lowering("unsupported operator", e.loc);
  }

  ScalarType type_of(const std::string &name, SourceLoc loc) {
    auto it = types_.find(name);
    if (it == types_.end()) lowering("assignment to undeclared '" + name + "'", loc);
    return it->second;
  }

  void body(const std::vector<Stmt> &stmts) {
    for (const Stmt &s : stmts) stmt(s);
  }

  void stmt(const Stmt &s) {
    switch (s.kind) {
      case StmtKind::Decl:
        if (!s.extents.empty()) return;
        types_[s.name] = s.type;
        env_[s.name] = s.init ? coerce(expr(*s.init), s.type) : constant(0);
        return;
      case StmtKind::Assign:
        if (s.lhs.kind != LValueKind::Var) lowering("store left in the compute fragment", s.loc);
        env_[s.lhs.name] = coerce(expr(*s.rhs), type_of(s.lhs.name, s.loc));
        return;
      case StmtKind::ExprStmt:
        if (s.rhs->kind != ExprKind::StoreNext) lowering("expression statement has no effect", s.loc);
        env_[next_key(s.rhs->name)] = coerce(expr(s.rhs->args[0]), type_of(s.rhs->name, s.loc));
        return;
      case StmtKind::Block: body(s.body); return;
      case StmtKind::If: {
        int c = condition(expr(*s.cond));
        auto before = env_;
        body(s.body);
        auto then_env = env_;
        env_ = before;
        body(s.else_body);
        auto else_env = env_;
        env_.clear();
        for (const auto &[name, old] : before) env_[name] = select(c, then_env.at(name), else_env.at(name));
        return;
      }
      case StmtKind::For: lowering("loop left in the compute fragment", s.loc);
      case StmtKind::Return: lowering("return in the compute fragment", s.loc);
    }
  }

  const ScalarizedKernel &sk_;
  DataflowGraph g_;
  std::map<std::string, int> env_;
  std::map<std::string, ScalarType> types_;
  std::map<std::string, int> lpr_;
  std::map<int64_t, int> consts_;
  std::set<std::string> macro_vars_;
};

}  // namespace

DataflowGraph lower(const ScalarizedKernel &sk) { return Lowerer(sk).run(); }

}  // namespace minihls
