#include <functional>
#include <map>
#include <set>

#include "minihls/frontend.hpp"

namespace minihls {

int64_t Affine::evaluate(const std::map<std::string, int64_t> &values) const {
  int64_t v = constant;
  for (const auto &[name, c] : coeffs) v += c * values.at(name);
  return v;
}

std::optional<Affine> to_affine(const Expr &e, const std::set<std::string> &indices) {
  switch (e.kind) {
    case ExprKind::IntLit: return Affine{{}, e.value};
    case ExprKind::Var:
      if (!indices.count(e.name)) return std::nullopt;
      return Affine{{{e.name, 1}}, 0};
    case ExprKind::Unary: {
      if (e.op != Op::Neg) return std::nullopt;
      auto a = to_affine(e.args[0], indices);
      if (!a) return std::nullopt;
      for (auto &[n, c] : a->coeffs) c = -c;
      a->constant = -a->constant;
      return a;
    }
    case ExprKind::Binary: {
      auto l = to_affine(e.args[0], indices);
      auto r = to_affine(e.args[1], indices);
      if (!l || !r) return std::nullopt;
      Affine out;
      auto scaled = [](Affine a, int64_t k) {
        for (auto &[n, c] : a.coeffs) c *= k;
        a.constant *= k;
        std::erase_if(a.coeffs, [](const auto &kv) { return kv.second == 0; });
        return a;
      };
      switch (e.op) {
        case Op::Add:
        case Op::Sub: {
          int64_t sign = e.op == Op::Add ? 1 : -1;
          out = *l;
          for (const auto &[n, c] : r->coeffs) out.coeffs[n] += sign * c;
          out.constant += sign * r->constant;
          std::erase_if(out.coeffs, [](const auto &kv) { return kv.second == 0; });
          return out;
        }
        case Op::Mul:
          if (l->is_constant()) return scaled(*r, l->constant);
          if (r->is_constant()) return scaled(*l, r->constant);
          return std::nullopt;
        case Op::Shl:
          if (r->is_constant() && r->constant >= 0 && r->constant < 31)
            return scaled(*l, int64_t{1} << r->constant);
          return std::nullopt;
        default: return std::nullopt;
      }
    }
    default: return std::nullopt;
  }
}

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::optional<int64_t> eval_constant(const Expr &e) {
  if (e.kind == ExprKind::IntLit) return e.value;
  if (e.kind == ExprKind::Unary) {
    auto v = eval_constant(e.args[0]);
    if (!v) return std::nullopt;
    switch (e.op) {
      case Op::Neg: return -*v;
      case Op::LogicalNot: return *v == 0 ? 1 : 0;
      case Op::BitNot: return ~*v;
      default: return std::nullopt;
    }
  }
  if (e.kind != ExprKind::Binary) return std::nullopt;
  auto a = eval_constant(e.args[0]);
  auto b = eval_constant(e.args[1]);
  if (!a || !b) return std::nullopt;
  switch (e.op) {
    case Op::Add: return *a + *b;
    case Op::Sub: return *a - *b;
    case Op::Mul: return *a * *b;
    case Op::Div:
      if (*b == 0) fail(ErrorKind::Restriction, "division by zero", e.loc);
      return floor_div(*a, *b);
    case Op::Mod:
      if (*b == 0) fail(ErrorKind::Restriction, "division by zero", e.loc);
      return *a - floor_div(*a, *b) * *b;
    case Op::Shl:
      if (*b < 0 || *b > 62) fail(ErrorKind::Restriction, "shift amount out of range", e.loc);
      return *a * (int64_t{1} << *b);
    case Op::Shr:
      if (*b < 0 || *b > 63) fail(ErrorKind::Restriction, "shift amount out of range", e.loc);
      return *a >> *b;
    case Op::And: return *a & *b;
    case Op::Or: return *a | *b;
    case Op::Xor: return *a ^ *b;
    case Op::Eq: return *a == *b;
    case Op::Ne: return *a != *b;
    case Op::Lt: return *a < *b;
    case Op::Le: return *a <= *b;
    case Op::Gt: return *a > *b;
    case Op::Ge: return *a >= *b;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Restriction checking

namespace {

enum class NameRole { Scalar, ScalarParam, Pointer, Array, ConstArray, Index };

class RestrictionChecker {
public:
  RestrictionChecker(const KernelAst &ast, const Function &fn, bool is_kernel)
      : ast_(ast), fn_(fn), is_kernel_(is_kernel) {}

  std::vector<Finding> findings;
  std::set<std::string> reads;
  std::set<std::string> writes;

  void run() {
    for (const ConstArray &c : ast_.consts) roles_[c.name] = NameRole::ConstArray;
    for (const Param &p : fn_.params) {
      switch (p.kind) {
        case ParamKind::Scalar: roles_[p.name] = NameRole::ScalarParam; break;
        case ParamKind::Pointer:
          if (!is_kernel_) report(p.loc, "pointer parameter '" + p.name + "' in helper function");
          roles_[p.name] = NameRole::Pointer;
          break;
        case ParamKind::Array:
          if (!is_kernel_) report(p.loc, "array parameter '" + p.name + "' in helper function");
          if (p.extents.size() > 2) report(p.loc, "array '" + p.name + "' has more than 2 dimensions");
          roles_[p.name] = NameRole::Array;
          break;
      }
    }
    body(fn_.body, true);
    if (!is_kernel_) {
      if (fn_.body.empty() || fn_.body.back().kind != StmtKind::Return || !fn_.body.back().rhs)
        report(fn_.loc, "helper '" + fn_.name + "' must end with a return of a value");
    }
  }

private:
  void report(SourceLoc loc, std::string msg) { findings.push_back({loc, std::move(msg)}); }

  void body(const std::vector<Stmt> &stmts, bool top) {
    for (size_t i = 0; i < stmts.size(); ++i) {
      const Stmt &s = stmts[i];
      bool last = top && i + 1 == stmts.size();
      stmt(s, last);
    }
  }

  void declare(const std::string &name, NameRole role, SourceLoc loc) {
    if (roles_.count(name)) {
      report(loc, "redeclaration of '" + name + "'");
      return;
    }
    roles_[name] = role;
  }

  void stmt(const Stmt &s, bool last_top) {
    switch (s.kind) {
      case StmtKind::Decl:
        if (s.init) expr(*s.init);
        declare(s.name, s.extents.empty() ? NameRole::Scalar : NameRole::ConstArray, s.loc);
        if (s.extents.size() > 2) report(s.loc, "array '" + s.name + "' has more than 2 dimensions");
        if (!s.extents.empty()) local_const_extents_[s.name] = s.extents;
        break;
      case StmtKind::Assign: assign(s); break;
      case StmtKind::ExprStmt:
        expr(*s.rhs);
        if (s.rhs->kind != ExprKind::StoreNext && s.rhs->kind != ExprKind::Call)
          report(s.loc, "expression statement has no effect");
        break;
      case StmtKind::Return:
        if (is_kernel_ && s.rhs) report(s.loc, "kernel returns a value");
        if (!last_top) report(s.loc, "return before the end of the function");
        if (s.rhs) expr(*s.rhs);
        break;
      case StmtKind::Block: body(s.body, false); break;
      case StmtKind::If:
        expr(*s.cond);
        body(s.body, false);
        body(s.else_body, false);
        break;
      case StmtKind::For: {
        if (!eval_constant(*s.lower)) report(s.lower->loc, "non-constant loop bound");
        if (!eval_constant(*s.bound)) report(s.bound->loc, "non-constant loop bound");
        auto prev = roles_.find(s.name);
        bool reusable = prev == roles_.end() || prev->second == NameRole::Scalar ||
                        (prev->second == NameRole::Index && !active_indices_.count(s.name));
        if (!reusable) report(s.loc, "loop index '" + s.name + "' shadows another name");
        roles_[s.name] = NameRole::Index;
        active_indices_.insert(s.name);
        body(s.body, false);
        active_indices_.erase(s.name);
        break;
      }
    }
  }

  void assign(const Stmt &s) {
    const LValue &lv = s.lhs;
    expr(*s.rhs);
    auto it = roles_.find(lv.name);
    if (it == roles_.end()) {
      report(s.loc, "undeclared identifier '" + lv.name + "'");
      return;
    }
    switch (lv.kind) {
      case LValueKind::Var:
        if (it->second == NameRole::Index) report(s.loc, "assignment to loop index '" + lv.name + "'");
        else if (it->second == NameRole::ScalarParam) report(s.loc, "assignment to input parameter '" + lv.name + "'");
        else if (it->second == NameRole::Pointer) report(s.loc, "pointer arithmetic on '" + lv.name + "'");
        else if (it->second != NameRole::Scalar) report(s.loc, "'" + lv.name + "' is not a scalar variable");
        break;
      case LValueKind::Deref:
        if (it->second != NameRole::Pointer) report(s.loc, "'" + lv.name + "' is not a pointer parameter");
        writes.insert(lv.name);
        break;
      case LValueKind::Index:
        if (it->second == NameRole::ConstArray) {
          report(s.loc, "assignment to constant array '" + lv.name + "'");
        } else if (it->second != NameRole::Array) {
          report(s.loc, "'" + lv.name + "' is not an array");
        } else {
          subscripts(lv.name, lv.subscripts, s.loc);
          writes.insert(lv.name);
        }
        break;
    }
  }

  void subscripts(const std::string &name, const std::vector<Expr> &subs, SourceLoc loc) {
    size_t dims = extents_of(name).size();
    if (subs.size() != dims)
      report(loc, "array '" + name + "' expects " + std::to_string(dims) + " subscript(s)");
    for (const Expr &sub : subs) {
      expr(sub);
      if (!to_affine(sub, active_indices_)) report(sub.loc, "non-affine subscript");
    }
  }

  std::vector<int64_t> extents_of(const std::string &name) const {
    for (const Param &p : fn_.params)
      if (p.name == name) return p.extents;
    if (const ConstArray *c = ast_.find_const(name)) return c->extents;
    auto it = local_const_extents_.find(name);
    if (it != local_const_extents_.end()) return it->second;
    return {};
  }

  void expr(const Expr &e) {
    switch (e.kind) {
      case ExprKind::IntLit: return;
      case ExprKind::Var: {
        auto it = roles_.find(e.name);
        if (it == roles_.end()) {
          report(e.loc, "undeclared identifier '" + e.name + "'");
        } else if (it->second == NameRole::Pointer) {
          report(e.loc, "pointer '" + e.name + "' used as a value");
        } else if (it->second == NameRole::Array || it->second == NameRole::ConstArray) {
          report(e.loc, "array '" + e.name + "' used without subscript");
        } else if (it->second == NameRole::Index && !active_indices_.count(e.name)) {
          report(e.loc, "loop index '" + e.name + "' used outside its loop");
        }
        return;
      }
      case ExprKind::Index: {
        auto it = roles_.find(e.name);
        if (it == roles_.end()) {
          report(e.loc, "undeclared identifier '" + e.name + "'");
          return;
        }
        if (it->second != NameRole::Array && it->second != NameRole::ConstArray) {
          report(e.loc, "'" + e.name + "' is not an array");
          return;
        }
        if (it->second == NameRole::Array) reads.insert(e.name);
        subscripts(e.name, e.args, e.loc);
        return;
      }
      case ExprKind::Binary:
        if ((e.op == Op::Div || e.op == Op::Mod) && !eval_constant(e.args[1]))
          report(e.loc, "division by non-constant");
        break;
      case ExprKind::Call: {
        bool found = false;
        for (const Function &f : ast_.functions) {
          if (f.name != e.name || !f.return_type) continue;
          found = true;
          if (f.params.size() != e.args.size()) report(e.loc, "wrong number of arguments to '" + e.name + "'");
        }
        if (!found) report(e.loc, "unknown callee '" + e.name + "'");
        break;
      }
      case ExprKind::Lut:
        if (e.name != "cos" && !ast_.find_lut(e.name))
          report(e.loc, "undeclared lookup table '" + e.name + "'");
        break;
      case ExprKind::LoadPrev:
      case ExprKind::StoreNext: {
        auto it = roles_.find(e.name);
        if (it == roles_.end() || it->second != NameRole::Scalar)
          report(e.loc, "feedback variable '" + e.name + "' must be a local scalar");
        break;
      }
      case ExprKind::Unary: break;
    }
    for (const Expr &a : e.args) expr(a);
  }

  const KernelAst &ast_;
  const Function &fn_;
  bool is_kernel_;
  std::map<std::string, NameRole> roles_;
  std::set<std::string> active_indices_;
  std::map<std::string, std::vector<int64_t>> local_const_extents_;
};

}  // namespace

KernelAst check_restrictions(KernelAst ast) {
  std::vector<Finding> findings;
  if (auto rec = find_recursion(ast)) findings.push_back({rec->second, "recursion through '" + rec->first + "'"});
  const Function &kernel = ast.kernel();
  ast.arrays.clear();
  for (const Function &fn : ast.functions) {
    bool is_kernel = &fn == &kernel;
    RestrictionChecker checker(ast, fn, is_kernel);
    checker.run();
    findings.insert(findings.end(), checker.findings.begin(), checker.findings.end());
    if (!is_kernel) continue;
    for (const Param &p : fn.params) {
      if (p.kind != ParamKind::Array) continue;
      bool r = checker.reads.count(p.name) > 0;
      bool w = checker.writes.count(p.name) > 0;
      if (r && w) findings.push_back({p.loc, "array '" + p.name + "' is both read and written"});
      if (w && p.is_const) findings.push_back({p.loc, "const array '" + p.name + "' is written"});
      ArrayDecl a;
      a.name = p.name;
      a.element = p.type;
      a.extents = p.extents;
      a.direction = w ? Direction::Out : Direction::In;
      ast.arrays.push_back(std::move(a));
    }
  }
  for (const LutDecl &l : ast.luts) {
    if (l.entries < 2 || (l.entries & (l.entries - 1)) != 0)
      findings.push_back({{}, "lookup table '" + l.name + "' size must be a power of two"});
  }
  if (!findings.empty()) throw Error(ErrorKind::Restriction, std::move(findings));
  return ast;
}

// ---------------------------------------------------------------------------
// Inlining

namespace {

using RenameMap = std::map<std::string, std::string>;

Expr rename_expr(const Expr &e, const RenameMap &names) {
  Expr out = e;
  if (out.kind == ExprKind::Var || out.kind == ExprKind::Index || out.kind == ExprKind::LoadPrev ||
      out.kind == ExprKind::StoreNext) {
    auto it = names.find(out.name);
    if (it != names.end()) out.name = it->second;
  }
  for (Expr &a : out.args) a = rename_expr(a, names);
  return out;
}

void rename_body(std::vector<Stmt> &body, const RenameMap &names) {
  for (Stmt &s : body) {
    auto fix = [&](std::string &n) {
      auto it = names.find(n);
      if (it != names.end()) n = it->second;
    };
    if (s.kind == StmtKind::Decl || s.kind == StmtKind::For) fix(s.name);
    fix(s.lhs.name);
    for (Expr &sub : s.lhs.subscripts) sub = rename_expr(sub, names);
    for (auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
      if (*o) **o = rename_expr(**o, names);
    rename_body(s.body, names);
    rename_body(s.else_body, names);
  }
}

class Inliner {
public:
  explicit Inliner(const KernelAst &ast) : ast_(ast) {}

  std::vector<Stmt> body(const std::vector<Stmt> &in, int depth) {
    std::vector<Stmt> out;
    for (const Stmt &s0 : in) {
      Stmt s = s0;
      std::vector<Stmt> prelude;
      for (auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
        if (*o) **o = rewrite(**o, prelude, depth);
      for (Expr &sub : s.lhs.subscripts) sub = rewrite(sub, prelude, depth);
      s.body = body(s.body, depth);
      s.else_body = body(s.else_body, depth);
      for (Stmt &p : prelude) out.push_back(std::move(p));
      out.push_back(std::move(s));
    }
    return out;
  }

private:
  const Function *find(const std::string &name) const {
    for (const Function &f : ast_.functions)
      if (f.name == name && f.return_type) return &f;
    return nullptr;
  }

  Expr rewrite(const Expr &e, std::vector<Stmt> &prelude, int depth) {
    Expr out = e;
    for (Expr &a : out.args) a = rewrite(a, prelude, depth);
    if (out.kind != ExprKind::Call) return out;
    if (depth > 64) fail(ErrorKind::Restriction, "recursion", e.loc);
    const Function *callee = find(out.name);
    if (!callee) fail(ErrorKind::Restriction, "unknown callee '" + out.name + "'", e.loc);
    if (callee->params.size() != out.args.size())
      fail(ErrorKind::Restriction, "wrong number of arguments to '" + out.name + "'", e.loc);

    int site = counter_++;
    std::string prefix = callee->name + "_" + std::to_string(site) + "_";
    RenameMap names;
    for (const Param &p : callee->params) names[p.name] = prefix + p.name;
    visit_stmts(callee->body, [&](const Stmt &s) {
      if (s.kind == StmtKind::Decl || s.kind == StmtKind::For) names[s.name] = prefix + s.name;
    });

    for (size_t i = 0; i < callee->params.size(); ++i) {
      Stmt d;
      d.kind = StmtKind::Decl;
      d.loc = e.loc;
      d.type = callee->params[i].type;
      d.name = prefix + callee->params[i].name;
      d.init = out.args[i];
      prelude.push_back(std::move(d));
    }
    std::vector<Stmt> cloned = callee->body;
    rename_body(cloned, names);
    if (cloned.empty() || cloned.back().kind != StmtKind::Return || !cloned.back().rhs)
      fail(ErrorKind::Restriction, "helper '" + callee->name + "' must end with a return of a value", callee->loc);
    Stmt ret;
    ret.kind = StmtKind::Decl;
    ret.loc = e.loc;
    ret.type = *callee->return_type;
    ret.name = prefix + "ret";
    ret.init = cloned.back().rhs;
    cloned.back() = std::move(ret);
    for (Stmt &s : body(cloned, depth + 1)) prelude.push_back(std::move(s));
    return Expr::var(prefix + "ret", e.loc);
  }

  const KernelAst &ast_;
  int counter_ = 0;
};

}  // namespace

KernelAst inline_calls(KernelAst ast) {
  if (auto rec = find_recursion(ast)) fail(ErrorKind::Restriction, "recursion through '" + rec->first + "'", rec->second);
  Inliner inliner(ast);
  Function kernel = ast.kernel();
  kernel.body = inliner.body(kernel.body, 0);
  ast.functions.clear();
  ast.functions.push_back(std::move(kernel));
  return ast;
}

}  // namespace minihls
