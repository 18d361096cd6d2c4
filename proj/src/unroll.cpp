#include <functional>
#include <map>
#include <set>

#include "minihls/transforms.hpp"

namespace minihls {

// ---------------------------------------------------------------------------
// Constant folding

namespace {

constexpr int64_t kMinLiteral = -(int64_t{1} << 31);
constexpr int64_t kMaxLiteral = (int64_t{1} << 32) - 1;

struct FoldContext {
  const KernelAst &ast;
  std::map<std::string, const Stmt *> local_arrays;
  std::map<std::string, int64_t> const_scalars;
};

Expr checked_lit(int64_t v, SourceLoc loc) {
  if (v < kMinLiteral || v > kMaxLiteral)
    fail(ErrorKind::Overflow, "folded constant " + std::to_string(v) + " exceeds 32 bits", loc);
  return Expr::lit(v, loc);
}

bool is_lit(const Expr &e, int64_t v) { return e.kind == ExprKind::IntLit && e.value == v; }

Expr fold_expr(const Expr &in, FoldContext &ctx) {
  Expr e = in;
  for (Expr &a : e.args) a = fold_expr(a, ctx);

  switch (e.kind) {
    case ExprKind::Var: {
      auto it = ctx.const_scalars.find(e.name);
      if (it != ctx.const_scalars.end()) return Expr::lit(it->second, e.loc);
      return e;
    }
    case ExprKind::Index: {
      std::vector<int64_t> subs;
      for (const Expr &a : e.args) {
        if (!a.is_lit()) return e;
        subs.push_back(a.value);
      }
      const std::vector<int64_t> *extents = nullptr;
      const std::vector<int64_t> *values = nullptr;
      ScalarType type;
      if (auto it = ctx.local_arrays.find(e.name); it != ctx.local_arrays.end()) {
        extents = &it->second->extents;
        values = &it->second->init_list;
        type = it->second->type;
      } else if (const ConstArray *c = ctx.ast.find_const(e.name)) {
        extents = &c->extents;
        values = &c->values;
        type = c->type;
      } else {
        return e;
      }
      if (subs.size() != extents->size()) return e;
      int64_t flat = 0;
      for (size_t d = 0; d < subs.size(); ++d) {
        if (subs[d] < 0 || subs[d] >= (*extents)[d])
          fail(ErrorKind::Restriction, "subscript " + std::to_string(subs[d]) + " out of bounds for '" + e.name + "'",
               e.loc);
        flat = flat * (*extents)[d] + subs[d];
      }
      return Expr::lit(wrap_to((*values)[flat], type), e.loc);
    }
    case ExprKind::Unary:
      if (e.args[0].is_lit()) return checked_lit(*eval_constant(e), e.loc);
      return e;
    case ExprKind::Binary: {
      const Expr &a = e.args[0];
      const Expr &b = e.args[1];
      if (a.is_lit() && b.is_lit()) return checked_lit(*eval_constant(e), e.loc);
      switch (e.op) {
        case Op::Mul:
          if (is_lit(a, 1)) return b;
          if (is_lit(b, 1)) return a;
          if (is_lit(a, 0) || is_lit(b, 0)) return Expr::lit(0, e.loc);
          break;
        case Op::Add:
          if (is_lit(a, 0)) return b;
          if (is_lit(b, 0)) return a;
          break;
        case Op::Sub:
        case Op::Shl:
        case Op::Shr:
          if (is_lit(b, 0)) return a;
          break;
        case Op::Div:
          if (is_lit(b, 1)) return a;
          break;
        case Op::Or:
        case Op::Xor:
          if (is_lit(a, 0)) return b;
          if (is_lit(b, 0)) return a;
          break;
        default: break;
      }
      return e;
    }
    default: return e;
  }
}

std::vector<Stmt> fold_body(const std::vector<Stmt> &body, FoldContext &ctx) {
  std::vector<Stmt> out;
  for (const Stmt &s0 : body) {
    Stmt s = s0;
    for (auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
      if (*o) **o = fold_expr(**o, ctx);
    for (Expr &sub : s.lhs.subscripts) sub = fold_expr(sub, ctx);
    if (s.kind == StmtKind::Decl && !s.extents.empty()) ctx.local_arrays[s.name] = &s0;
    if (s.kind == StmtKind::Decl && s.is_const && s.init && s.init->is_lit())
      ctx.const_scalars[s.name] = wrap_to(s.init->value, s.type);
    s.body = fold_body(s.body, ctx);
    s.else_body = fold_body(s.else_body, ctx);
    if (s.kind == StmtKind::If && s.cond->is_lit()) {
      const std::vector<Stmt> &taken = s.cond->value != 0 ? s.body : s.else_body;
      Stmt block;
      block.kind = StmtKind::Block;
      block.loc = s.loc;
      block.body = taken;
      out.push_back(std::move(block));
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

KernelAst fold_constants(KernelAst ast) {
  for (Function &f : ast.functions) {
    FoldContext ctx{ast, {}, {}};
    f.body = fold_body(f.body, ctx);
  }
  return ast;
}

// ---------------------------------------------------------------------------
// Unrolling

int64_t trip_count(const Stmt &loop) {
  auto lo = eval_constant(*loop.lower);
  auto hi = eval_constant(*loop.bound);
  if (!lo || !hi) fail(ErrorKind::NotConstantBounds, "loop '" + loop.name + "' has non-constant bounds", loop.loc);
  int64_t span = *hi - *lo + (loop.inclusive ? 1 : 0);
  if (span <= 0) return 0;
  return (span + loop.step - 1) / loop.step;
}

namespace {

void rename_decls(std::vector<Stmt> &body, const std::string &suffix) {
  std::set<std::string> names;
  visit_stmts(body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Decl) names.insert(s.name);
  });
  if (names.empty()) return;
  for (const std::string &n : names) substitute_in(body, n, Expr::var(n + suffix));
  std::function<void(std::vector<Stmt> &)> fix = [&](std::vector<Stmt> &b) {
    for (Stmt &s : b) {
      if (s.kind == StmtKind::Decl && names.count(s.name)) s.name += suffix;
      if (s.lhs.kind == LValueKind::Var && names.count(s.lhs.name)) s.lhs.name += suffix;
      if (s.lhs.kind == LValueKind::Index && names.count(s.lhs.name)) s.lhs.name += suffix;
      fix(s.body);
      fix(s.else_body);
    }
  };
  fix(body);
  // Index expressions on renamed local const arrays and feedback intrinsics.
  std::function<void(Expr &)> fix_expr = [&](Expr &e) {
    if ((e.kind == ExprKind::Index || e.kind == ExprKind::LoadPrev || e.kind == ExprKind::StoreNext) &&
        names.count(e.name))
      e.name += suffix;
    for (Expr &a : e.args) fix_expr(a);
  };
  std::function<void(std::vector<Stmt> &)> fix_all = [&](std::vector<Stmt> &b) {
    for (Stmt &s : b) {
      for (auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
        if (*o) fix_expr(**o);
      for (Expr &sub : s.lhs.subscripts) fix_expr(sub);
      fix_all(s.body);
      fix_all(s.else_body);
    }
  };
  fix_all(body);
}

std::vector<Stmt> unroll_stmt_full(const Stmt &loop) {
  int64_t n = trip_count(loop);
  int64_t lo = *eval_constant(*loop.lower);
  std::vector<Stmt> out;
  for (int64_t k = 0; k < n; ++k) {
    std::vector<Stmt> copy = loop.body;
    substitute_in(copy, loop.name, Expr::lit(lo + k * loop.step, loop.loc));
    rename_decls(copy, "_" + loop.name + std::to_string(k));
    for (Stmt &s : copy) out.push_back(std::move(s));
  }
  return out;
}

Stmt unroll_stmt_by(const Stmt &loop, int64_t factor) {
  int64_t n = trip_count(loop);
  if (factor < 1) fail(ErrorKind::Config, "unroll factor must be positive");
  if (n % factor != 0)
    fail(ErrorKind::Restriction,
         "trip count " + std::to_string(n) + " of loop '" + loop.name + "' is not divisible by " + std::to_string(factor),
         loop.loc);
  if (factor == 1) return loop;
  Stmt out = loop;
  out.body.clear();
  for (int64_t j = 0; j < factor; ++j) {
    std::vector<Stmt> copy = loop.body;
    if (j > 0)
      substitute_in(copy, loop.name,
                    Expr::binary(Op::Add, Expr::var(loop.name, loop.loc), Expr::lit(j * loop.step, loop.loc), loop.loc));
    rename_decls(copy, "_" + loop.name + "u" + std::to_string(j));
    for (Stmt &s : copy) out.body.push_back(std::move(s));
  }
  out.step = loop.step * factor;
  return out;
}

template <typename F>
std::vector<Stmt> rewrite_loops(const std::vector<Stmt> &body, int depth, F &&on_loop) {
  std::vector<Stmt> out;
  for (const Stmt &s0 : body) {
    Stmt s = s0;
    s.body = rewrite_loops(s.body, depth + (s.kind == StmtKind::For ? 1 : 0), on_loop);
    s.else_body = rewrite_loops(s.else_body, depth, on_loop);
    if (s.kind == StmtKind::For) {
      for (Stmt &r : on_loop(s, depth)) out.push_back(std::move(r));
    } else {
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::set<std::string> loop_names(const std::vector<Stmt> &body) {
  std::set<std::string> names;
  visit_stmts(body, [&](const Stmt &s) {
    if (s.kind == StmtKind::For) names.insert(s.name);
  });
  return names;
}

}  // namespace

KernelAst unroll_full(KernelAst ast, const std::string &loop) {
  Function &k = ast.kernel();
  if (!loop_names(k.body).count(loop)) fail(ErrorKind::Config, "no loop with index '" + loop + "'");
  k.body = rewrite_loops(k.body, 0, [&](const Stmt &s, int) -> std::vector<Stmt> {
    if (s.name == loop) return unroll_stmt_full(s);
    return {s};
  });
  return ast;
}

KernelAst unroll_by(KernelAst ast, const std::string &loop, int64_t factor) {
  Function &k = ast.kernel();
  if (!loop_names(k.body).count(loop)) fail(ErrorKind::Config, "no loop with index '" + loop + "'");
  k.body = rewrite_loops(k.body, 0, [&](const Stmt &s, int) -> std::vector<Stmt> {
    if (s.name == loop) return {unroll_stmt_by(s, factor)};
    return {s};
  });
  return ast;
}

KernelAst apply_unroll_policy(KernelAst ast, const UnrollPolicy &policy) {
  Function &k = ast.kernel();
  std::set<std::string> names = loop_names(k.body);
  for (const auto &[name, d] : policy.directives)
    if (!names.count(name)) fail(ErrorKind::Config, "no loop with index '" + name + "'");
  k.body = rewrite_loops(k.body, 0, [&](const Stmt &s, int depth) -> std::vector<Stmt> {
    auto it = policy.directives.find(s.name);
    if (it != policy.directives.end()) {
      if (it->second.factor == 0) return unroll_stmt_full(s);
      return {unroll_stmt_by(s, it->second.factor)};
    }
    if (depth > 0 && trip_count(s) <= policy.limit) return unroll_stmt_full(s);
    return {s};
  });
  return ast;
}

KernelAst set_trip_count(KernelAst ast, const std::string &loop, int64_t count) {
  if (count < 1) fail(ErrorKind::Config, "trip count must be at least 1");
  bool found = false;
  std::function<void(std::vector<Stmt> &)> walk = [&](std::vector<Stmt> &body) {
    for (Stmt &s : body) {
      if (s.kind == StmtKind::For && s.name == loop) {
        auto lo = eval_constant(*s.lower);
        if (!lo) fail(ErrorKind::NotConstantBounds, "loop '" + loop + "' has a non-constant lower bound", s.loc);
        s.bound = Expr::lit(*lo + count * s.step, s.loc);
        s.inclusive = false;
        found = true;
      }
      walk(s.body);
      walk(s.else_body);
    }
  };
  walk(ast.kernel().body);
  if (!found) fail(ErrorKind::Config, "no loop with index '" + loop + "'");
  return ast;
}

}  // namespace minihls
