#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "minihls/transforms.hpp"

namespace minihls {

namespace {

[[noreturn]] void reject(const std::string &msg, SourceLoc loc = {}) { fail(ErrorKind::Restriction, msg, loc); }

Expr affine_expr(const Affine &a) {
  std::optional<Expr> out;
  for (const auto &[n, c] : a.coeffs) {
    Expr term = c == 1 ? Expr::var(n) : Expr::binary(Op::Mul, Expr::lit(c), Expr::var(n));
    out = out ? Expr::binary(Op::Add, *out, term) : term;
  }
  if (!out) return Expr::lit(a.constant);
  if (a.constant > 0) return Expr::binary(Op::Add, *out, Expr::lit(a.constant));
  if (a.constant < 0) return Expr::binary(Op::Sub, *out, Expr::lit(-a.constant));
  return *out;
}

std::string subscript_text(const std::string &array, const std::vector<Affine> &subs) {
  std::string s = array;
  for (const Affine &a : subs) s += "[" + print(affine_expr(a)) + "]";
  return s;
}

// Expressions and lvalue subscripts of one statement, not its nested bodies.
template <typename F>
void each_expr(Stmt &s, F &&f) {
  for (auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
    if (*o) f(**o);
  for (Expr &sub : s.lhs.subscripts) f(sub);
}

template <typename F>
void each_expr(const Stmt &s, F &&f) {
  for (auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
    if (*o) f(**o);
  for (const Expr &sub : s.lhs.subscripts) f(sub);
}

bool mentions(const std::vector<Stmt> &body, const std::function<bool(const Expr &)> &pred) {
  bool hit = false;
  visit_stmts(body, [&](const Stmt &s) {
    each_expr(s, [&](const Expr &e) {
      visit_exprs(e, [&](const Expr &x) { hit = hit || pred(x); });
    });
  });
  return hit;
}

bool reads_name(const std::vector<Stmt> &body, const std::string &name) {
  return mentions(body, [&](const Expr &x) {
    return (x.kind == ExprKind::Var || x.kind == ExprKind::LoadPrev || x.kind == ExprKind::StoreNext) &&
           x.name == name;
  });
}

bool touches_array(const std::vector<Stmt> &body, const KernelAst &ast) {
  bool hit = mentions(body, [&](const Expr &x) { return x.kind == ExprKind::Index && ast.find_array(x.name); });
  visit_stmts(body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Index && ast.find_array(s.lhs.name)) hit = true;
  });
  return hit;
}

std::set<std::string> assigned_vars(const std::vector<Stmt> &body) {
  std::set<std::string> out;
  visit_stmts(body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Var) out.insert(s.lhs.name);
  });
  return out;
}

// Names read before being definitely assigned within one pass over `body`.
void upward_exposed(const std::vector<Stmt> &body, std::set<std::string> &assigned, std::set<std::string> &exposed) {
  auto reads = [&](const Expr &e) {
    visit_exprs(e, [&](const Expr &x) {
      if (x.kind == ExprKind::Var && !assigned.count(x.name)) exposed.insert(x.name);
    });
  };
  for (const Stmt &s : body) {
    switch (s.kind) {
      case StmtKind::Decl:
        if (s.init) reads(*s.init);
        assigned.insert(s.name);
        break;
      case StmtKind::Assign:
        reads(*s.rhs);
        for (const Expr &sub : s.lhs.subscripts) reads(sub);
        if (s.lhs.kind == LValueKind::Var) assigned.insert(s.lhs.name);
        break;
      case StmtKind::ExprStmt:
      case StmtKind::Return:
        if (s.rhs) reads(*s.rhs);
        break;
      case StmtKind::Block: upward_exposed(s.body, assigned, exposed); break;
      case StmtKind::If: {
        reads(*s.cond);
        std::set<std::string> a = assigned, b = assigned;
        upward_exposed(s.body, a, exposed);
        upward_exposed(s.else_body, b, exposed);
        assigned.clear();
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(assigned, assigned.end()));
        break;
      }
      case StmtKind::For: upward_exposed(s.body, assigned, exposed); break;
    }
  }
}

// Feedback intrinsics become plain reads and writes when there is no loop to
// carry a value across.
void lower_intrinsics_inline(std::vector<Stmt> &body) {
  std::function<void(Expr &)> fix = [&](Expr &e) {
    for (Expr &a : e.args) fix(a);
    if (e.kind == ExprKind::LoadPrev) e = Expr::var(e.name, e.loc);
    if (e.kind == ExprKind::StoreNext) reject("ROCCC_store2next used as a value", e.loc);
  };
  for (Stmt &s : body) {
    if (s.kind == StmtKind::ExprStmt && s.rhs->kind == ExprKind::StoreNext) {
      Stmt a;
      a.kind = StmtKind::Assign;
      a.loc = s.loc;
      a.lhs = {LValueKind::Var, s.rhs->name, {}};
      Expr value = s.rhs->args[0];
      fix(value);
      a.rhs = value;
      s = a;
      continue;
    }
    each_expr(s, fix);
    lower_intrinsics_inline(s.body);
    lower_intrinsics_inline(s.else_body);
  }
}

class Scalarizer {
public:
  explicit Scalarizer(const KernelAst &ast) : ast_(ast), fn_(ast.kernel()) {}

  ScalarizedKernel run() {
    sk_.name = fn_.name;
    sk_.params = fn_.params;
    sk_.arrays = ast_.arrays;
    sk_.luts = ast_.luts;
    for (const Param &p : fn_.params) {
      if (p.kind == ParamKind::Scalar) sk_.scalar_inputs.push_back(p);
      if (p.kind == ParamKind::Pointer) sk_.scalar_outputs.push_back(p);
      used_.insert(p.name);
    }
    for (const LutDecl &l : ast_.luts) used_.insert(l.name);
    for (const ConstArray &c : ast_.consts) used_.insert(c.name);

    split();
    std::vector<Stmt> compute = assemble();
    remove_load_aliases(compute);
    visit_stmts(compute, [&](const Stmt &s) {
      if (s.kind == StmtKind::Decl) used_.insert(s.name);
    });
    for (const Feedback &f : sk_.feedbacks) used_.insert(f.var);
    for (const LoopIndex &i : sk_.loop.indices) used_.insert(i.name);
    count_assignments(compute);
    sk_.compute = replace(compute, false);
    check_leftovers();
    check_store_aliasing();
    return sk_;
  }

private:
  bool is_index(const std::string &n) const {
    for (const LoopIndex &i : sk_.loop.indices)
      if (i.name == n) return true;
    return false;
  }
  std::set<std::string> index_set() const {
    std::set<std::string> s;
    for (const LoopIndex &i : sk_.loop.indices) s.insert(i.name);
    return s;
  }

  void split() {
    const std::vector<Stmt> &top = fn_.body;
    size_t loop_at = top.size();
    for (size_t i = 0; i < top.size(); ++i) {
      if (top[i].kind != StmtKind::For) continue;
      if (loop_at != top.size()) reject("kernel has more than one top-level loop", top[i].loc);
      loop_at = i;
    }
    for (size_t i = 0; i < top.size(); ++i) {
      const Stmt &s = top[i];
      if (s.kind == StmtKind::Return && !s.rhs) continue;
      if (i < loop_at) prelude_.push_back(s);
      else if (i > loop_at) epilogue_.push_back(s);
    }
    if (loop_at == top.size()) return;

    const Stmt *loop = &top[loop_at];
    while (true) {
      LoopIndex idx;
      idx.name = loop->name;
      idx.lower = *eval_constant(*loop->lower);
      idx.count = trip_count(*loop);
      idx.step = loop->step;
      if (idx.count < 1) reject("loop '" + loop->name + "' never executes", loop->loc);
      sk_.loop.indices.push_back(idx);
      if (loop->body.size() == 1 && loop->body[0].kind == StmtKind::For) {
        if (sk_.loop.indices.size() == 2) reject("rolled loop nest deeper than two levels", loop->body[0].loc);
        loop = &loop->body[0];
        continue;
      }
      break;
    }
    body_ = loop->body;
    visit_stmts(body_, [&](const Stmt &s) {
      if (s.kind == StmtKind::For)
        reject("loop '" + s.name + "' must be unrolled or perfectly nested", s.loc);
    });
  }

  std::vector<Stmt> assemble() {
    std::vector<Stmt> all;
    if (sk_.loop.indices.empty()) {
      all = prelude_;
      for (const Stmt &s : epilogue_) all.push_back(s);
      lower_intrinsics_inline(all);
      return all;
    }

    std::set<std::string> prelude_locals;
    for (const Stmt &s : prelude_)
      if (s.kind == StmtKind::Decl && s.extents.empty() && !is_index(s.name)) prelude_locals.insert(s.name);

    std::set<std::string> macro_vars;
    auto note_macros = [&](const std::vector<Stmt> &b) {
      visit_stmts(b, [&](const Stmt &s) {
        each_expr(s, [&](const Expr &e) {
          visit_exprs(e, [&](const Expr &x) {
            if (x.kind == ExprKind::LoadPrev || x.kind == ExprKind::StoreNext) macro_vars.insert(x.name);
          });
        });
      });
    };
    note_macros(body_);
    note_macros(epilogue_);

    std::set<std::string> body_assigned = assigned_vars(body_);
    std::vector<Stmt> tail = body_;
    for (const Stmt &s : epilogue_) tail.push_back(s);
    std::set<std::string> assigned, exposed;
    upward_exposed(tail, assigned, exposed);

    std::set<std::string> feedback;
    for (const std::string &v : macro_vars) {
      if (!prelude_locals.count(v)) reject("feedback variable '" + v + "' must be declared before the loop");
      if (body_assigned.count(v))
        reject("feedback variable '" + v + "' is assigned directly and through ROCCC_store2next");
      if (sk_.loop.indices.size() > 1) reject("feedback intrinsics need a single rolled loop");
      feedback.insert(v);
    }
    for (const std::string &v : prelude_locals)
      if (body_assigned.count(v) && exposed.count(v)) feedback.insert(v);

    std::set<std::string> epilogue_assigned = assigned_vars(epilogue_);
    for (const std::string &v : feedback)
      if (epilogue_assigned.count(v)) reject("feedback variable '" + v + "' is assigned after the loop");
    if (touches_array(epilogue_, ast_)) reject("array access outside the loop");

    std::map<std::string, Feedback> fb;
    std::vector<std::string> fb_order;
    std::vector<Stmt> moved;
    for (const Stmt &s : prelude_) {
      if (s.kind == StmtKind::Decl && feedback.count(s.name)) {
        Feedback f{s.name, s.name + "_prev", s.name + "_next", s.type, 0};
        if (s.init) f.init = constant_init(*s.init, s.name);
        fb[s.name] = f;
        fb_order.push_back(s.name);
        continue;
      }
      if (s.kind == StmtKind::Decl && is_index(s.name)) continue;
      if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Var && fb.count(s.lhs.name)) {
        fb[s.lhs.name].init = constant_init(*s.rhs, s.lhs.name);
        continue;
      }
      std::vector<Stmt> one{s};
      for (const std::string &v : feedback)
        if (reads_name(one, v) || assigned_vars(one).count(v))
          reject("feedback variable '" + v + "' must start from a constant", s.loc);
      if (touches_array(one, ast_)) reject("array access outside the loop", s.loc);
      moved.push_back(s);
    }
    for (const std::string &v : fb_order) {
      Feedback f = fb[v];
      f.init = wrap_to(f.init, f.type);
      sk_.feedbacks.push_back(f);
    }

    for (Stmt &s : body_) moved.push_back(s);
    for (Stmt &s : epilogue_) moved.push_back(s);
    return moved;
  }

  int64_t constant_init(const Expr &e, const std::string &var) {
    auto v = eval_constant(e);
    if (!v) reject("feedback variable '" + var + "' must start from a constant", e.loc);
    return *v;
  }

  // `T x = A[...]` with T the element type is the hoisted-load form; the
  // alias is dissolved so the load is rediscovered under its canonical name.
  void remove_load_aliases(std::vector<Stmt> &compute) {
    std::set<std::string> assigned = assigned_vars(compute);
    for (size_t i = 0; i < compute.size();) {
      const Stmt &s = compute[i];
      const ArrayDecl *arr = nullptr;
      if (s.kind == StmtKind::Decl && s.extents.empty() && s.init && s.init->kind == ExprKind::Index)
        arr = ast_.find_array(s.init->name);
      if (!arr || arr->direction != Direction::In || arr->element != s.type || assigned.count(s.name)) {
        ++i;
        continue;
      }
      Expr load = *s.init;
      std::string name = s.name;
      compute.erase(compute.begin() + static_cast<std::ptrdiff_t>(i));
      std::vector<Stmt> rest(compute.begin() + static_cast<std::ptrdiff_t>(i), compute.end());
      substitute_in(rest, name, load);
      std::copy(rest.begin(), rest.end(), compute.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  void count_assignments(const std::vector<Stmt> &compute) {
    visit_stmts(compute, [&](const Stmt &s) {
      if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Var) ++assign_count_[s.lhs.name];
    });
    for (const Stmt &s : compute)
      if (s.kind == StmtKind::Decl && s.extents.empty() && s.init) top_decls_[s.name] = s.type;
  }

  std::string fresh(const std::string &base, int &counter) {
    std::string n;
    do n = base + std::to_string(counter++);
    while (used_.count(n));
    used_.insert(n);
    return n;
  }

  std::vector<Affine> subscripts(const std::vector<Expr> &args, const std::string &array, SourceLoc loc) {
    std::vector<Affine> subs;
    std::set<std::string> idx = index_set();
    for (const Expr &a : args) {
      auto af = to_affine(a, idx);
      if (!af) reject("non-affine subscript of '" + array + "'", loc);
      subs.push_back(*af);
    }
    return subs;
  }

  Expr replace_loads(const Expr &e) {
    Expr out = e;
    for (Expr &a : out.args) a = replace_loads(a);
    if (out.kind != ExprKind::Index) return out;
    const ArrayDecl *arr = ast_.find_array(out.name);
    if (!arr) return out;
    std::vector<Affine> subs = subscripts(out.args, out.name, out.loc);
    for (const ScalarLoad &l : sk_.loads)
      if (l.array == out.name && l.subscripts == subs) return Expr::var(l.scalar, out.loc);
    ScalarLoad l{fresh(out.name, load_counter_[out.name]), out.name, subs, arr->element};
    sk_.loads.push_back(l);
    return Expr::var(l.scalar, out.loc);
  }

  bool is_scalar_output(const std::string &n) const {
    for (const Param &p : sk_.scalar_outputs)
      if (p.name == n) return true;
    return false;
  }

  std::vector<Stmt> replace(const std::vector<Stmt> &body, bool conditional) {
    std::vector<Stmt> out;
    for (Stmt s : body) {
      each_expr(s, [&](Expr &e) { e = replace_loads(e); });
      if (s.kind == StmtKind::Decl && !s.extents.empty()) continue;  // folded local constant table
      if (s.kind == StmtKind::If || s.kind == StmtKind::Block) {
        s.body = replace(s.body, conditional || s.kind == StmtKind::If);
        s.else_body = replace(s.else_body, true);
      }
      if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Deref) {
        if (conditional) reject("conditional assignment to output '" + s.lhs.name + "'", s.loc);
        s.lhs.kind = LValueKind::Var;
      }
      if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Index) {
        const ArrayDecl *arr = ast_.find_array(s.lhs.name);
        if (!arr) reject("assignment to constant array '" + s.lhs.name + "'", s.loc);
        if (conditional) reject("conditional store to '" + s.lhs.name + "'", s.loc);
        std::vector<Affine> subs = subscripts(s.lhs.subscripts, s.lhs.name, s.loc);
        const Expr &rhs = *s.rhs;
        if (rhs.kind == ExprKind::Var && !assign_count_.count(rhs.name) && top_decls_.count(rhs.name) &&
            top_decls_[rhs.name] == arr->element) {
          sk_.stores.push_back({s.lhs.name, subs, rhs.name});
          sk_.store_types[rhs.name] = arr->element;
          continue;
        }
        Stmt d;
        d.kind = StmtKind::Decl;
        d.loc = s.loc;
        d.type = arr->element;
        d.name = fresh("Tmp", tmp_counter_);
        d.init = rhs;
        sk_.stores.push_back({s.lhs.name, subs, d.name});
        sk_.store_types[d.name] = arr->element;
        out.push_back(d);
        continue;
      }
      out.push_back(s);
    }
    return out;
  }

  void check_leftovers() {
    visit_stmts(sk_.compute, [&](const Stmt &s) {
      each_expr(s, [&](const Expr &e) {
        visit_exprs(e, [&](const Expr &x) {
          if (x.kind == ExprKind::Index) reject("constant array '" + x.name + "' indexed by a loop variable", x.loc);
          if (x.kind == ExprKind::Var && is_index(x.name))
            reject("loop index '" + x.name + "' used outside a subscript", x.loc);
        });
      });
    });
  }

  void check_store_aliasing() {
    const auto &st = sk_.stores;
    for (size_t a = 0; a < st.size(); ++a) {
      for (size_t b = a + 1; b < st.size(); ++b) {
        if (st[a].array != st[b].array) continue;
        bool same_coeffs = true;
        for (size_t d = 0; d < st[a].subscripts.size(); ++d)
          same_coeffs = same_coeffs && st[a].subscripts[d].coeffs == st[b].subscripts[d].coeffs;
        bool alias = false;
        if (same_coeffs) {
          alias = st[a].subscripts == st[b].subscripts;
        } else {
          for_each_iteration([&](const std::map<std::string, int64_t> &at) {
            bool eq = true;
            for (size_t d = 0; d < st[a].subscripts.size(); ++d)
              eq = eq && st[a].subscripts[d].evaluate(at) == st[b].subscripts[d].evaluate(at);
            alias = alias || eq;
          });
        }
        if (alias)
          reject("stores to " + subscript_text(st[a].array, st[a].subscripts) + " and " +
                 subscript_text(st[b].array, st[b].subscripts) + " may alias within one iteration");
      }
    }
  }

  void for_each_iteration(const std::function<void(const std::map<std::string, int64_t> &)> &f) {
    std::map<std::string, int64_t> at;
    std::function<void(size_t)> rec = [&](size_t level) {
      if (level == sk_.loop.indices.size()) {
        f(at);
        return;
      }
      const LoopIndex &i = sk_.loop.indices[level];
      for (int64_t k = 0; k < i.count; ++k) {
        at[i.name] = i.lower + k * i.step;
        rec(level + 1);
      }
    };
    rec(0);
  }

  const KernelAst &ast_;
  const Function &fn_;
  ScalarizedKernel sk_;
  std::vector<Stmt> prelude_, body_, epilogue_;
  std::set<std::string> used_;
  std::map<std::string, int> load_counter_;
  int tmp_counter_ = 0;
  std::map<std::string, int> assign_count_;
  std::map<std::string, ScalarType> top_decls_;
};

void outputs_to_deref(std::vector<Stmt> &body, const std::set<std::string> &outputs) {
  for (Stmt &s : body) {
    if (s.kind == StmtKind::Assign && s.lhs.kind == LValueKind::Var && outputs.count(s.lhs.name))
      s.lhs.kind = LValueKind::Deref;
    outputs_to_deref(s.body, outputs);
    outputs_to_deref(s.else_body, outputs);
  }
}

}  // namespace

ScalarizedKernel scalar_replace(const KernelAst &ast) { return Scalarizer(ast).run(); }

KernelAst to_ast(const ScalarizedKernel &sk) {
  KernelAst ast;
  ast.luts = sk.luts;
  ast.arrays = sk.arrays;
  Function fn;
  fn.name = sk.name;
  fn.params = sk.params;

  std::vector<Stmt> inner;
  for (const ScalarLoad &l : sk.loads) {
    Stmt d;
    d.kind = StmtKind::Decl;
    d.type = l.type;
    d.name = l.scalar;
    Expr idx;
    idx.kind = ExprKind::Index;
    idx.name = l.array;
    for (const Affine &a : l.subscripts) idx.args.push_back(affine_expr(a));
    d.init = idx;
    inner.push_back(d);
  }
  std::vector<Stmt> compute = sk.compute;
  std::set<std::string> outputs;
  for (const Param &p : sk.scalar_outputs) outputs.insert(p.name);
  outputs_to_deref(compute, outputs);
  for (Stmt &s : compute) inner.push_back(std::move(s));
  for (const ScalarStore &st : sk.stores) {
    Stmt a;
    a.kind = StmtKind::Assign;
    a.lhs.kind = LValueKind::Index;
    a.lhs.name = st.array;
    for (const Affine &sub : st.subscripts) a.lhs.subscripts.push_back(affine_expr(sub));
    a.rhs = Expr::var(st.scalar);
    inner.push_back(a);
  }

  for (auto it = sk.loop.indices.rbegin(); it != sk.loop.indices.rend(); ++it) {
    Stmt f;
    f.kind = StmtKind::For;
    f.name = it->name;
    f.declares_index = true;
    f.lower = Expr::lit(it->lower);
    f.bound = Expr::lit(it->lower + it->count * it->step);
    f.step = it->step;
    f.body = std::move(inner);
    inner = {f};
  }
  for (const Feedback &fb : sk.feedbacks) {
    Stmt d;
    d.kind = StmtKind::Decl;
    d.type = fb.type;
    d.name = fb.var;
    d.init = Expr::lit(fb.init);
    fn.body.push_back(d);
  }
  for (Stmt &s : inner) fn.body.push_back(std::move(s));
  ast.functions.push_back(std::move(fn));
  return ast;
}

std::string dump(const ScalarizedKernel &sk) {
  std::ostringstream os;
  os << "kernel " << sk.name << '\n';
  for (const LoopIndex &i : sk.loop.indices)
    os << "loop " << i.name << " lower=" << i.lower << " count=" << i.count << " step=" << i.step << '\n';
  for (const Feedback &f : sk.feedbacks)
    os << "feedback " << f.var << " (" << f.prev_name << ", " << f.next_name << ") " << f.type.to_string()
       << " init=" << f.init << '\n';
  for (const ScalarLoad &l : sk.loads)
    os << "load " << l.type.to_string() << ' ' << l.scalar << " = " << subscript_text(l.array, l.subscripts) << '\n';
  os << "compute\n" << print(sk.compute, 1);
  for (const ScalarStore &s : sk.stores)
    os << "store " << subscript_text(s.array, s.subscripts) << " = " << s.scalar << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Windows

int64_t WindowSpec::trip() const {
  int64_t n = 1;
  for (int64_t c : index_counts) n *= c;
  return n;
}

int64_t WindowSpec::anchor(int64_t k) const {
  int64_t a = first_offset;
  for (size_t j = index_counts.size(); j-- > 0;) {
    a += (k % index_counts[j]) * index_deltas[j];
    k /= index_counts[j];
  }
  return a;
}

int64_t WindowSpec::wrap_advance() const {
  if (index_deltas.size() < 2) return inner_advance();
  return index_deltas[0] - index_deltas[1] * (index_counts[1] - 1);
}

int64_t WindowSpec::overlap() const { return std::max<int64_t>(0, span - inner_advance()); }

WindowSpec detect_window(const ScalarizedKernel &sk, const std::string &array, int bus_width) {
  const ArrayDecl *arr = nullptr;
  for (const ArrayDecl &a : sk.arrays)
    if (a.name == array) arr = &a;
  if (!arr) fail(ErrorKind::Config, "no array named '" + array + "'");
  if (bus_width <= 0 || bus_width % 8 != 0) fail(ErrorKind::Config, "bus width must be a positive multiple of 8");
  if (arr->element.width > bus_width)
    fail(ErrorKind::Config, "element width " + std::to_string(arr->element.width) + " of '" + array +
                                "' exceeds the bus width " + std::to_string(bus_width));

  std::vector<std::vector<Affine>> accesses;
  if (arr->direction == Direction::In) {
    for (const ScalarLoad &l : sk.loads)
      if (l.array == array) accesses.push_back(l.subscripts);
  } else {
    for (const ScalarStore &s : sk.stores)
      if (s.array == array) accesses.push_back(s.subscripts);
  }
  if (accesses.empty()) fail(ErrorKind::Config, "array '" + array + "' is never accessed");

  const size_t dims = arr->extents.size();
  for (const auto &acc : accesses)
    for (size_t d = 0; d < dims; ++d)
      if (acc[d].coeffs != accesses[0][d].coeffs)
        fail(ErrorKind::NonUniformPattern, "subscripts of '" + array + "' use different index coefficients");

  WindowSpec ws;
  ws.array = array;
  ws.data_width = arr->element.width;
  ws.is_signed = arr->element.is_signed;
  ws.bus_width = bus_width;
  ws.array_size = arr->size();

  std::vector<int64_t> mult(dims, 1);
  for (size_t d = dims; d-- > 1;) mult[d - 1] = mult[d] * arr->extents[d];

  const auto &idx = sk.loop.indices;
  const std::string inner = idx.empty() ? "" : idx.back().name;
  for (size_t d = 0; d < dims; ++d) {
    int64_t lo = accesses[0][d].constant, hi = lo;
    for (const auto &acc : accesses) {
      lo = std::min(lo, acc[d].constant);
      hi = std::max(hi, acc[d].constant);
    }
    ws.base.push_back(lo);
    ws.shape.push_back(hi - lo + 1);
    ws.stride.push_back(idx.empty() ? 0 : accesses[0][d].coeff(inner) * idx.back().step);

    // Subscript range over the whole iteration space.
    int64_t vmin = lo, vmax = hi;
    for (const LoopIndex &i : idx) {
      int64_t c = accesses[0][d].coeff(i.name);
      int64_t first = c * i.lower, last = c * (i.lower + (i.count - 1) * i.step);
      vmin += std::min(first, last);
      vmax += std::max(first, last);
    }
    if (vmin < 0 || vmax >= arr->extents[d])
      fail(ErrorKind::Restriction, "access to '" + array + "' out of bounds in dimension " + std::to_string(d));
  }

  std::set<int64_t> linear;
  for (const auto &acc : accesses) {
    int64_t l = 0;
    for (size_t d = 0; d < dims; ++d) l += mult[d] * acc[d].constant;
    linear.insert(l);
  }
  int64_t lin_min = *linear.begin();
  ws.span = *linear.rbegin() - lin_min + 1;
  for (int64_t l : linear) ws.offsets.push_back(l - lin_min);

  ws.first_offset = lin_min;
  for (const LoopIndex &i : idx) {
    int64_t delta = 0;
    for (size_t d = 0; d < dims; ++d) {
      int64_t c = accesses[0][d].coeff(i.name);
      ws.first_offset += mult[d] * c * i.lower;
      delta += mult[d] * c * i.step;
    }
    ws.index_deltas.push_back(delta);
    ws.index_counts.push_back(i.count);
  }
  for (int64_t d : ws.index_deltas)
    if (d < 0) fail(ErrorKind::NonUniformPattern, "window of '" + array + "' moves backwards");
  if (ws.wrap_advance() < 0)
    fail(ErrorKind::NonUniformPattern, "window of '" + array + "' moves backwards when the inner loop wraps");

  if (arr->direction == Direction::Out) {
    bool contiguous = static_cast<int64_t>(ws.offsets.size()) == ws.span;
    bool sequential = ws.first_offset % ws.span == 0;
    if (!idx.empty() && idx.back().count > 1) sequential = sequential && ws.inner_advance() == ws.span;
    if (idx.size() > 1 && idx[0].count > 1) sequential = sequential && ws.wrap_advance() == ws.span;
    if (!contiguous || !sequential)
      fail(ErrorKind::NonUniformPattern, "stores to '" + array + "' do not form a sequential stream");
  }
  return ws;
}

std::string describe(const WindowSpec &ws) {
  std::ostringstream os;
  auto list = [&](const std::vector<int64_t> &v) {
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "x" : "") << v[i];
  };
  os << ws.array << ": W=";
  list(ws.shape);
  os << " S=";
  list(ws.stride);
  os << " base=";
  list(ws.base);
  os << " D=" << ws.data_width << " B=" << ws.bus_width << " E=" << ws.elements_per_word() << " span=" << ws.span
     << " overlap=" << ws.overlap() << " trip=" << ws.trip();
  return os.str();
}

}  // namespace minihls
