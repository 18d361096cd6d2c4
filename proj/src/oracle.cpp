#include "minihls/oracle.hpp"

#include <map>

#include "minihls/frontend.hpp"

namespace minihls {

namespace {

int64_t wadd(int64_t a, int64_t b) { return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b)); }
int64_t wsub(int64_t a, int64_t b) { return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b)); }
int64_t wmul(int64_t a, int64_t b) { return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b)); }

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Scalar {
  ScalarType type;
  int64_t value = 0;
  bool is_index = false;
};

struct ArrayRef {
  ScalarType type;
  std::vector<int64_t> extents;
  std::vector<int64_t> *values = nullptr;
  bool writable = false;
};

struct Frame {
  std::map<std::string, Scalar> scalars;
  std::map<std::string, ArrayRef> arrays;
  std::map<std::string, std::vector<int64_t>> local_consts;
  std::map<std::string, int64_t> pending_next;
  int loop_depth = 0;
};

class Interpreter {
public:
  Interpreter(const KernelAst &ast, const LutTable &luts) : ast_(ast), luts_(luts) {
    for (const ConstArray &c : ast.consts) const_storage_[c.name] = c.values;
  }

  KernelIO run(const KernelIO &inputs) {
    const Function &kernel = ast_.kernel();
    Frame frame;
    KernelIO out;
    input_storage_ = inputs.memories;
    for (const Param &p : kernel.params) {
      switch (p.kind) {
        case ParamKind::Scalar:
          frame.scalars[p.name] = {p.type, wrap_to(inputs.scalars.at(p.name), p.type), false};
          break;
        case ParamKind::Pointer:
          out.scalars[p.name] = 0;
          pointer_types_[p.name] = p.type;
          break;
        case ParamKind::Array: {
          const ArrayDecl *decl = ast_.find_array(p.name);
          bool is_out = decl && decl->direction == Direction::Out;
          int64_t size = 1;
          for (int64_t e : p.extents) size *= e;
          std::vector<int64_t> *storage;
          if (is_out) {
            out.memories[p.name].assign(size, 0);
            storage = &out.memories[p.name];
          } else {
            storage = &input_storage_[p.name];
          }
          frame.arrays[p.name] = {p.type, p.extents, storage, is_out};
          break;
        }
      }
    }
    outputs_ = &out;
    exec_body(kernel.body, frame);
    commit(frame);
    return out;
  }

private:
  void commit(Frame &f) {
    for (const auto &[name, v] : f.pending_next) {
      Scalar &s = f.scalars.at(name);
      s.value = wrap_to(v, s.type);
    }
    f.pending_next.clear();
  }

  int64_t flat_index(const std::string &name, const std::vector<int64_t> &extents, const std::vector<int64_t> &subs,
                     SourceLoc loc) {
    int64_t flat = 0;
    for (size_t d = 0; d < extents.size(); ++d) {
      if (subs[d] < 0 || subs[d] >= extents[d])
        fail(ErrorKind::Oracle, "subscript " + std::to_string(subs[d]) + " out of bounds for '" + name + "'", loc);
      flat = flat * extents[d] + subs[d];
    }
    return flat;
  }

  int64_t read_array(const std::string &name, const std::vector<int64_t> &subs, Frame &f, SourceLoc loc) {
    if (auto it = f.arrays.find(name); it != f.arrays.end()) {
      const ArrayRef &a = it->second;
      if (a.writable) fail(ErrorKind::Oracle, "read of output array '" + name + "'", loc);
      int64_t i = flat_index(name, a.extents, subs, loc);
      return wrap_to((*a.values)[i], a.type);
    }
    if (auto it = f.local_consts.find(name); it != f.local_consts.end()) {
      // extents recorded alongside the values under a mangled key
      const auto &ext = local_const_extents_.at(name);
      return it->second[flat_index(name, ext, subs, loc)];
    }
    if (const ConstArray *c = ast_.find_const(name))
      return wrap_to(c->values[flat_index(name, c->extents, subs, loc)], c->type);
    fail(ErrorKind::Oracle, "unknown array '" + name + "'", loc);
  }

  int64_t eval(const Expr &e, Frame &f) {
    switch (e.kind) {
      case ExprKind::IntLit: return e.value;
      case ExprKind::Var: {
        auto it = f.scalars.find(e.name);
        if (it == f.scalars.end()) fail(ErrorKind::Oracle, "unknown variable '" + e.name + "'", e.loc);
        return it->second.value;
      }
      case ExprKind::LoadPrev: {
        auto it = f.scalars.find(e.name);
        if (it == f.scalars.end()) fail(ErrorKind::Oracle, "unknown variable '" + e.name + "'", e.loc);
        return it->second.value;
      }
      case ExprKind::StoreNext: {
        int64_t v = eval(e.args[0], f);
        f.pending_next[e.name] = v;
        if (f.loop_depth == 0 && !in_loop_) commit(f);
        return v;
      }
      case ExprKind::Index: {
        std::vector<int64_t> subs;
        for (const Expr &a : e.args) subs.push_back(eval(a, f));
        return read_array(e.name, subs, f, e.loc);
      }
      case ExprKind::Lut: {
        auto it = luts_.find(e.name);
        if (it == luts_.end()) fail(ErrorKind::Oracle, "unbound lookup table '" + e.name + "'", e.loc);
        uint64_t idx = static_cast<uint64_t>(eval(e.args[0], f)) & low_mask(it->second.address_width);
        return it->second.contents[idx];
      }
      case ExprKind::Unary: {
        int64_t v = eval(e.args[0], f);
        switch (e.op) {
          case Op::Neg: return wsub(0, v);
          case Op::LogicalNot: return v == 0 ? 1 : 0;
          case Op::BitNot: return ~v;
          default: break;
        }
        break;
      }
      case ExprKind::Binary: {
        int64_t a = eval(e.args[0], f);
        int64_t b = eval(e.args[1], f);
        switch (e.op) {
          case Op::Add: return wadd(a, b);
          case Op::Sub: return wsub(a, b);
          case Op::Mul: return wmul(a, b);
          case Op::Div:
            if (b == 0) fail(ErrorKind::Oracle, "division by zero", e.loc);
            return floor_div(a, b);
          case Op::Mod:
            if (b == 0) fail(ErrorKind::Oracle, "division by zero", e.loc);
            return a - floor_div(a, b) * b;
          case Op::Shl:
            if (b < 0 || b > 63) fail(ErrorKind::Oracle, "shift amount out of range", e.loc);
            return wmul(a, static_cast<int64_t>(uint64_t{1} << b));
          case Op::Shr:
            if (b < 0 || b > 63) fail(ErrorKind::Oracle, "shift amount out of range", e.loc);
            return a >> b;
          case Op::And: return a & b;
          case Op::Or: return a | b;
          case Op::Xor: return a ^ b;
          case Op::Eq: return a == b;
          case Op::Ne: return a != b;
          case Op::Lt: return a < b;
          case Op::Le: return a <= b;
          case Op::Gt: return a > b;
          case Op::Ge: return a >= b;
          default: break;
        }
        break;
      }
      case ExprKind::Call: return call(e, f);
    }
    fail(ErrorKind::Oracle, "cannot evaluate expression", e.loc);
  }

  int64_t call(const Expr &e, Frame &caller) {
    const Function *fn = nullptr;
    for (const Function &cand : ast_.functions)
      if (cand.name == e.name && cand.return_type) fn = &cand;
    if (!fn) fail(ErrorKind::Oracle, "unknown callee '" + e.name + "'", e.loc);
    if (++call_depth_ > 256) fail(ErrorKind::Oracle, "recursion", e.loc);
    Frame frame;
    for (size_t i = 0; i < fn->params.size(); ++i)
      frame.scalars[fn->params[i].name] = {fn->params[i].type, wrap_to(eval(e.args[i], caller), fn->params[i].type)};
    int64_t result = 0;
    for (const Stmt &s : fn->body) {
      if (s.kind == StmtKind::Return) {
        result = wrap_to(eval(*s.rhs, frame), *fn->return_type);
        break;
      }
      exec(s, frame);
    }
    --call_depth_;
    return result;
  }

  void exec_body(const std::vector<Stmt> &body, Frame &f) {
    for (const Stmt &s : body) exec(s, f);
  }

  void exec(const Stmt &s, Frame &f) {
    switch (s.kind) {
      case StmtKind::Decl:
        if (!s.extents.empty()) {
          std::vector<int64_t> vals;
          for (int64_t v : s.init_list) vals.push_back(wrap_to(v, s.type));
          f.local_consts[s.name] = vals;
          local_const_extents_[s.name] = s.extents;
        } else {
          f.scalars[s.name] = {s.type, s.init ? wrap_to(eval(*s.init, f), s.type) : 0};
        }
        break;
      case StmtKind::Assign: assign(s, f); break;
      case StmtKind::ExprStmt: eval(*s.rhs, f); break;
      case StmtKind::Return: break;
      case StmtKind::Block: exec_body(s.body, f); break;
      case StmtKind::If:
        if (eval(*s.cond, f) != 0) exec_body(s.body, f);
        else exec_body(s.else_body, f);
        break;
      case StmtKind::For: {
        int64_t lo = eval(*s.lower, f);
        int64_t hi = eval(*s.bound, f);
        bool outer = f.loop_depth == 0;
        ++f.loop_depth;
        bool saved = in_loop_;
        in_loop_ = true;
        for (int64_t i = lo; s.inclusive ? i <= hi : i < hi; i += s.step) {
          f.scalars[s.name] = {{true, 64}, i, true};
          exec_body(s.body, f);
          if (outer) commit(f);
        }
        in_loop_ = saved;
        --f.loop_depth;
        f.scalars.erase(s.name);
        break;
      }
    }
  }

  void assign(const Stmt &s, Frame &f) {
    int64_t v = eval(*s.rhs, f);
    const LValue &lv = s.lhs;
    switch (lv.kind) {
      case LValueKind::Var: {
        Scalar &sc = f.scalars.at(lv.name);
        sc.value = wrap_to(v, sc.type);
        break;
      }
      case LValueKind::Deref: outputs_->scalars[lv.name] = wrap_to(v, pointer_types_.at(lv.name)); break;
      case LValueKind::Index: {
        auto it = f.arrays.find(lv.name);
        if (it == f.arrays.end() || !it->second.writable)
          fail(ErrorKind::Oracle, "store to non-output array '" + lv.name + "'", s.loc);
        std::vector<int64_t> subs;
        for (const Expr &a : lv.subscripts) subs.push_back(eval(a, f));
        (*it->second.values)[flat_index(lv.name, it->second.extents, subs, s.loc)] = wrap_to(v, it->second.type);
        break;
      }
    }
  }

  const KernelAst &ast_;
  const LutTable &luts_;
  std::map<std::string, std::vector<int64_t>> const_storage_;
  std::map<std::string, std::vector<int64_t>> input_storage_;
  std::map<std::string, std::vector<int64_t>> local_const_extents_;
  std::map<std::string, ScalarType> pointer_types_;
  KernelIO *outputs_ = nullptr;
  int call_depth_ = 0;
  bool in_loop_ = false;
};

}  // namespace

void validate_inputs(const KernelAst &ast, const KernelIO &inputs) {
  for (const Param &p : ast.kernel().params) {
    if (p.kind == ParamKind::Scalar) {
      auto it = inputs.scalars.find(p.name);
      if (it == inputs.scalars.end()) fail(ErrorKind::VectorShape, "missing scalar input '" + p.name + "'");
      if (!fits(it->second, p.type.width, p.type.is_signed))
        fail(ErrorKind::VectorShape, "scalar '" + p.name + "' does not fit " + p.type.to_string());
    }
  }
  for (const ArrayDecl &a : ast.arrays) {
    if (a.direction != Direction::In) continue;
    auto it = inputs.memories.find(a.name);
    if (it == inputs.memories.end()) fail(ErrorKind::VectorShape, "missing input array '" + a.name + "'");
    if (static_cast<int64_t>(it->second.size()) != a.size())
      fail(ErrorKind::VectorShape, "array '" + a.name + "' has " + std::to_string(it->second.size()) +
                                       " elements, expected " + std::to_string(a.size()));
    for (int64_t v : it->second)
      if (!fits(v, a.element.width, a.element.is_signed))
        fail(ErrorKind::VectorShape, "array '" + a.name + "' value " + std::to_string(v) + " does not fit " +
                                         a.element.to_string());
  }
}

KernelIO interpret_oracle(const KernelAst &ast, const KernelIO &inputs, const LutTable &luts) {
  bool has_arrays = false;
  for (const Param &p : ast.kernel().params) has_arrays |= p.kind == ParamKind::Array;
  if (has_arrays && ast.arrays.empty()) {
    KernelAst checked = check_restrictions(ast);
    validate_inputs(checked, inputs);
    return Interpreter(checked, luts).run(inputs);
  }
  validate_inputs(ast, inputs);
  return Interpreter(ast, luts).run(inputs);
}

}  // namespace minihls
