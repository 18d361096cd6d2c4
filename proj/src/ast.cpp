#include "minihls/ast.hpp"

#include <sstream>

namespace minihls {

const char *op_spelling(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Shl: return "<<";
    case Op::Shr: return ">>";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Xor: return "^";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Neg: return "-";
    case Op::LogicalNot: return "!";
    case Op::BitNot: return "~";
  }
  return "?";
}

bool is_comparison(Op op) {
  switch (op) {
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return true;
    default: return false;
  }
}

Expr Expr::lit(int64_t v, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::IntLit;
  e.value = v;
  e.loc = loc;
  return e;
}

Expr Expr::var(std::string name, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.op = op;
  e.loc = loc;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::unary(Op op, Expr operand, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.op = op;
  e.loc = loc;
  e.args.push_back(std::move(operand));
  return e;
}

// Source locations do not take part in structural equality.
bool Expr::operator==(const Expr &o) const {
  if (kind != o.kind || args != o.args) return false;
  switch (kind) {
    case ExprKind::IntLit: return value == o.value;
    case ExprKind::Unary:
    case ExprKind::Binary: return op == o.op;
    case ExprKind::Var:
    case ExprKind::Index:
    case ExprKind::Call:
    case ExprKind::Lut:
    case ExprKind::LoadPrev:
    case ExprKind::StoreNext: return name == o.name;
  }
  return false;
}

bool Stmt::operator==(const Stmt &o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case StmtKind::Decl:
      return type == o.type && is_const == o.is_const && name == o.name && extents == o.extents &&
             init == o.init && init_list == o.init_list;
    case StmtKind::Assign: return lhs == o.lhs && rhs == o.rhs;
    case StmtKind::If: return cond == o.cond && body == o.body && else_body == o.else_body;
    case StmtKind::For:
      return name == o.name && declares_index == o.declares_index && lower == o.lower &&
             bound == o.bound && inclusive == o.inclusive && step == o.step && body == o.body;
    case StmtKind::Block: return body == o.body;
    case StmtKind::ExprStmt:
    case StmtKind::Return: return rhs == o.rhs;
  }
  return false;
}

const Function &KernelAst::kernel() const {
  for (auto it = functions.rbegin(); it != functions.rend(); ++it)
    if (!it->return_type) return *it;
  fail(ErrorKind::Restriction, "no void kernel function found");
}

Function &KernelAst::kernel() {
  return const_cast<Function &>(static_cast<const KernelAst &>(*this).kernel());
}

const ConstArray *KernelAst::find_const(const std::string &name) const {
  for (const auto &c : consts)
    if (c.name == name) return &c;
  return nullptr;
}

const LutDecl *KernelAst::find_lut(const std::string &name) const {
  for (const auto &l : luts)
    if (l.name == name) return &l;
  return nullptr;
}

const ArrayDecl *KernelAst::find_array(const std::string &name) const {
  for (const auto &a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

const Param *KernelAst::find_param(const std::string &name) const {
  for (const auto &p : kernel().params)
    if (p.name == name) return &p;
  return nullptr;
}

std::string print_type(const ScalarType &t) {
  if (t.width == 32) return t.is_signed ? "int" : "unsigned int";
  return (t.is_signed ? "int" : "uint") + std::to_string(t.width) + "_t";
}

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Or: return 1;
    case Op::Xor: return 2;
    case Op::And: return 3;
    case Op::Eq: case Op::Ne: return 4;
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 5;
    case Op::Shl: case Op::Shr: return 6;
    case Op::Add: case Op::Sub: return 7;
    case Op::Mul: case Op::Div: case Op::Mod: return 8;
    default: return 9;
  }
}

int expr_precedence(const Expr &e) {
  if (e.kind == ExprKind::Binary) return precedence(e.op);
  if (e.kind == ExprKind::Unary) return 9;
  if (e.kind == ExprKind::IntLit && e.value < 0) return 9;
  return 10;
}

void print_expr(std::ostream &os, const Expr &e);

void print_child(std::ostream &os, const Expr &child, int min_prec) {
  if (expr_precedence(child) < min_prec) {
    os << '(';
    print_expr(os, child);
    os << ')';
  } else {
    print_expr(os, child);
  }
}

void print_expr(std::ostream &os, const Expr &e) {
  switch (e.kind) {
    case ExprKind::IntLit: os << e.value; break;
    case ExprKind::Var: os << e.name; break;
    case ExprKind::Index:
      os << e.name;
      for (const Expr &a : e.args) {
        os << '[';
        print_expr(os, a);
        os << ']';
      }
      break;
    case ExprKind::Unary:
      os << op_spelling(e.op);
      // `-(5)` keeps the unary node; a bare `-5` parses as a literal.
      if (e.args[0].kind == ExprKind::IntLit || expr_precedence(e.args[0]) < 9) {
        os << '(';
        print_expr(os, e.args[0]);
        os << ')';
      } else {
        print_expr(os, e.args[0]);
      }
      break;
    case ExprKind::Binary: {
      int p = precedence(e.op);
      print_child(os, e.args[0], p);
      os << ' ' << op_spelling(e.op) << ' ';
      print_child(os, e.args[1], p + 1);
      break;
    }
    case ExprKind::Call:
      os << e.name << '(';
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, e.args[i]);
      }
      os << ')';
      break;
    case ExprKind::Lut:
      os << "lut(\"" << e.name << "\", ";
      print_expr(os, e.args[0]);
      os << ')';
      break;
    case ExprKind::LoadPrev: os << "ROCCC_load_prev(" << e.name << ')'; break;
    case ExprKind::StoreNext:
      os << "ROCCC_store2next(" << e.name << ", ";
      print_expr(os, e.args[0]);
      os << ')';
      break;
  }
}

void print_lvalue(std::ostream &os, const LValue &lv) {
  if (lv.kind == LValueKind::Deref) os << '*';
  os << lv.name;
  for (const Expr &s : lv.subscripts) {
    os << '[';
    print_expr(os, s);
    os << ']';
  }
}

void print_list(std::ostream &os, const std::vector<int64_t> &values) {
  os << '{';
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    os << values[i];
  }
  os << '}';
}

void print_body(std::ostream &os, const std::vector<Stmt> &body, int indent);

void print_stmt(std::ostream &os, const Stmt &s, int indent) {
  std::string pad(indent * 2, ' ');
  os << pad;
  switch (s.kind) {
    case StmtKind::Decl:
      if (s.is_const) os << "const ";
      os << print_type(s.type) << ' ' << s.name;
      for (int64_t e : s.extents) os << '[' << e << ']';
      if (s.init) {
        os << " = ";
        print_expr(os, *s.init);
      } else if (!s.extents.empty() && !s.init_list.empty()) {
        os << " = ";
        print_list(os, s.init_list);
      }
      os << ";\n";
      break;
    case StmtKind::Assign:
      print_lvalue(os, s.lhs);
      os << " = ";
      print_expr(os, *s.rhs);
      os << ";\n";
      break;
    case StmtKind::ExprStmt:
      print_expr(os, *s.rhs);
      os << ";\n";
      break;
    case StmtKind::Return:
      os << "return";
      if (s.rhs) {
        os << ' ';
        print_expr(os, *s.rhs);
      }
      os << ";\n";
      break;
    case StmtKind::Block:
      os << "{\n";
      print_body(os, s.body, indent + 1);
      os << pad << "}\n";
      break;
    case StmtKind::If:
      os << "if (";
      print_expr(os, *s.cond);
      os << ") {\n";
      print_body(os, s.body, indent + 1);
      os << pad << '}';
      if (!s.else_body.empty()) {
        os << " else {\n";
        print_body(os, s.else_body, indent + 1);
        os << pad << '}';
      }
      os << '\n';
      break;
    case StmtKind::For:
      os << "for (" << (s.declares_index ? "int " : "") << s.name << " = ";
      print_expr(os, *s.lower);
      os << "; " << s.name << (s.inclusive ? " <= " : " < ");
      print_expr(os, *s.bound);
      os << "; " << s.name << " = " << s.name << " + " << s.step << ") {\n";
      print_body(os, s.body, indent + 1);
      os << pad << "}\n";
      break;
  }
}

void print_body(std::ostream &os, const std::vector<Stmt> &body, int indent) {
  for (const Stmt &s : body) print_stmt(os, s, indent);
}

}  // namespace

std::string print(const Expr &e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string print(const std::vector<Stmt> &body, int indent) {
  std::ostringstream os;
  print_body(os, body, indent);
  return os.str();
}

std::string print(const KernelAst &ast) {
  std::ostringstream os;
  for (const LutDecl &l : ast.luts)
    os << "extern const " << print_type(l.type) << ' ' << l.name << '[' << l.entries << "];\n";
  for (const ConstArray &c : ast.consts) {
    os << "const " << print_type(c.type) << ' ' << c.name;
    for (int64_t e : c.extents) os << '[' << e << ']';
    os << " = ";
    print_list(os, c.values);
    os << ";\n";
  }
  for (const Function &f : ast.functions) {
    if (os.tellp() > 0) os << '\n';
    os << (f.return_type ? print_type(*f.return_type) : std::string("void")) << ' ' << f.name << '(';
    for (size_t i = 0; i < f.params.size(); ++i) {
      const Param &p = f.params[i];
      if (i) os << ", ";
      if (p.is_const) os << "const ";
      os << print_type(p.type) << (p.kind == ParamKind::Pointer ? "* " : " ") << p.name;
      for (int64_t e : p.extents) os << '[' << e << ']';
    }
    os << ") {\n";
    print_body(os, f.body, 1);
    os << "}\n";
  }
  return os.str();
}

Expr substitute(const Expr &e, const std::string &name, const Expr &replacement) {
  if (e.kind == ExprKind::Var && e.name == name) return replacement;
  Expr out = e;
  for (Expr &a : out.args) a = substitute(a, name, replacement);
  return out;
}

void substitute_in(std::vector<Stmt> &body, const std::string &name, const Expr &replacement) {
  for (Stmt &s : body) {
    if (s.init) s.init = substitute(*s.init, name, replacement);
    if (s.rhs) s.rhs = substitute(*s.rhs, name, replacement);
    if (s.cond) s.cond = substitute(*s.cond, name, replacement);
    if (s.lower) s.lower = substitute(*s.lower, name, replacement);
    if (s.bound) s.bound = substitute(*s.bound, name, replacement);
    for (Expr &sub : s.lhs.subscripts) sub = substitute(sub, name, replacement);
    substitute_in(s.body, name, replacement);
    substitute_in(s.else_body, name, replacement);
  }
}

}  // namespace minihls
