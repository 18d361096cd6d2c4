#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minihls/common.hpp"

namespace minihls {

enum class Op {
  Add, Sub, Mul, Div, Mod, Shl, Shr, And, Or, Xor,
  Eq, Ne, Lt, Le, Gt, Ge,
  Neg, LogicalNot, BitNot,
};

const char *op_spelling(Op op);
bool is_comparison(Op op);

enum class ExprKind {
  IntLit,
  Var,
  Index,      // name[args...]
  Unary,      // op args[0]
  Binary,     // args[0] op args[1]
  Call,       // name(args...)
  Lut,        // lut("name", args[0])
  LoadPrev,   // ROCCC_load_prev(name)
  StoreNext,  // ROCCC_store2next(name, args[0])
};

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  int64_t value = 0;
  std::string name;
  Op op = Op::Add;
  std::vector<Expr> args;
  SourceLoc loc;

  static Expr lit(int64_t v, SourceLoc loc = {});
  static Expr var(std::string name, SourceLoc loc = {});
  static Expr binary(Op op, Expr lhs, Expr rhs, SourceLoc loc = {});
  static Expr unary(Op op, Expr operand, SourceLoc loc = {});

  bool is_lit() const { return kind == ExprKind::IntLit; }
  bool operator==(const Expr &o) const;
};

enum class LValueKind { Var, Deref, Index };

struct LValue {
  LValueKind kind = LValueKind::Var;
  std::string name;
  std::vector<Expr> subscripts;

  bool operator==(const LValue &) const = default;
};

enum class StmtKind { Decl, Assign, If, For, Block, ExprStmt, Return };

struct Stmt {
  StmtKind kind = StmtKind::Block;
  SourceLoc loc;

  // Decl: `[const] type name[extents] [= init | = {values}]`
  ScalarType type;
  bool is_const = false;
  std::string name;
  std::vector<int64_t> extents;
  std::optional<Expr> init;
  std::vector<int64_t> init_list;

  // Assign: lhs = rhs. ExprStmt/Return use rhs.
  LValue lhs;
  std::optional<Expr> rhs;

  // If: cond, then_body, else_body. For: index name, lower, bound, step.
  std::optional<Expr> cond;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  bool declares_index = false;
  std::optional<Expr> lower;
  std::optional<Expr> bound;
  bool inclusive = false;
  int64_t step = 1;

  bool operator==(const Stmt &o) const;
};

enum class ParamKind { Scalar, Pointer, Array };

struct Param {
  std::string name;
  ScalarType type;
  ParamKind kind = ParamKind::Scalar;
  std::vector<int64_t> extents;
  bool is_const = false;
  SourceLoc loc;

  bool operator==(const Param &o) const {
    return name == o.name && type == o.type && kind == o.kind && extents == o.extents &&
           is_const == o.is_const;
  }
};

struct Function {
  std::string name;
  std::optional<ScalarType> return_type;  // nullopt = void
  std::vector<Param> params;
  std::vector<Stmt> body;
  SourceLoc loc;

  bool operator==(const Function &o) const {
    return name == o.name && return_type == o.return_type && params == o.params && body == o.body;
  }
};

/// `extern const T name[N];` declares a lookup table bound at compile time.
struct LutDecl {
  std::string name;
  ScalarType type;
  int64_t entries = 0;

  bool operator==(const LutDecl &) const = default;
};

/// File-scope `const T name[..] = {...};`.
struct ConstArray {
  std::string name;
  ScalarType type;
  std::vector<int64_t> extents;
  std::vector<int64_t> values;

  bool operator==(const ConstArray &) const = default;
};

enum class Direction { In, Out };

struct ArrayDecl {
  std::string name;
  ScalarType element;
  std::vector<int64_t> extents;
  Direction direction = Direction::In;

  bool operator==(const ArrayDecl &) const = default;
  int64_t size() const {
    int64_t n = 1;
    for (int64_t e : extents) n *= e;
    return n;
  }
};

/// A parsed translation unit. The kernel is the last `void` function; the
/// remaining functions are helpers until inlining removes them.
struct KernelAst {
  std::vector<LutDecl> luts;
  std::vector<ConstArray> consts;
  std::vector<Function> functions;

  // Filled by check_restrictions.
  std::vector<ArrayDecl> arrays;

  const Function &kernel() const;
  Function &kernel();

  const ConstArray *find_const(const std::string &name) const;
  const LutDecl *find_lut(const std::string &name) const;
  const ArrayDecl *find_array(const std::string &name) const;
  const Param *find_param(const std::string &name) const;

  bool operator==(const KernelAst &o) const {
    return luts == o.luts && consts == o.consts && functions == o.functions;
  }
};

/// C source for the whole unit; `parse(print(ast)) == ast`.
std::string print(const KernelAst &ast);
std::string print(const Expr &e);
std::string print(const std::vector<Stmt> &body, int indent = 0);
std::string print_type(const ScalarType &t);

// Tree utilities shared by the passes.
template <typename F>
void visit_exprs(const Expr &e, F &&f) {
  f(e);
  for (const Expr &a : e.args) visit_exprs(a, f);
}

template <typename F>
void visit_stmts(const std::vector<Stmt> &body, F &&f) {
  for (const Stmt &s : body) {
    f(s);
    visit_stmts(s.body, f);
    visit_stmts(s.else_body, f);
  }
}

/// Substitutes every `Var name` occurrence (not lvalues) with `replacement`.
Expr substitute(const Expr &e, const std::string &name, const Expr &replacement);
void substitute_in(std::vector<Stmt> &body, const std::string &name, const Expr &replacement);

}  // namespace minihls
