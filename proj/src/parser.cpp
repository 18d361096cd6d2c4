#include <cctype>
#include <map>
#include <set>
#include <vector>

#include "minihls/frontend.hpp"

namespace minihls {

namespace {

enum class Tok { Ident, Int, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int64_t value = 0;
  SourceLoc loc;
};

[[noreturn]] void syntax(const std::string &msg, SourceLoc loc) { fail(ErrorKind::Syntax, msg, loc); }
[[noreturn]] void unsupported(const std::string &what, SourceLoc loc) {
  fail(ErrorKind::UnsupportedConstruct, what, loc);
}

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool line_start = true;
    while (true) {
      skip_space_and_comments(line_start);
      if (pos_ >= src_.size()) break;
      if (line_start && src_[pos_] == '#') {
        directive();
        continue;
      }
      line_start = false;
      Token t = next();
      if (t.kind == Tok::Ident) {
        auto it = defines_.find(t.text);
        if (it != defines_.end()) {
          for (Token d : it->second) {
            d.loc = t.loc;
            out.push_back(d);
          }
          continue;
        }
      }
      out.push_back(t);
    }
    Token end;
    end.loc = here();
    out.push_back(end);
    return out;
  }

private:
  SourceLoc here() const { return {line_, col_}; }

  char peek(size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments(bool &line_start) {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == '\n') {
        line_start = true;
        advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        SourceLoc start = here();
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) syntax("unterminated comment", start);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  void directive() {
    SourceLoc loc = here();
    size_t eol = src_.find('\n', pos_);
    if (eol == std::string_view::npos) eol = src_.size();
    std::string line(src_.substr(pos_ + 1, eol - pos_ - 1));
    size_t p = line.find_first_not_of(" \t");
    std::string word;
    while (p < line.size() && std::isalpha(static_cast<unsigned char>(line[p]))) word += line[p++];
    if (word == "include") {
      // headers such as <stdint.h> carry nothing the dialect needs
    } else if (word == "define") {
      size_t body_start = pos_ + 1 + p;
      Lexer sub(src_.substr(body_start, eol - body_start));
      sub.line_ = line_;
      sub.col_ = col_ + static_cast<int>(body_start - pos_);
      sub.defines_ = defines_;
      std::vector<Token> toks = sub.run();
      toks.pop_back();
      if (toks.empty() || toks[0].kind != Tok::Ident) syntax("malformed #define", loc);
      std::string name = toks[0].text;
      std::vector<Token> body(toks.begin() + 1, toks.end());
      if (body.empty()) syntax("#define without a value", loc);
      if (body.size() > 1) {
        Token lp{Tok::Punct, "(", 0, loc}, rp{Tok::Punct, ")", 0, loc};
        body.insert(body.begin(), lp);
        body.push_back(rp);
      }
      defines_[name] = body;
    } else {
      unsupported("preprocessor directive #" + word, loc);
    }
    while (pos_ < eol) advance();
  }

  Token next() {
    Token t;
    t.loc = here();
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::Ident;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
        t.text += peek();
        advance();
      }
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::Int;
      std::string digits;
      int base = 10;
      if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
        base = 16;
        advance();
        advance();
      }
      while (std::isxdigit(static_cast<unsigned char>(peek()))) {
        if (base == 10 && !std::isdigit(static_cast<unsigned char>(peek()))) break;
        digits += peek();
        advance();
      }
      if (peek() == '.' || (base == 10 && (peek() == 'e' || peek() == 'E')))
        unsupported("floating point", t.loc);
      while (peek() == 'u' || peek() == 'U' || peek() == 'l' || peek() == 'L') advance();
      if (digits.empty()) syntax("malformed integer literal", t.loc);
      uint64_t v = 0;
      for (char d : digits) {
        int dv = std::isdigit(static_cast<unsigned char>(d)) ? d - '0' : std::tolower(d) - 'a' + 10;
        v = v * base + dv;
        if (v > 0xFFFFFFFFull) fail(ErrorKind::Overflow, "integer literal exceeds 32 bits", t.loc);
      }
      t.value = static_cast<int64_t>(v);
      t.text = digits;
      return t;
    }
    if (c == '"') {
      t.kind = Tok::String;
      advance();
      while (pos_ < src_.size() && peek() != '"' && peek() != '\n') {
        t.text += peek();
        advance();
      }
      if (peek() != '"') syntax("unterminated string literal", t.loc);
      advance();
      return t;
    }
    static const char *puncts[] = {"<<=", ">>=", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
                                   "++",  "--",  "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
                                   "->"};
    for (const char *p : puncts) {
      std::string_view pv(p);
      if (src_.substr(pos_, pv.size()) == pv) {
        t.kind = Tok::Punct;
        t.text = p;
        for (size_t i = 0; i < pv.size(); ++i) advance();
        return t;
      }
    }
    if (std::string_view("()[]{};,=+-*/%&|^~!<>?:.").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance();
      return t;
    }
    syntax(std::string("unexpected character '") + c + "'", t.loc);
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::map<std::string, std::vector<Token>> defines_;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  KernelAst unit() {
    KernelAst ast;
    while (!at_end()) {
      if (is("extern")) {
        ast.luts.push_back(lut_decl());
        continue;
      }
      SourceLoc loc = cur().loc;
      bool is_const = accept("const");
      std::optional<ScalarType> type;
      if (accept("void")) {
        if (is_const) syntax("const void", loc);
      } else {
        type = scalar_type();
      }
      Token name = expect_ident();
      if (is("(")) {
        ast.functions.push_back(function(name, type, loc));
      } else {
        if (!is_const || !type) syntax("only const arrays are allowed at file scope", loc);
        ConstArray c;
        c.name = name.text;
        c.type = *type;
        c.extents = extents();
        if (c.extents.empty()) syntax("file-scope constant must be an array", loc);
        expect("=");
        c.values = init_list();
        expect(";");
        check_init_size(c.extents, c.values, loc);
        ast.consts.push_back(std::move(c));
      }
    }
    if (ast.functions.empty()) syntax("no function definition", cur().loc);
    return ast;
  }

private:
  const Token &cur() const { return toks_[pos_]; }
  bool at_end() const { return cur().kind == Tok::End; }
  bool is(std::string_view text) const {
    return (cur().kind == Tok::Punct || cur().kind == Tok::Ident) && cur().text == text;
  }
  bool is_at(size_t ahead, std::string_view text) const {
    size_t p = std::min(pos_ + ahead, toks_.size() - 1);
    return (toks_[p].kind == Tok::Punct || toks_[p].kind == Tok::Ident) && toks_[p].text == text;
  }
  bool accept(std::string_view text) {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view text) {
    if (!accept(text)) syntax("expected '" + std::string(text) + "' but found '" + describe(cur()) + "'", cur().loc);
  }
  static std::string describe(const Token &t) {
    if (t.kind == Tok::End) return "end of input";
    if (t.kind == Tok::Int) return std::to_string(t.value);
    return t.text;
  }
  Token expect_ident() {
    if (cur().kind != Tok::Ident) syntax("expected identifier but found '" + describe(cur()) + "'", cur().loc);
    return toks_[pos_++];
  }

  bool starts_type() const {
    if (cur().kind != Tok::Ident) return false;
    static const std::set<std::string> words = {"const", "unsigned", "signed", "char", "short", "int",
                                                "long",  "bool",     "float",  "double"};
    if (words.count(cur().text)) return true;
    return parse_sized_name(cur().text).has_value();
  }

  static std::optional<ScalarType> parse_sized_name(const std::string &s) {
    bool is_signed = true;
    size_t p = 0;
    if (s.rfind("uint", 0) == 0) {
      is_signed = false;
      p = 4;
    } else if (s.rfind("int", 0) == 0) {
      p = 3;
    } else {
      return std::nullopt;
    }
    if (s.size() < p + 3 || s.substr(s.size() - 2) != "_t") return std::nullopt;
    std::string digits = s.substr(p, s.size() - 2 - p);
    if (digits.empty() || digits.size() > 3) return std::nullopt;
    for (char c : digits)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return ScalarType{is_signed, std::stoi(digits)};
  }

  ScalarType scalar_type() {
    SourceLoc loc = cur().loc;
    if (cur().kind != Tok::Ident) syntax("expected a type", loc);
    const std::string &w = cur().text;
    if (w == "float" || w == "double") unsupported("floating point", loc);
    if (w == "long") unsupported("integer wider than 32 bits", loc);
    if (w == "struct" || w == "union") unsupported(w, loc);
    if (auto sized = parse_sized_name(w)) {
      ++pos_;
      if (sized->width < 1 || sized->width > 32) unsupported("integer wider than 32 bits", loc);
      return *sized;
    }
    if (accept("bool")) return {false, 1};
    bool is_signed = true;
    bool saw_sign = false;
    if (accept("unsigned")) {
      is_signed = false;
      saw_sign = true;
    } else if (accept("signed")) {
      saw_sign = true;
    }
    if (is("long")) unsupported("integer wider than 32 bits", cur().loc);
    if (accept("char")) return {is_signed, 8};
    if (accept("short")) {
      accept("int");
      return {is_signed, 16};
    }
    if (accept("int") || saw_sign) return {is_signed, 32};
    syntax("expected a type but found '" + describe(cur()) + "'", loc);
  }

  int64_t const_expr() {
    SourceLoc loc = cur().loc;
    Expr e = expr();
    auto v = eval_constant(e);
    if (!v) syntax("expected an integer constant expression", loc);
    return *v;
  }

  std::vector<int64_t> extents() {
    std::vector<int64_t> ext;
    while (accept("[")) {
      SourceLoc loc = cur().loc;
      if (is("]")) syntax("array extent required", loc);
      int64_t n = const_expr();
      if (n < 1) syntax("array extent must be at least 1", loc);
      ext.push_back(n);
      expect("]");
    }
    return ext;
  }

  std::vector<int64_t> init_list() {
    std::vector<int64_t> values;
    expect("{");
    while (!is("}")) {
      if (is("{")) {
        auto inner = init_list();
        values.insert(values.end(), inner.begin(), inner.end());
      } else {
        values.push_back(const_expr());
      }
      if (!accept(",")) break;
    }
    expect("}");
    return values;
  }

  static void check_init_size(const std::vector<int64_t> &extents, const std::vector<int64_t> &values,
                              SourceLoc loc) {
    int64_t n = 1;
    for (int64_t e : extents) n *= e;
    if (static_cast<int64_t>(values.size()) != n)
      syntax("initializer has " + std::to_string(values.size()) + " values, expected " + std::to_string(n), loc);
  }

  LutDecl lut_decl() {
    SourceLoc loc = cur().loc;
    expect("extern");
    accept("const");
    LutDecl l;
    l.type = scalar_type();
    l.name = expect_ident().text;
    auto ext = extents();
    if (ext.size() != 1) syntax("lookup table declaration needs exactly one extent", loc);
    l.entries = ext[0];
    expect(";");
    return l;
  }

  Function function(const Token &name, std::optional<ScalarType> ret, SourceLoc loc) {
    Function f;
    f.name = name.text;
    f.return_type = ret;
    f.loc = loc;
    expect("(");
    if (!is(")") && !(is("void") && is_at(1, ")"))) {
      do {
        Param p;
        p.loc = cur().loc;
        p.is_const = accept("const");
        p.type = scalar_type();
        if (accept("*")) {
          p.kind = ParamKind::Pointer;
          if (is("*")) unsupported("pointer to pointer", cur().loc);
        }
        p.name = expect_ident().text;
        if (is("[")) {
          if (p.kind == ParamKind::Pointer) unsupported("array of pointers", p.loc);
          p.kind = ParamKind::Array;
          if (is_at(1, "]")) syntax("array parameter '" + p.name + "' needs an explicit extent", p.loc);
          p.extents = extents();
        }
        f.params.push_back(std::move(p));
      } while (accept(","));
    } else {
      accept("void");
    }
    expect(")");
    f.body = block();
    return f;
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> body;
    while (!is("}")) {
      if (at_end()) syntax("unexpected end of input, expected '}'", cur().loc);
      body.push_back(statement());
    }
    expect("}");
    return body;
  }

  std::vector<Stmt> statement_as_body() {
    if (is("{")) return block();
    std::vector<Stmt> body;
    body.push_back(statement());
    return body;
  }

  Stmt statement() {
    SourceLoc loc = cur().loc;
    static const std::set<std::string> banned = {"while", "do", "goto", "switch", "break", "continue"};
    if (cur().kind == Tok::Ident && banned.count(cur().text)) unsupported(cur().text, loc);
    if (is("{")) {
      Stmt s;
      s.kind = StmtKind::Block;
      s.loc = loc;
      s.body = block();
      return s;
    }
    if (accept("if")) {
      Stmt s;
      s.kind = StmtKind::If;
      s.loc = loc;
      expect("(");
      s.cond = expr();
      expect(")");
      s.body = statement_as_body();
      if (accept("else")) s.else_body = statement_as_body();
      return s;
    }
    if (accept("for")) return for_stmt(loc);
    if (accept("return")) {
      Stmt s;
      s.kind = StmtKind::Return;
      s.loc = loc;
      if (!is(";")) s.rhs = expr();
      expect(";");
      return s;
    }
    if (starts_type()) {
      Stmt s = declaration();
      expect(";");
      return s;
    }
    Stmt s = simple_statement();
    expect(";");
    return s;
  }

  Stmt declaration() {
    Stmt s;
    s.kind = StmtKind::Decl;
    s.loc = cur().loc;
    s.is_const = accept("const");
    s.type = scalar_type();
    if (is("*")) unsupported("local pointer", cur().loc);
    s.name = expect_ident().text;
    s.extents = extents();
    if (accept("=")) {
      if (!s.extents.empty()) {
        s.init_list = init_list();
        check_init_size(s.extents, s.init_list, s.loc);
      } else {
        s.init = expr();
      }
    } else if (!s.extents.empty()) {
      unsupported("local array without initializer", s.loc);
    }
    if (!s.extents.empty() && !s.is_const) unsupported("non-constant local array", s.loc);
    return s;
  }

  LValue lvalue() {
    LValue lv;
    if (accept("*")) {
      lv.kind = LValueKind::Deref;
      if (is("(")) unsupported("pointer arithmetic", cur().loc);
    }
    lv.name = expect_ident().text;
    if (lv.kind == LValueKind::Var && is("[")) {
      lv.kind = LValueKind::Index;
      while (accept("[")) {
        lv.subscripts.push_back(expr());
        expect("]");
      }
    }
    return lv;
  }

  // assignment, compound assignment, ++/--, or a call used as a statement
  Stmt simple_statement() {
    SourceLoc loc = cur().loc;
    Stmt s;
    s.loc = loc;
    if (is("++") || is("--")) {
      bool inc = is("++");
      ++pos_;
      s.kind = StmtKind::Assign;
      s.lhs = lvalue();
      s.rhs = Expr::binary(inc ? Op::Add : Op::Sub, lvalue_expr(s.lhs, loc), Expr::lit(1, loc), loc);
      return s;
    }
    bool call_like = cur().kind == Tok::Ident && is_at(1, "(");
    if (call_like) {
      s.kind = StmtKind::ExprStmt;
      s.rhs = expr();
      return s;
    }
    s.kind = StmtKind::Assign;
    s.lhs = lvalue();
    static const std::map<std::string, Op> compound = {
        {"+=", Op::Add}, {"-=", Op::Sub}, {"*=", Op::Mul}, {"/=", Op::Div}, {"%=", Op::Mod},
        {"<<=", Op::Shl}, {">>=", Op::Shr}, {"&=", Op::And}, {"|=", Op::Or}, {"^=", Op::Xor}};
    if (is("++") || is("--")) {
      bool inc = is("++");
      ++pos_;
      s.rhs = Expr::binary(inc ? Op::Add : Op::Sub, lvalue_expr(s.lhs, loc), Expr::lit(1, loc), loc);
      return s;
    }
    if (cur().kind == Tok::Punct) {
      auto it = compound.find(cur().text);
      if (it != compound.end()) {
        ++pos_;
        s.rhs = Expr::binary(it->second, lvalue_expr(s.lhs, loc), expr(), loc);
        return s;
      }
    }
    expect("=");
    s.rhs = expr();
    return s;
  }

  static Expr lvalue_expr(const LValue &lv, SourceLoc loc) {
    if (lv.kind == LValueKind::Deref)
      unsupported("reading through output pointer '" + lv.name + "'", loc);
    if (lv.kind == LValueKind::Var) return Expr::var(lv.name, loc);
    Expr e;
    e.kind = ExprKind::Index;
    e.name = lv.name;
    e.args = lv.subscripts;
    e.loc = loc;
    return e;
  }

  Stmt for_stmt(SourceLoc loc) {
    Stmt s;
    s.kind = StmtKind::For;
    s.loc = loc;
    expect("(");
    if (starts_type()) {
      ScalarType t = scalar_type();
      (void)t;
      s.declares_index = true;
    }
    s.name = expect_ident().text;
    expect("=");
    s.lower = expr();
    expect(";");
    Token idx = expect_ident();
    if (idx.text != s.name) unsupported("for-loop condition must test the loop index", idx.loc);
    if (accept("<")) {
      s.inclusive = false;
    } else if (accept("<=")) {
      s.inclusive = true;
    } else {
      unsupported("for-loop condition must use < or <=", cur().loc);
    }
    s.bound = expr();
    expect(";");
    SourceLoc step_loc = cur().loc;
    if (accept("++")) {
      if (expect_ident().text != s.name) unsupported("for-loop step must update the loop index", step_loc);
      s.step = 1;
    } else {
      if (expect_ident().text != s.name) unsupported("for-loop step must update the loop index", step_loc);
      if (accept("++")) {
        s.step = 1;
      } else if (accept("+=")) {
        s.step = const_expr();
      } else if (accept("=")) {
        if (expect_ident().text != s.name) unsupported("for-loop step must be i = i + c", step_loc);
        expect("+");
        s.step = const_expr();
      } else {
        unsupported("for-loop step must be i = i + c", step_loc);
      }
    }
    if (s.step < 1) unsupported("for-loop step must be a positive constant", step_loc);
    expect(")");
    s.body = statement_as_body();
    return s;
  }

  // Expressions: precedence climbing over the binary operators of the dialect.
  Expr expr() { return binary(1); }

  static int binary_prec(const std::string &t, Op &op) {
    static const std::map<std::string, std::pair<int, Op>> table = {
        {"|", {1, Op::Or}},   {"^", {2, Op::Xor}},  {"&", {3, Op::And}},  {"==", {4, Op::Eq}},
        {"!=", {4, Op::Ne}},  {"<", {5, Op::Lt}},   {"<=", {5, Op::Le}},  {">", {5, Op::Gt}},
        {">=", {5, Op::Ge}},  {"<<", {6, Op::Shl}}, {">>", {6, Op::Shr}}, {"+", {7, Op::Add}},
        {"-", {7, Op::Sub}},  {"*", {8, Op::Mul}},  {"/", {8, Op::Div}},  {"%", {8, Op::Mod}}};
    auto it = table.find(t);
    if (it == table.end()) return -1;
    op = it->second.second;
    return it->second.first;
  }

  Expr binary(int min_prec) {
    Expr lhs = unary();
    while (true) {
      if (cur().kind != Tok::Punct) break;
      if (is("&&") || is("||")) unsupported("logical operator " + cur().text, cur().loc);
      if (is("?")) unsupported("conditional operator", cur().loc);
      Op op = Op::Add;
      int p = binary_prec(cur().text, op);
      if (p < min_prec) break;
      SourceLoc loc = cur().loc;
      ++pos_;
      Expr rhs = binary(p + 1);
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs), loc);
    }
    return lhs;
  }

  Expr unary() {
    SourceLoc loc = cur().loc;
    if (accept("-")) {
      if (cur().kind == Tok::Int) {
        int64_t v = toks_[pos_++].value;
        return Expr::lit(-v, loc);
      }
      return Expr::unary(Op::Neg, unary(), loc);
    }
    if (accept("+")) return unary();
    if (accept("!")) return Expr::unary(Op::LogicalNot, unary(), loc);
    if (accept("~")) return Expr::unary(Op::BitNot, unary(), loc);
    if (is("&")) unsupported("address-of", loc);
    if (is("*")) unsupported("pointer dereference in expression", loc);
    if (is("++") || is("--")) unsupported("increment inside expression", loc);
    return postfix();
  }

  Expr postfix() {
    SourceLoc loc = cur().loc;
    if (accept("(")) {
      if (starts_type()) unsupported("cast", loc);
      Expr e = expr();
      expect(")");
      return e;
    }
    if (cur().kind == Tok::Int) return Expr::lit(toks_[pos_++].value, loc);
    if (cur().kind == Tok::String) syntax("string literal outside lut()", loc);
    Token name = expect_ident();
    if (accept("(")) return call(name);
    if (is("[")) {
      Expr e;
      e.kind = ExprKind::Index;
      e.name = name.text;
      e.loc = loc;
      while (accept("[")) {
        e.args.push_back(expr());
        expect("]");
      }
      return e;
    }
    if (is("->") || is(".")) unsupported("member access", cur().loc);
    if (is("++") || is("--")) unsupported("increment inside expression", cur().loc);
    return Expr::var(name.text, loc);
  }

  Expr call(const Token &name) {
    Expr e;
    e.loc = name.loc;
    if (name.text == "lut") {
      e.kind = ExprKind::Lut;
      if (cur().kind != Tok::String) syntax("lut() expects a table name string", cur().loc);
      e.name = toks_[pos_++].text;
      expect(",");
      e.args.push_back(expr());
      expect(")");
      return e;
    }
    if (name.text == "ROCCC_load_prev") {
      e.kind = ExprKind::LoadPrev;
      e.name = expect_ident().text;
      expect(")");
      return e;
    }
    if (name.text == "ROCCC_store2next") {
      e.kind = ExprKind::StoreNext;
      e.name = expect_ident().text;
      expect(",");
      e.args.push_back(expr());
      expect(")");
      return e;
    }
    e.kind = ExprKind::Call;
    e.name = name.text;
    if (!is(")")) {
      do {
        e.args.push_back(expr());
      } while (accept(","));
    }
    expect(")");
    return e;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

void collect_calls(const std::vector<Stmt> &body, std::vector<std::pair<std::string, SourceLoc>> &out) {
  auto on_expr = [&](const Expr &root) {
    visit_exprs(root, [&](const Expr &e) {
      if (e.kind == ExprKind::Call) out.emplace_back(e.name, e.loc);
    });
  };
  visit_stmts(body, [&](const Stmt &s) {
    for (const auto *o : {&s.init, &s.rhs, &s.cond, &s.lower, &s.bound})
      if (*o) on_expr(**o);
    for (const Expr &sub : s.lhs.subscripts) on_expr(sub);
  });
}

}  // namespace

/// Name of a function on a call-graph cycle, if any.
std::optional<std::pair<std::string, SourceLoc>> find_recursion(const KernelAst &ast) {
  std::map<std::string, std::vector<std::pair<std::string, SourceLoc>>> graph;
  for (const Function &f : ast.functions) collect_calls(f.body, graph[f.name]);
  std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::optional<std::pair<std::string, SourceLoc>> found;
  auto dfs = [&](auto &&self, const std::string &fn) -> void {
    state[fn] = 1;
    for (const auto &[callee, loc] : graph[fn]) {
      if (found) return;
      if (!graph.count(callee)) continue;
      if (state[callee] == 1) {
        found = {callee, loc};
        return;
      }
      if (state[callee] == 0) self(self, callee);
    }
    state[fn] = 2;
  };
  for (const Function &f : ast.functions)
    if (state[f.name] == 0 && !found) dfs(dfs, f.name);
  return found;
}

KernelAst parse(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  KernelAst ast = parser.unit();
  if (auto rec = find_recursion(ast)) fail(ErrorKind::UnsupportedConstruct, "recursion", rec->second);
  return ast;
}

}  // namespace minihls
