#include "minihls/lut.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace minihls {

LutSpec builtin_cos() {
  LutSpec spec;
  spec.name = "cos";
  spec.address_width = 10;
  spec.data = {true, 16};
  spec.source = LutSpec::Source::Builtin;
  spec.contents.resize(1024);
  for (int k = 0; k < 1024; ++k)
    spec.contents[k] = std::llround(32767.0 * std::cos(2.0 * std::numbers::pi * k / 1024.0));
  return spec;
}

std::vector<int64_t> parse_init_text(const std::string &text, int64_t entries, ScalarType data) {
  std::vector<int64_t> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    std::string tok = line.substr(b, e - b + 1);
    int64_t v = 0;
    try {
      size_t used = 0;
      bool neg = tok[0] == '-';
      std::string body = neg ? tok.substr(1) : tok;
      if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X'))
        v = static_cast<int64_t>(std::stoull(body.substr(2), &used, 16)), used += 2;
      else
        v = static_cast<int64_t>(std::stoull(body, &used, 10));
      if (used != body.size()) throw std::invalid_argument(tok);
      if (neg) v = -v;
    } catch (const std::exception &) {
      fail(ErrorKind::InitFile, "line " + std::to_string(line_no) + ": cannot parse '" + tok + "'", {line_no, 1});
    }
    if (!fits(v, data.width, data.is_signed))
      fail(ErrorKind::InitFile,
           "line " + std::to_string(line_no) + ": value " + std::to_string(v) + " exceeds " +
               std::to_string(data.width) + " bits",
           {line_no, 1});
    values.push_back(v);
  }
  if (static_cast<int64_t>(values.size()) != entries)
    fail(ErrorKind::InitFile, "expected " + std::to_string(entries) + " entries, found " + std::to_string(values.size()));
  return values;
}

LutSpec load_init_file(const std::string &name, const std::string &path, int64_t entries, ScalarType data) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InitFile, "cannot open init file '" + path + "' for lookup table '" + name + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  LutSpec spec;
  spec.name = name;
  spec.address_width = clog2(static_cast<uint64_t>(entries));
  spec.data = data;
  spec.source = LutSpec::Source::InitFile;
  spec.path = path;
  spec.contents = parse_init_text(buf.str(), entries, data);
  return spec;
}

std::vector<std::string> referenced_luts(const KernelAst &ast) {
  std::set<std::string> names;
  for (const Function &f : ast.functions) {
    visit_stmts(f.body, [&](const Stmt &s) {
      for (const auto *o : {&s.init, &s.rhs, &s.cond})
        if (*o)
          visit_exprs(**o, [&](const Expr &e) {
            if (e.kind == ExprKind::Lut) names.insert(e.name);
          });
    });
  }
  return {names.begin(), names.end()};
}

LutTable resolve_luts(const KernelAst &ast, const std::map<std::string, std::string> &bindings) {
  LutTable table;
  for (const std::string &name : referenced_luts(ast)) {
    const LutDecl *decl = ast.find_lut(name);
    auto bound = bindings.find(name);
    if (!decl && name == "cos" && bound == bindings.end()) {
      table[name] = builtin_cos();
      continue;
    }
    if (!decl) fail(ErrorKind::Config, "undeclared lookup table '" + name + "'");
    if (bound == bindings.end()) fail(ErrorKind::Config, "unbound lookup table '" + name + "'");
    table[name] = load_init_file(name, bound->second, decl->entries, decl->type);
  }
  return table;
}

}  // namespace minihls
