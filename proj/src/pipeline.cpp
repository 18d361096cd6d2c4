#include "minihls/pipeline.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#include "minihls/frontend.hpp"
#include "minihls/lut.hpp"
#include "minihls/netlist.hpp"

namespace minihls {

namespace {

class Runner {
public:
  explicit Runner(Compilation &c) : c_(c) {}

  template <typename F>
  auto run(const std::string &pass, F &&f) -> decltype(f()) {
    try {
      c_.log.push_back("pass " + pass);
      return f();
    } catch (const Error &e) {
      if (e.findings().size() > 1) {
        std::vector<Finding> fs = e.findings();
        for (Finding &x : fs) x.message = pass + ": " + x.message;
        throw Error(e.kind(), fs);
      }
      throw Error(e.kind(), pass + ": " + e.what(), e.loc());
    }
  }

  void dump(const std::string &pass, std::string text) { c_.dumps.push_back({pass, std::move(text)}); }

private:
  Compilation &c_;
};

}  // namespace

Compilation compile(const std::string &source, const CompileOptions &opts) {
  Compilation c;
  Runner r(c);
  {
    std::ostringstream os;
    os << "config bus_width=" << opts.design.bus_width << " max_export_width=" << opts.design.max_export_width
       << " unroll_limit=" << opts.unroll.limit;
    c.log.push_back(os.str());
    for (const auto &[loop, d] : opts.unroll.directives)
      c.log.push_back("config unroll " + loop + "=" + (d.factor == 0 ? std::string("full") : std::to_string(d.factor)));
    for (const auto &[loop, n] : opts.trip_overrides) c.log.push_back("config trip " + loop + "=" + std::to_string(n));
    for (const auto &[name, path] : opts.lut_bindings) c.log.push_back("config lut " + name + "=" + path);
  }

  KernelAst ast = r.run("parse", [&] { return parse(source); });
  r.dump("parse", print(ast));
  ast = r.run("check", [&] { return check_restrictions(std::move(ast)); });
  ast = r.run("inline", [&] { return inline_calls(std::move(ast)); });
  r.dump("inline", print(ast));
  for (const auto &[loop, n] : opts.trip_overrides)
    ast = r.run("trip", [&] { return set_trip_count(std::move(ast), loop, n); });
  c.source = ast;
  c.luts = r.run("lut", [&] { return resolve_luts(ast, opts.lut_bindings); });
  ast = r.run("fold", [&] { return fold_constants(std::move(ast)); });
  r.dump("fold", print(ast));
  ast = r.run("unroll", [&] { return fold_constants(apply_unroll_policy(std::move(ast), opts.unroll)); });
  r.dump("unroll", print(ast));
  c.transformed = ast;
  c.scalarized = r.run("scalar_replace", [&] { return scalar_replace(c.transformed); });
  r.dump("scalar_replace", dump(c.scalarized));
  r.run("detect_window", [&] {
    std::string text;
    for (const ArrayDecl &a : c.scalarized.arrays) {
      bool used = false;
      for (const ScalarLoad &l : c.scalarized.loads) used = used || l.array == a.name;
      for (const ScalarStore &s : c.scalarized.stores) used = used || s.array == a.name;
      if (used) text += describe(detect_window(c.scalarized, a.name, opts.design.bus_width)) + "\n";
    }
    r.dump("detect_window", text);
  });
  c.graph = r.run("lower", [&] { return lower(c.scalarized); });
  c.log.push_back("pass predicate (fused into lower)");
  r.run("infer_widths", [&] { infer_widths(c.graph); });
  r.run("schedule", [&] { schedule(c.graph); });
  r.run("bind_luts", [&] { bind_luts(c.graph, c.luts); });
  r.dump("schedule", dump(c.graph));
  c.design = r.run("generate", [&] { return build_design(c.scalarized, c.graph, opts.design, c.luts); });
  r.run("netlist_check", [&] {
    auto report = check(c.design.netlist);
    if (report.empty()) return;
    std::vector<Finding> fs;
    for (const std::string &line : report) fs.push_back({{}, line});
    throw Error(ErrorKind::Internal, fs);
  });
  r.dump("netlist", dump(c.design.netlist));
  std::ostringstream os;
  os << "result depth=" << c.graph.depth << " trip=" << c.design.trip << " interval=" << c.design.interval
     << " registers=" << census(c.design.netlist).total();
  c.log.push_back(os.str());
  return c;
}

std::string pass_trace(const Compilation &c) {
  std::string out;
  for (const PassDump &d : c.dumps) {
    out += "=== " + d.pass + "\n" + d.text;
    if (!d.text.empty() && d.text.back() != '\n') out += "\n";
  }
  return out;
}

uint64_t vector_seed() {
  const char *env = std::getenv("MINIHLS_SEED");
  if (!env || !*env) return 1;
  try {
    size_t used = 0;
    uint64_t v = std::stoull(env, &used);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception &) {
  }
  fail(ErrorKind::Config, std::string("MINIHLS_SEED is not a number: ") + env);
}

KernelIO random_vectors(const KernelAst &ast, uint64_t seed) {
  std::mt19937_64 rng(seed);
  KernelIO io;
  for (const ArrayDecl &a : ast.arrays) {
    if (a.direction != Direction::In) continue;
    std::uniform_int_distribution<int64_t> d(min_value(a.element.width, a.element.is_signed),
                                             max_value(a.element.width, a.element.is_signed));
    auto &mem = io.memories[a.name];
    for (int64_t i = 0; i < a.size(); ++i) mem.push_back(d(rng));
  }
  for (const Param &p : ast.kernel().params) {
    if (p.kind != ParamKind::Scalar) continue;
    std::uniform_int_distribution<int64_t> d(min_value(p.type.width, p.type.is_signed),
                                             max_value(p.type.width, p.type.is_signed));
    io.scalars[p.name] = d(rng);
  }
  return io;
}

std::pair<std::string, UnrollDirective> parse_unroll(const std::string &text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorKind::Config, "unroll directive must be loop=factor|full: " + text);
  std::string loop = text.substr(0, eq), value = text.substr(eq + 1);
  UnrollDirective d;
  if (value == "full") return {loop, d};
  try {
    size_t used = 0;
    d.factor = std::stoll(value, &used);
    if (used != value.size() || d.factor < 1) throw std::invalid_argument(value);
  } catch (const std::exception &) {
    fail(ErrorKind::Config, "bad unroll factor '" + value + "' for loop " + loop);
  }
  return {loop, d};
}

}  // namespace minihls
