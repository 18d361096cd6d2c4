#include "minihls/vhdl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "minihls/common.hpp"

namespace minihls {

namespace {

const std::set<std::string> &reserved() {
  static const std::set<std::string> words = {
      "abs", "access", "after", "alias", "all", "and", "architecture", "array", "assert", "attribute", "begin",
      "block", "body", "buffer", "bus", "case", "component", "configuration", "constant", "disconnect", "downto",
      "else", "elsif", "end", "entity", "exit", "file", "for", "function", "generate", "generic", "group",
      "guarded", "if", "impure", "in", "inertial", "inout", "is", "label", "library", "linkage", "literal", "loop",
      "map", "mod", "nand", "new", "next", "nor", "not", "null", "of", "on", "open", "or", "others", "out",
      "package", "port", "postponed", "procedure", "process", "pure", "range", "record", "register", "reject",
      "rem", "report", "return", "rol", "ror", "select", "severity", "signal", "shared", "sla", "sll", "sra",
      "srl", "subtype", "then", "to", "transport", "type", "unaffected", "units", "until", "use", "variable",
      "wait", "when", "while", "with", "xnor", "xor"};
  return words;
}

// Library names the generated text relies on; also off limits for signals.
const std::set<std::string> &predefined() {
  static const std::set<std::string> names = {
      "ieee", "std_logic_1164", "numeric_std", "std_logic", "unsigned", "signed", "resize", "to_integer",
      "rising_edge", "shift_left", "shift_right", "work", "boolean", "true", "false", "integer", "natural",
      "ns", "error", "note", "failure", "now", "time"};
  return names;
}

std::string lower(std::string s) {
  for (char &c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string type_of(NetShape s) {
  return std::string(s.is_signed ? "signed" : "unsigned") + "(" + std::to_string(s.width - 1) + " downto 0)";
}

std::string bits(int64_t v, int width) {
  std::string out = "\"";
  for (int k = width - 1; k >= 0; --k) out += (k >= 64 ? (v < 0) : ((static_cast<uint64_t>(v) >> k) & 1)) ? '1' : '0';
  return out + "\"";
}

// `x` of shape `from` as a value of shape `to`: truncation keeps the low
// bits, extension follows the source signedness.
std::string convert(const std::string &x, NetShape from, NetShape to) {
  if (from == to) return x;
  std::string inner;
  if (to.width <= from.width)
    inner = to.width == from.width ? x : x + "(" + std::to_string(to.width - 1) + " downto 0)";
  else
    inner = "resize(" + x + ", " + std::to_string(to.width) + ")";
  if (from.is_signed == to.is_signed) return inner;
  return std::string(to.is_signed ? "signed" : "unsigned") + "(" + inner + ")";
}

class Emitter {
public:
  Emitter(const Netlist &n, const EmitConfig &cfg) : n_(n), cfg_(cfg), table_(signal_table(n)) {
    entity_ = claim(cfg.entity.empty() ? n.name : cfg.entity, "entity");
    clk_ = claim(cfg.clock, "clock");
    rst_ = claim(cfg.reset, "reset");
    for (const auto &[name, info] : table_) id_[name] = claim(name, name);
    // VHDL-93 cannot read an out port, so a port that is also read is
    // driven through an internal copy.
    std::set<std::string> read;
    for (const NetNode &x : n.nodes) read.insert(x.in.begin(), x.in.end());
    for (const NetReg &r : n.regs) read.insert({r.d, r.enable});
    for (const NetFsm &f : n.fsms)
      for (const FsmTransition &t : f.transitions) read.insert(t.cond);
    for (const NetMem &m : n.mems) read.insert({m.addr, m.enable, m.data});
    for (const NetPort &p : n.ports)
      if (p.dir == PortDir::Out && read.count(p.name)) {
        port_id_[p.name] = id_[p.name];
        id_[p.name] = claim(p.name + "_int", p.name + "_int");
      }
    for (const NetFsm &f : n.fsms) {
      next_[f.name] = claim(f.state + "_next", f.state + "_next");
      for (const std::string &s : f.states) state_const_[f.name + "." + s] = claim(f.name + "_" + s, f.name + "." + s);
    }
    for (const LutSpec &l : n.luts) {
      lut_type_[l.name] = claim("table_" + l.name + "_t", "table type " + l.name);
      lut_id_[l.name] = claim((cfg.lut_style == LutStyle::RomComponent ? "rom_" : "table_") + l.name, "table " + l.name);
    }
    for (const NetNode &x : n.nodes)
      if (x.op == NetOp::Lut && lut_data_shape(x) != x.shape) rom_out_[x.out] = claim(x.out + "_rom", x.out + "_rom");
  }

  std::string run() {
    std::ostringstream os;
    os << "-- " << n_.name << ": generated by minihls\n";
    os << "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n\n";
    os << "entity " << entity_ << " is\n  port (\n";
    os << "    " << clk_ << " : in std_logic;\n";
    os << "    " << rst_ << " : in std_logic";
    for (const NetPort &p : n_.ports)
      os << ";\n    " << port_name(p.name) << " : " << (p.dir == PortDir::In ? "in " : "out ") << type_of(p.shape);
    os << "\n  );\nend entity " << entity_ << ";\n\n";
    os << "architecture rtl of " << entity_ << " is\n";
    declarations(os);
    os << "begin\n";
    for (const NetNode &x : n_.nodes) node(os, x);
    for (const NetFsm &f : n_.fsms) fsm(os, f);
    for (const auto &[name, port] : port_id_) os << "  " << port << " <= " << id(name) << ";\n";
    clocked(os);
    os << "end architecture rtl;\n";
    return os.str();
  }

private:
  std::string claim(const std::string &raw, const std::string &what) {
    std::string v = vhdl_identifier(raw);
    std::string key = lower(v);
    auto [it, fresh] = taken_.emplace(key, what);
    if (!fresh || predefined().count(key))
      fail(ErrorKind::Emit, "identifier collision: " + what + " and " + (fresh ? "a library name" : it->second) +
                                " both map to " + v);
    return v;
  }

  const std::string &id(const std::string &signal) const { return id_.at(signal); }
  const std::string &port_name(const std::string &signal) const {
    auto it = port_id_.find(signal);
    return it == port_id_.end() ? id(signal) : it->second;
  }
  NetShape shape(const std::string &signal) const { return table_.at(signal).shape; }
  bool is_port(const std::string &signal) const {
    for (const NetPort &p : n_.ports)
      if (p.name == signal) return true;
    return false;
  }
  std::string as(const std::string &signal, NetShape to) const { return convert(id(signal), shape(signal), to); }

  NetShape lut_data_shape(const NetNode &x) const {
    const LutSpec *l = n_.find_lut(x.lut);
    if (!l) fail(ErrorKind::Emit, "unbound lookup table '" + x.lut + "'");
    return {l->data.width, l->data.is_signed};
  }

  void declarations(std::ostream &os) {
    for (const LutSpec &l : n_.luts) {
      NetShape s{l.data.width, l.data.is_signed};
      if (cfg_.lut_style == LutStyle::RomComponent) {
        os << "  -- Read-only memory filled from " << (l.path.empty() ? "the builtin table" : l.path) << "\n";
        os << "  component " << lut_id_[l.name] << "\n    port (\n      addr : in unsigned(" << l.address_width - 1
           << " downto 0);\n      data : out " << type_of(s) << "\n    );\n  end component;\n";
        continue;
      }
      os << "  type " << lut_type_[l.name] << " is array (0 to " << l.contents.size() - 1 << ") of " << type_of(s)
         << ";\n";
      os << "  constant " << lut_id_[l.name] << " : " << lut_type_[l.name] << " := (";
      for (size_t k = 0; k < l.contents.size(); ++k) {
        os << (k % 8 == 0 ? "\n    " : " ") << bits(l.contents[k], s.width);
        if (k + 1 < l.contents.size()) os << ",";
      }
      os << "\n  );\n";
    }
    for (const NetFsm &f : n_.fsms) {
      NetShape s{f.state_width(), false};
      for (size_t k = 0; k < f.states.size(); ++k)
        os << "  constant " << state_const_[f.name + "." + f.states[k]] << " : " << type_of(s)
           << " := " << bits(static_cast<int64_t>(k), s.width) << ";\n";
      os << "  signal " << next_[f.name] << " : " << type_of(s) << ";\n";
    }
    for (const auto &[name, info] : table_)
      if (info.driver != DriverKind::InPort && (!is_port(name) || port_id_.count(name))) os << "  signal " << id(name) << " : " << type_of(info.shape) << ";\n";
    for (const auto &[out, rom] : rom_out_) {
      for (const NetNode &x : n_.nodes)
        if (x.out == out) os << "  signal " << rom << " : " << type_of(lut_data_shape(x)) << ";\n";
    }
  }

  void node(std::ostream &os, const NetNode &x) {
    const std::string out = id(x.out);
    const NetShape s = x.shape;
    auto arg = [&](size_t k) { return as(x.in[k], s); };
    auto binary = [&](const char *op) { return arg(0) + " " + op + " " + arg(1); };
    std::string rhs;
    std::string note;
    switch (x.op) {
      case NetOp::Const: rhs = bits(x.value, s.width); break;
      case NetOp::Add: rhs = binary("+"); break;
      case NetOp::Sub: rhs = binary("-"); break;
      case NetOp::Mul: {
        rhs = "resize(" + binary("*") + ", " + std::to_string(s.width) + ")";
        bool constant = false;
        for (const std::string &in : x.in)
          constant = constant || (table_.at(in).driver == DriverKind::Node &&
                                  n_.nodes[static_cast<size_t>(table_.at(in).index)].op == NetOp::Const);
        if (constant) note = "  -- constant factor: a LUT multiplier style is left to synthesis";
        break;
      }
      case NetOp::And: rhs = binary("and"); break;
      case NetOp::Or: rhs = binary("or"); break;
      case NetOp::Xor: rhs = binary("xor"); break;
      case NetOp::Not: rhs = "not " + arg(0); break;
      case NetOp::Shl: rhs = "shift_left(" + arg(0) + ", " + std::to_string(x.value) + ")"; break;
      case NetOp::Shr: rhs = "shift_right(" + arg(0) + ", " + std::to_string(x.value) + ")"; break;
      case NetOp::Eq:
      case NetOp::Ne:
      case NetOp::Lt:
      case NetOp::Le:
      case NetOp::Gt:
      case NetOp::Ge: {
        NetShape a = shape(x.in[0]), b = shape(x.in[1]);
        bool sgn = a.is_signed || b.is_signed;
        int w = std::max(a.width + (sgn && !a.is_signed), b.width + (sgn && !b.is_signed));
        NetShape c{w, sgn};
        static const std::map<NetOp, const char *> rel = {{NetOp::Eq, "="},  {NetOp::Ne, "/="}, {NetOp::Lt, "<"},
                                                          {NetOp::Le, "<="}, {NetOp::Gt, ">"},  {NetOp::Ge, ">="}};
        rhs = convert(bits(1, s.width), {s.width, false}, s) + " when " + as(x.in[0], c) + " " + rel.at(x.op) + " " +
              as(x.in[1], c) + " else " + convert(bits(0, s.width), {s.width, false}, s);
        break;
      }
      case NetOp::Mux:
        rhs = as(x.in[1], s) + " when " + id(x.in[0]) + "(0) = '1' else " + as(x.in[2], s);
        break;
      case NetOp::Lut: {
        NetShape data = lut_data_shape(x);
        std::string target = rom_out_.count(x.out) ? rom_out_.at(x.out) : out;
        if (cfg_.lut_style == LutStyle::RomComponent)
          os << "  u_" << target << " : " << lut_id_.at(x.lut) << " port map (addr => " << id(x.in[0])
             << ", data => " << target << ");\n";
        else
          os << "  " << target << " <= " << lut_id_.at(x.lut) << "(to_integer(" << id(x.in[0]) << "));\n";
        if (target != out) os << "  " << out << " <= " << convert(target, data, s) << ";\n";
        return;
      }
      case NetOp::Resize: rhs = arg(0); break;
      case NetOp::Slice: {
        NetShape src = shape(x.in[0]);
        std::string range = id(x.in[0]) + "(" + std::to_string(x.value + s.width - 1) + " downto " +
                            std::to_string(x.value) + ")";
        rhs = src.is_signed == s.is_signed ? range : std::string(s.is_signed ? "signed" : "unsigned") + "(" + range + ")";
        break;
      }
      case NetOp::Concat: {
        std::string cat;
        for (size_t k = 0; k < x.in.size(); ++k) {
          NetShape p = shape(x.in[k]);
          if (k) cat += " & ";
          cat += p.is_signed ? "unsigned(" + id(x.in[k]) + ")" : id(x.in[k]);
        }
        rhs = s.is_signed ? "signed(" + cat + ")" : (x.in.size() == 1 ? cat : "unsigned'(" + cat + ")");
        break;
      }
    }
    os << "  " << out << " <= " << rhs << ";" << note << "\n";
  }

  void fsm(std::ostream &os, const NetFsm &f) {
    std::set<std::string> sensitivity{id(f.state)};
    for (const FsmTransition &t : f.transitions) sensitivity.insert(id(t.cond));
    os << "\n  " << vhdl_identifier(f.name) << "_fsm : process (";
    bool first = true;
    for (const std::string &s : sensitivity) {
      os << (first ? "" : ", ") << s;
      first = false;
    }
    os << ")\n  begin\n";
    os << "    " << next_[f.name] << " <= " << id(f.state) << ";\n";
    for (const auto &[sig, states] : f.outputs) os << "    " << id(sig) << " <= \"0\";\n";
    os << "    case " << id(f.state) << " is\n";
    for (const std::string &s : f.states) {
      os << "      when " << state_const_[f.name + "." + s] << " =>\n";
      for (const auto &[sig, states] : f.outputs)
        if (std::find(states.begin(), states.end(), s) != states.end()) os << "        " << id(sig) << " <= \"1\";\n";
      bool opened = false;
      for (const FsmTransition &t : f.transitions) {
        if (t.from != s) continue;
        os << "        " << (opened ? "elsif " : "if ") << id(t.cond) << " = \"1\" then\n";
        os << "          " << next_[f.name] << " <= " << state_const_[f.name + "." + t.to] << ";\n";
        opened = true;
      }
      if (opened) os << "        end if;\n";
    }
    os << "      when others =>\n        null;\n    end case;\n  end process;\n";
  }

  void clocked(std::ostream &os) {
    os << "\n  registers : process (" << clk_ << ")\n  begin\n";
    os << "    if rising_edge(" << clk_ << ") then\n";
    os << "      if " << rst_ << " = '1' then\n";
    for (const NetReg &r : n_.regs) os << "        " << id(r.name) << " <= " << bits(r.reset, r.shape.width) << ";\n";
    for (const NetFsm &f : n_.fsms)
      os << "        " << id(f.state) << " <= " << state_const_[f.name + "." + f.states.front()] << ";\n";
    os << "      else\n";
    for (const NetReg &r : n_.regs) {
      std::string assign = id(r.name) + " <= " + as(r.d, r.shape) + ";";
      if (r.enable.empty())
        os << "        " << assign << "\n";
      else
        os << "        if " << id(r.enable) << " = \"1\" then\n          " << assign << "\n        end if;\n";
    }
    for (const NetFsm &f : n_.fsms) os << "        " << id(f.state) << " <= " << next_[f.name] << ";\n";
    os << "      end if;\n    end if;\n  end process;\n";
  }

  const Netlist &n_;
  const EmitConfig &cfg_;
  std::map<std::string, SignalInfo> table_;
  std::map<std::string, std::string> taken_;  // lower-case identifier -> what claimed it
  std::map<std::string, std::string> id_, port_id_, next_, state_const_, lut_type_, lut_id_, rom_out_;
  std::string entity_, clk_, rst_;
};

}  // namespace

std::string vhdl_identifier(const std::string &name) {
  std::string out;
  for (char c : name) {
    bool ok = std::isalnum(static_cast<unsigned char>(c));
    if (ok)
      out += c;
    else if (!out.empty() && out.back() != '_')
      out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = "s_" + out;
  if (out.back() == '_') out.pop_back();
  if (reserved().count(lower(out))) out += "_s";
  return out;
}

std::string emit_vhdl(const Netlist &n, const EmitConfig &cfg) {
  if (!n.imports.empty()) fail(ErrorKind::Emit, "netlist " + n.name + " is not linked");
  return Emitter(n, cfg).run();
}

std::string emit_testbench(const Netlist &n, const KernelIO &inputs, const KernelIO &expected,
                           const EmitConfig &cfg) {
  const std::string entity = vhdl_identifier(cfg.entity.empty() ? n.name : cfg.entity);
  const std::string clk = vhdl_identifier(cfg.clock), rst = vhdl_identifier(cfg.reset);
  auto word_image = [](const NetMem &m, const std::vector<int64_t> &img, const char *what) {
    if (static_cast<int64_t>(img.size()) != m.elements)
      fail(ErrorKind::VectorShape, std::string(what) + " array '" + m.array + "' has " + std::to_string(img.size()) +
                                       " elements, expected " + std::to_string(m.elements));
    std::vector<uint64_t> words(static_cast<size_t>(m.depth), 0);
    for (size_t k = 0; k < img.size(); ++k) {
      if (!fits(img[k], m.element_width, m.element_signed))
        fail(ErrorKind::VectorShape, "value " + std::to_string(img[k]) + " of '" + m.array + "'[" + std::to_string(k) +
                                         "] does not fit " + ScalarType{m.element_signed, m.element_width}.to_string());
      uint64_t raw = static_cast<uint64_t>(img[k]) & low_mask(m.element_width);
      words[k / static_cast<size_t>(m.per_word())] |= raw << ((static_cast<int64_t>(k) % m.per_word()) * m.element_width);
    }
    return words;
  };
  auto image_text = [](const std::vector<uint64_t> &words, int width) {
    std::string s = "(";
    for (size_t k = 0; k < words.size(); ++k) {
      s += (k % 4 == 0 ? "\n    " : " ") + std::to_string(k) + " => " + bits(static_cast<int64_t>(words[k]), width);
      if (k + 1 < words.size()) s += ",";
    }
    return s + "\n  )";
  };

  std::ostringstream decl, body, checks;
  std::set<std::string> mem_data;
  for (const NetMem &m : n.mems) {
    mem_data.insert(m.data);
    const std::string mem = vhdl_identifier("mem_" + m.array);
    decl << "  type " << mem << "_t is array (0 to " << m.depth - 1 << ") of unsigned(" << m.word_width - 1
         << " downto 0);\n";
    if (m.kind == MemKind::Read) {
      auto it = inputs.memories.find(m.array);
      if (it == inputs.memories.end()) fail(ErrorKind::VectorShape, "vectors missing array '" + m.array + "'");
      decl << "  constant " << mem << " : " << mem << "_t := " << image_text(word_image(m, it->second, "input"), m.word_width)
           << ";\n";
      body << "      if " << vhdl_identifier(m.enable) << " = \"1\" then\n        " << vhdl_identifier(m.data) << " <= "
           << mem << "(to_integer(" << vhdl_identifier(m.addr) << "));\n      end if;\n";
    } else {
      auto it = expected.memories.find(m.array);
      if (it == expected.memories.end()) fail(ErrorKind::VectorShape, "expected outputs miss array '" + m.array + "'");
      decl << "  signal " << mem << " : " << mem << "_t := (others => (others => '0'));\n";
      decl << "  constant " << mem << "_expect : " << mem << "_t := "
           << image_text(word_image(m, it->second, "expected"), m.word_width) << ";\n";
      body << "      if " << vhdl_identifier(m.enable) << " = \"1\" then\n        " << mem << "(to_integer("
           << vhdl_identifier(m.addr) << ")) <= " << vhdl_identifier(m.data) << ";\n      end if;\n";
      checks << "    for k in 0 to " << m.depth - 1 << " loop\n      assert " << mem << "(k) = " << mem
             << "_expect(k)\n        report \"" << m.array << " word \" & integer'image(k) & \" differs\" severity error;\n"
             << "    end loop;\n";
    }
  }

  std::ostringstream os;
  os << "-- Self-checking bench for " << entity << ": generated by minihls\n";
  os << "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n\n";
  os << "entity " << entity << "_tb is\nend entity " << entity << "_tb;\n\n";
  os << "architecture sim of " << entity << "_tb is\n";
  os << "  signal " << clk << " : std_logic := '0';\n  signal " << rst << " : std_logic := '1';\n";
  os << "  signal finished : boolean := false;\n";
  std::ostringstream stim;
  for (const NetPort &p : n.ports) {
    std::string name = vhdl_identifier(p.name);
    os << "  signal " << name << " : " << type_of(p.shape);
    if (p.dir == PortDir::In && p.name != "start" && !mem_data.count(p.name)) {
      std::string param = p.name.rfind("in_", 0) == 0 ? p.name.substr(3) : p.name;
      auto it = inputs.scalars.find(param);
      if (it == inputs.scalars.end()) fail(ErrorKind::VectorShape, "vectors missing scalar '" + param + "'");
      if (!fits(it->second, p.shape.width, p.shape.is_signed))
        fail(ErrorKind::VectorShape, "scalar '" + param + "' value " + std::to_string(it->second) + " does not fit");
      os << " := " << bits(it->second, p.shape.width);
    } else if (p.dir == PortDir::In) {
      os << " := (others => '0')";
    }
    os << ";\n";
    if (p.dir == PortDir::Out && p.name.rfind("out_", 0) == 0) {
      auto it = expected.scalars.find(p.name.substr(4));
      if (it == expected.scalars.end())
        fail(ErrorKind::VectorShape, "expected outputs miss scalar '" + p.name.substr(4) + "'");
      checks << "    assert " << name << " = " << bits(it->second, p.shape.width) << "\n      report \"" << p.name.substr(4)
             << " differs\" severity error;\n";
    }
  }
  os << decl.str();
  os << "begin\n";
  os << "  dut : entity work." << entity << "\n    port map (\n      " << clk << " => " << clk << ",\n      " << rst
     << " => " << rst;
  for (const NetPort &p : n.ports) os << ",\n      " << vhdl_identifier(p.name) << " => " << vhdl_identifier(p.name);
  os << "\n    );\n\n";
  os << "  " << clk << " <= not " << clk << " after 5 ns when not finished else '0';\n\n";
  os << "  memories : process (" << clk << ")\n  begin\n    if rising_edge(" << clk << ") then\n" << body.str()
     << "    end if;\n  end process;\n\n";
  os << "  stimulus : process\n  begin\n";
  os << "    wait until rising_edge(" << clk << ");\n    wait until rising_edge(" << clk << ");\n";
  os << "    " << rst << " <= '0';\n    start <= \"1\";\n    wait until rising_edge(" << clk << ");\n";
  os << "    start <= \"0\";\n";
  os << "    while done /= \"1\" loop\n      wait until rising_edge(" << clk << ");\n    end loop;\n";
  os << "    wait until rising_edge(" << clk << ");\n";
  os << checks.str();
  os << "    report \"bench finished\" severity note;\n    finished <= true;\n    wait;\n  end process;\n";
  os << "end architecture sim;\n";
  return os.str();
}

std::vector<std::string> lint_vhdl(const std::string &text) {
  std::vector<std::string> problems;
  struct Token {
    std::string text;
    int line;
  };
  std::vector<Token> toks;
  int line = 1;
  for (size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '"') {
      size_t j = text.find('"', i + 1);
      if (j == std::string::npos) {
        problems.push_back("line " + std::to_string(line) + ": unterminated string");
        break;
      }
      toks.push_back({"\"\"", line});
      i = j + 1;
    } else if (c == '\'' && i + 2 < text.size() && text[i + 2] == '\'' &&
               !(i > 0 && (std::isalnum(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == ')'))) {
      toks.push_back({"''", line});
      i += 3;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      toks.push_back({lower(text.substr(i, j - i)), line});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
      toks.push_back({"0", line});
      i = j;
    } else if ((c == ':' || c == '<' || c == '=' || c == '/' || c == '>') && i + 1 < text.size() &&
               (text[i + 1] == '=' || text[i + 1] == '>')) {
      toks.push_back({text.substr(i, 2), line});
      i += 2;
    } else {
      toks.push_back({std::string(1, c), line});
      ++i;
    }
  }

  auto is_ident = [](const std::string &t) { return !t.empty() && std::isalpha(static_cast<unsigned char>(t[0])); };
  auto at = [&](size_t k) -> const std::string & {
    static const std::string none;
    return k < toks.size() ? toks[k].text : none;
  };

  int depth = 0;
  std::vector<std::pair<std::string, int>> blocks;
  int begins = 0, bodies = 0;
  std::set<std::string> declared;
  for (size_t k = 0; k < toks.size(); ++k) {
    const std::string &t = toks[k].text;
    const int ln = toks[k].line;
    if (t == "(") ++depth;
    if (t == ")" && --depth < 0) {
      problems.push_back("line " + std::to_string(ln) + ": unbalanced ')'");
      depth = 0;
    }
    if (t == "begin") ++begins;
    if (t == "end") {
      const std::string &what = at(k + 1);
      static const std::set<std::string> kinds = {"process", "case", "if", "loop", "entity", "architecture", "component"};
      if (kinds.count(what)) {
        if (blocks.empty() || blocks.back().first != what)
          problems.push_back("line " + std::to_string(ln) + ": 'end " + what + "' closes " +
                             (blocks.empty() ? std::string("nothing") : blocks.back().first));
        else
          blocks.pop_back();
        ++k;
      }
      continue;
    }
    bool opener = false;
    if (t == "process" || t == "case" || t == "if" || t == "loop" || t == "component") opener = true;
    if (t == "entity" && is_ident(at(k + 1)) && at(k + 2) == "is") opener = true;
    if (t == "architecture") opener = true;
    if (opener) {
      blocks.push_back({t, ln});
      if (t == "process" || t == "architecture") ++bodies;
    }

    if (!is_ident(t) || reserved().count(t) || predefined().count(t)) continue;
    if (k > 0 && (at(k - 1) == "." || at(k - 1) == "'")) continue;  // selected name or attribute
    if (at(k + 1) == ":" || at(k + 1) == "=>" || at(k + 1) == ",") {
      // Declarations and labels; formals in port maps.
      if (at(k + 1) == ":" || (at(k + 1) == "," && k > 0 && (at(k - 1) == "signal" || at(k - 1) == "(")))
        declared.insert(t);
      if (at(k + 1) != ",") continue;
    }
    if (k > 0 && (at(k - 1) == "entity" || at(k - 1) == "architecture" || at(k - 1) == "type" ||
                  at(k - 1) == "component")) {
      declared.insert(t);
      continue;
    }
    if (k > 0 && at(k - 1) == "of" && at(k - 2) != "array") continue;  // architecture rtl of <entity>
    if (k > 0 && at(k - 1) == "for" && at(k + 1) == "in") {
      declared.insert(t);
      continue;
    }
    if (!declared.count(t)) problems.push_back("line " + std::to_string(ln) + ": '" + t + "' used before declaration");
  }
  if (depth != 0) problems.push_back("unbalanced parentheses");
  for (const auto &[kind, ln] : blocks) problems.push_back("line " + std::to_string(ln) + ": unclosed " + kind);
  if (begins != bodies)
    problems.push_back(std::to_string(begins) + " begin keywords for " + std::to_string(bodies) + " bodies");
  return problems;
}

VhdlCounts count_vhdl(const std::string &text) {
  VhdlCounts c;
  std::istringstream in(text);
  std::string line;
  bool reset_branch = false;
  while (std::getline(in, line)) {
    std::string code = line.substr(0, line.find("--"));
    std::string t = lower(code);
    if (t.rfind("entity ", 0) == 0 && t.find(" is") != std::string::npos) ++c.entities;
    if (t.find("rising_edge(") != std::string::npos && t.find("if ") != std::string::npos) ++c.clocked_processes;
    if (t.find("= '1' then") != std::string::npos && t.find("if ") != std::string::npos &&
        t.find("(0)") == std::string::npos) {
      reset_branch = true;
      continue;
    }
    if (reset_branch && t.find("else") != std::string::npos && t.find("<=") == std::string::npos) reset_branch = false;
    if (reset_branch && t.find("<=") != std::string::npos) ++c.registers;
    if (t.find(" * ") != std::string::npos) ++c.multiplies;
    if (t.find(" + ") != std::string::npos) ++c.adders;
    if (t.find("when ") != std::string::npos && t.find("=>") != std::string::npos &&
        t.find("others") == std::string::npos)
      ++c.fsm_states;
  }
  return c;
}

}  // namespace minihls
