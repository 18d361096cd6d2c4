#include "minihls/simulator.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "minihls/common.hpp"

namespace minihls {

namespace {

using i128 = __int128;

int limbs_for(int width) { return (width + 63) / 64; }

bool fits128(i128 v, NetShape s) {
  if (s.is_signed) {
    i128 half = i128{1} << (s.width - 1);
    return v >= -half && v < half;
  }
  return v >= 0 && v < (i128{1} << s.width);
}

// Compiled form of a netlist: every signal gets a slot of 64-bit limbs.
class Machine {
public:
  Machine(const Netlist &n, const SimConfig &cfg) : n_(n), cfg_(cfg) {
    auto table = signal_table(n);
    for (const auto &[name, info] : table) {
      Slot s;
      s.shape = info.shape;
      s.offset = static_cast<int>(limbs_.size());
      index_[name] = static_cast<int>(slots_.size());
      slots_.push_back(s);
      limbs_.resize(limbs_.size() + static_cast<size_t>(limbs_for(info.shape.width)), 0);
    }
    for (int k : topo_order(n)) order_.push_back(k);
    for (const NetReg &r : n.regs) set_int(at(r.name), r.reset);
    fsm_state_.assign(n.fsms.size(), 0);
    load_memories();
  }

  SimResult run() {
    SimResult res;
    const int start = index_.count("start") ? at("start") : -1;
    const int done = at("done");
    for (int64_t t = 0;; ++t) {
      if (t >= cfg_.max_cycles)
        fail(ErrorKind::Timeout, "done not asserted within " + std::to_string(cfg_.max_cycles) + " cycles");
      if (start >= 0) set_int(start, t == 0 ? 1 : 0);
      settle(t, res.trace);
      SimCycle cyc;
      cyc.cycle = t;
      observe(cyc);
      if (cfg_.record_trace && (!cyc.mem.empty() || !cyc.probes.empty())) res.trace.cycles.push_back(std::move(cyc));
      if (get_int(done) != 0) {
        res.trace.total_cycles = t + 1;
        break;
      }
      tick();
    }
    collect(res);
    return res;
  }

private:
  struct Slot {
    NetShape shape;
    int offset = 0;
  };
  struct Memory {
    const NetMem *spec = nullptr;
    std::vector<uint64_t> words;
    std::vector<bool> written;
  };

  int at(const std::string &name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorKind::Internal, "simulator: unknown signal " + name);
    return it->second;
  }

  uint64_t *limb(int s) { return &limbs_[static_cast<size_t>(slots_[static_cast<size_t>(s)].offset)]; }
  const Slot &slot(int s) const { return slots_[static_cast<size_t>(s)]; }

  i128 get_int(int s) const {
    const Slot &sl = slot(s);
    uint64_t raw = limbs_[static_cast<size_t>(sl.offset)] & low_mask(std::min(sl.shape.width, 64));
    if (sl.shape.is_signed && sl.shape.width <= 64 && ((raw >> (sl.shape.width - 1)) & 1))
      return static_cast<i128>(raw) - (i128{1} << sl.shape.width);
    return static_cast<i128>(raw);
  }

  void set_int(int s, i128 v) {
    const Slot &sl = slot(s);
    uint64_t *l = limb(s);
    int n = limbs_for(sl.shape.width);
    uint64_t fill = v < 0 ? ~uint64_t{0} : 0;
    l[0] = static_cast<uint64_t>(v);
    for (int k = 1; k < n; ++k) l[k] = k == 1 ? static_cast<uint64_t>(v >> 64) : fill;
    mask_top(s);
  }

  void mask_top(int s) {
    const Slot &sl = slot(s);
    int n = limbs_for(sl.shape.width);
    int rem = sl.shape.width - 64 * (n - 1);
    limb(s)[n - 1] &= low_mask(rem);
  }

  bool bit(int s, int k) const {
    return (limbs_[static_cast<size_t>(slot(s).offset + k / 64)] >> (k % 64)) & 1;
  }
  void set_bit(int s, int k, bool b) {
    uint64_t &w = limb(s)[k / 64];
    uint64_t m = uint64_t{1} << (k % 64);
    w = b ? (w | m) : (w & ~m);
  }

  void load_memories() {
    for (const NetMem &m : n_.mems) {
      Memory mem;
      mem.spec = &m;
      mem.words.assign(static_cast<size_t>(m.depth), 0);
      mem.written.assign(static_cast<size_t>(m.elements), false);
      if (m.kind == MemKind::Read) {
        auto it = cfg_.inputs.memories.find(m.array);
        if (it == cfg_.inputs.memories.end()) fail(ErrorKind::VectorShape, "vectors missing array '" + m.array + "'");
        const auto &img = it->second;
        if (static_cast<int64_t>(img.size()) != m.elements)
          fail(ErrorKind::VectorShape, "array '" + m.array + "' has " + std::to_string(img.size()) +
                                           " elements, expected " + std::to_string(m.elements));
        for (size_t k = 0; k < img.size(); ++k) {
          if (!fits(img[k], m.element_width, m.element_signed))
            fail(ErrorKind::VectorShape, "value " + std::to_string(img[k]) + " of '" + m.array + "'[" +
                                             std::to_string(k) + "] does not fit " +
                                             ScalarType{m.element_signed, m.element_width}.to_string());
          uint64_t raw = static_cast<uint64_t>(img[k]) & low_mask(m.element_width);
          int64_t per = m.per_word();
          mem.words[k / static_cast<size_t>(per)] |= raw << ((static_cast<int64_t>(k) % per) * m.element_width);
        }
      }
      mems_.push_back(std::move(mem));
    }
    for (const NetPort &p : n_.ports) {
      if (p.dir != PortDir::In || p.name == "start") continue;
      bool mem_port = false;
      for (const NetMem &m : n_.mems) mem_port = mem_port || m.data == p.name;
      if (mem_port) continue;
      std::string param = p.name.rfind("in_", 0) == 0 ? p.name.substr(3) : p.name;
      auto it = cfg_.inputs.scalars.find(param);
      if (it == cfg_.inputs.scalars.end()) fail(ErrorKind::VectorShape, "vectors missing scalar '" + param + "'");
      if (!fits(it->second, p.shape.width, p.shape.is_signed))
        fail(ErrorKind::VectorShape, "scalar '" + param + "' value " + std::to_string(it->second) + " does not fit");
      set_int(at(p.name), it->second);
    }
  }

  void settle(int64_t t, SimTrace &trace) {
    for (size_t f = 0; f < n_.fsms.size(); ++f) {
      const NetFsm &m = n_.fsms[f];
      set_int(at(m.state), fsm_state_[f]);
      const std::string &cur = m.states[static_cast<size_t>(fsm_state_[f])];
      for (const auto &[sig, states] : m.outputs)
        set_int(at(sig), std::find(states.begin(), states.end(), cur) != states.end() ? 1 : 0);
    }
    for (int k : order_) eval(n_.nodes[static_cast<size_t>(k)], t, trace);
  }

  void eval(const NetNode &x, int64_t t, SimTrace &trace) {
    const int out = at(x.out);
    auto in = [&](size_t k) { return at(x.in[k]); };
    auto v = [&](size_t k) { return get_int(in(k)); };
    i128 r = 0;
    switch (x.op) {
      case NetOp::Const: set_int(out, x.value); return;
      case NetOp::Resize: {
        const Slot &src = slot(in(0));
        if (src.shape.width <= 64 && x.shape.width <= 64) {
          set_int(out, v(0));
          return;
        }
        bool sign = src.shape.is_signed && bit(in(0), src.shape.width - 1);
        for (int k = 0; k < x.shape.width; ++k) set_bit(out, k, k < src.shape.width ? bit(in(0), k) : sign);
        return;
      }
      case NetOp::Slice:
        for (int k = 0; k < x.shape.width; ++k) set_bit(out, k, bit(in(0), static_cast<int>(x.value) + k));
        return;
      case NetOp::Concat: {
        int pos = 0;
        for (size_t j = x.in.size(); j-- > 0;) {
          int w = slot(in(j)).shape.width;
          for (int k = 0; k < w; ++k) set_bit(out, pos + k, bit(in(j), k));
          pos += w;
        }
        return;
      }
      case NetOp::Lut: {
        const LutSpec *l = n_.find_lut(x.lut);
        i128 a = v(0);
        if (!l || a < 0 || a >= static_cast<i128>(l->contents.size()))
          fail(ErrorKind::Internal, "lookup table address out of range in " + x.out);
        set_int(out, l->contents[static_cast<size_t>(a)]);
        return;
      }
      case NetOp::Add: r = v(0) + v(1); break;
      case NetOp::Sub: r = v(0) - v(1); break;
      case NetOp::Mul: r = v(0) * v(1); break;
      case NetOp::And: r = v(0) & v(1); break;
      case NetOp::Or: r = v(0) | v(1); break;
      case NetOp::Xor: r = v(0) ^ v(1); break;
      case NetOp::Not: r = ~v(0); break;
      case NetOp::Shl: r = v(0) * (i128{1} << x.value); break;
      case NetOp::Shr: r = v(0) >> x.value; break;
      case NetOp::Eq: r = v(0) == v(1); break;
      case NetOp::Ne: r = v(0) != v(1); break;
      case NetOp::Lt: r = v(0) < v(1); break;
      case NetOp::Le: r = v(0) <= v(1); break;
      case NetOp::Gt: r = v(0) > v(1); break;
      case NetOp::Ge: r = v(0) >= v(1); break;
      case NetOp::Mux: r = v(0) ? v(1) : v(2); break;
    }
    if (!fits128(r, x.shape) && trace.width_violations.size() < 100) trace.width_violations.push_back({t, x.out});
    set_int(out, r);
  }

  void observe(SimCycle &c) {
    for (Memory &m : mems_) {
      if (get_int(at(m.spec->enable)) == 0) continue;
      MemTransaction tr;
      tr.array = m.spec->array;
      tr.write = m.spec->kind == MemKind::Write;
      tr.address = static_cast<int64_t>(get_int(at(m.spec->addr)));
      if (tr.write) tr.data = static_cast<uint64_t>(get_int(at(m.spec->data)));
      else if (tr.address < m.spec->depth) tr.data = m.words[static_cast<size_t>(tr.address)];
      int64_t per = m.spec->per_word();
      tr.elements = static_cast<int>(std::clamp<int64_t>(m.spec->elements - tr.address * per, 0, per));
      c.mem.push_back(tr);
    }
    for (const Probe &p : cfg_.probes) {
      if (get_int(at(p.strobe)) == 0) continue;
      int s = at(p.data);
      ProbeHit h;
      h.label = p.label;
      h.width = slot(s).shape.width;
      h.bits.assign(limb(s), limb(s) + limbs_for(h.width));
      c.probes.push_back(std::move(h));
    }
  }

  void tick() {
    std::vector<uint64_t> next = limbs_;
    auto copy = [&](int dst, int src) {
      int n = limbs_for(slot(dst).shape.width);
      for (int k = 0; k < n; ++k)
        next[static_cast<size_t>(slot(dst).offset + k)] = limbs_[static_cast<size_t>(slot(src).offset + k)];
    };
    for (const NetReg &r : n_.regs)
      if (r.enable.empty() || get_int(at(r.enable)) != 0) copy(at(r.name), at(r.d));
    for (size_t f = 0; f < n_.fsms.size(); ++f) {
      const NetFsm &m = n_.fsms[f];
      const std::string &cur = m.states[static_cast<size_t>(fsm_state_[f])];
      for (const FsmTransition &t : m.transitions) {
        if (t.from != cur || get_int(at(t.cond)) == 0) continue;
        fsm_state_[f] = static_cast<int>(std::find(m.states.begin(), m.states.end(), t.to) - m.states.begin());
        break;
      }
    }
    for (Memory &m : mems_) {
      if (get_int(at(m.spec->enable)) == 0) continue;
      int64_t addr = static_cast<int64_t>(get_int(at(m.spec->addr)));
      if (addr < 0 || addr >= m.spec->depth)
        fail(ErrorKind::Internal, "memory " + m.spec->array + " address " + std::to_string(addr) + " out of range");
      if (m.spec->kind == MemKind::Read) {
        next[static_cast<size_t>(slot(at(m.spec->data)).offset)] = m.words[static_cast<size_t>(addr)];
      } else {
        m.words[static_cast<size_t>(addr)] = static_cast<uint64_t>(get_int(at(m.spec->data)));
        int64_t per = m.spec->per_word();
        for (int64_t l = 0; l < per; ++l)
          if (addr * per + l < m.spec->elements) m.written[static_cast<size_t>(addr * per + l)] = true;
      }
    }
    limbs_ = std::move(next);
  }

  void collect(SimResult &res) {
    for (const Memory &m : mems_) {
      if (m.spec->kind != MemKind::Write) continue;
      auto &img = res.outputs.memories[m.spec->array];
      int64_t per = m.spec->per_word();
      for (int64_t k = 0; k < m.spec->elements; ++k) {
        uint64_t raw = (m.words[static_cast<size_t>(k / per)] >> ((k % per) * m.spec->element_width)) &
                       low_mask(m.spec->element_width);
        img.push_back(wrap_to(static_cast<int64_t>(raw), m.spec->element_width, m.spec->element_signed));
      }
      res.written[m.spec->array] = m.written;
    }
    for (const NetPort &p : n_.ports)
      if (p.dir == PortDir::Out && p.name.rfind("out_", 0) == 0)
        res.outputs.scalars[p.name.substr(4)] = static_cast<int64_t>(get_int(at(p.name)));
  }

  const Netlist &n_;
  const SimConfig &cfg_;
  std::map<std::string, int> index_;
  std::vector<Slot> slots_;
  std::vector<uint64_t> limbs_;
  std::vector<int> order_;
  std::vector<int> fsm_state_;
  std::vector<Memory> mems_;
};

}  // namespace

SimResult simulate(const Netlist &n, const SimConfig &cfg) {
  if (cfg.max_cycles < 1) fail(ErrorKind::Config, "max cycles must be at least 1");
  Machine m(n, cfg);
  return m.run();
}

int64_t written_value(const SimResult &r, const std::string &array, int64_t k) {
  auto w = r.written.find(array);
  if (w == r.written.end() || k < 0 || k >= static_cast<int64_t>(w->second.size()) ||
      !w->second[static_cast<size_t>(k)])
    fail(ErrorKind::XValue, "output '" + array + "'[" + std::to_string(k) + "] was never written");
  return r.outputs.memories.at(array).at(static_cast<size_t>(k));
}

int64_t field(const ProbeHit &hit, int k, int width, bool is_signed) {
  uint64_t raw = 0;
  for (int b = 0; b < width; ++b) {
    int pos = k * width + b;
    if ((hit.bits[static_cast<size_t>(pos / 64)] >> (pos % 64)) & 1) raw |= uint64_t{1} << b;
  }
  return wrap_to(static_cast<int64_t>(raw), width, is_signed);
}

Metrics measure(const SimTrace &trace) {
  Metrics m;
  m.total_cycles = trace.total_cycles;
  int64_t last_result = -1;
  for (const SimCycle &c : trace.cycles) {
    for (const MemTransaction &t : c.mem) {
      if (t.write) {
        ++m.words_written[t.array];
        m.elements_written += t.elements;
      } else {
        ++m.words_read[t.array];
        m.element_reads[t.array] += t.elements;
      }
    }
    for (const ProbeHit &h : c.probes) {
      if (h.label != "result") continue;
      if (m.first_result_cycle < 0) m.first_result_cycle = c.cycle;
      last_result = c.cycle;
      ++m.results;
    }
  }
  if (m.results > 1 && last_result > m.first_result_cycle)
    m.steady_results_per_cycle =
        static_cast<double>(m.results - 1) / static_cast<double>(last_result - m.first_result_cycle);
  if (m.results > 0) m.outputs_per_firing = static_cast<double>(m.elements_written) / static_cast<double>(m.results);
  return m;
}

std::string metrics_text(const Metrics &m) {
  std::ostringstream os;
  for (const auto &[a, k] : m.element_reads) os << "reads " << a << "=" << k << " words=" << m.words_read.at(a) << "\n";
  for (const auto &[a, k] : m.words_written) os << "writes " << a << " words=" << k << "\n";
  os << "results=" << m.results << "\n";
  os << "first_result_cycle=" << m.first_result_cycle << "\n";
  os << "results/cycle=" << m.steady_results_per_cycle << "\n";
  os << "outputs/firing=" << m.outputs_per_firing << "\n";
  os << "cycles=" << m.total_cycles << "\n";
  return os.str();
}

std::string trace_jsonl(const SimTrace &trace) {
  std::ostringstream os;
  for (const SimCycle &c : trace.cycles) {
    nlohmann::json j;
    j["cycle"] = c.cycle;
    j["mem"] = nlohmann::json::array();
    for (const MemTransaction &t : c.mem)
      j["mem"].push_back({{"array", t.array}, {"kind", t.write ? "write" : "read"}, {"addr", t.address}, {"data", t.data}});
    j["probes"] = nlohmann::json::array();
    for (const ProbeHit &h : c.probes) j["probes"].push_back({{"label", h.label}, {"bits", h.bits}});
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace minihls
