#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minihls/io.hpp"
#include "minihls/netlist.hpp"

namespace minihls {

/// Records `data` in every cycle where `strobe` is high.
struct Probe {
  std::string label;
  std::string strobe;
  std::string data;
};

struct SimConfig {
  int64_t max_cycles = 100000;
  bool record_trace = true;
  KernelIO inputs;  // element images by array name, scalars by parameter name
  std::vector<Probe> probes;
};

struct MemTransaction {
  std::string array;
  bool write = false;
  int64_t address = 0;  // bus word
  uint64_t data = 0;
  int elements = 0;     // array elements held in the word
};

struct ProbeHit {
  std::string label;
  std::vector<uint64_t> bits;  // little-endian limbs
  int width = 0;
};

struct SimCycle {
  int64_t cycle = 0;
  std::vector<MemTransaction> mem;
  std::vector<ProbeHit> probes;
};

/// Arithmetic result that needed more bits than its node declares.
struct WidthViolation {
  int64_t cycle = 0;
  std::string signal;
};

struct SimTrace {
  std::vector<SimCycle> cycles;  // only cycles with activity when recording
  int64_t total_cycles = 0;
  std::vector<WidthViolation> width_violations;
};

struct SimResult {
  SimTrace trace;
  KernelIO outputs;
  std::map<std::string, std::vector<bool>> written;  // per output element
};

/// Two-phase cycle simulation: combinational settle in topological order,
/// then registers, FSM states and memories update together. `start` is high
/// in cycle 0 only; the run ends in the first cycle with `done` high.
/// Timeout if that never happens within `max_cycles`.
SimResult simulate(const Netlist &n, const SimConfig &cfg);

/// Element `k` of output `array`; XValue if the hardware never wrote it.
int64_t written_value(const SimResult &r, const std::string &array, int64_t k);

/// Value of a probe hit's element `k` when the data is a vector of
/// `width`-bit fields.
int64_t field(const ProbeHit &hit, int k, int width, bool is_signed);

struct Metrics {
  std::map<std::string, int64_t> element_reads;  // per input array
  std::map<std::string, int64_t> words_read;
  std::map<std::string, int64_t> words_written;
  int64_t elements_written = 0;
  int64_t results = 0;
  int64_t first_result_cycle = -1;
  double steady_results_per_cycle = 0;
  double outputs_per_firing = 0;
  int64_t total_cycles = 0;
};

/// Counts from a recorded trace; result strobes are probes labelled
/// "result".
Metrics measure(const SimTrace &trace);

std::string metrics_text(const Metrics &m);

/// One JSON object per recorded cycle.
std::string trace_jsonl(const SimTrace &trace);

}  // namespace minihls
