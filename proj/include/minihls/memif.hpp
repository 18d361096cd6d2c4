#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minihls/dataflow.hpp"
#include "minihls/netlist.hpp"
#include "minihls/transforms.hpp"

namespace minihls {

/// Bus-word fetch plan of one input array: the contiguous element range
/// from the first window's origin to the last window's end.
struct AddressGenerator {
  int64_t first_element = 0;
  int64_t element_count = 0;
  int64_t per_word = 1;  // B / D
  int64_t base = 0;      // first bus word
  int64_t word_count = 0;
};

AddressGenerator plan_addresses(const WindowSpec &ws, int64_t trip);

/// Bus-word addresses in fetch order: ascending, each once.
std::vector<int64_t> gen_address_stream(const WindowSpec &ws, int64_t trip);

struct DesignConfig {
  int bus_width = 32;
  int max_export_width = 1024;  // W*D limit of a smart buffer
};

struct MemPorts {
  std::string addr, enable, data;
};

/// `mem_in_addr` and friends; with more than one array per direction the
/// array name is appended (`mem_in_addr_A`).
MemPorts memory_ports(bool input, const std::string &array, bool suffixed);

/// Memory words holding `elements` elements of `ws`'s width.
int64_t memory_depth(const WindowSpec &ws);

/// Address generator fragment `agen_<A>`: drives the read port while the
/// controller allows fetching and the buffer has room.
Netlist build_address_generator(const WindowSpec &ws, int64_t trip, const MemPorts &ports);

/// Smart buffer fragment `buf_<A>`: unpacks bus words one element per cycle
/// into a shift register of `span` slots and raises `window_valid` when the
/// slots hold the next window. Shifting pauses while an exported window
/// waits for the controller to fire.
Netlist build_smart_buffer(const WindowSpec &ws, int64_t trip, const std::string &data_port, const DesignConfig &cfg);

struct ResultField {
  std::string name;
  int offset = 0;
  NetShape shape;
};

/// Output fragment `out_<C>`: takes the stored elements of each firing and
/// writes them one element per cycle, packing lanes into bus words.
Netlist build_output_packer(const WindowSpec &ws, int64_t trip, const MemPorts &ports,
                            const std::vector<ResultField> &elements, int result_width);

struct ControllerPlan {
  int64_t trip = 1;
  int depth = 1;
  int64_t interval = 1;  // minimum cycles between firings
  std::vector<std::string> window_valids;
  std::vector<std::string> idle;  // output packers drained
};

/// Controller fragment `ctrl`. With a rolled loop it is the iteration FSM
/// IDLE -> FILL -> STEADY -> DRAIN -> DONE; a single firing gets only a
/// start/done register pair.
Netlist build_controller(const ControllerPlan &plan);

/// Data path fragment `dp`: one register per latched node, delay COPYs as
/// registers, feedback registers enabled by the valid bit of their stage.
Netlist build_datapath(const DataflowGraph &g, const ScalarizedKernel &sk, const std::vector<WindowSpec> &inputs,
                       std::vector<ResultField> &layout, const LutTable &luts = {});

/// Name of the boundary port carrying scalar parameter `p`.
std::string scalar_port(const Param &p, bool input);

struct Design {
  Netlist netlist;
  std::vector<WindowSpec> inputs;
  std::vector<WindowSpec> outputs;
  std::map<std::string, MemPorts> ports;  // per array
  std::vector<ResultField> results;
  int64_t trip = 1;
  int depth = 1;
  int64_t interval = 1;
};

/// Windows, fragments and the linked netlist. Table specs come from `luts`
/// when present there, otherwise from the contents bound to the graph.
Design build_design(const ScalarizedKernel &sk, const DataflowGraph &g, const DesignConfig &cfg,
                    const LutTable &luts = {});

}  // namespace minihls
