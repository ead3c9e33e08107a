// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "idma/system.hpp"

namespace fixture {

using namespace idma;

inline MemoryPortConfig memory(ProtocolId p, const std::string& preset_name = "sram") {
  MemoryPortConfig m;
  m.port = std::string(protocol_name(p));
  m.preset = preset_name;
  m.model = preset(preset_name);
  return m;
}

inline MemoryPortConfig memory(ProtocolId p, Cycle latency, unsigned outstanding) {
  MemoryPortConfig m;
  m.port = std::string(protocol_name(p));
  m.model.latency = latency;
  m.model.max_outstanding = outstanding;
  return m;
}

// Engine with one read port and one write port (one rw port when equal),
// each backed by its own memory.
inline SystemConfig copy_system(ProtocolId src, ProtocolId dst, unsigned dw = 32, unsigned nax = 8,
                                const std::string& preset_name = "sram") {
  SystemConfig c;
  c.engine.dw = dw;
  c.engine.nax_read = c.engine.nax_write = nax;
  if (src == dst) {
    c.engine.ports = {{src, PortDirection::ReadWrite}};
    c.memory = {memory(src, preset_name)};
  } else {
    c.engine.ports = {{src, PortDirection::Read}, {dst, PortDirection::Write}};
    if (src != ProtocolId::Init) c.memory.push_back(memory(src, preset_name));
    c.memory.push_back(memory(dst, preset_name));
  }
  c.workload.fill = FillKind::Random;
  return c;
}

inline TransferSpec copy(Addr src, Addr dst, std::uint64_t len, ProtocolId sp = ProtocolId::Axi,
                         ProtocolId dp = ProtocolId::Axi) {
  TransferSpec t;
  t.desc.base = {src, dst, len, sp, dp, {}};
  return t;
}

inline std::string port_of(ProtocolId p) { return std::string(protocol_name(p)); }

}  // namespace fixture
