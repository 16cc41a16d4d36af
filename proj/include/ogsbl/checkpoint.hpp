#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ogsbl/ddpg.hpp"

namespace ogsbl {

/// Self-describing network container: a metadata JSON blob plus named
/// networks with their layer sizes, activations, and raw little-endian
/// float arrays. Save/load round-trips bitwise.
struct Checkpoint {
  std::string meta_json;
  std::vector<std::pair<std::string, Mlp>> nets;

  const Mlp& net(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

/// Packs the agent's five networks under fixed names.
Checkpoint agent_to_checkpoint(const DdpgAgent& agent, std::string meta_json);

/// Restores networks into an agent created with matching dimensions.
void agent_from_checkpoint(const Checkpoint& ckpt, DdpgAgent& agent);

}  // namespace ogsbl
