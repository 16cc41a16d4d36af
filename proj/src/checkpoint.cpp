#include "ogsbl/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace ogsbl {

namespace {

constexpr char kMagic[8] = {'O', 'G', 'S', 'B', 'L', 'C', 'K', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError(std::string("checkpoint truncated reading ") + what);
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is, const char* what) {
  const auto len = get<std::uint64_t>(is, what);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw IoError(std::string("checkpoint truncated reading ") + what);
  return s;
}

void put_net(std::ostream& os, const Mlp& net) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.weights.size()));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.weights[l].rows()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.weights[l].cols()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.acts[l]));
    os.write(reinterpret_cast<const char*>(net.weights[l].data()),
             static_cast<std::streamsize>(net.weights[l].size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(net.biases[l].data()),
             static_cast<std::streamsize>(net.biases[l].size() * sizeof(double)));
  }
}

Mlp get_net(std::istream& is) {
  Mlp net;
  const auto layers = get<std::uint32_t>(is, "layer count");
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto rows = get<std::uint32_t>(is, "weight rows");
    const auto cols = get<std::uint32_t>(is, "weight cols");
    const auto act = get<std::uint32_t>(is, "activation");
    MatR w(rows, cols);
    is.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
    VecR b(rows);
    is.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
    if (!is) throw IoError("checkpoint truncated reading network arrays");
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
    net.acts.push_back(static_cast<Act>(act));
  }
  return net;
}

}  // namespace

const Mlp& Checkpoint::net(const std::string& name) const {
  for (const auto& [n, net] : nets) {
    if (n == name) return net;
  }
  throw IoError("checkpoint has no network named " + name);
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put_string(os, ckpt.meta_json);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.nets.size()));
  for (const auto& [name, net] : ckpt.nets) {
    put_string(os, name);
    put_net(os, net);
  }
  if (!os) throw IoError("write failure on checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not an ogsbl checkpoint: " + path);
  }
  Checkpoint ckpt;
  ckpt.meta_json = get_string(is, "metadata");
  const auto count = get<std::uint32_t>(is, "network count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_string(is, "network name");
    ckpt.nets.emplace_back(std::move(name), get_net(is));
  }
  return ckpt;
}

Checkpoint agent_to_checkpoint(const DdpgAgent& agent, std::string meta_json) {
  Checkpoint ckpt;
  ckpt.meta_json = std::move(meta_json);
  ckpt.nets.emplace_back("actor", agent.actor);
  ckpt.nets.emplace_back("critic", agent.critic);
  ckpt.nets.emplace_back("target_actor", agent.target_actor);
  ckpt.nets.emplace_back("target_critic", agent.target_critic);
  ckpt.nets.emplace_back("halting", agent.halting);
  return ckpt;
}

void agent_from_checkpoint(const Checkpoint& ckpt, DdpgAgent& agent) {
  agent.actor = ckpt.net("actor");
  agent.critic = ckpt.net("critic");
  agent.target_actor = ckpt.net("target_actor");
  agent.target_critic = ckpt.net("target_critic");
  agent.halting = ckpt.net("halting");
}

}  // namespace ogsbl
