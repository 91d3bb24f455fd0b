#include "symphony/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <map>

#include "symphony/io.hpp"

namespace symphony {

namespace {

constexpr char kMagic[4] = {'S', 'Y', 'M', 'C'};
constexpr const char* kScalarsBlock = "trainer.scalars";

void write_block(BinaryFile& out, const std::string& name, const Mat& m) {
  out.write_string(name);
  out.write_pod<std::uint32_t>(2);
  out.write_pod<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
  out.write_pod<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
  out.write_bytes(m.data(), sizeof(double) * m.size());
}

struct RawBlock {
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

std::map<std::string, RawBlock> read_blocks(BinaryFile& in,
                                            std::uint32_t count,
                                            std::vector<std::string>* order) {
  std::map<std::string, RawBlock> blocks;
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::string name = in.read_string();
    const auto rank = in.read_pod<std::uint32_t>();
    if (rank > 4) throw FormatError("checkpoint: block rank out of range");
    RawBlock block;
    std::uint64_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      block.shape.push_back(in.read_pod<std::uint64_t>());
      total *= block.shape.back();
    }
    if (total > (1ull << 32)) throw FormatError("checkpoint: block too large");
    block.data.resize(total);
    in.read_bytes(block.data.data(), sizeof(double) * total);
    if (order) order->push_back(name);
    blocks.emplace(name, std::move(block));
  }
  return blocks;
}

std::vector<double> pack_scalars(const TrainerScalars& s) {
  return {s.q_ema,
          s.q_ema_initialized,
          s.r_norm,
          s.explored,
          static_cast<double>(s.global_step),
          static_cast<double>(s.episode),
          static_cast<double>(s.nonfinite_skips),
          static_cast<double>(s.reset_count)};
}

TrainerScalars unpack_scalars(const std::vector<double>& v) {
  if (v.size() != 8) throw FormatError("checkpoint: bad trainer scalar block");
  TrainerScalars s;
  s.q_ema = v[0];
  s.q_ema_initialized = v[1];
  s.r_norm = v[2];
  s.explored = v[3];
  s.global_step = static_cast<std::int64_t>(v[4]);
  s.episode = static_cast<std::int64_t>(v[5]);
  s.nonfinite_skips = static_cast<std::int64_t>(v[6]);
  s.reset_count = static_cast<std::int64_t>(v[7]);
  return s;
}

CheckpointHeader read_header(BinaryFile& in, const std::string& path) {
  char magic[4];
  in.read_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic in '" + path + "'");
  }
  CheckpointHeader h;
  h.version = in.read_pod<std::uint32_t>();
  if (h.version != 1) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(h.version));
  }
  h.h_dim = in.read_pod<std::uint32_t>();
  h.n_out = in.read_pod<std::uint32_t>();
  h.action_dim = in.read_pod<std::uint32_t>();
  h.obs_dim = in.read_pod<std::uint32_t>();
  h.variant = static_cast<Variant>(in.read_pod<std::uint32_t>());
  return h;
}

}  // namespace

void save_checkpoint(const std::string& path, ActorCriticNet& net,
                     AdamW& optim, const TrainerScalars& scalars,
                     Variant variant) {
  BinaryFile out(path, "wb");
  out.write_bytes(kMagic, 4);
  out.write_pod<std::uint32_t>(1);
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(net.config().h_dim));
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(net.config().n_out));
  out.write_pod<std::uint32_t>(
      static_cast<std::uint32_t>(net.config().action_dim));
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(net.config().obs_dim));
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(variant));

  const auto params = net.all_params();
  const auto& optim_params = optim.params();
  const auto count = static_cast<std::uint32_t>(
      params.size() + 2 * optim_params.size() + 1);
  out.write_pod<std::uint32_t>(count);

  for (const auto* p : params) write_block(out, p->name, p->value);
  for (std::size_t i = 0; i < optim_params.size(); ++i) {
    write_block(out, "optim.m." + optim_params[i]->name, optim.moments_m()[i]);
  }
  for (std::size_t i = 0; i < optim_params.size(); ++i) {
    write_block(out, "optim.v." + optim_params[i]->name, optim.moments_v()[i]);
  }
  const auto packed = pack_scalars(scalars);
  out.write_string(kScalarsBlock);
  out.write_pod<std::uint32_t>(1);
  out.write_pod<std::uint64_t>(packed.size());
  out.write_bytes(packed.data(), sizeof(double) * packed.size());
}

CheckpointHeader load_checkpoint(const std::string& path, ActorCriticNet& net,
                                 AdamW& optim, TrainerScalars& scalars) {
  BinaryFile in(path, "rb");
  const CheckpointHeader header = read_header(in, path);
  if (header.h_dim != static_cast<std::uint32_t>(net.config().h_dim) ||
      header.n_out != static_cast<std::uint32_t>(net.config().n_out) ||
      header.action_dim != static_cast<std::uint32_t>(net.config().action_dim) ||
      header.obs_dim != static_cast<std::uint32_t>(net.config().obs_dim)) {
    throw FormatError("checkpoint: header does not match network dimensions");
  }
  const auto count = in.read_pod<std::uint32_t>();
  auto blocks = read_blocks(in, count, nullptr);

  auto assign = [&](const std::string& name, Mat& dst) {
    auto it = blocks.find(name);
    if (it == blocks.end()) {
      throw FormatError("checkpoint: missing block '" + name + "'");
    }
    const auto& blk = it->second;
    if (blk.shape.size() != 2 ||
        blk.shape[0] != static_cast<std::uint64_t>(dst.rows()) ||
        blk.shape[1] != static_cast<std::uint64_t>(dst.cols())) {
      throw FormatError("checkpoint: shape mismatch for '" + name + "'");
    }
    std::memcpy(dst.data(), blk.data.data(), sizeof(double) * dst.size());
  };

  for (auto* p : net.all_params()) assign(p->name, p->value);
  const auto& optim_params = optim.params();
  for (std::size_t i = 0; i < optim_params.size(); ++i) {
    assign("optim.m." + optim_params[i]->name, optim.moments_m()[i]);
    assign("optim.v." + optim_params[i]->name, optim.moments_v()[i]);
  }
  auto it = blocks.find(kScalarsBlock);
  if (it == blocks.end()) {
    throw FormatError("checkpoint: missing trainer scalar block");
  }
  scalars = unpack_scalars(it->second.data);
  return header;
}

CheckpointHeader inspect_checkpoint(const std::string& path,
                                    std::vector<BlockInfo>* blocks) {
  BinaryFile in(path, "rb");
  const CheckpointHeader header = read_header(in, path);
  const auto count = in.read_pod<std::uint32_t>();
  std::vector<std::string> order;
  auto raw = read_blocks(in, count, &order);
  if (blocks) {
    for (const auto& name : order) {
      const auto& blk = raw.at(name);
      BlockInfo info;
      info.name = name;
      info.shape = blk.shape;
      double sq = 0.0;
      for (double v : blk.data) sq += v * v;
      info.l2_norm = std::sqrt(sq);
      blocks->push_back(std::move(info));
    }
  }
  return header;
}

}  // namespace symphony
