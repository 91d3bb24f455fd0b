#include "symphony/replay.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "symphony/half.hpp"
#include "symphony/io.hpp"

namespace symphony {

namespace {
constexpr char kMagic[4] = {'F', 'R', 'B', '1'};

void resize_fields(int capacity, int obs_dim, int action_dim, Precision p,
                   std::vector<double>& s, std::vector<double>& a,
                   std::vector<double>& r, std::vector<double>& d,
                   std::vector<double>& ns, std::vector<std::uint16_t>& sh,
                   std::vector<std::uint16_t>& ah, std::vector<std::uint16_t>& rh,
                   std::vector<std::uint16_t>& dh,
                   std::vector<std::uint16_t>& nsh) {
  const std::size_t n = static_cast<std::size_t>(capacity);
  const std::size_t no = n * obs_dim;
  const std::size_t na = n * action_dim;
  if (p == Precision::kFull) {
    s.assign(no, 0.0);
    a.assign(na, 0.0);
    r.assign(n, 0.0);
    d.assign(n, 0.0);
    ns.assign(no, 0.0);
  } else {
    sh.assign(no, 0);
    ah.assign(na, 0);
    rh.assign(n, 0);
    dh.assign(n, 0);
    nsh.assign(no, 0);
  }
}
}  // namespace

FadingReplayBuffer::FadingReplayBuffer(const Options& options,
                                       WeightSchedule schedule)
    : options_(options), schedule_(std::move(schedule)) {
  if (options_.capacity < 2 || options_.obs_dim <= 0 ||
      options_.action_dim <= 0) {
    throw std::invalid_argument("FadingReplayBuffer: invalid dimensions");
  }
  if (schedule_.size() != options_.capacity) {
    throw std::invalid_argument(
        "FadingReplayBuffer: schedule length must equal capacity");
  }
  resize_fields(options_.capacity, options_.obs_dim, options_.action_dim,
                options_.precision, states_, actions_, rewards_, dones_,
                next_states_, states_h_, actions_h_, rewards_h_, dones_h_,
                next_states_h_);
  build_alias_table();
}

FadingReplayBuffer FadingReplayBuffer::prefill(
    const std::vector<Transition>& exploration, int repeats, Options options,
    WeightSchedule schedule) {
  if (exploration.empty() || repeats <= 0) {
    throw std::invalid_argument("prefill: empty exploration or repeats <= 0");
  }
  const std::int64_t total =
      static_cast<std::int64_t>(exploration.size()) * repeats;
  if (options.capacity == 0) {
    options.capacity = static_cast<int>(total);
  } else if (total != options.capacity) {
    throw std::invalid_argument(
        "prefill: len(exploration) * repeats must equal capacity");
  }
  options.obs_dim = static_cast<int>(exploration.front().state.size());
  options.action_dim = static_cast<int>(exploration.front().action.size());

  FadingReplayBuffer buffer(options, std::move(schedule));
  const int n_exp = static_cast<int>(exploration.size());
  for (int i = 0; i < options.capacity; ++i) {
    buffer.store_transition(i, exploration[i % n_exp]);
  }
  return buffer;
}

void FadingReplayBuffer::store_transition(int slot, const Transition& t) {
  const int od = options_.obs_dim;
  const int ad = options_.action_dim;
  if (t.state.size() != od || t.next_state.size() != od ||
      t.action.size() != ad) {
    throw std::invalid_argument("push: transition dimensions do not match");
  }
  const std::size_t so = static_cast<std::size_t>(slot) * od;
  const std::size_t sa = static_cast<std::size_t>(slot) * ad;
  if (options_.precision == Precision::kFull) {
    for (int k = 0; k < od; ++k) {
      states_[so + k] = t.state[k];
      next_states_[so + k] = t.next_state[k];
    }
    for (int k = 0; k < ad; ++k) actions_[sa + k] = t.action[k];
    rewards_[slot] = t.reward_norm;
    dones_[slot] = t.done;
  } else {
    for (int k = 0; k < od; ++k) {
      states_h_[so + k] = double_to_half(t.state[k]);
      next_states_h_[so + k] = double_to_half(t.next_state[k]);
    }
    for (int k = 0; k < ad; ++k) actions_h_[sa + k] = double_to_half(t.action[k]);
    rewards_h_[slot] = double_to_half(t.reward_norm);
    dones_h_[slot] = double_to_half(t.done);
  }
}

bool FadingReplayBuffer::is_terminal_slot(int logical_index) const {
  const int slot = physical(logical_index);
  const double done = options_.precision == Precision::kFull
                          ? dones_[slot]
                          : half_to_double(dones_h_[slot]);
  return done >= 1.0 - options_.epsilon_done;
}

void FadingReplayBuffer::push(const Transition& t) {
  const int n = options_.capacity;
  // Roll left: previous oldest parks at the overwrite slot (logical n-1).
  base_ = (base_ + 1) % n;
  int preserved = 0;
  while (is_terminal_slot(n - 1)) {
    if (preserved >= n / 2) {
      // Terminal overflow: evict the oldest terminal rather than loop.
      ++forced_terminal_evictions_;
      std::fprintf(stderr,
                   "[replay] warning: terminal slots exceed capacity/2, "
                   "evicting a terminal transition\n");
      break;
    }
    if (options_.done_epsilon_decay) {
      const int slot = physical(n - 1);
      const double dec = 2.0 * options_.epsilon_done;
      if (options_.precision == Precision::kFull) {
        dones_[slot] -= dec;
      } else {
        dones_h_[slot] = double_to_half(half_to_double(dones_h_[slot]) - dec);
      }
    }
    // Preserved: roll once more so the terminal re-enters near the top.
    base_ = (base_ + 1) % n;
    ++preserved;
  }
  store_transition(physical(n - 1), t);
}

double FadingReplayBuffer::load_field(const std::vector<double>& full,
                                      const std::vector<std::uint16_t>& half,
                                      std::size_t i) const {
  return options_.precision == Precision::kFull ? full[i]
                                                : half_to_double(half[i]);
}

Transition FadingReplayBuffer::at(int logical_index) const {
  const int od = options_.obs_dim;
  const int ad = options_.action_dim;
  const int slot = physical(logical_index);
  Transition t;
  t.state.resize(od);
  t.next_state.resize(od);
  t.action.resize(ad);
  const std::size_t so = static_cast<std::size_t>(slot) * od;
  const std::size_t sa = static_cast<std::size_t>(slot) * ad;
  for (int k = 0; k < od; ++k) {
    t.state[k] = load_field(states_, states_h_, so + k);
    t.next_state[k] = load_field(next_states_, next_states_h_, so + k);
  }
  for (int k = 0; k < ad; ++k) t.action[k] = load_field(actions_, actions_h_, sa + k);
  t.reward_norm = load_field(rewards_, rewards_h_, slot);
  t.done = load_field(dones_, dones_h_, slot);
  return t;
}

void FadingReplayBuffer::build_alias_table() {
  // Vose's method with deterministic worklists.
  const int n = schedule_.size();
  alias_prob_.assign(n, 0.0);
  alias_idx_.assign(n, 0);
  std::vector<double> scaled(n);
  for (int i = 0; i < n; ++i) scaled[i] = schedule_.weights()[i] * n;

  std::vector<std::int32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (int i = 0; i < n; ++i) {
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    large.pop_back();
    alias_prob_[s] = scaled[s];
    alias_idx_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (auto i : large) {
    alias_prob_[i] = 1.0;
    alias_idx_[i] = i;
  }
  for (auto i : small) {  // numerical leftovers
    alias_prob_[i] = 1.0;
    alias_idx_[i] = i;
  }
}

TransitionBatch FadingReplayBuffer::sample(int batch_size, Rng& rng) const {
  if (batch_size <= 0 || batch_size > options_.capacity) {
    throw std::invalid_argument("sample: batch_size out of range");
  }
  const int od = options_.obs_dim;
  const int ad = options_.action_dim;
  TransitionBatch batch;
  batch.states.resize(batch_size, od);
  batch.actions.resize(batch_size, ad);
  batch.rewards.resize(batch_size);
  batch.dones.resize(batch_size);
  batch.next_states.resize(batch_size, od);

  const int n = options_.capacity;
  for (int b = 0; b < batch_size; ++b) {
    const auto col = static_cast<std::int32_t>(rng.uniform_index(n));
    const std::int32_t logical =
        rng.uniform() < alias_prob_[col] ? col : alias_idx_[col];
    const int slot = physical(logical);
    const std::size_t so = static_cast<std::size_t>(slot) * od;
    const std::size_t sa = static_cast<std::size_t>(slot) * ad;
    for (int k = 0; k < od; ++k) {
      batch.states(b, k) = load_field(states_, states_h_, so + k);
      batch.next_states(b, k) = load_field(next_states_, next_states_h_, so + k);
    }
    for (int k = 0; k < ad; ++k) {
      batch.actions(b, k) = load_field(actions_, actions_h_, sa + k);
    }
    batch.rewards[b] = load_field(rewards_, rewards_h_, slot);
    batch.dones[b] = load_field(dones_, dones_h_, slot);
  }
  return batch;
}

void FadingReplayBuffer::set_precision(Precision p) {
  if (p == options_.precision) return;
  const int n = options_.capacity;
  std::vector<Transition> copy;
  copy.reserve(n);
  for (int i = 0; i < n; ++i) copy.push_back(at(i));
  options_.precision = p;
  resize_fields(n, options_.obs_dim, options_.action_dim, p, states_, actions_,
                rewards_, dones_, next_states_, states_h_, actions_h_,
                rewards_h_, dones_h_, next_states_h_);
  if (p == Precision::kFull) {
    states_h_.clear();
    actions_h_.clear();
    rewards_h_.clear();
    dones_h_.clear();
    next_states_h_.clear();
  } else {
    states_.clear();
    actions_.clear();
    rewards_.clear();
    dones_.clear();
    next_states_.clear();
  }
  base_ = 0;
  for (int i = 0; i < n; ++i) store_transition(i, copy[i]);
}

void FadingReplayBuffer::save(const std::string& path) const {
  BinaryFile out(path, "wb");
  out.write_bytes(kMagic, 4);
  out.write_pod<std::uint64_t>(static_cast<std::uint64_t>(options_.capacity));
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(options_.obs_dim));
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(options_.action_dim));
  out.write_pod<std::uint32_t>(static_cast<std::uint32_t>(options_.precision));

  // Serialized in logical order so a reload starts with base = 0.
  const int n = options_.capacity;
  const int od = options_.obs_dim;
  const int ad = options_.action_dim;
  auto write_field = [&](const std::vector<double>& full,
                         const std::vector<std::uint16_t>& half, int dim) {
    for (int i = 0; i < n; ++i) {
      const std::size_t s = static_cast<std::size_t>(physical(i)) * dim;
      if (options_.precision == Precision::kFull) {
        out.write_bytes(full.data() + s, sizeof(double) * dim);
      } else {
        out.write_bytes(half.data() + s, sizeof(std::uint16_t) * dim);
      }
    }
  };
  write_field(states_, states_h_, od);
  write_field(actions_, actions_h_, ad);
  write_field(rewards_, rewards_h_, 1);
  write_field(dones_, dones_h_, 1);
  write_field(next_states_, next_states_h_, od);
}

FadingReplayBuffer FadingReplayBuffer::load(const std::string& path,
                                            const Options& options,
                                            WeightSchedule schedule) {
  BinaryFile in(path, "rb");
  char magic[4];
  in.read_bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("buffer snapshot: bad magic in '" + path + "'");
  }
  const auto capacity = in.read_pod<std::uint64_t>();
  const auto obs_dim = in.read_pod<std::uint32_t>();
  const auto action_dim = in.read_pod<std::uint32_t>();
  const auto precision = in.read_pod<std::uint32_t>();
  if (capacity != static_cast<std::uint64_t>(options.capacity) ||
      obs_dim != static_cast<std::uint32_t>(options.obs_dim) ||
      action_dim != static_cast<std::uint32_t>(options.action_dim) ||
      precision != static_cast<std::uint32_t>(options.precision)) {
    throw FormatError("buffer snapshot: header does not match configuration");
  }

  FadingReplayBuffer buffer(options, std::move(schedule));
  const int n = buffer.options_.capacity;
  auto read_field = [&](std::vector<double>& full,
                        std::vector<std::uint16_t>& half, int dim) {
    if (buffer.options_.precision == Precision::kFull) {
      in.read_bytes(full.data(), sizeof(double) * full.size());
    } else {
      in.read_bytes(half.data(), sizeof(std::uint16_t) * half.size());
    }
    (void)dim;
    (void)n;
  };
  read_field(buffer.states_, buffer.states_h_, buffer.options_.obs_dim);
  read_field(buffer.actions_, buffer.actions_h_, buffer.options_.action_dim);
  read_field(buffer.rewards_, buffer.rewards_h_, 1);
  read_field(buffer.dones_, buffer.dones_h_, 1);
  read_field(buffer.next_states_, buffer.next_states_h_, buffer.options_.obs_dim);
  return buffer;
}

}  // namespace symphony
