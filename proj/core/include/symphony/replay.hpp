#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "symphony/math_core.hpp"
#include "symphony/rng.hpp"

namespace symphony {

/// One MDP step. Rewards are stored already normalized by the exploration
/// estimate r_norm; done is 1.0 on true termination, 0.0 on truncation
/// (possibly decayed by the continuous-learning epsilon pass).
struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward_norm = 0.0;
  double done = 0.0;
  Eigen::VectorXd next_state;
};

/// Batch in structure-of-arrays form, always full precision.
struct TransitionBatch {
  Eigen::MatrixXd states;       // B x obs_dim
  Eigen::MatrixXd actions;      // B x action_dim
  Eigen::VectorXd rewards;
  Eigen::VectorXd dones;
  Eigen::MatrixXd next_states;  // B x obs_dim
};

enum class Precision : std::uint32_t { kFull = 0, kHalf = 1 };

/// Fixed-capacity transition store with index-keyed sampling probabilities.
///
/// The logical view keeps slot 0 oldest and slot N-1 newest; a push rolls the
/// window left by one (rotating base, no data movement) so the previous oldest
/// parks at the overwrite slot, skips it while it holds a terminal, then
/// overwrites. Sampling draws logical indexes from the fixed schedule, so
/// recency alone determines priority.
class FadingReplayBuffer {
 public:
  struct Options {
    int capacity = 0;
    int obs_dim = 0;
    int action_dim = 0;
    Precision precision = Precision::kFull;
    bool done_epsilon_decay = false;  // continuous-learning eviction mode
    double epsilon_done = 1e-3;       // terminal iff done >= 1 - epsilon_done
  };

  FadingReplayBuffer(const Options& options, WeightSchedule schedule);

  /// Tiles `exploration` `repeats` times (oldest tile first) into a buffer of
  /// capacity len(exploration) * repeats. Throws on size mismatch with
  /// options.capacity when that is nonzero.
  static FadingReplayBuffer prefill(const std::vector<Transition>& exploration,
                                    int repeats, Options options,
                                    WeightSchedule schedule);

  void push(const Transition& t);

  TransitionBatch sample(int batch_size, Rng& rng) const;

  /// Converts the storage arrays in place. Retrieval always yields doubles.
  void set_precision(Precision p);

  void save(const std::string& path) const;
  static FadingReplayBuffer load(const std::string& path,
                                 const Options& options,
                                 WeightSchedule schedule);

  int capacity() const { return options_.capacity; }
  int obs_dim() const { return options_.obs_dim; }
  int action_dim() const { return options_.action_dim; }
  Precision precision() const { return options_.precision; }
  const WeightSchedule& schedule() const { return schedule_; }

  /// Logical slot access (0 = oldest); reconstructs a full-precision copy.
  Transition at(int logical_index) const;

  bool is_terminal_slot(int logical_index) const;
  std::int64_t forced_terminal_evictions() const {
    return forced_terminal_evictions_;
  }

 private:
  int physical(int logical) const {
    return static_cast<int>((base_ + static_cast<std::int64_t>(logical)) %
                            options_.capacity);
  }
  double load_field(const std::vector<double>& full,
                    const std::vector<std::uint16_t>& half, std::size_t i) const;
  void store_transition(int slot, const Transition& t);
  void build_alias_table();

  Options options_;
  WeightSchedule schedule_;
  std::int64_t base_ = 0;
  std::int64_t forced_terminal_evictions_ = 0;

  // Per-field storage; exactly one of (full, half) is populated per field.
  std::vector<double> states_, actions_, rewards_, dones_, next_states_;
  std::vector<std::uint16_t> states_h_, actions_h_, rewards_h_, dones_h_,
      next_states_h_;

  // Vose alias table over logical indexes.
  std::vector<double> alias_prob_;
  std::vector<std::int32_t> alias_idx_;
};

}  // namespace symphony
