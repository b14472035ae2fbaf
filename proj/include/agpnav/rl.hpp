#pragma once

#include "agpnav/escape.hpp"
#include "agpnav/qnet.hpp"
#include "agpnav/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace agpnav {

struct RewardParams {
  double k_shape = 1.0;
  double step_penalty = 0.05;  // delta_t
  double collision = -50.0;
  double success = 50.0;
};

/// Collision first, then the first exit from all zones, then the in-zone
/// shaping term; zero outside the zones.
double reward(double phi_t, double phi_prev, bool collided, bool exited,
              const RewardParams& p = {});

/// Training environment: robot at the arena center drives straight along a
/// random compass heading until it first enters a safety zone; from then on
/// the agent acts. Global-phase transitions are flagged `ignore`.
struct EnvConfig {
  SimConfig sim = [] {
    SimConfig c;
    c.directions = 8;
    return c;
  }();
  RewardParams rewards;
  long max_frames = 2000;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool ignore = false;
  bool success = false;
  bool collided = false;
  bool truncated = false;  // frame cap reached; not a terminal state
};

class EscapeEnv {
 public:
  explicit EscapeEnv(EnvConfig config = {}) : config_(std::move(config)) {}

  /// Starts an episode whose arena and heading derive from `seed`.
  Observation reset(std::uint64_t seed);
  StepResult step(int action);

  bool local() const { return local_; }
  const SimState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  SimState state_;
  Vec2 heading_ = Vec2(1.0, 0.0);
  bool local_ = false;
  double phi_ = 0.0;
};

struct EpisodeStats {
  double ret = 0.0;
  long length = 0;  // agent-controlled steps
  bool success = false;
  bool collided = false;
};

/// Policy called only in the local phase; receives the observation and the
/// episode's private generator.
using ActFn = std::function<int(const Observation&, Rng&)>;

EpisodeStats run_episode(EscapeEnv& env, std::uint64_t seed, const ActFn& act);

struct EvalReport {
  double mean_return = 0.0;
  double mean_length = 0.0;
  double success_rate = 0.0;
  int episodes = 0;
  std::string checkpoint;
};

/// Episode i uses seed derive(seed, i), so reports are comparable across
/// policies evaluated with one seed.
EvalReport evaluate(const EnvConfig& env, const ActFn& act, int episodes, std::uint64_t seed);

ActFn random_policy();
/// Greedy in Q; keeps its own copy of the weights.
ActFn greedy_policy(QNet<float> net);

// ---------------------------------------------------------------------------
// Replay and schedules

struct Transition {
  Observation obs;
  int action = 0;
  double reward = 0.0;
  Observation next;
  bool done = false;
};

/// Fixed-capacity FIFO ring of transitions stored in 32-bit floats.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  Transition at(std::size_t i) const;  // i-th oldest

  /// Uniform sample with replacement into column-major batches.
  void sample(Rng& rng, int batch, Eigen::MatrixXf& obs, std::vector<int>& actions,
              std::vector<float>& rewards, Eigen::MatrixXf& next, std::vector<float>& done) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<float> obs_;
  std::vector<float> next_;
  std::vector<std::uint8_t> action_;
  std::vector<float> reward_;
  std::vector<std::uint8_t> done_;
};

/// Linear from `start` to `end` over the first `fraction` of `total` steps.
double linear_schedule(long step, long total, double start, double end, double fraction);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int n_env = 8;
  std::size_t buffer = 500000;
  int batch = 256;
  long warmup = 5000;           // environment steps before the first update
  int train_every = 4;          // vector steps between updates
  long target_sync = 1000;      // environment steps between target copies
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.01;
  double eps_fraction = 0.4;
  double lr = 1e-4;             // decays linearly to 0
  long eval_every = 5000;       // gradient updates
  int eval_episodes = 50;
  long total_steps = 1000000;   // environment steps
  std::uint64_t seed = 1;
  EnvConfig env;
  std::filesystem::path diagnostic_path;  // weights dumped here on divergence
};

/// Paper-scale settings with a 2e5-step budget and denser evaluation.
TrainConfig desk_config();

struct EvalRecord {
  long step = 0;
  long updates = 0;
  EvalReport report;
};

struct TrainResult {
  QNet<float> final_net;
  QNet<float> best_net;
  EvalReport best;
  std::vector<EvalRecord> history;
  long updates = 0;
  long stored = 0;
};

using TrainLog = std::function<void(const EvalRecord&)>;

/// Online and target networks with their optimizer.
class DqnAgent {
 public:
  explicit DqnAgent(std::uint64_t init_seed);

  int act(const Observation& obs, double epsilon, Rng& rng) const;
  /// Returns the mean Huber loss of the batch.
  double update(const Eigen::MatrixXf& obs, const std::vector<int>& actions,
                const std::vector<float>& rewards, const Eigen::MatrixXf& next,
                const std::vector<float>& done, double gamma, double lr);
  void sync_target() { target_ = online_; }

  const QNet<float>& online() const { return online_; }
  const QNet<float>& target() const { return target_; }

 private:
  QNet<float> online_;
  QNet<float> target_;
  Adam<float> opt_;
};

/// Deterministic DQN loop; environments are stepped round-robin.
TrainResult train(const TrainConfig& config, const TrainLog& log = {});

std::string eval_record_json(const EvalRecord& r);

// ---------------------------------------------------------------------------
// Persistence

/// Little-endian container: magic "AGPQNET\0", version, layer shapes,
/// activation names, training seed, float32 parameters and a CRC-32 of all
/// preceding bytes.
void save_model(const QNet<float>& net, const std::filesystem::path& path,
                std::uint64_t training_seed = 0);
QNet<float> load_model(const std::filesystem::path& path, std::uint64_t* training_seed = nullptr);

std::string serialize_model(const QNet<float>& net, std::uint64_t training_seed = 0);
QNet<float> parse_model(const std::string& bytes, std::uint64_t* training_seed = nullptr);

inline constexpr std::uint32_t kModelVersion = 1;

}  // namespace agpnav
