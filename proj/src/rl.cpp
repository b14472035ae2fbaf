#include "agpnav/rl.hpp"

#include "agpnav/error.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace agpnav {

double reward(double phi_t, double phi_prev, bool collided, bool exited, const RewardParams& p) {
  if (collided) return p.collision;
  if (exited) return p.success;
  if (phi_t < 0.0) return p.k_shape * (phi_t - phi_prev) - p.step_penalty;
  return 0.0;
}

// ---------------------------------------------------------------------------
// Environment

Observation EscapeEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  SimConfig sim = config_.sim;
  sim.seed = rng.next();
  const Vec2 center(0.5 * sim.width, 0.5 * sim.height);
  state_ = generate_sim(sim, center);
  heading_ = apply_action(1 + int(rng.below(8)), 1.0);
  local_ = false;
  phi_ = min_clearance(state_);
  return build_observation(state_);
}

StepResult EscapeEnv::step(int action) {
  StepResult out;
  const double prev = phi_;
  const Vec2 move = local_ ? apply_action(action, state_.robot_speed)
                           : Vec2(state_.robot_speed * heading_);
  step_in_place(state_, move);
  phi_ = min_clearance(state_);
  out.obs = build_observation(state_);
  out.collided = state_.collided;
  const bool capped = state_.frame >= config_.max_frames;
  if (!local_) {
    out.ignore = true;
    if (phi_ < 0.0) local_ = true;
    out.done = out.collided || capped;
    out.truncated = capped && !out.collided;
    return out;
  }
  const bool exited = prev < 0.0 && phi_ >= 0.0;
  out.reward = reward(phi_, prev, out.collided, exited, config_.rewards);
  out.success = exited && !out.collided;
  out.done = out.collided || exited || capped;
  out.truncated = capped && !out.collided && !exited;
  return out;
}

EpisodeStats run_episode(EscapeEnv& env, std::uint64_t seed, const ActFn& act) {
  EpisodeStats st;
  Observation obs = env.reset(seed);
  Rng rng(seed ^ 0xA5A5A5A55A5A5A5AULL);
  for (;;) {
    const int a = env.local() ? act(obs, rng) : 0;
    const StepResult r = env.step(a);
    if (!r.ignore) {
      st.ret += r.reward;
      ++st.length;
    }
    obs = r.obs;
    if (r.done) {
      st.success = r.success;
      st.collided = r.collided;
      return st;
    }
  }
}

EvalReport evaluate(const EnvConfig& config, const ActFn& act, int episodes, std::uint64_t seed) {
  EvalReport rep;
  EscapeEnv env(config);
  Rng seeds(seed);
  int wins = 0;
  for (int i = 0; i < episodes; ++i) {
    const EpisodeStats st = run_episode(env, seeds.next(), act);
    rep.mean_return += st.ret;
    rep.mean_length += double(st.length);
    wins += st.success ? 1 : 0;
  }
  rep.episodes = episodes;
  if (episodes > 0) {
    rep.mean_return /= episodes;
    rep.mean_length /= episodes;
    rep.success_rate = double(wins) / episodes;
  }
  return rep;
}

ActFn random_policy() {
  return [](const Observation&, Rng& rng) { return int(rng.below(kActionCount)); };
}

ActFn greedy_policy(QNet<float> net) {
  auto owned = std::make_shared<const QNet<float>>(std::move(net));
  return [owned](const Observation& obs, Rng&) { return policy_act(*owned, obs); };
}

// ---------------------------------------------------------------------------
// Replay

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorKind::InvalidArgument, "replay capacity must be positive");
  obs_.resize(capacity * 16);
  next_.resize(capacity * 16);
  action_.resize(capacity);
  reward_.resize(capacity);
  done_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  const std::size_t i = head_;
  for (int k = 0; k < 16; ++k) {
    obs_[i * 16 + std::size_t(k)] = float(t.obs[k]);
    next_[i * 16 + std::size_t(k)] = float(t.next[k]);
  }
  action_[i] = std::uint8_t(t.action);
  reward_[i] = float(t.reward);
  done_[i] = t.done ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw Error(ErrorKind::InvalidArgument, "replay index out of range");
  const std::size_t slot = (head_ + capacity_ - size_ + i) % capacity_;
  Transition t;
  for (int k = 0; k < 16; ++k) {
    t.obs[k] = obs_[slot * 16 + std::size_t(k)];
    t.next[k] = next_[slot * 16 + std::size_t(k)];
  }
  t.action = action_[slot];
  t.reward = reward_[slot];
  t.done = done_[slot] != 0;
  return t;
}

void ReplayBuffer::sample(Rng& rng, int batch, Eigen::MatrixXf& obs, std::vector<int>& actions,
                          std::vector<float>& rewards, Eigen::MatrixXf& next,
                          std::vector<float>& done) const {
  if (size_ == 0) throw Error(ErrorKind::InvalidArgument, "sampling an empty replay buffer");
  obs.resize(16, batch);
  next.resize(16, batch);
  actions.resize(std::size_t(batch));
  rewards.resize(std::size_t(batch));
  done.resize(std::size_t(batch));
  for (int j = 0; j < batch; ++j) {
    const std::size_t i = std::size_t(rng.below(size_));
    obs.col(j) = Eigen::Map<const Eigen::VectorXf>(&obs_[i * 16], 16);
    next.col(j) = Eigen::Map<const Eigen::VectorXf>(&next_[i * 16], 16);
    actions[std::size_t(j)] = action_[i];
    rewards[std::size_t(j)] = reward_[i];
    done[std::size_t(j)] = float(done_[i]);
  }
}

double linear_schedule(long step, long total, double start, double end, double fraction) {
  const double span = fraction * double(total);
  if (span <= 0.0) return end;
  const double p = std::clamp(double(step) / span, 0.0, 1.0);
  return start + p * (end - start);
}

// ---------------------------------------------------------------------------
// Learner

DqnAgent::DqnAgent(std::uint64_t init_seed)
    : online_([&] {
        Rng rng(init_seed);
        return QNet<float>(rng);
      }()),
      target_(online_),
      opt_(QNet<float>::kParams) {}

int DqnAgent::act(const Observation& obs, double epsilon, Rng& rng) const {
  if (rng.uniform() < epsilon) return int(rng.below(kActionCount));
  return policy_act(online_, obs);
}

double DqnAgent::update(const Eigen::MatrixXf& obs, const std::vector<int>& actions,
                        const std::vector<float>& rewards, const Eigen::MatrixXf& next,
                        const std::vector<float>& done, double gamma, double lr) {
  const Eigen::Index b = obs.cols();
  const Eigen::MatrixXf q_next = target_.forward(next);
  QNet<float>::Cache cache;
  const Eigen::MatrixXf q = online_.forward(obs, &cache);
  Eigen::MatrixXf dq = Eigen::MatrixXf::Zero(q.rows(), b);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::size_t js = std::size_t(j);
    const double y = td_target(rewards[js], done[js] != 0.0f, q_next.col(j), gamma);
    const Huber h = huber_loss_and_grad(q(actions[js], j), y);
    loss += h.loss;
    dq(actions[js], j) = float(h.grad / double(b));
  }
  loss /= double(b);
  if (!std::isfinite(loss)) return loss;
  const Eigen::VectorXf grad = online_.backward(cache, dq);
  opt_.step(online_.params(), grad, lr);
  return loss;
}

TrainConfig desk_config() {
  TrainConfig c;
  c.total_steps = 200000;
  c.eval_every = 500;
  return c;
}

TrainResult train(const TrainConfig& cfg, const TrainLog& log) {
  if (cfg.n_env < 1 || cfg.batch < 1 || cfg.train_every < 1 || cfg.target_sync < 1 ||
      cfg.eval_every < 1 || cfg.total_steps < 1)
    throw Error(ErrorKind::InvalidArgument, "training configuration must be positive");
  if (cfg.eps_start < 0.0 || cfg.eps_start > 1.0 || cfg.eps_end < 0.0 || cfg.eps_end > 1.0)
    throw Error(ErrorKind::InvalidArgument, "epsilon endpoints must lie in [0, 1]");

  Rng master(cfg.seed);
  DqnAgent agent(master.next());
  Rng env_seeds = master.split();
  Rng act_rng = master.split();
  Rng sample_rng = master.split();
  const std::uint64_t eval_seed = master.next();

  ReplayBuffer replay(cfg.buffer);
  std::vector<EscapeEnv> envs(std::size_t(cfg.n_env), EscapeEnv(cfg.env));
  std::vector<Observation> obs;
  for (auto& e : envs) obs.push_back(e.reset(env_seeds.next()));

  TrainResult res;
  bool have_best = false;
  auto run_eval = [&](long steps) {
    EvalRecord rec{steps, res.updates,
                   evaluate(cfg.env, greedy_policy(agent.online()), cfg.eval_episodes, eval_seed)};
    rec.report.checkpoint = "update-" + std::to_string(res.updates);
    const EvalReport& r = rec.report;
    if (!have_best || r.success_rate > res.best.success_rate ||
        (r.success_rate == res.best.success_rate && r.mean_return > res.best.mean_return)) {
      have_best = true;
      res.best = r;
      res.best_net = agent.online();
    }
    res.history.push_back(rec);
    if (log) log(rec);
  };

  Eigen::MatrixXf b_obs, b_next;
  std::vector<int> b_act;
  std::vector<float> b_rew, b_done;
  long steps = 0;
  for (long t = 1; steps < cfg.total_steps; ++t) {
    const double eps =
        linear_schedule(steps, cfg.total_steps, cfg.eps_start, cfg.eps_end, cfg.eps_fraction);
    for (std::size_t e = 0; e < envs.size() && steps < cfg.total_steps; ++e) {
      const int a = envs[e].local() ? agent.act(obs[e], eps, act_rng) : 0;
      const StepResult r = envs[e].step(a);
      ++steps;
      if (!r.ignore) {
        replay.push({obs[e], a, r.reward, r.obs, r.done && !r.truncated});
        ++res.stored;
      }
      obs[e] = r.done ? envs[e].reset(env_seeds.next()) : r.obs;
      if (steps % cfg.target_sync == 0) agent.sync_target();
    }
    if (steps > cfg.warmup && t % cfg.train_every == 0 && replay.size() > 0) {
      replay.sample(sample_rng, cfg.batch, b_obs, b_act, b_rew, b_next, b_done);
      const double lr = linear_schedule(steps, cfg.total_steps, cfg.lr, 0.0, 1.0);
      const double loss = agent.update(b_obs, b_act, b_rew, b_next, b_done, cfg.gamma, lr);
      if (!std::isfinite(loss)) {
        if (!cfg.diagnostic_path.empty()) save_model(agent.online(), cfg.diagnostic_path, cfg.seed);
        throw Error(ErrorKind::TrainingDiverged,
                    "non-finite loss at update " + std::to_string(res.updates + 1));
      }
      ++res.updates;
      if (res.updates % cfg.eval_every == 0) run_eval(steps);
    }
  }
  run_eval(steps);
  res.final_net = agent.online();
  return res;
}

std::string eval_record_json(const EvalRecord& r) {
  nlohmann::json j = {{"step", r.step},
                      {"updates", r.updates},
                      {"success_rate", r.report.success_rate},
                      {"mean_return", r.report.mean_return},
                      {"mean_length", r.report.mean_length},
                      {"checkpoint", r.report.checkpoint}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr char kMagic[8] = {'A', 'G', 'P', 'Q', 'N', 'E', 'T', '\0'};
constexpr const char* kActivations[3] = {"relu", "relu", "linear"};

template <typename T>
void put(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : b_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= T(std::uint8_t(b_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(ErrorKind::ModelFormat, "truncated model file");
  }
  const std::string& b_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(const std::string& bytes, std::size_t n) {
  return std::uint32_t(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(n)));
}

}  // namespace

std::string serialize_model(const QNet<float>& net, std::uint64_t training_seed) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, 3);
  for (int l = 0; l < 3; ++l) {
    put<std::uint32_t>(out, std::uint32_t(QNet<float>::kSizes[std::size_t(l)]));
    put<std::uint32_t>(out, std::uint32_t(QNet<float>::kSizes[std::size_t(l) + 1]));
    const std::string name = kActivations[l];
    put<std::uint8_t>(out, std::uint8_t(name.size()));
    out += name;
  }
  put<std::uint64_t>(out, training_seed);
  const auto& p = net.params();
  put<std::uint64_t>(out, std::uint64_t(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::uint32_t bits;
    const float f = p[i];
    std::memcpy(&bits, &f, sizeof(bits));
    put<std::uint32_t>(out, bits);
  }
  put<std::uint32_t>(out, crc(out, out.size()));
  return out;
}

QNet<float> parse_model(const std::string& bytes, std::uint64_t* training_seed) {
  Reader r(bytes);
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
    throw Error(ErrorKind::ModelFormat, "not a Q-network file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion)
    throw Error(ErrorKind::ModelFormat,
                "unsupported model format version " + std::to_string(version) +
                    " (expected " + std::to_string(kModelVersion) + ")");
  const auto layers = r.get<std::uint32_t>();
  if (layers != 3) throw Error(ErrorKind::ModelFormat, "expected 3 layers, found " + std::to_string(layers));
  for (std::size_t l = 0; l < 3; ++l) {
    const auto in = r.get<std::uint32_t>();
    const auto out = r.get<std::uint32_t>();
    if (int(in) != QNet<float>::kSizes[l] || int(out) != QNet<float>::kSizes[l + 1])
      throw Error(ErrorKind::ModelFormat, "layer " + std::to_string(l) + " shape " +
                                              std::to_string(in) + "x" + std::to_string(out) +
                                              " does not match 16-512-256-9");
    const std::string name = r.bytes(r.get<std::uint8_t>());
    if (name != kActivations[l])
      throw Error(ErrorKind::ModelFormat, "unexpected activation '" + name + "'");
  }
  const auto seed = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  if (count != std::uint64_t(QNet<float>::kParams))
    throw Error(ErrorKind::ModelFormat, "parameter count mismatch");
  QNet<float> net;
  for (Eigen::Index i = 0; i < net.params().size(); ++i) {
    const auto bits = r.get<std::uint32_t>();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    net.params()[i] = f;
  }
  const std::size_t body = r.pos();
  const auto stored = r.get<std::uint32_t>();
  if (stored != crc(bytes, body)) throw Error(ErrorKind::ModelFormat, "checksum mismatch");
  if (r.pos() != bytes.size()) throw Error(ErrorKind::ModelFormat, "trailing bytes after checksum");
  if (!net.params().allFinite()) throw Error(ErrorKind::ModelFormat, "non-finite parameters");
  if (training_seed) *training_seed = seed;
  return net;
}

void save_model(const QNet<float>& net, const std::filesystem::path& path,
                std::uint64_t training_seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  const std::string bytes = serialize_model(net, training_seed);
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f) throw Error(ErrorKind::InvalidArgument, "write failed: " + path.string());
}

QNet<float> load_model(const std::filesystem::path& path, std::uint64_t* training_seed) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::ModelFormat, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str(), training_seed);
}

}  // namespace agpnav
