#pragma once

#include "agpnav/navigator.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace agpnav {

inline constexpr int kProtocolVersion = 1;

/// Builds the simulation a session starts from (and returns to on reset).
using StateFactory = std::function<SimState(std::uint64_t seed)>;

/// One operator session: a simulation, its navigator and the commands
/// waiting for the next frame boundary. Not thread-safe; one owner drives it.
class Session {
 public:
  Session(StateFactory factory, NavConfig nav, std::optional<PolicyHandle> policy,
          std::uint64_t seed = 1);

  /// Full state message sent once on connect.
  std::string snapshot() const;

  /// Validates one client message. Valid commands are queued and acknowledged
  /// with the frame whose telemetry first reflects them; invalid ones get an
  /// error reply and leave the session untouched.
  std::string handle(const std::string& message);

  /// Applies queued commands, plans the current frame and advances the
  /// simulation. Returns the telemetry of the planned frame, or nothing while
  /// paused (the frame counter does not move).
  std::optional<std::string> tick();

  bool paused() const { return paused_; }
  long frame() const { return state_.frame; }
  const SimState& state() const { return state_; }
  const NavState& nav() const { return nav_; }
  const NavConfig& config() const { return config_; }

 private:
  struct Pending;
  void apply(const Pending& cmd);
  std::string render(const char* type, const std::vector<Event>& events,
                     const NavOutput* out) const;

  StateFactory factory_;
  NavConfig config_;
  std::optional<PolicyHandle> policy_;
  std::uint64_t seed_;
  SimState state_;
  NavState nav_;
  bool paused_ = false;
  std::deque<std::shared_ptr<const Pending>> queue_;
  std::vector<Event> carried_;  // simulator events of the step into this frame
};

struct ServeOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  double fps = 25.0;
};

/// WebSocket server: every connection owns one Session stepped at `fps`.
class Server {
 public:
  using SessionMaker = std::function<std::unique_ptr<Session>()>;

  Server(ServeOptions options, SessionMaker make);
  ~Server();

  /// Bound port, valid after construction.
  unsigned short port() const;

  /// Blocks until stop() or SIGINT/SIGTERM when `handle_signals`.
  void run(bool handle_signals = false);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace agpnav
