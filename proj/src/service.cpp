#include "agpnav/service.hpp"

#include "agpnav/error.hpp"

#include <json.hpp>

#include <cmath>

namespace agpnav {

using nlohmann::json;

struct Session::Pending {
  std::string kind;
  Vec2 point = Vec2::Zero();
  int obstacle = -1;
  double delta = 0.0;
  Controller controller = Controller::None;
  std::uint64_t seed = 0;
};

namespace {

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

json error_reply(const json& id, const std::string& message) {
  return {{"type", "error"}, {"proto", kProtocolVersion}, {"id", id}, {"message", message}};
}

double number_field(const json& msg, const char* key) {
  const auto it = msg.find(key);
  if (it == msg.end() || !it->is_number())
    throw Error(ErrorKind::InvalidCommand, std::string("missing numeric field '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidCommand, std::string(key) + " is not finite");
  return v;
}

Vec2 point_field(const json& msg, const Bounds& b) {
  const Vec2 p(number_field(msg, "x"), number_field(msg, "y"));
  if (!b.contains(p)) throw Error(ErrorKind::InvalidCommand, "point outside the arena");
  return p;
}

}  // namespace

Session::Session(StateFactory factory, NavConfig nav, std::optional<PolicyHandle> policy,
                 std::uint64_t seed)
    : factory_(std::move(factory)), config_(nav), policy_(std::move(policy)), seed_(seed) {
  if (config_.controller == Controller::Rl && !policy_)
    throw Error(ErrorKind::InvalidArgument, "rl controller without a policy");
  state_ = factory_(seed);
}

std::string Session::snapshot() const { return render("snapshot", {}, nullptr); }

std::string Session::handle(const std::string& message) {
  json msg;
  try {
    msg = json::parse(message);
  } catch (const json::parse_error& e) {
    return error_reply(nullptr, std::string("malformed JSON: ") + e.what()).dump();
  }
  const json id = msg.is_object() && msg.contains("id") ? msg["id"] : json(nullptr);
  try {
    if (!msg.is_object()) throw Error(ErrorKind::InvalidCommand, "message must be an object");
    if (msg.value("proto", -1) != kProtocolVersion)
      throw Error(ErrorKind::InvalidCommand, "unsupported proto (expected 1)");
    if (msg.value("type", "") != "command")
      throw Error(ErrorKind::InvalidCommand, "expected type 'command'");
    auto cmd = std::make_shared<Pending>();
    cmd->kind = msg.value("kind", "");
    const Bounds& b = state_.bounds;
    if (cmd->kind == "set_target") {
      cmd->point = point_field(msg, b);
    } else if (cmd->kind == "add_via") {
      cmd->point = point_field(msg, b);
      for (const auto& o : state_.obstacles) {
        double r = o.safety_radius;
        if (auto it = nav_.inflation.find(o.id); it != nav_.inflation.end()) r += it->second;
        if ((cmd->point - o.center).norm() < r)
          throw Error(ErrorKind::InvalidCommand,
                      "via-point inside the zone of obstacle " + std::to_string(o.id));
      }
    } else if (cmd->kind == "inflate_obstacle") {
      cmd->obstacle = int(number_field(msg, "obstacle"));
      cmd->delta = number_field(msg, "delta");
      if (cmd->delta < 0.0) throw Error(ErrorKind::InvalidCommand, "delta must be >= 0");
      bool known = false;
      for (const auto& o : state_.obstacles) known = known || o.id == cmd->obstacle;
      if (!known)
        throw Error(ErrorKind::InvalidCommand, "unknown obstacle " + std::to_string(cmd->obstacle));
    } else if (cmd->kind == "switch_controller") {
      try {
        cmd->controller = controller_from_string(msg.value("controller", ""));
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidCommand, e.what());
      }
      if (cmd->controller == Controller::Rl && !policy_)
        throw Error(ErrorKind::InvalidCommand, "no rl policy loaded");
    } else if (cmd->kind == "reset") {
      const auto it = msg.find("seed");
      if (it != msg.end() && !it->is_number_unsigned())
        throw Error(ErrorKind::InvalidCommand, "seed must be a non-negative integer");
      cmd->seed = it != msg.end() ? it->get<std::uint64_t>() : seed_;
    } else if (cmd->kind != "clear_via" && cmd->kind != "pause" && cmd->kind != "resume") {
      throw Error(ErrorKind::InvalidCommand, "unknown command '" + cmd->kind + "'");
    }
    queue_.push_back(cmd);
    return json{{"type", "ack"},
                {"proto", kProtocolVersion},
                {"id", id},
                {"kind", cmd->kind},
                {"frame", state_.frame}}
        .dump();
  } catch (const Error& e) {
    return error_reply(id, e.what()).dump();
  } catch (const json::exception& e) {
    return error_reply(id, e.what()).dump();
  }
}

void Session::apply(const Pending& cmd) {
  if (cmd.kind == "set_target") {
    state_.targets = {Target{cmd.point, Vec2::Zero()}};
    nav_.target = 0;
    nav_.finished = false;
    nav_.timed_out = false;
    nav_.frames = 0;
    nav_.have_plan = false;
    nav_.replan_reason = "target";
  } else if (cmd.kind == "add_via") {
    nav_.via.push_back(cmd.point);
    nav_.replan_reason = "via";
  } else if (cmd.kind == "clear_via") {
    nav_.via.clear();
    nav_.replan_reason = "via";
  } else if (cmd.kind == "inflate_obstacle") {
    nav_.inflation[cmd.obstacle] = cmd.delta;
    nav_.replan_reason = "inflate";
  } else if (cmd.kind == "switch_controller") {
    config_.controller = cmd.controller;
    nav_.mode = NavMode::Global;
    nav_.rule = {};
    nav_.local_label.clear();
    nav_.replan_reason = "controller";
  } else if (cmd.kind == "pause") {
    paused_ = true;
  } else if (cmd.kind == "resume") {
    paused_ = false;
  } else if (cmd.kind == "reset") {
    const long frame = state_.frame;
    state_ = factory_(cmd.seed);
    state_.frame = frame;
    nav_ = {};
    carried_.clear();
  }
}

std::optional<std::string> Session::tick() {
  while (!queue_.empty()) {
    apply(*queue_.front());
    queue_.pop_front();
  }
  if (paused_) return std::nullopt;
  const NavOutput out =
      nav_step(state_, nav_, config_, policy_ ? &policy_->net() : nullptr);
  std::vector<Event> events = std::move(carried_);
  events.insert(events.end(), out.events.begin(), out.events.end());
  std::string msg = render("telemetry", events, &out);
  step_in_place(state_, out.displacement);
  carried_ = state_.events;
  return msg;
}

std::string Session::render(const char* type, const std::vector<Event>& events,
                            const NavOutput* out) const {
  json obstacles = json::array();
  for (const auto& o : state_.obstacles) {
    double zone = o.safety_radius;
    if (auto it = nav_.inflation.find(o.id); it != nav_.inflation.end()) zone += it->second;
    obstacles.push_back({{"id", o.id},
                         {"x", o.center.x()},
                         {"y", o.center.y()},
                         {"vx", o.velocity.x()},
                         {"vy", o.velocity.y()},
                         {"r", o.physical_radius},
                         {"zone", zone},
                         {"kind", to_string(o.kind)}});
  }
  json plan = json::array();
  if (nav_.have_plan)
    for (const Vec2& w : nav_.plan.waypoints) plan.push_back(point(w));
  json targets = json::array();
  for (const auto& t : state_.targets) targets.push_back(point(t.position));
  json via = json::array();
  for (const Vec2& v : nav_.via) via.push_back(point(v));
  json ev = json::array();
  for (const auto& e : events) ev.push_back(json::parse(event_json(e)));
  const double phi = min_clearance(state_);

  json j = {{"type", type},
            {"proto", kProtocolVersion},
            {"frame", state_.frame},
            {"robot",
             {{"x", state_.robot.x()},
              {"y", state_.robot.y()},
              {"heading", std::atan2(state_.robot_dir.y(), state_.robot_dir.x())},
              {"radius", state_.robot_radius}}},
            {"phi", std::isfinite(phi) ? json(phi) : json(nullptr)},
            {"mode", to_string(nav_.mode)},
            {"label", nav_.local_label},
            {"controller", to_string(config_.controller)},
            {"paused", paused_},
            {"obstacles", std::move(obstacles)},
            {"plan", std::move(plan)},
            {"targets", std::move(targets)},
            {"target_index", nav_.target},
            {"via", std::move(via)},
            {"collisions", state_.collisions},
            {"finished", nav_.finished},
            {"events", std::move(ev)}};
  if (out) {
    j["command"] = {{"azimuth", out->command.azimuth},
                    {"tilt", out->command.tilt},
                    {"amplitude", out->command.amplitude},
                    {"omega", out->command.omega}};
  }
  if (std::string(type) == "snapshot") {
    j["width"] = state_.bounds.width();
    j["height"] = state_.bounds.height();
  }
  return j.dump();
}

}  // namespace agpnav
