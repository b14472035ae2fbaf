#include "agpnav/scene.hpp"

#include "agpnav/error.hpp"
#include "agpnav/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_set>

namespace agpnav {

using nlohmann::json;

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::GenerationFailed: return "generation-failed";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::TangentInfeasible: return "tangent-infeasible";
    case ErrorKind::EndpointInZone: return "endpoint-in-zone";
    case ErrorKind::PlanFailed: return "plan-failed";
    case ErrorKind::InvalidCommand: return "invalid-command";
    case ErrorKind::ModelFormat: return "model-format";
    case ErrorKind::NavigationFailed: return "navigation-failed";
    case ErrorKind::TrainingDiverged: return "training-diverged";
  }
  return "unknown";
}

const char* to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Static: return "static";
    case ObstacleKind::Dynamic: return "dynamic";
    case ObstacleKind::BoundaryCell: return "boundary";
  }
  return "static";
}

ObstacleKind obstacle_kind_from_string(const std::string& s) {
  if (s == "static") return ObstacleKind::Static;
  if (s == "dynamic") return ObstacleKind::Dynamic;
  if (s == "boundary") return ObstacleKind::BoundaryCell;
  throw Error(ErrorKind::ParseError, "unknown obstacle kind '" + s + "'");
}

const Obstacle* Scene::find(int id) const {
  for (const auto& o : obstacles)
    if (o.id == id) return &o;
  return nullptr;
}

int Scene::next_id() const {
  int id = 0;
  for (const auto& o : obstacles) id = std::max(id, o.id);
  return id + 1;
}

void validate(const Scene& scene) {
  if (!(scene.width > 0.0) || !(scene.height > 0.0))
    throw Error(ErrorKind::InvalidArgument, "scene dimensions must be positive");
  std::unordered_set<int> ids;
  const Bounds b = scene.bounds();
  for (const auto& o : scene.obstacles) {
    if (!ids.insert(o.id).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate obstacle id " + std::to_string(o.id));
    if (!all_finite(o.center) || !all_finite(o.velocity) || !std::isfinite(o.safety_radius))
      throw Error(ErrorKind::InvalidArgument, "non-finite obstacle " + std::to_string(o.id));
    // Cells of a contour drawn along the arena edge straddle it.
    const double slack = o.kind == ObstacleKind::BoundaryCell ? o.physical_radius : 0.0;
    if (!b.contains(o.center, slack))
      throw Error(ErrorKind::InvalidArgument,
                  "obstacle " + std::to_string(o.id) + " center outside bounds");
    if (o.physical_radius < 0.0 || o.safety_radius <= 0.0 ||
        o.safety_radius < o.physical_radius)
      throw Error(ErrorKind::InvalidArgument,
                  "obstacle " + std::to_string(o.id) + " has inconsistent radii");
  }
  if (scene.flow) {
    const auto& f = *scene.flow;
    if (!(f.wall_coupling > 0.0 && f.wall_coupling <= 1.0))
      throw Error(ErrorKind::InvalidArgument, "flow alpha_c must lie in (0, 1]");
    if (f.speed < 0.0) throw Error(ErrorKind::InvalidArgument, "flow speed must be >= 0");
  }
}

BinaryMask::BinaryMask(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw Error(ErrorKind::InvalidArgument, "mask dimensions must be > 0");
  bits.assign(std::size_t(w) * std::size_t(h), 0);
}

namespace {

void require_finite(std::initializer_list<double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite input");
}

}  // namespace

double bbox_safety_radius(double w, double h, double robot_radius) {
  require_finite({w, h, robot_radius});
  if (w < 0.0 || h < 0.0 || robot_radius <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "bbox_safety_radius needs w, h >= 0 and R > 0");
  return 0.5 * std::hypot(w, h) + robot_radius;
}

double circle_safety_radius(double obstacle_radius, double robot_radius) {
  require_finite({obstacle_radius, robot_radius});
  if (obstacle_radius < 0.0 || robot_radius <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "circle_safety_radius needs r >= 0 and R > 0");
  return obstacle_radius + robot_radius;
}

std::vector<Obstacle> extract_obstacles(const BinaryMask& mask, double robot_radius) {
  if (mask.width <= 0 || mask.height <= 0 ||
      mask.bits.size() != std::size_t(mask.width) * std::size_t(mask.height))
    throw Error(ErrorKind::InvalidArgument, "mask is empty or malformed");

  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<Obstacle> out;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t idx = std::size_t(y) * mask.width + x;
      if (!mask.bits[idx] || seen[idx]) continue;
      int minx = x, maxx = x, miny = y, maxy = y;
      seen[idx] = 1;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        minx = std::min(minx, cx);
        maxx = std::max(maxx, cx);
        miny = std::min(miny, cy);
        maxy = std::max(maxy, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
            const std::size_t n = std::size_t(ny) * mask.width + nx;
            if (mask.bits[n] && !seen[n]) {
              seen[n] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      // Pixel x covers [x, x + 1), so the box spans [min, max + 1).
      const double w = maxx - minx + 1;
      const double h = maxy - miny + 1;
      Obstacle o;
      o.id = int(out.size()) + 1;
      o.center = Vec2(minx + 0.5 * w, miny + 0.5 * h);
      o.physical_radius = 0.5 * std::hypot(w, h);
      o.safety_radius = bbox_safety_radius(w, h, robot_radius);
      o.kind = ObstacleKind::Static;
      out.push_back(o);
    }
  }
  return out;
}

std::vector<std::pair<long, long>> boundary_cells(const std::vector<Vec2>& contour,
                                                  double cell) {
  if (!(cell > 0.0) || !std::isfinite(cell))
    throw Error(ErrorKind::InvalidArgument, "cell size must be > 0");
  std::vector<std::pair<long, long>> cells;
  std::set<std::pair<long, long>> seen;
  auto visit = [&](long i, long j) {
    if (seen.insert({i, j}).second) cells.emplace_back(i, j);
  };
  auto cell_of = [cell](double v) { return long(std::floor(v / cell)); };

  if (contour.size() == 1) visit(cell_of(contour[0].x()), cell_of(contour[0].y()));
  for (std::size_t k = 0; k + 1 < contour.size(); ++k) {
    // Grid traversal (Amanatides & Woo) over half-open cells.
    const Vec2 a = contour[k], b = contour[k + 1];
    long i = cell_of(a.x()), j = cell_of(a.y());
    const long iend = cell_of(b.x()), jend = cell_of(b.y());
    visit(i, j);
    const Vec2 d = b - a;
    const int si = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
    const int sj = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    double tmax_x = si == 0 ? inf : (((si > 0 ? i + 1 : i) * cell) - a.x()) / d.x();
    double tmax_y = sj == 0 ? inf : (((sj > 0 ? j + 1 : j) * cell) - a.y()) / d.y();
    const double tdx = si == 0 ? inf : cell / std::abs(d.x());
    const double tdy = sj == 0 ? inf : cell / std::abs(d.y());
    const long steps = std::abs(iend - i) + std::abs(jend - j);
    for (long s = 0; s < steps; ++s) {
      if (tmax_x < tmax_y) {
        i += si;
        tmax_x += tdx;
      } else {
        j += sj;
        tmax_y += tdy;
      }
      visit(i, j);
    }
  }
  return cells;
}

std::vector<Obstacle> discretize_boundary(const std::vector<Vec2>& contour, double cell,
                                          double robot_radius, int first_id) {
  if (contour.empty()) return {};
  const auto cells = boundary_cells(contour, cell);
  // Cell diagonal is sqrt(2) * g, so the radius is half of it plus R.
  const double physical = 0.5 * std::sqrt(2.0) * cell;
  const double safety = physical + robot_radius;
  std::vector<Obstacle> out;
  out.reserve(cells.size());
  int id = first_id;
  for (auto [i, j] : cells) {
    Obstacle o;
    o.id = id++;
    o.center = Vec2((double(i) + 0.5) * cell, (double(j) + 0.5) * cell);
    o.physical_radius = physical;
    o.safety_radius = safety;
    o.kind = ObstacleKind::BoundaryCell;
    out.push_back(o);
  }
  return out;
}

Vec2 arena_start(double width, double height) { return {0.05 * width, 0.05 * height}; }
Vec2 arena_end(double width, double height) { return {0.95 * width, 0.95 * height}; }

Scene generate_arena(const ArenaSpec& spec) {
  if (spec.n_obstacles < 0 || !(spec.obstacle_radius >= 0.0) || !(spec.width > 0.0) ||
      !(spec.height > 0.0))
    throw Error(ErrorKind::InvalidArgument, "invalid arena specification");
  const double zone = circle_safety_radius(spec.obstacle_radius, spec.robot_radius);
  const double keep_clear = zone + spec.robot_radius;
  const Vec2 s = arena_start(spec.width, spec.height);
  const Vec2 e = arena_end(spec.width, spec.height);
  if (2.0 * zone >= spec.width || 2.0 * zone >= spec.height)
    throw Error(ErrorKind::GenerationFailed, "obstacle zones do not fit the arena");

  Scene scene;
  scene.width = spec.width;
  scene.height = spec.height;
  scene.seed = spec.seed;
  scene.start = s;
  scene.targets.push_back(Target{e, Vec2::Zero()});

  Rng rng(spec.seed);
  for (int n = 0; n < spec.n_obstacles; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      const Vec2 c(rng.uniform(zone, spec.width - zone), rng.uniform(zone, spec.height - zone));
      if ((c - s).norm() < keep_clear || (c - e).norm() < keep_clear) continue;
      bool overlaps = false;
      for (const auto& o : scene.obstacles) {
        if ((o.center - c).norm() < o.safety_radius + zone) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) continue;
      Obstacle o;
      o.id = n + 1;
      o.center = c;
      o.physical_radius = spec.obstacle_radius;
      o.safety_radius = zone;
      o.kind = ObstacleKind::Static;
      scene.obstacles.push_back(o);
      placed = true;
    }
    if (!placed)
      throw Error(ErrorKind::GenerationFailed,
                  "could not place obstacle " + std::to_string(n + 1) + " after " +
                      std::to_string(spec.max_attempts) + " attempts");
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Scene JSON

namespace {

json number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) return json(std::int64_t(v));
  return json(v);
}

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, "scene field '" + where + "': " + what);
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number()) fail(where.empty() ? key : where + "." + key, "expected a number");
  return v.get<double>();
}

Vec2 get_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(where, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["version"] = 1;
  doc["width"] = number(scene.width);
  doc["height"] = number(scene.height);
  doc["seed"] = scene.seed;
  json obstacles = json::array();
  for (const auto& o : scene.obstacles) {
    obstacles.push_back({{"id", o.id},
                         {"cx", o.center.x()},
                         {"cy", o.center.y()},
                         {"r", o.physical_radius},
                         {"safety_r", o.safety_radius},
                         {"vx", o.velocity.x()},
                         {"vy", o.velocity.y()},
                         {"kind", to_string(o.kind)}});
  }
  doc["obstacles"] = std::move(obstacles);
  json boundaries = json::array();
  for (const auto& line : scene.boundaries) {
    json pts = json::array();
    for (const auto& p : line) pts.push_back(point(p));
    boundaries.push_back(std::move(pts));
  }
  doc["boundaries"] = std::move(boundaries);
  if (scene.flow) {
    doc["flow"] = {{"u", scene.flow->speed},
                   {"dir", point(scene.flow->direction)},
                   {"alpha_c", scene.flow->wall_coupling}};
  } else {
    doc["flow"] = nullptr;
  }
  if (scene.start) doc["start"] = point(*scene.start);
  if (!scene.targets.empty()) {
    json targets = json::array();
    for (const auto& t : scene.targets)
      targets.push_back({{"x", t.position.x()},
                         {"y", t.position.y()},
                         {"vx", t.velocity.x()},
                         {"vy", t.velocity.y()}});
    doc["targets"] = std::move(targets);
  }
  return doc.dump(2);
}

Scene scene_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object()) fail("<root>", "expected an object");
  Scene scene;
  const double version = get_number(doc, "version", "");
  if (version != 1.0) fail("version", "unsupported version " + std::to_string(version));
  scene.width = get_number(doc, "width", "");
  scene.height = get_number(doc, "height", "");
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer()) fail("seed", "expected an integer");
    scene.seed = it->get<std::uint64_t>();
  }
  const json& obstacles = member(doc, "obstacles", "");
  if (!obstacles.is_array()) fail("obstacles", "expected an array");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string where = "obstacles[" + std::to_string(i) + "]";
    const json& o = obstacles[i];
    Obstacle ob;
    const json& id = member(o, "id", where);
    if (!id.is_number_integer()) fail(where + ".id", "expected an integer");
    ob.id = id.get<int>();
    ob.center = Vec2(get_number(o, "cx", where), get_number(o, "cy", where));
    ob.physical_radius = get_number(o, "r", where);
    ob.safety_radius = get_number(o, "safety_r", where);
    ob.velocity = Vec2(get_number(o, "vx", where), get_number(o, "vy", where));
    const json& kind = member(o, "kind", where);
    if (!kind.is_string()) fail(where + ".kind", "expected a string");
    ob.kind = obstacle_kind_from_string(kind.get<std::string>());
    scene.obstacles.push_back(ob);
  }
  if (auto it = doc.find("boundaries"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) fail("boundaries", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& line = (*it)[i];
      const std::string where = "boundaries[" + std::to_string(i) + "]";
      if (!line.is_array()) fail(where, "expected an array of points");
      std::vector<Vec2> pts;
      for (std::size_t k = 0; k < line.size(); ++k)
        pts.push_back(get_point(line[k], where + "[" + std::to_string(k) + "]"));
      scene.boundaries.push_back(std::move(pts));
    }
  }
  if (auto it = doc.find("flow"); it != doc.end() && !it->is_null()) {
    FlowModel f;
    f.speed = get_number(*it, "u", "flow");
    f.direction = get_point(member(*it, "dir", "flow"), "flow.dir");
    f.wall_coupling = get_number(*it, "alpha_c", "flow");
    scene.flow = f;
  }
  if (auto it = doc.find("start"); it != doc.end() && !it->is_null())
    scene.start = get_point(*it, "start");
  if (auto it = doc.find("targets"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) fail("targets", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "targets[" + std::to_string(i) + "]";
      const json& t = (*it)[i];
      Target tg;
      tg.position = Vec2(get_number(t, "x", where), get_number(t, "y", where));
      if (t.contains("vx")) tg.velocity.x() = get_number(t, "vx", where);
      if (t.contains("vy")) tg.velocity.y() = get_number(t, "vy", where);
      scene.targets.push_back(tg);
    }
  }
  return scene;
}

void scene_save(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << scene_to_json(scene) << '\n';
}

Scene scene_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// PGM / PBM masks

namespace {

class NetpbmReader {
 public:
  explicit NetpbmReader(const std::string& bytes) : data_(bytes) {}

  long header_int() {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(static_cast<unsigned char>(data_[pos_])))
      throw Error(ErrorKind::ParseError, "malformed netpbm header");
    long v = 0;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_])))
      v = v * 10 + (data_[pos_++] - '0');
    return v;
  }
  void skip_single_whitespace() { ++pos_; }
  std::size_t pos() const { return pos_; }
  const std::string& data() const { return data_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  std::size_t pos_ = 2;
};

}  // namespace

BinaryMask parse_mask(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw Error(ErrorKind::ParseError, "not a PGM/PBM file");
  const char type = bytes[1];
  if (type != '1' && type != '2' && type != '4' && type != '5')
    throw Error(ErrorKind::ParseError, std::string("unsupported netpbm type P") + type);
  NetpbmReader r(bytes);
  const long w = r.header_int();
  const long h = r.header_int();
  if (w <= 0 || h <= 0) throw Error(ErrorKind::ParseError, "mask dimensions must be > 0");
  long maxval = 1;
  if (type == '2' || type == '5') {
    maxval = r.header_int();
    if (maxval <= 0 || maxval > 255)
      throw Error(ErrorKind::ParseError, "only 8-bit PGM is supported");
  }
  BinaryMask mask{int(w), int(h)};
  if (type == '4' || type == '5') {
    r.skip_single_whitespace();
    std::size_t p = r.pos();
    const std::string& d = r.data();
    if (type == '5') {
      if (d.size() < p + std::size_t(w * h)) throw Error(ErrorKind::ParseError, "truncated PGM");
      for (long i = 0; i < w * h; ++i)
        mask.bits[i] = static_cast<unsigned char>(d[p + i]) >= 128 ? 1 : 0;
    } else {
      const long row_bytes = (w + 7) / 8;
      if (d.size() < p + std::size_t(row_bytes * h))
        throw Error(ErrorKind::ParseError, "truncated PBM");
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
          const auto byte = static_cast<unsigned char>(d[p + y * row_bytes + x / 8]);
          mask.set(int(x), int(y), (byte >> (7 - x % 8)) & 1);
        }
    }
  } else {
    std::istringstream in(bytes.substr(r.pos()));
    for (long i = 0; i < w * h; ++i) {
      long v;
      if (!(in >> v)) throw Error(ErrorKind::ParseError, "truncated ASCII netpbm");
      mask.bits[i] = (type == '1') ? (v != 0) : (v >= 128);
    }
  }
  return mask;
}

BinaryMask load_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mask(ss.str());
}

}  // namespace agpnav
