#include "world.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "util.hpp"

namespace mcnav::world {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double deg2rad(double d) { return d * kPi / 180.0; }

// 16-connected neighborhood: axis, diagonal and knight moves.
struct Move {
  int dx, dy;
  double cost;  // in cells
};

const std::vector<Move>& moves16() {
  static const std::vector<Move> m = [] {
    std::vector<Move> v;
    const double s2 = std::sqrt(2.0), s5 = std::sqrt(5.0);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        v.push_back({dx, dy, (dx == 0 || dy == 0) ? 1.0 : s2});
      }
    const int knights[8][2] = {{1, 2},  {2, 1},  {-1, 2},  {-2, 1},
                               {1, -2}, {2, -1}, {-1, -2}, {-2, -1}};
    for (auto& k : knights) v.push_back({k[0], k[1], s5});
    return v;
  }();
  return m;
}

// Diagonals must not cut obstacle corners; knight moves need the two cells
// hugging the line free.
bool move_allowed(const Scene& scene, int x, int y, const Move& m) {
  const int nx = x + m.dx, ny = y + m.dy;
  if (scene.obstacle_at(nx, ny)) return false;
  const int ax = std::abs(m.dx), ay = std::abs(m.dy);
  if (ax == 1 && ay == 1) {
    return !scene.obstacle_at(x + m.dx, y) && !scene.obstacle_at(x, y + m.dy);
  }
  if (ax + ay == 3) {
    const int sx = m.dx > 0 ? 1 : -1, sy = m.dy > 0 ? 1 : -1;
    if (ax == 2) return !scene.obstacle_at(x + sx, y) && !scene.obstacle_at(x + sx, y + sy);
    return !scene.obstacle_at(x, y + sy) && !scene.obstacle_at(x + sx, y + sy);
  }
  return true;
}

struct HeapEntry {
  double cost;
  int idx;
  bool operator>(const HeapEntry& o) const { return cost > o.cost; }
};

GeodesicField dijkstra(const Scene& scene, const std::vector<std::pair<int, double>>& sources) {
  GeodesicField f;
  f.width = scene.width;
  f.height = scene.height;
  f.resolution_m = scene.resolution_m;
  f.cost.assign(static_cast<std::size_t>(scene.width) * scene.height, kInf);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  for (auto [idx, c] : sources) {
    if (c < f.cost[idx]) {
      f.cost[idx] = c;
      heap.push({c, idx});
    }
  }
  const double res = scene.resolution_m;
  while (!heap.empty()) {
    auto [cost, idx] = heap.top();
    heap.pop();
    if (cost > f.cost[idx]) continue;
    const int x = idx % scene.width, y = idx / scene.width;
    for (const Move& m : moves16()) {
      if (!move_allowed(scene, x, y, m)) continue;
      const int nidx = (y + m.dy) * scene.width + (x + m.dx);
      const double nc = cost + m.cost * res;
      if (nc < f.cost[nidx]) {
        f.cost[nidx] = nc;
        heap.push({nc, nidx});
      }
    }
  }
  return f;
}

std::optional<int> snap_to_free(const Scene& scene, double x, double y, double max_snap = 0.3) {
  const int cx = scene.cell_x(x), cy = scene.cell_y(y);
  const int r = static_cast<int>(std::ceil(max_snap / scene.resolution_m));
  double best = kInf;
  int best_idx = -1;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int nx = cx + dx, ny = cy + dy;
      if (scene.obstacle_at(nx, ny)) continue;
      const double ccx = (nx + 0.5) * scene.resolution_m;
      const double ccy = (ny + 0.5) * scene.resolution_m;
      const double d = std::hypot(ccx - x, ccy - y);
      if (d <= max_snap + scene.resolution_m && d < best) {
        best = d;
        best_idx = ny * scene.width + nx;
      }
    }
  if (best_idx < 0) return std::nullopt;
  return best_idx;
}

}  // namespace

const char* action_name(Action a) {
  switch (a) {
    case Action::MoveForward: return "move_forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::Stop: return "stop";
  }
  return "?";
}

std::optional<Action> action_from_name(const std::string& s) {
  if (s == "move_forward") return Action::MoveForward;
  if (s == "turn_left") return Action::TurnLeft;
  if (s == "turn_right") return Action::TurnRight;
  if (s == "stop") return Action::Stop;
  return std::nullopt;
}

double heading_delta(double from_deg, double to_deg) {
  double d = std::fmod(to_deg - from_deg, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

const SceneObject* Scene::find_object(const std::string& id) const {
  for (const SceneObject& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const SceneObject& Scene::goal_object() const {
  const SceneObject* o = find_object(goal_object_id);
  if (!o) throw SceneError("scene has no object with goal_object_id '" + goal_object_id + "'");
  return *o;
}

void Scene::validate() const {
  if (width <= 0 || height <= 0) throw SceneError("scene bitmap is empty");
  if (!(resolution_m > 0.0)) throw SceneError("scene resolution must be > 0");
  if (obstacles.size() != static_cast<std::size_t>(width) * height)
    throw SceneError("scene bitmap is not rectangular");
  const SceneObject* goal = find_object(goal_object_id);
  if (!goal) throw SceneError("goal object '" + goal_object_id + "' not found");
  if (!goal->is_goal) throw SceneError("goal object is not flagged is_goal");
  for (const SceneObject& o : objects) {
    if (!(o.radius > 0.0)) throw SceneError("object '" + o.id + "' has non-positive radius");
    auto check_tokens = [&](const std::vector<std::string>& toks) {
      for (const std::string& t : toks) {
        if (t.empty()) throw SceneError("object '" + o.id + "' has an empty attribute token");
        for (char c : t)
          if (c >= 'A' && c <= 'Z')
            throw SceneError("object '" + o.id + "' attribute '" + t + "' is not lowercase");
      }
    };
    check_tokens(o.intrinsic_attrs);
    check_tokens(o.extrinsic_attrs);
  }
  if (start_pose.x < 0 || start_pose.y < 0 || start_pose.x > width_m() || start_pose.y > height_m())
    throw SceneError("start pose outside scene bounds");
  if (obstacle_at(cell_x(start_pose.x), cell_y(start_pose.y)))
    throw SceneError("start cell is not free");
}

bool disc_collides(const Scene& scene, double x, double y, double radius) {
  if (x - radius < 0.0 || y - radius < 0.0 || x + radius > scene.width_m() ||
      y + radius > scene.height_m())
    return true;
  const double res = scene.resolution_m;
  const int x0 = std::max(0, scene.cell_x(x - radius));
  const int x1 = std::min(scene.width - 1, scene.cell_x(x + radius));
  const int y0 = std::max(0, scene.cell_y(y - radius));
  const int y1 = std::min(scene.height - 1, scene.cell_y(y + radius));
  for (int cy = y0; cy <= y1; ++cy)
    for (int cx = x0; cx <= x1; ++cx) {
      if (!scene.obstacle_at(cx, cy)) continue;
      // Distance from (x, y) to the cell rectangle.
      const double rx0 = cx * res, rx1 = (cx + 1) * res;
      const double ry0 = cy * res, ry1 = (cy + 1) * res;
      const double dx = std::max({rx0 - x, 0.0, x - rx1});
      const double dy = std::max({ry0 - y, 0.0, y - ry1});
      if (dx * dx + dy * dy <= radius * radius) return true;
    }
  return false;
}

StepResult step(const Scene& scene, const AgentState& state, Action action) {
  StepResult r;
  r.state = state;
  r.state.step_count += 1;
  switch (action) {
    case Action::TurnLeft:
      r.state.theta_deg = wrap_degrees(state.theta_deg + kTurnDegrees);
      break;
    case Action::TurnRight:
      r.state.theta_deg = wrap_degrees(state.theta_deg - kTurnDegrees);
      break;
    case Action::Stop:
      break;
    case Action::MoveForward: {
      const double dx = std::cos(deg2rad(state.theta_deg));
      const double dy = std::sin(deg2rad(state.theta_deg));
      const double tx = state.x + dx * kStepMeters;
      const double ty = state.y + dy * kStepMeters;
      // Sweep the agent disc along the motion at sub-cell increments.
      const int samples = 10;
      bool blocked = false;
      for (int i = 1; i <= samples && !blocked; ++i) {
        const double t = kStepMeters * i / samples;
        blocked = disc_collides(scene, state.x + dx * t, state.y + dy * t, kAgentRadius);
      }
      if (blocked) {
        r.collided = true;
      } else {
        r.state.x = tx;
        r.state.y = ty;
        r.state.path_length += kStepMeters;
      }
      break;
    }
  }
  return r;
}

namespace {

// First occupied bitmap cell along the ray, as a distance; ray starts inside
// the scene. Amanatides-Woo traversal.
std::optional<double> raycast_bitmap(const Scene& scene, double ox, double oy, double dx,
                                     double dy, double max_range) {
  const double res = scene.resolution_m;
  int cx = scene.cell_x(ox), cy = scene.cell_y(oy);
  if (scene.obstacle_at(cx, cy)) return 0.0;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = kInf;
  double t_max_x = inf, t_max_y = inf, t_dx = inf, t_dy = inf;
  if (step_x != 0) {
    const double next = (step_x > 0 ? (cx + 1) * res : cx * res);
    t_max_x = (next - ox) / dx;
    t_dx = res / std::abs(dx);
  }
  if (step_y != 0) {
    const double next = (step_y > 0 ? (cy + 1) * res : cy * res);
    t_max_y = (next - oy) / dy;
    t_dy = res / std::abs(dy);
  }
  double t = 0.0;
  while (t <= max_range) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_dx;
      cx += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_dy;
      cy += step_y;
    }
    if (t > max_range) break;
    if (scene.obstacle_at(cx, cy)) return t;
  }
  return std::nullopt;
}

std::optional<double> ray_disc_hit(double ox, double oy, double dx, double dy, double cx,
                                   double cy, double radius, double max_range) {
  const double fx = ox - cx, fy = oy - cy;
  const double b = fx * dx + fy * dy;
  const double c = fx * fx + fy * fy - radius * radius;
  if (c <= 0.0) return 0.0;  // origin inside the disc
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  if (t < 0.0 || t > max_range) return std::nullopt;
  return t;
}

}  // namespace

Observation sense(const Scene& scene, const AgentState& state, const SensorParams& params) {
  if (params.n_rays < 2) throw std::invalid_argument("sense: n_rays must be >= 2");
  if (!(params.fov_deg > 0.0) || params.fov_deg > 360.0)
    throw std::invalid_argument("sense: fov must be in (0, 360]");
  Observation obs;
  obs.pose = state.pose();
  obs.step = state.step_count;
  obs.rays.reserve(params.n_rays);

  const bool full_circle = params.fov_deg >= 360.0;
  const double tol = 1.5 * scene.resolution_m;
  for (int i = 0; i < params.n_rays; ++i) {
    const double offset = full_circle
                              ? params.fov_deg * i / params.n_rays - 180.0
                              : -params.fov_deg / 2.0 + params.fov_deg * i / (params.n_rays - 1);
    Ray ray;
    ray.bearing_deg = wrap_degrees(state.theta_deg + offset);
    const double dx = std::cos(deg2rad(ray.bearing_deg));
    const double dy = std::sin(deg2rad(ray.bearing_deg));

    double best = kInf;
    if (auto t = raycast_bitmap(scene, state.x, state.y, dx, dy, params.range_m)) best = *t;
    struct ObjHit {
      double t;
      const SceneObject* obj;
    };
    std::vector<ObjHit> obj_hits;
    for (const SceneObject& o : scene.objects) {
      if (params.sensor_height < o.z_min || params.sensor_height > o.z_max) continue;
      if (auto t = ray_disc_hit(state.x, state.y, dx, dy, o.cx, o.cy, o.radius, params.range_m))
        obj_hits.push_back({*t, &o});
    }
    for (const ObjHit& h : obj_hits) best = std::min(best, h.t);
    if (best <= params.range_m) {
      ray.depth = best;
      ray.hx = state.x + dx * best;
      ray.hy = state.y + dy * best;
      // Attribute the nearest object whose analytic hit is within a cell of
      // the chosen distance (bitmap stamps can fire slightly early).
      const SceneObject* owner = nullptr;
      double owner_t = kInf;
      for (const ObjHit& h : obj_hits)
        if (h.t <= best + tol && h.t < owner_t) {
          owner = h.obj;
          owner_t = h.t;
        }
      if (owner) ray.hit_object_id = owner->id;
    }
    obs.rays.push_back(std::move(ray));
  }
  return obs;
}

GeodesicField geodesic_field(const Scene& scene, double sx, double sy) {
  auto src = snap_to_free(scene, sx, sy);
  GeodesicField f;
  f.width = scene.width;
  f.height = scene.height;
  f.resolution_m = scene.resolution_m;
  if (!src) {
    f.cost.assign(static_cast<std::size_t>(scene.width) * scene.height, kInf);
    return f;
  }
  return dijkstra(scene, {{*src, 0.0}});
}

GeodesicField geodesic_field_to_object(const Scene& scene, const SceneObject& obj) {
  std::vector<std::pair<int, double>> sources;
  const double res = scene.resolution_m;
  const int x0 = std::max(0, scene.cell_x(obj.cx - obj.radius - res));
  const int x1 = std::min(scene.width - 1, scene.cell_x(obj.cx + obj.radius + res));
  const int y0 = std::max(0, scene.cell_y(obj.cy - obj.radius - res));
  const int y1 = std::min(scene.height - 1, scene.cell_y(obj.cy + obj.radius + res));
  for (int cy = y0; cy <= y1; ++cy)
    for (int cx = x0; cx <= x1; ++cx) {
      if (scene.obstacle_at(cx, cy)) continue;
      const double ccx = (cx + 0.5) * res, ccy = (cy + 0.5) * res;
      const double d = std::hypot(ccx - obj.cx, ccy - obj.cy) - obj.radius;
      if (d <= res) sources.push_back({cy * scene.width + cx, std::max(0.0, d)});
    }
  if (sources.empty()) {
    // Object fully embedded in obstacles: seed from the nearest free cell.
    if (auto idx = snap_to_free(scene, obj.cx, obj.cy, obj.radius + 0.5))
      sources.push_back({*idx, 0.0});
  }
  return dijkstra(scene, sources);
}

std::optional<double> geodesic_distance(const Scene& scene, double ax, double ay, double bx,
                                        double by) {
  auto sa = snap_to_free(scene, ax, ay);
  auto sb = snap_to_free(scene, bx, by);
  if (!sa || !sb) return std::nullopt;
  GeodesicField f = dijkstra(scene, {{*sa, 0.0}});
  const double d = f.cost[*sb];
  if (!std::isfinite(d)) return std::nullopt;
  return d;
}

}  // namespace mcnav::world
