#include "scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "categories.hpp"
#include "scene_io.hpp"
#include "util.hpp"

namespace mcnav::world {

using nlohmann::json;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(u01(rng) * (hi - lo + 1e-12)) % (hi - lo + 1);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + u01(rng) * (hi - lo);
}

const std::vector<std::string>& color_pool() {
  static const std::vector<std::string> p = {"brown", "black", "white", "gray",
                                             "blue",  "red",   "green", "beige"};
  return p;
}

const std::vector<std::string>& material_pool() {
  static const std::vector<std::string> p = {"wooden", "metal", "plastic",
                                             "fabric", "leather", "wicker"};
  return p;
}

const std::vector<std::string>& room_token_pool() {
  static const std::vector<std::string> p = {"white_carpet", "red_carpet", "beige_walls",
                                             "tile_floor",   "yellow_floor", "wood_floor",
                                             "gray_walls",   "striped_wallpaper"};
  return p;
}

const std::vector<std::string>& ambient_pool() {
  static const std::vector<std::string> p = {"plant", "tv", "bed", "toilet", "shelf", "desk"};
  return p;
}

struct RoomRect {
  double x0, y0, x1, y1;  // meters, inner free area
  std::vector<std::string> tokens;
};

void fill_rect_cells(Scene& s, double x0, double y0, double x1, double y1) {
  const int cx0 = std::max(0, s.cell_x(x0));
  const int cx1 = std::min(s.width - 1, s.cell_x(x1 - 1e-9));
  const int cy0 = std::max(0, s.cell_y(y0));
  const int cy1 = std::min(s.height - 1, s.cell_y(y1 - 1e-9));
  for (int cy = cy0; cy <= cy1; ++cy)
    for (int cx = cx0; cx <= cx1; ++cx)
      s.obstacles[static_cast<std::size_t>(cy) * s.width + cx] = 1;
}

void clear_rect_cells(Scene& s, double x0, double y0, double x1, double y1) {
  const int cx0 = std::max(0, s.cell_x(x0));
  const int cx1 = std::min(s.width - 1, s.cell_x(x1 - 1e-9));
  const int cy0 = std::max(0, s.cell_y(y0));
  const int cy1 = std::min(s.height - 1, s.cell_y(y1 - 1e-9));
  for (int cy = cy0; cy <= cy1; ++cy)
    for (int cx = cx0; cx <= cx1; ++cx)
      s.obstacles[static_cast<std::size_t>(cy) * s.width + cx] = 0;
}

bool spot_free(const Scene& s, const std::vector<SceneObject>& placed, double x, double y,
               double radius, double clearance) {
  if (disc_collides(s, x, y, radius + clearance)) return false;
  for (const SceneObject& o : placed)
    if (std::hypot(o.cx - x, o.cy - y) < o.radius + radius + 0.2) return false;
  return true;
}

struct RoomSpot {
  double x, y;
  int room;
};

std::optional<RoomSpot> sample_spot(std::mt19937_64& rng, const Scene& s,
                                    const std::vector<RoomRect>& rooms,
                                    const std::vector<SceneObject>& placed, int room,
                                    double radius, double clearance, int tries = 60) {
  const RoomRect& r = rooms[room];
  for (int i = 0; i < tries; ++i) {
    const double margin = radius + clearance;
    if (r.x1 - r.x0 < 2 * margin || r.y1 - r.y0 < 2 * margin) return std::nullopt;
    const double x = uniform_real(rng, r.x0 + margin, r.x1 - margin);
    const double y = uniform_real(rng, r.y0 + margin, r.y1 - margin);
    if (spot_free(s, placed, x, y, radius, clearance)) return RoomSpot{x, y, room};
  }
  return std::nullopt;
}

std::vector<std::string> draw_intrinsic(std::mt19937_64& rng) {
  return {color_pool()[uniform_int(rng, 0, static_cast<int>(color_pool().size()) - 1)],
          material_pool()[uniform_int(rng, 0, static_cast<int>(material_pool().size()) - 1)]};
}

std::optional<Scene> try_generate(std::uint64_t seed, const GeneratorParams& p) {
  std::mt19937_64 rng(splitmix64(seed));

  Scene s;
  s.resolution_m = p.resolution_m;
  s.width = static_cast<int>(std::lround(p.width_m / p.resolution_m));
  s.height = static_cast<int>(std::lround(p.height_m / p.resolution_m));
  s.obstacles.assign(static_cast<std::size_t>(s.width) * s.height, 0);

  const double wall = p.wall_thickness_m;
  // Border walls.
  fill_rect_cells(s, 0, 0, s.width_m(), wall);
  fill_rect_cells(s, 0, s.height_m() - wall, s.width_m(), s.height_m());
  fill_rect_cells(s, 0, 0, wall, s.height_m());
  fill_rect_cells(s, s.width_m() - wall, 0, s.width_m(), s.height_m());

  // Room partitions with one door per shared wall segment.
  const double inner_w = p.width_m - 2 * wall;
  const double inner_h = p.height_m - 2 * wall;
  const double room_w = inner_w / p.rooms_x;
  const double room_h = inner_h / p.rooms_y;
  for (int k = 1; k < p.rooms_x; ++k) {
    const double wx = wall + k * room_w;
    fill_rect_cells(s, wx - wall / 2, 0, wx + wall / 2, s.height_m());
    for (int r = 0; r < p.rooms_y; ++r) {
      const double y0 = wall + r * room_h;
      const double lo = y0 + 0.3, hi = y0 + room_h - 0.3 - p.door_width_m;
      const double dy = uniform_real(rng, lo, std::max(lo, hi));
      clear_rect_cells(s, wx - wall, dy, wx + wall, dy + p.door_width_m);
    }
  }
  for (int k = 1; k < p.rooms_y; ++k) {
    const double wy = wall + k * room_h;
    fill_rect_cells(s, 0, wy - wall / 2, s.width_m(), wy + wall / 2);
    for (int c = 0; c < p.rooms_x; ++c) {
      const double x0 = wall + c * room_w;
      const double lo = x0 + 0.3, hi = x0 + room_w - 0.3 - p.door_width_m;
      const double dx = uniform_real(rng, lo, std::max(lo, hi));
      clear_rect_cells(s, dx, wy - wall, dx + p.door_width_m, wy + wall);
    }
  }

  // Free-standing clutter.
  for (int i = 0; i < p.n_clutter_blocks; ++i) {
    const double bw = uniform_real(rng, 0.3, 0.6);
    const double bh = uniform_real(rng, 0.3, 0.6);
    const double bx = uniform_real(rng, wall + 0.8, p.width_m - wall - 0.8 - bw);
    const double by = uniform_real(rng, wall + 0.8, p.height_m - wall - 0.8 - bh);
    fill_rect_cells(s, bx, by, bx + bw, by + bh);
  }

  std::vector<RoomRect> rooms;
  for (int ry = 0; ry < p.rooms_y; ++ry)
    for (int rx = 0; rx < p.rooms_x; ++rx) {
      RoomRect rr;
      rr.x0 = wall + rx * room_w + wall / 2;
      rr.x1 = wall + (rx + 1) * room_w - wall / 2;
      rr.y0 = wall + ry * room_h + wall / 2;
      rr.y1 = wall + (ry + 1) * room_h - wall / 2;
      const auto& pool = room_token_pool();
      const int t0 = uniform_int(rng, 0, static_cast<int>(pool.size()) - 1);
      int t1 = uniform_int(rng, 0, static_cast<int>(pool.size()) - 2);
      if (t1 >= t0) ++t1;
      rr.tokens = {pool[t0], pool[t1]};
      rooms.push_back(rr);
    }
  const int n_rooms = static_cast<int>(rooms.size());

  std::vector<SceneObject> objects;
  std::vector<int> object_room;
  auto place = [&](const std::string& id, const std::string& category, int room, double radius,
                   std::vector<std::string> intrinsic, bool is_goal) -> bool {
    auto spot = sample_spot(rng, s, objects, rooms, room, radius, 0.15);
    if (!spot) return false;
    SceneObject o;
    o.id = id;
    o.category = category;
    o.cx = spot->x;
    o.cy = spot->y;
    o.radius = radius;
    o.z_min = 0.0;
    o.z_max = uniform_real(rng, 0.9, 1.5);
    o.intrinsic_attrs = std::move(intrinsic);
    o.is_goal = is_goal;
    objects.push_back(std::move(o));
    object_room.push_back(room);
    return true;
  };

  // Goal.
  const int goal_room = uniform_int(rng, 0, n_rooms - 1);
  const std::vector<std::string> goal_intrinsic = draw_intrinsic(rng);
  if (!place("goal", p.goal_category, goal_room, 0.35, goal_intrinsic, true)) return std::nullopt;
  const SceneObject& goal = objects.front();

  // Context objects close to the goal, categories from the co-occurrence prior.
  std::vector<std::string> co;
  {
    const auto& table = default_co_occurrence();
    auto it = table.find(p.goal_category);
    co = (it != table.end()) ? it->second : fallback_context_categories();
  }
  for (int i = 0; i < p.n_context; ++i) {
    const std::string cat = co[i % co.size()];
    bool placed = false;
    for (int t = 0; t < 60 && !placed; ++t) {
      const double ang = uniform_real(rng, 0, 2 * 3.14159265358979323846);
      const double d = uniform_real(rng, 0.9, p.context_radius_m);
      const double x = goal.cx + std::cos(ang) * d;
      const double y = goal.cy + std::sin(ang) * d;
      const RoomRect& rr = rooms[goal_room];
      if (x < rr.x0 + 0.45 || x > rr.x1 - 0.45 || y < rr.y0 + 0.45 || y > rr.y1 - 0.45) continue;
      if (!spot_free(s, objects, x, y, 0.3, 0.15)) continue;
      SceneObject o;
      o.id = "ctx" + std::to_string(i);
      o.category = cat;
      o.cx = x;
      o.cy = y;
      o.radius = 0.3;
      o.z_min = 0.0;
      o.z_max = uniform_real(rng, 0.9, 1.5);
      o.intrinsic_attrs = draw_intrinsic(rng);
      objects.push_back(std::move(o));
      object_room.push_back(goal_room);
      placed = true;
    }
    if (!placed) return std::nullopt;
  }

  // Distractors: same category elsewhere. The first one mimics the goal's
  // intrinsic attributes so instance matching has to do real work.
  for (int i = 0; i < p.n_distractors; ++i) {
    int room = goal_room;
    if (n_rooms > 1) {
      room = uniform_int(rng, 0, n_rooms - 2);
      if (room >= goal_room) ++room;
    }
    std::vector<std::string> attrs = (i == 0) ? goal_intrinsic : draw_intrinsic(rng);
    if (!place("dis" + std::to_string(i), p.goal_category, room, 0.35, std::move(attrs), false))
      return std::nullopt;
  }

  // Ambient clutter objects anywhere.
  for (int i = 0; i < p.n_ambient; ++i) {
    std::string cat = ambient_pool()[uniform_int(rng, 0, static_cast<int>(ambient_pool().size()) - 1)];
    if (cat == p.goal_category) cat = "shelf";
    if (!place("amb" + std::to_string(i), cat, uniform_int(rng, 0, n_rooms - 1), 0.28,
               draw_intrinsic(rng), false))
      return std::nullopt;
  }

  // Extrinsic attributes: room tokens plus categories of nearby objects.
  for (std::size_t i = 0; i < objects.size(); ++i) {
    std::set<std::string> ext(rooms[object_room[i]].tokens.begin(),
                              rooms[object_room[i]].tokens.end());
    for (std::size_t k = 0; k < objects.size(); ++k) {
      if (k == i) continue;
      if (std::hypot(objects[k].cx - objects[i].cx, objects[k].cy - objects[i].cy) <= 2.0)
        ext.insert(objects[k].category);
    }
    objects[i].extrinsic_attrs.assign(ext.begin(), ext.end());
  }

  s.objects = std::move(objects);
  s.goal_object_id = "goal";

  // Start pose in a different room when possible, far enough from the goal.
  std::vector<int> start_rooms;
  for (int r = 0; r < n_rooms; ++r)
    if (r != goal_room || n_rooms == 1) start_rooms.push_back(r);
  const int start_room = start_rooms[uniform_int(rng, 0, static_cast<int>(start_rooms.size()) - 1)];
  for (int t = 0; t < 80; ++t) {
    auto spot = sample_spot(rng, s, s.objects, rooms, start_room, kAgentRadius, 0.12, 1);
    if (!spot) continue;
    const auto d = geodesic_distance(s, spot->x, spot->y, goal.cx, goal.cy);
    if (!d || *d < p.min_start_goal_geodesic_m) continue;
    s.start_pose = Pose{spot->x, spot->y, 30.0 * uniform_int(rng, 0, 11)};
    try {
      s.validate();
    } catch (const SceneError&) {
      return std::nullopt;
    }
    return s;
  }
  return std::nullopt;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const GeneratorParams& params) {
  if (params.rooms_x < 1 || params.rooms_y < 1)
    throw std::invalid_argument("generate_scene: room count must be >= 1");
  if (params.n_distractors < 0 || params.n_context < 0 || params.n_ambient < 0)
    throw std::invalid_argument("generate_scene: object counts must be >= 0");
  for (std::uint64_t attempt = 0; attempt < 24; ++attempt) {
    if (auto s = try_generate(hash_combine(seed, attempt), params)) return std::move(*s);
  }
  throw GenerationError("scene generation failed after bounded retries (seed " +
                        std::to_string(seed) + ")");
}

std::string GeneratorParams::to_json() const {
  json j{{"width_m", width_m},
         {"height_m", height_m},
         {"resolution_m", resolution_m},
         {"rooms_x", rooms_x},
         {"rooms_y", rooms_y},
         {"door_width_m", door_width_m},
         {"wall_thickness_m", wall_thickness_m},
         {"goal_category", goal_category},
         {"n_distractors", n_distractors},
         {"n_context", n_context},
         {"n_ambient", n_ambient},
         {"n_clutter_blocks", n_clutter_blocks},
         {"min_start_goal_geodesic_m", min_start_goal_geodesic_m},
         {"context_radius_m", context_radius_m}};
  return j.dump();
}

GeneratorParams GeneratorParams::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("generator params: invalid JSON: ") + e.what());
  }
  GeneratorParams p;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("width_m", p.width_m);
  get("height_m", p.height_m);
  get("resolution_m", p.resolution_m);
  get("rooms_x", p.rooms_x);
  get("rooms_y", p.rooms_y);
  get("door_width_m", p.door_width_m);
  get("wall_thickness_m", p.wall_thickness_m);
  get("goal_category", p.goal_category);
  get("n_distractors", p.n_distractors);
  get("n_context", p.n_context);
  get("n_ambient", p.n_ambient);
  get("n_clutter_blocks", p.n_clutter_blocks);
  get("min_start_goal_geodesic_m", p.min_start_goal_geodesic_m);
  get("context_radius_m", p.context_radius_m);
  return p;
}

}  // namespace mcnav::world
