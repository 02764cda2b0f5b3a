#include "mapping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "util.hpp"

namespace mcnav::mapping {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SemanticOccupancyGrid::SemanticOccupancyGrid(int size, double resolution, double origin_x,
                                             double origin_y,
                                             std::vector<std::string> channel_table)
    : size_(size), resolution_(resolution), channels_(std::move(channel_table)) {
  if (size <= 0) throw std::invalid_argument("grid size must be positive");
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (channels_.size() > kMaxChannels)
    throw std::invalid_argument("at most 8 semantic channels are supported");
  // origin_x/origin_y is the world position mapped to the grid center.
  origin_x_ = origin_x - 0.5 * size_ * resolution_;
  origin_y_ = origin_y - 0.5 * size_ * resolution_;
  cells_.assign(static_cast<std::size_t>(size_) * size_, CellState::Unknown);
  semantic_.assign(static_cast<std::size_t>(size_) * size_, 0);
}

std::optional<int> SemanticOccupancyGrid::channel_of(const std::string& category) const {
  for (std::size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i] == category) return static_cast<int>(i);
  return std::nullopt;
}

geom::CellIndex SemanticOccupancyGrid::cell_of(double wx, double wy) const {
  return geom::CellIndex{static_cast<int>(std::floor((wx - origin_x_) / resolution_)),
                         static_cast<int>(std::floor((wy - origin_y_) / resolution_))};
}

void SemanticOccupancyGrid::cell_center(int cx, int cy, double& wx, double& wy) const {
  wx = origin_x_ + (cx + 0.5) * resolution_;
  wy = origin_y_ + (cy + 0.5) * resolution_;
}

void SemanticOccupancyGrid::expand_bbox(int cx, int cy) {
  if (bbox_.empty()) {
    bbox_ = {cx, cy, cx, cy};
  } else {
    bbox_.x0 = std::min(bbox_.x0, cx);
    bbox_.y0 = std::min(bbox_.y0, cy);
    bbox_.x1 = std::max(bbox_.x1, cx);
    bbox_.y1 = std::max(bbox_.y1, cy);
  }
}

void SemanticOccupancyGrid::mark_free(int cx, int cy) {
  if (!in_bounds(cx, cy)) return;
  CellState& c = cells_[index(cx, cy)];
  if (c == CellState::Unknown) c = CellState::Free;  // occupied dominates
  expand_bbox(cx, cy);
}

void SemanticOccupancyGrid::mark_occupied(int cx, int cy) {
  if (!in_bounds(cx, cy)) return;
  cells_[index(cx, cy)] = CellState::Occupied;
  expand_bbox(cx, cy);
}

void SemanticOccupancyGrid::integrate_observation(
    const world::Observation& obs, const std::map<std::string, std::string>& detections,
    double mapping_range) {
  // The agent's own footprint is observed free.
  const geom::CellIndex pc = cell_of(obs.pose.x, obs.pose.y);
  const int fr = static_cast<int>(std::ceil((world::kAgentRadius + resolution_) / resolution_));
  for (int dy = -fr; dy <= fr; ++dy)
    for (int dx = -fr; dx <= fr; ++dx)
      if (std::hypot(dx, dy) * resolution_ <= world::kAgentRadius + resolution_)
        if (in_bounds(pc.x + dx, pc.y + dy) &&
            state(pc.x + dx, pc.y + dy) == CellState::Unknown)
          mark_free(pc.x + dx, pc.y + dy);

  for (const world::Ray& ray : obs.rays) {
    const double reach = ray.depth ? std::min(*ray.depth, mapping_range) : mapping_range;
    const bool hit_in_range = ray.depth && *ray.depth <= mapping_range;
    const double dirx = std::cos(ray.bearing_deg * kPi / 180.0);
    const double diry = std::sin(ray.bearing_deg * kPi / 180.0);
    // Walk the ray at half-cell steps; cheap and adequate at this resolution.
    const double step = resolution_ * 0.5;
    bool truncated = false;
    for (int i = 0;; ++i) {
      const double d = i * step;
      if (d >= reach) break;
      const geom::CellIndex c = cell_of(obs.pose.x + dirx * d, obs.pose.y + diry * d);
      if (!in_bounds(c.x, c.y)) {  // truncated at the grid boundary
        truncated = true;
        break;
      }
      mark_free(c.x, c.y);
    }
    if (hit_in_range && !truncated) {
      const geom::CellIndex c = cell_of(obs.pose.x + dirx * reach, obs.pose.y + diry * reach);
      if (in_bounds(c.x, c.y)) {
        mark_occupied(c.x, c.y);
        if (ray.hit_object_id) {
          auto det = detections.find(*ray.hit_object_id);
          if (det != detections.end()) {
            if (auto ch = channel_of(det->second))
              semantic_[index(c.x, c.y)] |= static_cast<std::uint8_t>(1u << *ch);
          }
        }
      }
    }
  }
}

void SemanticOccupancyGrid::export_pgm(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write map snapshot '" + path + "'");
  out << "P5\n" << size_ << " " << size_ << "\n255\n";
  std::vector<unsigned char> row(size_);
  for (int cy = 0; cy < size_; ++cy) {
    for (int cx = 0; cx < size_; ++cx) {
      switch (state(cx, cy)) {
        case CellState::Unknown: row[cx] = 127; break;
        case CellState::Free: row[cx] = 255; break;
        case CellState::Occupied: row[cx] = 0; break;
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw IoError("write failed for map snapshot '" + path + "'");
}

std::vector<geom::CellIndex> frontier_cells(const SemanticOccupancyGrid& grid) {
  std::vector<geom::CellIndex> out;
  const auto bbox = grid.observed_bbox();
  if (bbox.empty()) return out;
  const int x0 = std::max(0, bbox.x0 - 1), y0 = std::max(0, bbox.y0 - 1);
  const int x1 = std::min(grid.size() - 1, bbox.x1 + 1), y1 = std::min(grid.size() - 1, bbox.y1 + 1);
  for (int cy = y0; cy <= y1; ++cy)
    for (int cx = x0; cx <= x1; ++cx) {
      if (grid.state(cx, cy) != CellState::Free) continue;
      const bool edge =
          (cx > 0 && grid.state(cx - 1, cy) == CellState::Unknown) ||
          (cx < grid.size() - 1 && grid.state(cx + 1, cy) == CellState::Unknown) ||
          (cy > 0 && grid.state(cx, cy - 1) == CellState::Unknown) ||
          (cy < grid.size() - 1 && grid.state(cx, cy + 1) == CellState::Unknown);
      if (edge) out.push_back({cx, cy});
    }
  return out;
}

std::vector<Frontier> extract_frontiers(const SemanticOccupancyGrid& grid, double split_extent,
                                        int min_cells) {
  const std::vector<geom::CellIndex> cells = frontier_cells(grid);
  std::vector<Frontier> out;
  for (const geom::CellCluster& cl :
       geom::cluster_cells(cells, grid.resolution(), split_extent)) {
    if (static_cast<int>(cl.cells.size()) < min_cells) continue;
    // cluster_cells works in grid-local meters; shift to world coordinates.
    double wx0, wy0;
    grid.cell_center(0, 0, wx0, wy0);
    Frontier f;
    f.cx = wx0 - 0.5 * grid.resolution() + cl.centroid_x;
    f.cy = wy0 - 0.5 * grid.resolution() + cl.centroid_y;
    f.cell_count = static_cast<int>(cl.cells.size());
    out.push_back(f);
  }
  return out;
}

DistanceField::DistanceField(int gx0, int gy0, int w, int h, double resolution)
    : x0_(gx0), y0_(gy0), w_(w), h_(h), res_(resolution) {
  values_.assign(static_cast<std::size_t>(w_) * h_, kUnreachable);
}

namespace {

struct FmmHeapEntry {
  double value;
  int idx;
  bool operator>(const FmmHeapEntry& o) const { return value > o.value; }
};

}  // namespace

DistanceField fmm_field(const SemanticOccupancyGrid& grid, double source_x, double source_y,
                        double inflate, const FmmOptions& options) {
  SemanticOccupancyGrid::CellRect win;
  if (options.window) {
    win = *options.window;
    win.x0 = std::max(0, win.x0);
    win.y0 = std::max(0, win.y0);
    win.x1 = std::min(grid.size() - 1, win.x1);
    win.y1 = std::min(grid.size() - 1, win.y1);
  } else {
    win = {0, 0, grid.size() - 1, grid.size() - 1};
  }
  const int w = win.x1 - win.x0 + 1, h = win.y1 - win.y0 + 1;
  if (w <= 0 || h <= 0) throw std::invalid_argument("fmm_field: empty window");
  const double res = grid.resolution();

  // Blocked mask: occupied cells dilated by `inflate`, minus clear discs.
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(w) * h, 0);
  const int r = static_cast<int>(std::floor(inflate / res + 1e-9));
  auto bidx = [&](int cx, int cy) { return static_cast<std::size_t>(cy - win.y0) * w + (cx - win.x0); };
  for (int cy = std::max(0, win.y0 - r); cy <= std::min(grid.size() - 1, win.y1 + r); ++cy)
    for (int cx = std::max(0, win.x0 - r); cx <= std::min(grid.size() - 1, win.x1 + r); ++cx) {
      if (grid.state(cx, cy) != CellState::Occupied) continue;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          const int nx = cx + dx, ny = cy + dy;
          if (nx < win.x0 || ny < win.y0 || nx > win.x1 || ny > win.y1) continue;
          blocked[bidx(nx, ny)] = 1;
        }
    }
  for (auto [px, py] : options.clear_discs) {
    const geom::CellIndex c = grid.cell_of(px, py);
    const int cr = static_cast<int>(std::ceil(options.clear_radius / res));
    for (int dy = -cr; dy <= cr; ++dy)
      for (int dx = -cr; dx <= cr; ++dx) {
        const int nx = c.x + dx, ny = c.y + dy;
        if (nx < win.x0 || ny < win.y0 || nx > win.x1 || ny > win.y1) continue;
        if (std::hypot(dx, dy) * res > options.clear_radius) continue;
        if (grid.state(nx, ny) != CellState::Occupied) blocked[bidx(nx, ny)] = 0;
      }
  }

  // Source cell; snap to the nearest unblocked cell within 0.3 m if needed.
  geom::CellIndex src = grid.cell_of(source_x, source_y);
  if (src.x < win.x0 || src.y < win.y0 || src.x > win.x1 || src.y > win.y1)
    throw std::invalid_argument("fmm_field: source outside the field window");
  if (blocked[bidx(src.x, src.y)]) {
    const int sr = static_cast<int>(std::ceil(0.3 / res));
    double best = std::numeric_limits<double>::infinity();
    geom::CellIndex best_cell = src;
    for (int dy = -sr; dy <= sr; ++dy)
      for (int dx = -sr; dx <= sr; ++dx) {
        const int nx = src.x + dx, ny = src.y + dy;
        if (nx < win.x0 || ny < win.y0 || nx > win.x1 || ny > win.y1) continue;
        if (blocked[bidx(nx, ny)]) continue;
        const double d = std::hypot(dx, dy) * res;
        if (d <= 0.3 && d < best) {
          best = d;
          best_cell = {nx, ny};
        }
      }
    if (!std::isfinite(best)) throw std::invalid_argument("fmm_field: source inside inflated obstacle");
    src = best_cell;
  }

  DistanceField field(win.x0, win.y0, w, h, res);
  field.source_x = source_x;
  field.source_y = source_y;

  std::vector<std::uint8_t> accepted(static_cast<std::size_t>(w) * h, 0);
  std::priority_queue<FmmHeapEntry, std::vector<FmmHeapEntry>, std::greater<>> heap;
  auto push = [&](int cx, int cy, double v) {
    auto& slot = field.ref(cx, cy);
    if (v < slot) {
      slot = v;
      heap.push({v, (cy - win.y0) * w + (cx - win.x0)});
    }
  };

  // Exact initialization of the source neighborhood keeps the far field
  // within a few percent of the true distance.
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int nx = src.x + dx, ny = src.y + dy;
      if (nx < win.x0 || ny < win.y0 || nx > win.x1 || ny > win.y1) continue;
      if (blocked[bidx(nx, ny)]) continue;
      push(nx, ny, std::hypot(dx, dy) * res);
    }

  auto upwind_value = [&](int cx, int cy) {
    auto axis_min = [&](int ax, int ay, int bx, int by) {
      double v = kUnreachable;
      if (cx + ax >= win.x0 && cy + ay >= win.y0 && cx + ax <= win.x1 && cy + ay <= win.y1 &&
          accepted[bidx(cx + ax, cy + ay)])
        v = field.at(cx + ax, cy + ay);
      if (cx + bx >= win.x0 && cy + by >= win.y0 && cx + bx <= win.x1 && cy + by <= win.y1 &&
          accepted[bidx(cx + bx, cy + by)])
        v = std::min(v, field.at(cx + bx, cy + by));
      return v;
    };
    const double a = axis_min(-1, 0, 1, 0);
    const double b = axis_min(0, -1, 0, 1);
    if (!std::isfinite(a) && !std::isfinite(b)) return kUnreachable;
    if (!std::isfinite(a)) return b + res;
    if (!std::isfinite(b)) return a + res;
    if (std::abs(a - b) >= res) return std::min(a, b) + res;
    return 0.5 * (a + b + std::sqrt(2.0 * res * res - (a - b) * (a - b)));
  };

  while (!heap.empty()) {
    auto [value, idx] = heap.top();
    heap.pop();
    const int cx = idx % w + win.x0, cy = idx / w + win.y0;
    if (accepted[bidx(cx, cy)]) continue;
    if (value > field.at(cx, cy)) continue;
    accepted[bidx(cx, cy)] = 1;
    static const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (auto& d : nb) {
      const int nx = cx + d[0], ny = cy + d[1];
      if (nx < win.x0 || ny < win.y0 || nx > win.x1 || ny > win.y1) continue;
      if (blocked[bidx(nx, ny)] || accepted[bidx(nx, ny)]) continue;
      const double v = upwind_value(nx, ny);
      if (std::isfinite(v)) push(nx, ny, v);
    }
  }
  return field;
}

NextAction next_action(const DistanceField& field, const SemanticOccupancyGrid& grid,
                       const world::AgentState& state, double goal_x, double goal_y,
                       double success_radius) {
  NextAction out;
  if (std::hypot(goal_x - state.x, goal_y - state.y) <= success_radius) {
    out.kind = NextActionKind::Arrived;
    return out;
  }
  const geom::CellIndex c = grid.cell_of(state.x, state.y);
  double best_value = kUnreachable;
  double best_bearing = 0.0;
  double best_bearing_diff = 361.0;
  bool found = false;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const double v = field.at(c.x + dx, c.y + dy);
      if (!std::isfinite(v)) continue;
      double wx, wy;
      grid.cell_center(c.x + dx, c.y + dy, wx, wy);
      const double bearing =
          world::wrap_degrees(std::atan2(wy - state.y, wx - state.x) * 180.0 / kPi);
      const double diff = std::abs(world::heading_delta(state.theta_deg, bearing));
      const bool better = !found || v < best_value - 1e-12 ||
                          (std::abs(v - best_value) <= 1e-12 && diff < best_bearing_diff);
      if (better) {
        found = true;
        best_value = v;
        best_bearing = bearing;
        best_bearing_diff = diff;
      }
    }
  if (!found) {
    out.kind = NextActionKind::Stuck;
    return out;
  }
  out.kind = NextActionKind::Action;
  const double delta = world::heading_delta(state.theta_deg, best_bearing);
  if (std::abs(delta) > 15.0 + 1e-9) {
    out.action = delta > 0.0 ? world::Action::TurnLeft : world::Action::TurnRight;
    if (std::abs(std::abs(delta) - 180.0) < 1e-9) out.action = world::Action::TurnLeft;
  } else {
    out.action = world::Action::MoveForward;
  }
  return out;
}

}  // namespace mcnav::mapping
