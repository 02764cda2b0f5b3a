#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "world.hpp"

namespace mcnav::mapping {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// Agent-centric online map: the episode start pose sits at the grid center
// and the origin never moves afterwards. Cells only harden: unknown may
// become free or occupied, free may become occupied, nothing is ever
// forgotten. Semantic channel flags live on occupied cells only.
class SemanticOccupancyGrid {
 public:
  static constexpr int kMaxChannels = 8;

  SemanticOccupancyGrid(int size, double resolution, double origin_x, double origin_y,
                        std::vector<std::string> channel_table);

  int size() const { return size_; }
  double resolution() const { return resolution_; }
  const std::vector<std::string>& channel_table() const { return channels_; }

  bool in_bounds(int cx, int cy) const { return cx >= 0 && cy >= 0 && cx < size_ && cy < size_; }
  CellState state(int cx, int cy) const { return cells_[index(cx, cy)]; }
  std::uint8_t semantic_mask(int cx, int cy) const { return semantic_[index(cx, cy)]; }
  std::optional<int> channel_of(const std::string& category) const;

  geom::CellIndex cell_of(double wx, double wy) const;
  void cell_center(int cx, int cy, double& wx, double& wy) const;

  // Marks free space along each ray and an occupied cell at the hit; rays
  // leaving the grid are truncated at the boundary. `detections` maps hit
  // object ids to categories; hits whose category is tracked set the channel
  // flag. Rays are clipped to mapping_range.
  void integrate_observation(const world::Observation& obs,
                             const std::map<std::string, std::string>& detections,
                             double mapping_range);

  // Bounding box (inclusive) of all observed (non-unknown) cells, if any.
  struct CellRect {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    bool empty() const { return x1 < x0 || y1 < y0; }
  };
  CellRect observed_bbox() const { return bbox_; }

  // PGM (P5) occupancy snapshot plus sidecar JSON (channels, frontiers).
  void export_pgm(const std::string& path) const;

 private:
  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * size_ + cx; }
  void mark_free(int cx, int cy);
  void mark_occupied(int cx, int cy);

  int size_;
  double resolution_;
  double origin_x_, origin_y_;  // world coords of cell (0,0) corner
  std::vector<CellState> cells_;
  std::vector<std::uint8_t> semantic_;
  std::vector<std::string> channels_;
  CellRect bbox_;
};

struct Frontier {
  double cx = 0.0, cy = 0.0;  // world meters
  int cell_count = 0;
};

// Free cells with at least one unknown 4-neighbor.
std::vector<geom::CellIndex> frontier_cells(const SemanticOccupancyGrid& grid);

std::vector<Frontier> extract_frontiers(const SemanticOccupancyGrid& grid, double split_extent,
                                        int min_cells = 1);

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Travel-cost field from a first-order upwind eikonal solve; covers a window
// of the grid but reads as the full grid (infinity outside).
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int gx0, int gy0, int w, int h, double resolution);

  double at(int cx, int cy) const {
    if (cx < x0_ || cy < y0_ || cx >= x0_ + w_ || cy >= y0_ + h_) return kUnreachable;
    return values_[static_cast<std::size_t>(cy - y0_) * w_ + (cx - x0_)];
  }
  double& ref(int cx, int cy) { return values_[static_cast<std::size_t>(cy - y0_) * w_ + (cx - x0_)]; }
  bool contains(int cx, int cy) const {
    return cx >= x0_ && cy >= y0_ && cx < x0_ + w_ && cy < y0_ + h_;
  }
  double source_x = 0.0, source_y = 0.0;  // world meters

  int x0() const { return x0_; }
  int y0() const { return y0_; }
  int w() const { return w_; }
  int h() const { return h_; }
  double resolution() const { return res_; }

 private:
  int x0_ = 0, y0_ = 0, w_ = 0, h_ = 0;
  double res_ = 0.0;
  std::vector<double> values_;
};

struct FmmOptions {
  // Window in grid cells; empty means full grid.
  std::optional<SemanticOccupancyGrid::CellRect> window;
  // Discs (world meters) where obstacle inflation is suppressed, e.g. around
  // the agent when it legitimately hugs a wall.
  std::vector<std::pair<double, double>> clear_discs;
  double clear_radius = 0.25;
};

// Unit speed on free and unknown cells, zero speed on occupied cells dilated
// by `inflate`. A source inside the inflated region snaps to the nearest free
// cell within 0.3 m, otherwise std::invalid_argument.
DistanceField fmm_field(const SemanticOccupancyGrid& grid, double source_x, double source_y,
                        double inflate, const FmmOptions& options = {});

enum class NextActionKind { Action, Arrived, Stuck };

struct NextAction {
  NextActionKind kind = NextActionKind::Stuck;
  world::Action action = world::Action::Stop;
};

// Greedy descent on the distance field: picks the 8-neighbor with the lowest
// value (ties: smallest bearing change), turns when more than 15 degrees off,
// otherwise moves forward.
NextAction next_action(const DistanceField& field, const SemanticOccupancyGrid& grid,
                       const world::AgentState& state, double goal_x, double goal_y,
                       double success_radius);

}  // namespace mcnav::mapping
