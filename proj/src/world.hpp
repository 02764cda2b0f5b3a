#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace mcnav::world {

enum class Action { MoveForward, TurnLeft, TurnRight, Stop };

const char* action_name(Action a);
std::optional<Action> action_from_name(const std::string& s);

constexpr double kStepMeters = 0.25;
constexpr double kTurnDegrees = 30.0;
constexpr double kAgentRadius = 0.18;

inline double wrap_degrees(double d) {
  d = std::fmod(d, 360.0);
  if (d < 0.0) d += 360.0;
  return d;
}

// Signed smallest rotation from `from` to `to`, in (-180, 180].
double heading_delta(double from_deg, double to_deg);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta_deg = 0.0;
};

struct SceneObject {
  std::string id;
  std::string category;
  double cx = 0.0, cy = 0.0;   // meters
  double radius = 0.0;         // meters
  double z_min = 0.0, z_max = 0.0;
  std::vector<std::string> intrinsic_attrs;
  std::vector<std::string> extrinsic_attrs;
  bool is_goal = false;
};

// Ground-truth 2D environment. The obstacle bitmap is the sole collision
// geometry; objects are sensed entities that occlude depth rays but do not
// block motion (they stand inside free space).
struct Scene {
  double resolution_m = 0.05;
  int width = 0;   // cells
  int height = 0;  // cells
  std::vector<std::uint8_t> obstacles;  // row-major, 1 = obstacle
  std::vector<SceneObject> objects;
  Pose start_pose;
  std::string goal_object_id;

  bool obstacle_at(int cx_, int cy_) const {
    if (cx_ < 0 || cy_ < 0 || cx_ >= width || cy_ >= height) return true;
    return obstacles[static_cast<std::size_t>(cy_) * width + cx_] != 0;
  }
  double width_m() const { return width * resolution_m; }
  double height_m() const { return height * resolution_m; }
  int cell_x(double x) const { return static_cast<int>(std::floor(x / resolution_m)); }
  int cell_y(double y) const { return static_cast<int>(std::floor(y / resolution_m)); }
  const SceneObject* find_object(const std::string& id) const;
  const SceneObject& goal_object() const;

  // Throws SceneError when an invariant does not hold.
  void validate() const;
};

struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double theta_deg = 0.0;  // [0, 360)
  int step_count = 0;
  double path_length = 0.0;

  Pose pose() const { return Pose{x, y, theta_deg}; }
};

struct Ray {
  double bearing_deg = 0.0;           // absolute, world frame
  std::optional<double> depth;        // meters, absent if nothing in range
  std::optional<std::string> hit_object_id;
  double hx = 0.0, hy = 0.0;          // hit point, valid when depth present
};

struct Observation {
  std::vector<Ray> rays;
  Pose pose;
  int step = 0;
};

struct StepResult {
  AgentState state;
  bool collided = false;
};

// True when a disc of `radius` at (x, y) overlaps an obstacle cell or leaves
// the scene bounds.
bool disc_collides(const Scene& scene, double x, double y, double radius);

StepResult step(const Scene& scene, const AgentState& state, Action action);

struct SensorParams {
  double fov_deg = 90.0;
  int n_rays = 180;
  double range_m = 30.0;
  double sensor_height = 0.88;  // plane of the depth rays
};

Observation sense(const Scene& scene, const AgentState& state, const SensorParams& params);

// Shortest obstacle-free path length on the free-space grid (16-connected),
// nullopt when disconnected. Endpoints snap to the nearest free cell within
// 0.3 m.
std::optional<double> geodesic_distance(const Scene& scene, double ax, double ay, double bx,
                                        double by);

// Full travel-cost field (16-connected Dijkstra) from a source point; +inf for
// unreachable cells. Used for episode metrics and validity checks.
struct GeodesicField {
  int width = 0, height = 0;
  double resolution_m = 0.0;
  std::vector<double> cost;  // meters

  double at(int cx_, int cy_) const {
    if (cx_ < 0 || cy_ < 0 || cx_ >= width || cy_ >= height)
      return std::numeric_limits<double>::infinity();
    return cost[static_cast<std::size_t>(cy_) * width + cx_];
  }
};

GeodesicField geodesic_field(const Scene& scene, double sx, double sy);

// Field seeded at every free cell whose center lies inside the object's disc;
// gives the geodesic free-space distance to the object itself.
GeodesicField geodesic_field_to_object(const Scene& scene, const SceneObject& obj);

}  // namespace mcnav::world
