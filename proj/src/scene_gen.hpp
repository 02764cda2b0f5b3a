#pragma once

#include <cstdint>
#include <string>

#include "world.hpp"

namespace mcnav::world {

struct GeneratorParams {
  double width_m = 12.0;
  double height_m = 12.0;
  double resolution_m = 0.05;
  int rooms_x = 2;
  int rooms_y = 2;
  double door_width_m = 1.0;
  double wall_thickness_m = 0.10;
  std::string goal_category = "chair";
  int n_distractors = 2;    // same-category objects with different attributes
  int n_context = 2;        // co-occurring categories placed near the goal
  int n_ambient = 4;        // unrelated clutter objects
  int n_clutter_blocks = 3; // small free-standing wall blocks
  double min_start_goal_geodesic_m = 5.0;
  double context_radius_m = 1.6;  // context objects placed within this of the goal

  std::string to_json() const;
  static GeneratorParams from_json(const std::string& text);
};

// Deterministic function of (seed, params); the produced scene passes
// Scene::validate() and the goal is reachable from the start. Throws
// GenerationError after bounded retries.
Scene generate_scene(std::uint64_t seed, const GeneratorParams& params);

}  // namespace mcnav::world
