#pragma once

#include <string>

#include "world.hpp"

namespace mcnav::world {

inline constexpr const char* kSceneFormat = "mcnav-scene/1";

// Scene file: single JSON document, `format` field required, bitmap stored
// as a row-major run-length encoding alternating free/obstacle runs starting
// with free.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

Scene load_scene_file(const std::string& path);
void save_scene_file(const Scene& scene, const std::string& path);

}  // namespace mcnav::world
