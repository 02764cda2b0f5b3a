#include "scene_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "util.hpp"

namespace mcnav::world {

using nlohmann::json;

namespace {

json rle_encode(const std::vector<std::uint8_t>& bits) {
  json runs = json::array();
  std::uint8_t current = 0;  // first run counts free cells
  std::size_t run = 0;
  for (std::uint8_t b : bits) {
    const std::uint8_t v = b ? 1 : 0;
    if (v == current) {
      ++run;
    } else {
      runs.push_back(run);
      current = v;
      run = 1;
    }
  }
  runs.push_back(run);
  return runs;
}

std::vector<std::uint8_t> rle_decode(const json& runs, std::size_t expected) {
  std::vector<std::uint8_t> bits;
  bits.reserve(expected);
  std::uint8_t current = 0;
  for (const auto& r : runs) {
    if (!r.is_number_unsigned())
      throw SceneError("scene bitmap rle contains a non-integer run");
    const std::size_t n = r.get<std::size_t>();
    bits.insert(bits.end(), n, current);
    current = current ? 0 : 1;
  }
  if (bits.size() != expected) throw SceneError("scene bitmap rle does not match width*height");
  return bits;
}

json object_to_json(const SceneObject& o) {
  return json{{"id", o.id},
              {"category", o.category},
              {"center", {o.cx, o.cy}},
              {"radius", o.radius},
              {"z_band", {o.z_min, o.z_max}},
              {"intrinsic", o.intrinsic_attrs},
              {"extrinsic", o.extrinsic_attrs},
              {"is_goal", o.is_goal}};
}

SceneObject object_from_json(const json& j) {
  SceneObject o;
  o.id = j.at("id").get<std::string>();
  o.category = j.at("category").get<std::string>();
  o.cx = j.at("center").at(0).get<double>();
  o.cy = j.at("center").at(1).get<double>();
  o.radius = j.at("radius").get<double>();
  o.z_min = j.at("z_band").at(0).get<double>();
  o.z_max = j.at("z_band").at(1).get<double>();
  o.intrinsic_attrs = j.at("intrinsic").get<std::vector<std::string>>();
  o.extrinsic_attrs = j.at("extrinsic").get<std::vector<std::string>>();
  o.is_goal = j.at("is_goal").get<bool>();
  return o;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  json j;
  j["format"] = kSceneFormat;
  j["resolution_m"] = scene.resolution_m;
  j["bitmap"] = json{{"width", scene.width}, {"height", scene.height},
                     {"rle", rle_encode(scene.obstacles)}};
  json objs = json::array();
  for (const SceneObject& o : scene.objects) objs.push_back(object_to_json(o));
  j["objects"] = std::move(objs);
  j["start_pose"] = {scene.start_pose.x, scene.start_pose.y, scene.start_pose.theta_deg};
  j["goal_object_id"] = scene.goal_object_id;
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kSceneFormat)
      throw SceneError("unsupported scene format '" + j["format"].get<std::string>() + "'");
    Scene s;
    s.resolution_m = j.at("resolution_m").get<double>();
    const json& bm = j.at("bitmap");
    s.width = bm.at("width").get<int>();
    s.height = bm.at("height").get<int>();
    if (s.width <= 0 || s.height <= 0) throw SceneError("scene bitmap dimensions must be positive");
    s.obstacles = rle_decode(bm.at("rle"), static_cast<std::size_t>(s.width) * s.height);
    for (const auto& jo : j.at("objects")) s.objects.push_back(object_from_json(jo));
    s.start_pose.x = j.at("start_pose").at(0).get<double>();
    s.start_pose.y = j.at("start_pose").at(1).get<double>();
    s.start_pose.theta_deg = j.at("start_pose").at(2).get<double>();
    s.goal_object_id = j.at("goal_object_id").get<std::string>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene file is missing or mistypes a field: ") + e.what());
  }
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scene file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

void save_scene_file(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scene file '" + path + "'");
  out << scene_to_json(scene);
  if (!out) throw IoError("write failed for scene file '" + path + "'");
}

}  // namespace mcnav::world
