#pragma once

#include <map>
#include <string>
#include <vector>

namespace mcnav {

// Detection categories that always matter for indoor navigation.
inline const std::vector<std::string>& base_categories() {
  static const std::vector<std::string> cats = {"chair", "plant", "sofa", "bed",
                                                "toilet", "tv", "table"};
  return cats;
}

// Commonsense co-occurrence prior used by the scripted oracle to propose
// context categories, and by the scene generator to place plausible context
// objects.
inline const std::map<std::string, std::vector<std::string>>& default_co_occurrence() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"chair", {"table", "desk", "lamp", "sofa", "bookshelf", "rug"}},
      {"sofa", {"table", "tv", "lamp", "rug", "cushion", "bookshelf"}},
      {"bed", {"nightstand", "lamp", "wardrobe", "dresser", "rug"}},
      {"toilet", {"sink", "towel", "mirror", "bathtub"}},
      {"tv", {"sofa", "table", "console", "speaker", "lamp"}},
      {"plant", {"window", "shelf", "vase", "table"}},
      {"table", {"chair", "lamp", "sofa", "plant", "rug"}},
  };
  return table;
}

inline const std::vector<std::string>& fallback_context_categories() {
  static const std::vector<std::string> cats = {"table", "chair", "shelf"};
  return cats;
}

}  // namespace mcnav
