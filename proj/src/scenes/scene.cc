#include "gwrl/scenes/scene.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwrl::scenes {

std::vector<std::string> SceneConfig::Validate() const {
  std::vector<std::string> errors;
  if (num_categories < 2) errors.push_back("scene.num_categories must be >= 2");
  if (min_objects < 2) errors.push_back("scene.min_objects must be >= 2");
  if (max_objects < min_objects) {
    errors.push_back("scene.max_objects must be >= scene.min_objects");
  }
  if (width < 10) errors.push_back("scene.width must be >= 10");
  if (height < 10) errors.push_back("scene.height must be >= 10");
  if (feature_dim < 1) errors.push_back("scene.feature_dim must be >= 1");
  if (!(min_side_fraction > 0.0 && min_side_fraction < 1.0)) {
    errors.push_back("scene.min_side_fraction must be in (0, 1)");
  }
  return errors;
}

Spatial SpatialFeatures(const BBox& b, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("canvas must have positive size");
  }
  if (!(0 <= b.x_min && b.x_min < b.x_max && b.x_max <= width && 0 <= b.y_min &&
        b.y_min < b.y_max && b.y_max <= height)) {
    throw std::invalid_argument(
        "degenerate or out-of-canvas bbox (" + std::to_string(b.x_min) + "," +
        std::to_string(b.y_min) + "," + std::to_string(b.x_max) + "," +
        std::to_string(b.y_max) + ")");
  }
  const double w = width, h = height;
  const double x0 = 2.0 * b.x_min / w - 1.0;
  const double y0 = 2.0 * b.y_min / h - 1.0;
  const double x1 = 2.0 * b.x_max / w - 1.0;
  const double y1 = 2.0 * b.y_max / h - 1.0;
  return {x0,
          y0,
          x1,
          y1,
          (b.x_min + b.x_max) / w - 1.0,
          (b.y_min + b.y_max) / h - 1.0,
          2.0 * (b.x_max - b.x_min) / w,
          2.0 * (b.y_max - b.y_min) / h};
}

void ValidateObject(const SceneObject& object, int width, int height,
                    int num_categories) {
  if (object.category < 1 || object.category > num_categories) {
    throw std::invalid_argument("object category " +
                                std::to_string(object.category) +
                                " outside 1.." + std::to_string(num_categories));
  }
  SpatialFeatures(object.bbox, width, height);
}

std::pair<int, int> GridCell(double x_center, double y_center) {
  auto bucket = [](double v) {
    return std::clamp(static_cast<int>(std::floor((v + 1.0) * 1.5)), 0, 2);
  };
  return {bucket(y_center), bucket(x_center)};
}

std::vector<double> SceneFeatures(const std::vector<SceneObject>& objects,
                                  int width, int height, int num_categories,
                                  int feature_dim) {
  std::vector<double> raw(num_categories + 9, 0.0);
  if (!objects.empty()) {
    const double share = 1.0 / static_cast<double>(objects.size());
    for (const SceneObject& o : objects) {
      raw[o.category - 1] += share;
      const Spatial s = SpatialFeatures(o.bbox, width, height);
      const auto [row, col] = GridCell(s[4], s[5]);
      raw[num_categories + 3 * row + col] += 1.0;
    }
  }
  raw.resize(static_cast<std::size_t>(feature_dim), 0.0);
  return raw;
}

Game GenerateScene(Rng& rng, const SceneConfig& config, std::uint64_t scene_id) {
  Game game;
  game.scene_id = scene_id;
  game.width = config.width;
  game.height = config.height;
  const int count =
      static_cast<int>(rng.UniformInt(config.min_objects, config.max_objects));
  const int min_w = std::max(
      1, static_cast<int>(std::ceil(config.min_side_fraction * config.width)));
  const int min_h = std::max(
      1, static_cast<int>(std::ceil(config.min_side_fraction * config.height)));
  for (int k = 0; k < count; ++k) {
    SceneObject o;
    o.category = static_cast<int>(rng.UniformInt(1, config.num_categories));
    o.bbox.x_min = static_cast<int>(rng.UniformInt(0, config.width - min_w));
    o.bbox.x_max =
        static_cast<int>(rng.UniformInt(o.bbox.x_min + min_w, config.width));
    o.bbox.y_min = static_cast<int>(rng.UniformInt(0, config.height - min_h));
    o.bbox.y_max =
        static_cast<int>(rng.UniformInt(o.bbox.y_min + min_h, config.height));
    game.objects.push_back(o);
  }
  game.target_index = rng.Index(game.objects.size());
  RefreshFeatures(game, config);
  return game;
}

void RefreshFeatures(Game& game, const SceneConfig& config) {
  game.scene_features = SceneFeatures(game.objects, game.width, game.height,
                                      config.num_categories, config.feature_dim);
}

}  // namespace gwrl::scenes
