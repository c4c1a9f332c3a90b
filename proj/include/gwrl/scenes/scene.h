#ifndef GWRL_SCENES_SCENE_H_
#define GWRL_SCENES_SCENE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gwrl/util/rng.h"

namespace gwrl::scenes {

/// Pixel-space box, 0 <= x_min < x_max <= width, 0 <= y_min < y_max <= height.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 1;
  int y_max = 1;
  bool operator==(const BBox&) const = default;
};

struct SceneObject {
  int category = 1;  // 1..C
  BBox bbox;
  bool operator==(const SceneObject&) const = default;
};

struct SceneConfig {
  int num_categories = 5;
  int min_objects = 3;
  int max_objects = 6;
  int width = 640;
  int height = 480;
  int feature_dim = 32;
  /// Minimum box side as a fraction of the canvas side.
  double min_side_fraction = 0.05;

  /// Empty when valid; otherwise one message per offending field.
  std::vector<std::string> Validate() const;
};

struct Game {
  std::uint64_t scene_id = 0;
  int width = 0;
  int height = 0;
  std::vector<SceneObject> objects;
  std::size_t target_index = 0;
  std::vector<double> scene_features;

  const SceneObject& target() const { return objects.at(target_index); }
  bool operator==(const Game&) const = default;
};

using Spatial = std::array<double, 8>;

/// [x_min, y_min, x_max, y_max, x_center, y_center, w_box, h_box] with the
/// canvas mapped to [-1, 1]^2 and the origin at its center. Throws
/// std::invalid_argument on a box that is empty or leaves the canvas.
Spatial SpatialFeatures(const BBox& bbox, int width, int height);

void ValidateObject(const SceneObject& object, int width, int height,
                    int num_categories);

/// Normalised category histogram (C entries) followed by 3x3 counts of object
/// centers (row-major, top row first), zero-padded or truncated to
/// `feature_dim`.
std::vector<double> SceneFeatures(const std::vector<SceneObject>& objects,
                                  int width, int height, int num_categories,
                                  int feature_dim);

/// Grid cell (row, col) in {0,1,2}^2 of a normalised center.
std::pair<int, int> GridCell(double x_center, double y_center);

/// One random scene; the target is uniform over its objects.
Game GenerateScene(Rng& rng, const SceneConfig& config, std::uint64_t scene_id);

/// Recomputes `scene_features` from the objects.
void RefreshFeatures(Game& game, const SceneConfig& config);

}  // namespace gwrl::scenes

#endif  // GWRL_SCENES_SCENE_H_
