#pragma once

#include <cstdint>
#include <vector>

#include "panoclust/errors.hpp"

namespace panoclust {

// One LiDAR return: Cartesian position in sensor frame plus reflectance.
// Stored as float to mirror the on-disk record exactly.
struct Point {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float r = 0.0f;
};

struct PointCloud {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Per-point semantic class and instance id. Semantic 0 means unlabeled,
// instance 0 means "no instance"; instance ids are only meaningful on
// thing-class points.
struct PointLabels {
  std::vector<uint32_t> sem;
  std::vector<uint32_t> ins;

  std::size_t size() const { return sem.size(); }

  bool operator==(const PointLabels& other) const = default;
};

// Dense H x W x C tensor, row-major, channel-minor.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, 0.0) {}

  double& at(int row, int col, int ch) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
};

// Predicted (dx, dy) in meters per range-image pixel.
struct OffsetMap {
  int height = 0;
  int width = 0;
  std::vector<double> dx;
  std::vector<double> dy;

  OffsetMap() = default;
  OffsetMap(int h, int w)
      : height(h), width(w),
        dx(static_cast<std::size_t>(h) * w, 0.0),
        dy(static_cast<std::size_t>(h) * w, 0.0) {}

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
};

}  // namespace panoclust
