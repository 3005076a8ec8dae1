#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "panoclust/types.hpp"

namespace panoclust {

// Channel layout of the projected range image.
enum RangeChannel : int {
  kChX = 0,
  kChY = 1,
  kChZ = 2,
  kChRemission = 3,
  kChDepth = 4,
  kRangeChannels = 5,
};

struct ProjectionConfig {
  int height = 64;
  int width = 2048;
  double fov_up_deg = 3.0;
  double fov_down_deg = -25.0;
};

// Spherical projection of a scan plus the point<->pixel correspondence
// needed to map per-pixel predictions back to points.
struct RangeImage {
  int height = 0;
  int width = 0;
  FeatureMap features;             // H x W x 5 (x, y, z, remission, depth)
  std::vector<uint8_t> valid;      // H x W occupancy
  std::vector<int32_t> pixel_point;  // H x W winning point index, -1 if none
  std::vector<int32_t> point_row;  // per point, -1 if skipped
  std::vector<int32_t> point_col;
  int skipped_points = 0;          // zero-range returns

  std::size_t pixel_index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  bool is_valid(int row, int col) const { return valid[pixel_index(row, col)] != 0; }
};

// Azimuth selects the column, elevation the row; a contested pixel keeps
// the nearest point (ties broken by lower point index). Points exactly at
// the sensor origin are skipped and counted.
RangeImage spherical_project(const PointCloud& cloud, const ProjectionConfig& config);

// Every point receives the label of its pixel; skipped points receive 0.
std::vector<uint32_t> unproject_labels(const RangeImage& image,
                                       std::span<const uint32_t> pixel_labels);

// Per-pixel geometric feature (x, y, z, depth, occupancy) driving the
// attention convolution.
FeatureMap coord_features(const RangeImage& image);

}  // namespace panoclust
