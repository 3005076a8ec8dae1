#include "panoclust/range_view.hpp"

#include <algorithm>
#include <cmath>

#include "panoclust/errors.hpp"

namespace panoclust {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RangeImage spherical_project(const PointCloud& cloud, const ProjectionConfig& config) {
  if (config.height < 1 || config.width < 1) {
    throw DimensionError("range image dimensions must be at least 1x1");
  }
  if (config.fov_down_deg >= config.fov_up_deg) {
    throw ConfigError("fov_down must be below fov_up");
  }

  const int h = config.height;
  const int w = config.width;
  RangeImage image;
  image.height = h;
  image.width = w;
  image.features = FeatureMap(h, w, kRangeChannels);
  image.valid.assign(static_cast<std::size_t>(h) * w, 0);
  image.pixel_point.assign(static_cast<std::size_t>(h) * w, -1);
  image.point_row.assign(cloud.size(), -1);
  image.point_col.assign(cloud.size(), -1);

  const double fov_span = config.fov_up_deg - config.fov_down_deg;
  std::vector<double> best_depth(static_cast<std::size_t>(h) * w, 0.0);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud.points[i];
    const double x = p.x, y = p.y, z = p.z;
    const double depth = std::sqrt(x * x + y * y + z * z);
    if (depth == 0.0) {
      ++image.skipped_points;
      continue;
    }

    const double yaw = std::atan2(y, x);
    int col = static_cast<int>(std::floor(w * (1.0 - (yaw / kPi + 1.0) / 2.0))) % w;
    col = std::clamp(col, 0, w - 1);

    const double elev_deg = std::asin(std::clamp(z / depth, -1.0, 1.0)) * 180.0 / kPi;
    int row = static_cast<int>(
        std::floor((1.0 - (elev_deg - config.fov_down_deg) / fov_span) * h));
    row = std::clamp(row, 0, h - 1);

    image.point_row[i] = row;
    image.point_col[i] = col;

    const std::size_t px = image.pixel_index(row, col);
    const int32_t current = image.pixel_point[px];
    // Nearest wins; equal depths keep the lower point index.
    if (current < 0 || depth < best_depth[px]) {
      best_depth[px] = depth;
      image.pixel_point[px] = static_cast<int32_t>(i);
      image.valid[px] = 1;
      image.features.at(row, col, kChX) = x;
      image.features.at(row, col, kChY) = y;
      image.features.at(row, col, kChZ) = z;
      image.features.at(row, col, kChRemission) = p.r;
      image.features.at(row, col, kChDepth) = depth;
    }
  }
  return image;
}

std::vector<uint32_t> unproject_labels(const RangeImage& image,
                                       std::span<const uint32_t> pixel_labels) {
  if (pixel_labels.size() != static_cast<std::size_t>(image.height) * image.width) {
    throw DimensionError("pixel label map does not match range image shape");
  }
  std::vector<uint32_t> out(image.point_row.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (image.point_row[i] < 0) continue;  // skipped at projection
    out[i] = pixel_labels[image.pixel_index(image.point_row[i], image.point_col[i])];
  }
  return out;
}

FeatureMap coord_features(const RangeImage& image) {
  FeatureMap coords(image.height, image.width, 5);
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      if (!image.is_valid(row, col)) continue;
      coords.at(row, col, 0) = image.features.at(row, col, kChX);
      coords.at(row, col, 1) = image.features.at(row, col, kChY);
      coords.at(row, col, 2) = image.features.at(row, col, kChZ);
      coords.at(row, col, 3) = image.features.at(row, col, kChDepth);
      coords.at(row, col, 4) = 1.0;
    }
  }
  return coords;
}

}  // namespace panoclust
