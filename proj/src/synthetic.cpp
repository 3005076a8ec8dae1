#include "panoclust/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "panoclust/errors.hpp"

namespace panoclust {

namespace {

constexpr int kPlacementAttempts = 256;
// Keeps at least two range-image columns (down to W=512) between the
// azimuth spans of adjacent instances.
constexpr double kAzimuthMargin = 0.013;

void validate(const SceneSpec& spec) {
  if (spec.num_instances < 0) throw ConfigError("num_instances must be >= 0");
  if (spec.min_points < 1 || spec.max_points < spec.min_points) {
    throw ConfigError("invalid per-instance point count range");
  }
  if (spec.min_radius <= 0 || spec.max_radius < spec.min_radius) {
    throw ConfigError("invalid object radius range");
  }
  if (spec.min_separation < 0) throw ConfigError("min_separation must be >= 0");
  if (spec.ground_points < 0) throw ConfigError("ground_points must be >= 0");
  if (spec.min_range <= 0 || spec.max_range < spec.min_range) {
    throw ConfigError("invalid instance range interval");
  }
  if (spec.ground_min_range <= 0 || spec.ground_max_range < spec.ground_min_range) {
    throw ConfigError("invalid ground range interval");
  }
  if (spec.num_instances > 0 && spec.thing_classes.empty()) {
    throw ConfigError("thing_classes must be non-empty when instances are requested");
  }
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  validate(spec);
  Scene scene;
  Rng rng(spec.seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const int n_inst = spec.num_instances;

  for (int i = 0; i < n_inst; ++i) {
    const uint32_t cls =
        spec.thing_classes[static_cast<size_t>(rng.uniform_int(
            0, static_cast<int64_t>(spec.thing_classes.size()) - 1))];
    const int n_points = static_cast<int>(rng.uniform_int(spec.min_points, spec.max_points));
    const double radius = rng.uniform(spec.min_radius, spec.max_radius);
    const double sector_center = two_pi * (static_cast<double>(i) + 0.5) / n_inst;
    const double sector_half = std::numbers::pi / n_inst;

    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const double range = rng.uniform(spec.min_range, spec.max_range);
      const double halfwidth = std::asin((radius / 2.0) / range);
      const double jitter_limit = sector_half - halfwidth - kAzimuthMargin;
      if (jitter_limit <= 0.0) continue;
      const double theta = sector_center + rng.uniform(-jitter_limit, jitter_limit);
      const double cx = range * std::cos(theta);
      const double cy = range * std::sin(theta);

      // Sampling inside radius/2 keeps every point within `radius` of the
      // empirical mean, which is itself inside the sampling disk.
      std::vector<Point> points(static_cast<size_t>(n_points));
      double mx = 0.0, my = 0.0;
      for (auto& p : points) {
        const double rr = (radius / 2.0) * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, two_pi);
        p.x = static_cast<float>(cx + rr * std::cos(phi));
        p.y = static_cast<float>(cy + rr * std::sin(phi));
        p.z = static_cast<float>(rng.uniform(spec.thing_min_z, spec.thing_max_z));
        p.r = static_cast<float>(rng.uniform());
        mx += static_cast<double>(p.x);
        my += static_cast<double>(p.y);
      }
      mx /= n_points;
      my /= n_points;

      bool separated = true;
      for (const auto& c : scene.centroids) {
        if (std::hypot(mx - c[0], my - c[1]) < spec.min_separation) {
          separated = false;
          break;
        }
      }
      if (!separated) continue;

      const uint32_t instance_id = static_cast<uint32_t>(i + 1);
      for (const auto& p : points) {
        scene.cloud.points.push_back(p);
        scene.labels.sem.push_back(cls);
        scene.labels.ins.push_back(instance_id);
      }
      scene.centroids.push_back({mx, my});
      scene.instance_classes.push_back(cls);
      placed = true;
    }
    if (!placed) {
      throw PackingError("cannot place instance " + std::to_string(i + 1) + " of " +
                         std::to_string(n_inst) + " at separation " +
                         std::to_string(spec.min_separation));
    }
  }

  for (int g = 0; g < spec.ground_points; ++g) {
    const double theta = rng.uniform(0.0, two_pi);
    const double range = rng.uniform(spec.ground_min_range, spec.ground_max_range);
    Point p;
    p.x = static_cast<float>(range * std::cos(theta));
    p.y = static_cast<float>(range * std::sin(theta));
    p.z = static_cast<float>(spec.ground_z);
    p.r = static_cast<float>(rng.uniform());
    scene.cloud.points.push_back(p);
    scene.labels.sem.push_back(spec.ground_class);
    scene.labels.ins.push_back(0);
  }
  return scene;
}

Taxonomy synthetic_taxonomy() {
  return Taxonomy({{0, "unlabeled"}, {1, "ground"}, {2, "box"}, {3, "post"}}, {2, 3});
}

OffsetMap oracle_offsets(const RangeImage& image, const PointLabels& labels,
                         const std::vector<std::array<double, 2>>& centroids,
                         const Taxonomy& taxonomy, double sigma, uint64_t noise_seed) {
  if (labels.sem.size() != labels.ins.size()) {
    throw DimensionError("semantic and instance label counts differ");
  }
  OffsetMap offsets(image.height, image.width);
  Rng noise(noise_seed);
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const size_t px = image.pixel_index(row, col);
      if (!image.valid[px]) continue;
      const int32_t point = image.pixel_point[px];
      if (point < 0 || static_cast<size_t>(point) >= labels.sem.size()) {
        throw DimensionError("range image does not match label count");
      }
      const uint32_t ins = labels.ins[static_cast<size_t>(point)];
      if (ins == 0 || !taxonomy.is_thing(labels.sem[static_cast<size_t>(point)])) continue;
      if (ins > centroids.size()) {
        throw InvalidLabelError("instance id " + std::to_string(ins) +
                                " has no centroid");
      }
      const double px_x = image.features.at(row, col, kChX);
      const double px_y = image.features.at(row, col, kChY);
      double dx = centroids[ins - 1][0] - px_x;
      double dy = centroids[ins - 1][1] - px_y;
      if (sigma > 0.0) {
        dx += noise.gaussian(0.0, sigma);
        dy += noise.gaussian(0.0, sigma);
      }
      offsets.dx[px] = dx;
      offsets.dy[px] = dy;
    }
  }
  return offsets;
}

}  // namespace panoclust
