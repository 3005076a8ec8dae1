#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "panoclust/range_view.hpp"
#include "panoclust/rng.hpp"
#include "panoclust/taxonomy.hpp"
#include "panoclust/types.hpp"

namespace panoclust {

// Layout parameters for a seeded scene: thing instances sampled as uniform
// disks at disjoint azimuth sectors over a flat ground ring. Sector
// placement keeps instances on disjoint range-image columns and the z bands
// keep things and ground on disjoint rows for the default sensor FOV, so
// projection never mixes labels across instances.
struct SceneSpec {
  uint64_t seed = 1;
  int num_instances = 10;
  int min_points = 30;
  int max_points = 80;
  double min_radius = 0.5;   // full object diameter / 2 (meters)
  double max_radius = 1.5;
  double min_separation = 4.0;
  int ground_points = 4000;
  double min_range = 12.0;   // instance disk centers (meters)
  double max_range = 45.0;
  double ground_min_range = 4.0;
  double ground_max_range = 48.0;
  double thing_min_z = 0.5;
  double thing_max_z = 1.5;
  double ground_z = -1.5;
  uint32_t ground_class = 1;
  std::vector<uint32_t> thing_classes = {2, 3};
};

struct Scene {
  PointCloud cloud;
  PointLabels labels;
  // centroids[k] is the exact xy mean of instance id k+1, computed from the
  // stored float coordinates.
  std::vector<std::array<double, 2>> centroids;
  std::vector<uint32_t> instance_classes;
};

// Deterministic for a fixed seed. Every instance's points lie within its
// radius of the reported centroid and pairwise centroid separations meet
// spec.min_separation; placement that cannot satisfy this after bounded
// retries raises PackingError.
Scene generate_scene(const SceneSpec& spec);

// Taxonomy matching SceneSpec defaults: 1 = ground (stuff), 2 = box and
// 3 = post (things), 0 = unlabeled.
Taxonomy synthetic_taxonomy();

// Ideal per-pixel center offsets: instance centroid minus the pixel's point
// xy, with optional isotropic Gaussian noise of standard deviation sigma
// drawn in row-major pixel order from the given seed. Pixels whose point is
// not part of a thing instance get a zero offset.
OffsetMap oracle_offsets(const RangeImage& image, const PointLabels& labels,
                         const std::vector<std::array<double, 2>>& centroids,
                         const Taxonomy& taxonomy, double sigma, uint64_t noise_seed);

}  // namespace panoclust
