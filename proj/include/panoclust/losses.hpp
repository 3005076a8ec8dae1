#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "panoclust/types.hpp"

namespace panoclust {

// One instance's shifted BEV points together with its ground-truth 2D
// centroid.
struct InstanceGroup {
  std::vector<std::array<double, 2>> points;
  std::array<double, 2> gt_centroid{};
};
using InstanceGroups = std::vector<InstanceGroup>;

// Loss value plus per-point subgradients, aligned with the input groups.
struct InstanceLoss {
  double value = 0.0;
  std::vector<std::vector<std::array<double, 2>>> d_points;
};

// Penalizes instance points whose nearest other-instance point sits
// closer than the instance's nearest other ground-truth centroid. Zero by
// convention when fewer than two instances exist. Argmin ties keep the
// first index so subgradients are deterministic.
InstanceLoss repel_loss(const InstanceGroups& groups);

// Mean (unsquared) distance of each instance's points to their own mean;
// the gradient at a point sitting exactly on the mean is zero.
InstanceLoss attract_loss(const InstanceGroups& groups);

struct OffsetL2Loss {
  double value = 0.0;
  OffsetMap d_pred;
};

// Mean squared offset error over masked pixels; zero on an empty mask.
OffsetL2Loss offset_l2_loss(const OffsetMap& pred, const OffsetMap& target,
                            std::span<const uint8_t> mask);

struct WeightedCeLoss {
  double value = 0.0;
  std::vector<double> d_logits;  // n_items x n_classes, row-major
};

// Weight-normalized cross entropy: sum of w[y] * (-log softmax[y]) over
// non-ignored items divided by the sum of their weights.
WeightedCeLoss weighted_ce(std::span<const double> logits, int n_items, int n_classes,
                           std::span<const uint32_t> labels,
                           std::span<const double> class_weights, uint32_t ignore_id);

struct LossWeights {
  double wce = 1.0;
  double ls = 1.0;
  double tv = 5.0;
  double l2 = 0.1;
  double repel = 0.1;
  double attract = 0.1;
};

// Lovasz-style and total-variation terms arrive as externally supplied
// scalars; only their weighted slot is represented here.
struct LossComponents {
  double wce = 0.0;
  double ls = 0.0;
  double tv = 0.0;
  double l2 = 0.0;
  double repel = 0.0;
  double attract = 0.0;
};

double total_loss(const LossComponents& components, const LossWeights& weights);

// Central finite differences, one coordinate at a time.
std::vector<double> numeric_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step);

}  // namespace panoclust
