#include "panoclust/losses.hpp"

#include <cmath>
#include <limits>

#include "panoclust/errors.hpp"

namespace panoclust {

namespace {

constexpr double kDistanceEps = 1e-12;

std::vector<std::vector<std::array<double, 2>>> zero_like(const InstanceGroups& groups) {
  std::vector<std::vector<std::array<double, 2>>> grads(groups.size());
  for (size_t i = 0; i < groups.size(); ++i) {
    grads[i].assign(groups[i].points.size(), {0.0, 0.0});
  }
  return grads;
}

void require_nonempty_groups(const InstanceGroups& groups) {
  for (const auto& g : groups) {
    if (g.points.empty()) {
      throw DimensionError("instance group has no points");
    }
  }
}

double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

InstanceLoss repel_loss(const InstanceGroups& groups) {
  require_nonempty_groups(groups);
  InstanceLoss out;
  out.d_points = zero_like(groups);
  const size_t n = groups.size();
  if (n <= 1) return out;

  // Per-instance margin: distance to the nearest other ground-truth centroid.
  std::vector<double> margin(n, std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      margin[i] = std::min(margin[i], dist2d(groups[i].gt_centroid, groups[j].gt_centroid));
    }
  }

  for (size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(groups[i].points.size()));
    for (size_t p = 0; p < groups[i].points.size(); ++p) {
      const auto& a = groups[i].points[p];
      double best = std::numeric_limits<double>::infinity();
      size_t best_j = 0, best_q = 0;
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (size_t q = 0; q < groups[j].points.size(); ++q) {
          const double d = dist2d(a, groups[j].points[q]);
          if (d < best) {
            best = d;
            best_j = j;
            best_q = q;
          }
        }
      }
      const double term = margin[i] - best;
      if (term <= 0.0) continue;
      out.value += inv * term;
      if (best > kDistanceEps) {
        const auto& b = groups[best_j].points[best_q];
        const double ux = (a[0] - b[0]) / best;
        const double uy = (a[1] - b[1]) / best;
        // d(-best)/da = -u, d(-best)/db = +u.
        out.d_points[i][p][0] -= inv * ux;
        out.d_points[i][p][1] -= inv * uy;
        out.d_points[best_j][best_q][0] += inv * ux;
        out.d_points[best_j][best_q][1] += inv * uy;
      }
    }
  }
  return out;
}

InstanceLoss attract_loss(const InstanceGroups& groups) {
  require_nonempty_groups(groups);
  InstanceLoss out;
  out.d_points = zero_like(groups);
  const size_t n = groups.size();
  if (n == 0) return out;

  for (size_t i = 0; i < n; ++i) {
    const size_t np = groups[i].points.size();
    const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(np));
    std::array<double, 2> mean{0.0, 0.0};
    for (const auto& p : groups[i].points) {
      mean[0] += p[0];
      mean[1] += p[1];
    }
    mean[0] /= static_cast<double>(np);
    mean[1] /= static_cast<double>(np);

    // Unit vectors from the mean to each point; the mean itself depends on
    // every point, which subtracts the average unit vector from each gradient.
    std::vector<std::array<double, 2>> units(np, {0.0, 0.0});
    std::array<double, 2> unit_sum{0.0, 0.0};
    for (size_t p = 0; p < np; ++p) {
      const double d = dist2d(groups[i].points[p], mean);
      out.value += inv * d;
      if (d > kDistanceEps) {
        units[p][0] = (groups[i].points[p][0] - mean[0]) / d;
        units[p][1] = (groups[i].points[p][1] - mean[1]) / d;
      }
      unit_sum[0] += units[p][0];
      unit_sum[1] += units[p][1];
    }
    for (size_t p = 0; p < np; ++p) {
      out.d_points[i][p][0] = inv * (units[p][0] - unit_sum[0] / static_cast<double>(np));
      out.d_points[i][p][1] = inv * (units[p][1] - unit_sum[1] / static_cast<double>(np));
    }
  }
  return out;
}

OffsetL2Loss offset_l2_loss(const OffsetMap& pred, const OffsetMap& target,
                            std::span<const uint8_t> mask) {
  if (pred.height != target.height || pred.width != target.width) {
    throw DimensionError("offset map shapes differ");
  }
  const size_t n = static_cast<size_t>(pred.height) * static_cast<size_t>(pred.width);
  if (mask.size() != n) {
    throw DimensionError("offset mask size does not match map");
  }
  OffsetL2Loss out;
  out.d_pred = OffsetMap(pred.height, pred.width);
  size_t count = 0;
  for (size_t k = 0; k < n; ++k) {
    if (mask[k]) ++count;
  }
  if (count == 0) return out;
  const double inv = 1.0 / static_cast<double>(count);
  for (size_t k = 0; k < n; ++k) {
    if (!mask[k]) continue;
    const double ex = pred.dx[k] - target.dx[k];
    const double ey = pred.dy[k] - target.dy[k];
    out.value += inv * (ex * ex + ey * ey);
    out.d_pred.dx[k] = 2.0 * inv * ex;
    out.d_pred.dy[k] = 2.0 * inv * ey;
  }
  return out;
}

WeightedCeLoss weighted_ce(std::span<const double> logits, int n_items, int n_classes,
                           std::span<const uint32_t> labels,
                           std::span<const double> class_weights, uint32_t ignore_id) {
  if (n_items < 0 || n_classes <= 0) {
    throw DimensionError("invalid logits shape");
  }
  if (logits.size() != static_cast<size_t>(n_items) * static_cast<size_t>(n_classes)) {
    throw DimensionError("logits size does not match n_items x n_classes");
  }
  if (labels.size() != static_cast<size_t>(n_items)) {
    throw DimensionError("label count does not match n_items");
  }
  if (class_weights.size() != static_cast<size_t>(n_classes)) {
    throw DimensionError("class weight count does not match n_classes");
  }

  WeightedCeLoss out;
  out.d_logits.assign(logits.size(), 0.0);

  double weight_sum = 0.0;
  for (int it = 0; it < n_items; ++it) {
    const uint32_t y = labels[it];
    if (y == ignore_id) continue;
    if (y >= static_cast<uint32_t>(n_classes)) {
      throw InvalidLabelError("label " + std::to_string(y) + " out of range");
    }
    weight_sum += class_weights[y];
  }
  if (weight_sum <= 0.0) return out;

  std::vector<double> probs(static_cast<size_t>(n_classes));
  for (int it = 0; it < n_items; ++it) {
    const uint32_t y = labels[it];
    if (y == ignore_id) continue;
    const double* row = logits.data() + static_cast<size_t>(it) * n_classes;
    double max_logit = row[0];
    for (int c = 1; c < n_classes; ++c) max_logit = std::max(max_logit, row[c]);
    double denom = 0.0;
    for (int c = 0; c < n_classes; ++c) {
      probs[static_cast<size_t>(c)] = std::exp(row[c] - max_logit);
      denom += probs[static_cast<size_t>(c)];
    }
    for (int c = 0; c < n_classes; ++c) probs[static_cast<size_t>(c)] /= denom;

    const double w = class_weights[y];
    out.value += w * -std::log(probs[y]) / weight_sum;
    double* grow = out.d_logits.data() + static_cast<size_t>(it) * n_classes;
    for (int c = 0; c < n_classes; ++c) {
      const double onehot = (static_cast<uint32_t>(c) == y) ? 1.0 : 0.0;
      grow[c] = w * (probs[static_cast<size_t>(c)] - onehot) / weight_sum;
    }
  }
  return out;
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  return w.wce * c.wce + w.ls * c.ls + w.tv * c.tv + w.l2 * c.l2 +
         w.repel * c.repel + w.attract * c.attract;
}

std::vector<double> numeric_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
  if (step <= 0.0) {
    throw ConfigError("finite-difference step must be positive");
  }
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size(), 0.0);
  for (size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + step;
    const double hi = f(probe);
    probe[k] = saved - step;
    const double lo = f(probe);
    probe[k] = saved;
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      throw NumericError("non-finite loss during finite differencing");
    }
    grad[k] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

}  // namespace panoclust
