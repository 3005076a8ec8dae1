#include "panoclust/directional_attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "panoclust/errors.hpp"

namespace panoclust {

DirectionalComs directional_coms(const BevGrid& grid, int window) {
  if (window < 1) {
    throw ConfigError("directional window must be at least 1");
  }
  DirectionalComs result;
  result.coms.resize(grid.cells.size());
  result.counts.resize(grid.cells.size());

  auto accumulate = [&grid](int row, int col, double& sx, double& sy, int& n) {
    const int slot = grid.find(row, col);
    if (slot < 0) return;
    sx += grid.cells[slot].cx;
    sy += grid.cells[slot].cy;
    ++n;
  };

  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    const BevCell& cell = grid.cells[ci];
    for (int dir = 0; dir < kDirections; ++dir) {
      double sx = 0.0, sy = 0.0;
      int n = 0;
      switch (dir) {
        case kWest:
          for (int i = -window; i <= 0; ++i) accumulate(cell.row, cell.col + i, sx, sy, n);
          break;
        case kEast:
          for (int i = 0; i <= window; ++i) accumulate(cell.row, cell.col + i, sx, sy, n);
          break;
        case kNorth:
          for (int i = -window; i <= 0; ++i) accumulate(cell.row + i, cell.col, sx, sy, n);
          break;
        case kSouth:
          for (int i = 0; i <= window; ++i) accumulate(cell.row + i, cell.col, sx, sy, n);
          break;
        case kCenter:
          accumulate(cell.row, cell.col, sx, sy, n);
          break;
      }
      result.coms[ci][dir] = {sx / n, sy / n};
      result.counts[ci][dir] = n;
    }
  }
  return result;
}

std::vector<std::array<double, kDirections>> attention_mix(const BevGrid& grid,
                                                           const Mlp& mlp) {
  if (mlp.input_dim() != kRangeChannels || mlp.output_dim() != kDirections) {
    throw DimensionError("attention mlp must map cell features to 5 logits");
  }
  std::vector<std::array<double, kDirections>> mix(grid.cells.size());
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    const std::vector<double> logits =
        mlp.forward(std::span<const double>(grid.cells[ci].feature));
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double v : logits) {
      if (!std::isfinite(v)) throw NumericError("non-finite attention logit");
      max_logit = std::max(max_logit, v);
    }
    double denom = 0.0;
    for (int d = 0; d < kDirections; ++d) {
      mix[ci][d] = std::exp(logits[d] - max_logit);
      denom += mix[ci][d];
    }
    for (int d = 0; d < kDirections; ++d) mix[ci][d] /= denom;
  }
  return mix;
}

ShiftedBev apply_attention(const BevGrid& grid, const DirectionalComs& coms,
                           const Mlp& mlp) {
  if (coms.coms.size() != grid.cells.size()) {
    throw DimensionError("directional centers of mass do not align with the grid");
  }
  const auto mix = attention_mix(grid, mlp);
  ShiftedBev shifted;
  shifted.positions.resize(grid.cells.size());
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    double x = 0.0, y = 0.0;
    for (int d = 0; d < kDirections; ++d) {
      x += mix[ci][d] * coms.coms[ci][d][0];
      y += mix[ci][d] * coms.coms[ci][d][1];
    }
    shifted.positions[ci] = {x, y};
  }
  return shifted;
}

}  // namespace panoclust
