#pragma once

#include <array>
#include <vector>

#include "panoclust/bev.hpp"
#include "panoclust/mlp.hpp"

namespace panoclust {

// The five neighborhood sampling directions. West/East walk columns,
// North/South walk rows, Center is the cell itself; every window includes
// the cell, so each center of mass averages at least one occupied cell.
enum Direction : int {
  kWest = 0,
  kEast = 1,
  kNorth = 2,
  kSouth = 3,
  kCenter = 4,
  kDirections = 5,
};

// Per occupied cell: center of mass of the occupied cells in each
// directional window, plus the occupied count that normalized it.
struct DirectionalComs {
  std::vector<std::array<std::array<double, 2>, kDirections>> coms;
  std::vector<std::array<int, kDirections>> counts;
};

DirectionalComs directional_coms(const BevGrid& grid, int window);

// Final cell positions after mixing the five centers of mass with
// softmax attention computed from the cell's mean feature. Aligned with
// grid.cells.
struct ShiftedBev {
  std::vector<std::array<double, 2>> positions;
};

ShiftedBev apply_attention(const BevGrid& grid, const DirectionalComs& coms,
                           const Mlp& mlp);

// Attention weights alone (softmax over the 5 directions), for callers
// that need to inspect the simplex.
std::vector<std::array<double, kDirections>> attention_mix(const BevGrid& grid,
                                                           const Mlp& mlp);

}  // namespace panoclust
