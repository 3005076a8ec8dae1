#pragma once

#include <cstdint>
#include <vector>

#include "panoclust/bev.hpp"
#include "panoclust/directional_attention.hpp"
#include "panoclust/range_view.hpp"
#include "panoclust/taxonomy.hpp"

namespace panoclust {

// Connected components of the graph on occupied cells with an edge
// wherever the shifted positions are within `radius` meters. Ids are
// 1-based and assigned in row-major order of the first cell reached, so
// the labeling is canonical for a given grid.
struct ClusterResult {
  std::vector<int32_t> cell_cluster;  // aligned with grid.cells
  int num_clusters = 0;
};

// Near-linear BFS: cells are re-binned by shifted position and neighbor
// candidates come only from bins within ceil(radius / cell_size) + 1
// rings.
ClusterResult bfs_cluster(const BevGrid& grid, const ShiftedBev& shifted, double radius);

// Instance id per point: foreground points inherit their cell's cluster
// id through the pixel back-reference tables, everything else gets 0.
std::vector<uint32_t> backmap(const ClusterResult& clusters, const BevGrid& grid,
                              const RangeImage& image);

// Majority voting between semantic and instance predictions: every point
// of an instance takes the instance's modal class (ties to the smaller
// id); instances whose modal class is not a thing class are dissolved.
void fuse_majority(std::vector<uint32_t>& sem, std::vector<uint32_t>& ins,
                   const Taxonomy& taxonomy);

}  // namespace panoclust
