#include "panoclust/clustering.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "panoclust/errors.hpp"

namespace panoclust {

namespace {

int64_t bin_key(int bx, int by) {
  return (static_cast<int64_t>(static_cast<uint32_t>(bx)) << 32) |
         static_cast<uint32_t>(by);
}

}  // namespace

ClusterResult bfs_cluster(const BevGrid& grid, const ShiftedBev& shifted, double radius) {
  if (radius <= 0.0) {
    throw ConfigError("clustering radius must be positive");
  }
  if (shifted.positions.size() != grid.cells.size()) {
    throw DimensionError("shifted positions do not align with the grid");
  }
  const std::size_t n = grid.cells.size();
  ClusterResult result;
  result.cell_cluster.assign(n, 0);

  // Re-bin the shifted positions so a radius query only inspects nearby
  // bins instead of every cell.
  const double bin_size = grid.params.cell_size;
  const int rings = static_cast<int>(std::ceil(radius / bin_size)) + 1;
  std::unordered_map<int64_t, std::vector<int>> bins;
  std::vector<int> bin_x(n), bin_y(n);
  for (std::size_t i = 0; i < n; ++i) {
    bin_x[i] = static_cast<int>(std::floor(shifted.positions[i][0] / bin_size));
    bin_y[i] = static_cast<int>(std::floor(shifted.positions[i][1] / bin_size));
    bins[bin_key(bin_x[i], bin_y[i])].push_back(static_cast<int>(i));
  }

  const double radius_sq = radius * radius;
  std::deque<int> frontier;
  // Cells are stored sorted by linear id, so seeding in storage order
  // makes ids canonical (smallest row-major cell first).
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (result.cell_cluster[seed] != 0) continue;
    const int32_t id = ++result.num_clusters;
    result.cell_cluster[seed] = id;
    frontier.clear();
    frontier.push_back(static_cast<int>(seed));
    while (!frontier.empty()) {
      const int current = frontier.front();
      frontier.pop_front();
      const auto& pos = shifted.positions[current];
      for (int bx = bin_x[current] - rings; bx <= bin_x[current] + rings; ++bx) {
        for (int by = bin_y[current] - rings; by <= bin_y[current] + rings; ++by) {
          const auto it = bins.find(bin_key(bx, by));
          if (it == bins.end()) continue;
          for (int candidate : it->second) {
            if (result.cell_cluster[candidate] != 0) continue;
            const double dx = pos[0] - shifted.positions[candidate][0];
            const double dy = pos[1] - shifted.positions[candidate][1];
            if (dx * dx + dy * dy <= radius_sq) {
              result.cell_cluster[candidate] = id;
              frontier.push_back(candidate);
            }
          }
        }
      }
    }
  }
  return result;
}

std::vector<uint32_t> backmap(const ClusterResult& clusters, const BevGrid& grid,
                              const RangeImage& image) {
  if (clusters.cell_cluster.size() != grid.cells.size()) {
    throw DimensionError("cluster ids do not align with the grid");
  }
  std::vector<uint32_t> pixel_ids(static_cast<std::size_t>(image.height) * image.width, 0);
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    const uint32_t id = static_cast<uint32_t>(clusters.cell_cluster[ci]);
    for (int32_t px : grid.cells[ci].sources) {
      pixel_ids[static_cast<std::size_t>(px)] = id;
    }
  }
  return unproject_labels(image, pixel_ids);
}

void fuse_majority(std::vector<uint32_t>& sem, std::vector<uint32_t>& ins,
                   const Taxonomy& taxonomy) {
  if (sem.size() != ins.size()) {
    throw DimensionError("semantic and instance label lengths differ");
  }
  std::unordered_map<uint32_t, std::map<uint32_t, int>> votes;
  for (std::size_t i = 0; i < sem.size(); ++i) {
    if (ins[i] > 0) votes[ins[i]][sem[i]]++;
  }
  std::unordered_map<uint32_t, uint32_t> winner;
  for (const auto& [instance, counts] : votes) {
    uint32_t best_class = 0;
    int best_count = -1;
    // std::map iterates ascending, so equal counts keep the smaller id.
    for (const auto& [cls, count] : counts) {
      if (count > best_count) {
        best_count = count;
        best_class = cls;
      }
    }
    winner[instance] = best_class;
  }
  for (std::size_t i = 0; i < sem.size(); ++i) {
    if (ins[i] == 0) continue;
    const uint32_t cls = winner[ins[i]];
    if (taxonomy.is_thing(cls)) {
      sem[i] = cls;
    } else {
      ins[i] = 0;  // dissolved, semantics untouched
    }
  }
}

}  // namespace panoclust
