#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "panoclust/range_view.hpp"
#include "panoclust/taxonomy.hpp"
#include "panoclust/types.hpp"

namespace panoclust {

// True exactly where the pixel's class is a thing class. Works on ground
// truth or predicted labels alike.
std::vector<uint8_t> foreground_mask(std::span<const uint32_t> pixel_sem, int height,
                                     int width, const Taxonomy& taxonomy);

struct ForegroundEntry {
  double x = 0.0;  // original sensor-frame coordinates, meters
  double y = 0.0;
  double shifted_x = 0.0;
  double shifted_y = 0.0;
  int row = 0;  // source range-image pixel
  int col = 0;
  std::array<double, kRangeChannels> feature{};
};

struct ForegroundSet {
  int height = 0;
  int width = 0;
  std::vector<ForegroundEntry> entries;

  std::size_t size() const { return entries.size(); }
};

// One entry per valid masked pixel, in row-major pixel order. Shifted
// coordinates start equal to the originals.
ForegroundSet collect_foreground(const RangeImage& image,
                                 std::span<const uint8_t> mask);

// shifted = original + predicted center offset at the source pixel.
ForegroundSet shift_points(const ForegroundSet& set, const OffsetMap& offsets);

struct BevParams {
  double cell_size = 0.5;  // meters
  double extent = 50.0;    // grid spans [-extent, extent) in x and y
};

struct BevCell {
  int64_t id = 0;  // row-major linear cell index
  int row = 0;     // x bin
  int col = 0;     // y bin
  double cx = 0.0;  // mean shifted coordinates of the contributors
  double cy = 0.0;
  std::array<double, kRangeChannels> feature{};  // mean source feature
  std::vector<int32_t> sources;  // contributing flat pixel indices, ascending
};

// Sparse occupancy grid over shifted foreground coordinates. Cells are
// stored sorted by linear id so iteration order is deterministic.
struct BevGrid {
  int rows = 0;
  int cols = 0;
  BevParams params;
  std::vector<BevCell> cells;
  int clamped_entries = 0;

  int find(int row, int col) const {
    const auto it = index_.find(static_cast<int64_t>(row) * cols + col);
    return it == index_.end() ? -1 : it->second;
  }
  bool occupied(int row, int col) const { return find(row, col) >= 0; }
  void rebuild_index();

 private:
  std::unordered_map<int64_t, int> index_;
};

// Discretizes by floor((coord + extent) / cell_size); out-of-extent
// entries clamp to the border cells and are counted. Colliding entries
// average their features and coordinates arithmetically.
BevGrid bev_project(const ForegroundSet& set, const BevParams& params);

}  // namespace panoclust
