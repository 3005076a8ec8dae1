#include "panoclust/bev.hpp"

#include <algorithm>
#include <cmath>

#include "panoclust/errors.hpp"

namespace panoclust {

std::vector<uint8_t> foreground_mask(std::span<const uint32_t> pixel_sem, int height,
                                     int width, const Taxonomy& taxonomy) {
  if (pixel_sem.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("semantic label map does not match the stated shape");
  }
  std::vector<uint8_t> mask(pixel_sem.size(), 0);
  for (std::size_t i = 0; i < pixel_sem.size(); ++i) {
    mask[i] = taxonomy.is_thing(pixel_sem[i]) ? 1 : 0;
  }
  return mask;
}

ForegroundSet collect_foreground(const RangeImage& image,
                                 std::span<const uint8_t> mask) {
  if (mask.size() != static_cast<std::size_t>(image.height) * image.width) {
    throw DimensionError("foreground mask does not match range image shape");
  }
  ForegroundSet set;
  set.height = image.height;
  set.width = image.width;
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const std::size_t px = image.pixel_index(row, col);
      if (!mask[px] || !image.valid[px]) continue;
      ForegroundEntry entry;
      entry.x = image.features.at(row, col, kChX);
      entry.y = image.features.at(row, col, kChY);
      entry.shifted_x = entry.x;
      entry.shifted_y = entry.y;
      entry.row = row;
      entry.col = col;
      for (int ch = 0; ch < kRangeChannels; ++ch) {
        entry.feature[ch] = image.features.at(row, col, ch);
      }
      set.entries.push_back(entry);
    }
  }
  return set;
}

ForegroundSet shift_points(const ForegroundSet& set, const OffsetMap& offsets) {
  if (offsets.height != set.height || offsets.width != set.width) {
    throw DimensionError("offset map does not match range image shape");
  }
  ForegroundSet shifted = set;
  for (ForegroundEntry& entry : shifted.entries) {
    const std::size_t px = offsets.index(entry.row, entry.col);
    entry.shifted_x = entry.x + offsets.dx[px];
    entry.shifted_y = entry.y + offsets.dy[px];
  }
  return shifted;
}

void BevGrid::rebuild_index() {
  index_.clear();
  index_.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    index_.emplace(cells[i].id, static_cast<int>(i));
  }
}

BevGrid bev_project(const ForegroundSet& set, const BevParams& params) {
  if (params.cell_size <= 0.0 || !std::isfinite(params.extent) || params.extent <= 0.0) {
    throw ConfigError("bev grid needs positive cell size and finite extent");
  }
  BevGrid grid;
  grid.params = params;
  const int dim = static_cast<int>(std::ceil(2.0 * params.extent / params.cell_size));
  grid.rows = dim;
  grid.cols = dim;

  struct Accum {
    int row = 0, col = 0;
    double sx = 0.0, sy = 0.0;
    std::array<double, kRangeChannels> feat{};
    std::vector<int32_t> sources;
  };
  std::unordered_map<int64_t, Accum> accums;

  for (const ForegroundEntry& entry : set.entries) {
    int row = static_cast<int>(std::floor((entry.shifted_x + params.extent) / params.cell_size));
    int col = static_cast<int>(std::floor((entry.shifted_y + params.extent) / params.cell_size));
    if (row < 0 || row >= dim || col < 0 || col >= dim) {
      ++grid.clamped_entries;
      row = std::clamp(row, 0, dim - 1);
      col = std::clamp(col, 0, dim - 1);
    }
    const int64_t id = static_cast<int64_t>(row) * dim + col;
    Accum& acc = accums[id];
    acc.row = row;
    acc.col = col;
    acc.sx += entry.shifted_x;
    acc.sy += entry.shifted_y;
    for (int ch = 0; ch < kRangeChannels; ++ch) acc.feat[ch] += entry.feature[ch];
    acc.sources.push_back(static_cast<int32_t>(
        static_cast<std::size_t>(entry.row) * set.width + entry.col));
  }

  grid.cells.reserve(accums.size());
  for (auto& [id, acc] : accums) {
    BevCell cell;
    cell.id = id;
    cell.row = acc.row;
    cell.col = acc.col;
    const double n = static_cast<double>(acc.sources.size());
    cell.cx = acc.sx / n;
    cell.cy = acc.sy / n;
    for (int ch = 0; ch < kRangeChannels; ++ch) cell.feature[ch] = acc.feat[ch] / n;
    std::sort(acc.sources.begin(), acc.sources.end());
    cell.sources = std::move(acc.sources);
    grid.cells.push_back(std::move(cell));
  }
  std::sort(grid.cells.begin(), grid.cells.end(),
            [](const BevCell& a, const BevCell& b) { return a.id < b.id; });
  grid.rebuild_index();
  return grid;
}

}  // namespace panoclust
