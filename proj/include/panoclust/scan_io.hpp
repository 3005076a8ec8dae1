#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panoclust/types.hpp"

namespace panoclust {

// SemanticKITTI-style binary formats, little-endian regardless of host:
//   scan  (.bin):   N records of four float32 (x, y, z, reflectance)
//   label (.label): N uint32 words, low 16 bits semantic, high 16 instance

PointCloud load_scan(std::span<const uint8_t> bytes);
PointCloud load_scan_file(const std::string& path);

PointLabels load_labels(std::span<const uint8_t> bytes, std::size_t n_points);
PointLabels load_labels_file(const std::string& path, std::size_t n_points);

// Throws EncodingOverflowError if a semantic or instance id does not fit
// in its 16-bit field.
std::vector<uint8_t> write_predictions(const PointLabels& labels);

std::vector<uint8_t> write_scan(const PointCloud& cloud);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const uint8_t> bytes);

}  // namespace panoclust
