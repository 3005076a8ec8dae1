#include "panoclust/scan_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "panoclust/errors.hpp"

namespace panoclust {

namespace {

constexpr std::size_t kPointRecordBytes = 16;

uint32_t read_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

float read_f32le(const uint8_t* p) { return std::bit_cast<float>(read_u32le(p)); }

void append_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void append_f32le(std::vector<uint8_t>& out, float v) {
  append_u32le(out, std::bit_cast<uint32_t>(v));
}

}  // namespace

PointCloud load_scan(std::span<const uint8_t> bytes) {
  if (bytes.size() % kPointRecordBytes != 0) {
    throw MalformedScanError("scan length " + std::to_string(bytes.size()) +
                             " is not a multiple of 16");
  }
  const std::size_t n = bytes.size() / kPointRecordBytes;
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const uint8_t* rec = bytes.data() + i * kPointRecordBytes;
    Point p{read_f32le(rec), read_f32le(rec + 4), read_f32le(rec + 8),
            read_f32le(rec + 12)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.r)) {
      throw InvalidPointError("non-finite value in point " + std::to_string(i));
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

PointLabels load_labels(std::span<const uint8_t> bytes, std::size_t n_points) {
  if (bytes.size() != 4 * n_points) {
    throw LabelCountError("label buffer has " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(4 * n_points) +
                          " for " + std::to_string(n_points) + " points");
  }
  PointLabels labels;
  labels.sem.reserve(n_points);
  labels.ins.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const uint32_t word = read_u32le(bytes.data() + 4 * i);
    labels.sem.push_back(word & 0xffffu);
    labels.ins.push_back(word >> 16);
  }
  return labels;
}

std::vector<uint8_t> write_predictions(const PointLabels& labels) {
  std::vector<uint8_t> out;
  out.reserve(labels.size() * 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels.sem[i] > 0xffffu) {
      throw EncodingOverflowError("semantic id " + std::to_string(labels.sem[i]) +
                                  " does not fit in 16 bits");
    }
    if (labels.ins[i] > 0xffffu) {
      throw EncodingOverflowError("instance id " + std::to_string(labels.ins[i]) +
                                  " does not fit in 16 bits");
    }
    append_u32le(out, labels.sem[i] | (labels.ins[i] << 16));
  }
  return out;
}

std::vector<uint8_t> write_scan(const PointCloud& cloud) {
  std::vector<uint8_t> out;
  out.reserve(cloud.size() * kPointRecordBytes);
  for (const Point& p : cloud.points) {
    append_f32le(out, p.x);
    append_f32le(out, p.y);
    append_f32le(out, p.z);
    append_f32le(out, p.r);
  }
  return out;
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  const std::streamsize size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw IoError("short read on file: " + path);
  }
  return bytes;
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open file for writing: " + path);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write on file: " + path);
  }
}

PointCloud load_scan_file(const std::string& path) {
  const auto bytes = read_file(path);
  return load_scan(bytes);
}

PointLabels load_labels_file(const std::string& path, std::size_t n_points) {
  const auto bytes = read_file(path);
  return load_labels(bytes, n_points);
}

}  // namespace panoclust
