#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panoclust/bev.hpp"
#include "panoclust/losses.hpp"
#include "panoclust/metrics.hpp"
#include "panoclust/range_view.hpp"
#include "panoclust/synthetic.hpp"
#include "panoclust/taxonomy.hpp"

namespace panoclust {

enum class OffsetSource { kOracle, kFile, kNone };

// Full run description. Values come from a flat key-value config file with
// command-line overrides on top; validate_config rejects non-positive
// dimensions and unknown offset sources.
struct PipelineConfig {
  ProjectionConfig projection;
  std::string taxonomy_path;  // empty: built-in synthetic taxonomy
  BevParams bev;
  int sma_window = 7;
  std::string sma_mlp_path;  // optional attention weights; empty: uniform mixing
  double cluster_radius = 1.2;
  LossWeights loss_weights;
  OffsetSource offset_source = OffsetSource::kOracle;
  std::string offset_dir;  // offset_source == kFile: <dir>/<scan>.offsets
  double oracle_sigma = 0.0;
  uint64_t noise_seed = 7;
  size_t min_instance_points = 20;
  std::string out_dir;  // empty: keep results in memory only
  int jobs = 1;
  // Synthetic input generation (used when no scan directory is given).
  int synth_scenes = 0;
  int synth_min_instances = 10;
  int synth_max_instances = 10;
  SceneSpec synth;
};

PipelineConfig load_config(const std::string& path);
void apply_config_line(PipelineConfig& config, const std::string& key,
                       const std::string& value);
void validate_config(const PipelineConfig& config);

// One unit of work: either a scan/label file pair or a synthetic scene
// generated on the fly. sigma_override < 0 defers to the run-wide value.
struct ScanInput {
  std::string name;
  std::string scan_path;
  std::string label_path;
  bool synthetic = false;
  SceneSpec scene;
  double sigma_override = -1.0;
};

std::vector<ScanInput> discover_scans(const std::string& dir);
std::vector<ScanInput> make_synthetic_inputs(const PipelineConfig& config);

struct StageTimings {
  double project_ms = 0;
  double offsets_ms = 0;
  double bev_ms = 0;
  double attention_ms = 0;
  double cluster_ms = 0;
  double fuse_ms = 0;
  double eval_ms = 0;
  double total_ms = 0;
};

struct ScanReport {
  std::string name;
  bool ok = false;
  std::string error;
  size_t n_points = 0;
  int gt_instances = 0;
  int clusters = 0;
  double pq = 0, rq = 0, sq = 0;
  double pq_things = 0, rq_things = 0;
  double miou = 0;
  bool has_losses = false;
  double repel = 0, attract = 0, offset_l2 = 0, weighted_total = 0;
  StageTimings timings;
};

struct RunResult {
  PanopticScores scores;
  std::vector<ScanReport> scans;
  int failures = 0;
  bool has_losses = false;
  LossComponents mean_losses;  // repel/attract/l2 averaged over scored scans
};

// Runs the full chain per scan (project, mask, shift, BEV, directional
// attention, cluster, backmap, fuse, evaluate) over a worker pool.
// Per-scan statistics merge in input order, so results do not depend on
// the parallelism degree. A failing scan is recorded and skipped. With an
// output directory set, writes predictions/<scan>.label, metrics.json,
// per_scan.csv and timings.csv (timings are the only non-deterministic
// output and live in their own file).
RunResult run_pipeline(const PipelineConfig& config, const std::vector<ScanInput>& inputs);

struct SweepCell {
  double cell_size = 0;
  int window = 0;
  bool ok = false;
  std::string error;
  PanopticScores scores;
};

// One run_pipeline invocation per (cell size, window) combination over the
// same inputs; writes <out>/sweep.csv plus one output directory per cell.
std::vector<SweepCell> sweep(const PipelineConfig& base, const std::vector<ScanInput>& inputs,
                             const std::vector<double>& cell_sizes,
                             const std::vector<int>& windows);

struct EvalResult {
  PanopticScores scores;
  std::vector<std::string> failures;
  int scans = 0;
};

// Metrics-only path: pairs <gt>/<name>.label with <pred>/<name>.label.
EvalResult evaluate_dirs(const std::string& gt_dir, const std::string& pred_dir,
                         const Taxonomy& taxonomy, size_t min_points);

// Offset maps as flat binary (per pixel row-major: dx, dy as little-endian
// float32), the on-disk form consumed by offset_source kFile.
void save_offsets(const std::string& path, const OffsetMap& offsets);
OffsetMap load_offsets(const std::string& path, int height, int width);

std::string scores_to_json(const PanopticScores& scores, const Taxonomy& taxonomy,
                           const RunResult* run, const PipelineConfig* config);

}  // namespace panoclust
