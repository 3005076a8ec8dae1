#include "panoclust/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "panoclust/clustering.hpp"
#include "panoclust/errors.hpp"
#include "panoclust/scan_io.hpp"

namespace fs = std::filesystem;

namespace panoclust {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + value);
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + value);
  }
}

// "a..b" or a single integer.
void parse_int_range(const std::string& key, const std::string& value, int* lo, int* hi) {
  const auto pos = value.find("..");
  if (pos == std::string::npos) {
    *lo = *hi = static_cast<int>(parse_int(key, value));
    return;
  }
  *lo = static_cast<int>(parse_int(key, value.substr(0, pos)));
  *hi = static_cast<int>(parse_int(key, value.substr(pos + 2)));
}

Taxonomy load_taxonomy(const PipelineConfig& config) {
  if (config.taxonomy_path.empty()) return synthetic_taxonomy();
  return Taxonomy::from_file(config.taxonomy_path);
}

// Centroid per instance id (index id-1) from ground-truth thing points;
// synthetic scenes carry exact centroids already.
std::vector<std::array<double, 2>> gt_centroids(const PointCloud& cloud,
                                                const PointLabels& labels,
                                                const Taxonomy& taxonomy) {
  uint32_t max_id = 0;
  for (size_t i = 0; i < labels.ins.size(); ++i) {
    if (labels.ins[i] > 0 && taxonomy.is_thing(labels.sem[i])) {
      max_id = std::max(max_id, labels.ins[i]);
    }
  }
  std::vector<std::array<double, 2>> sums(max_id, {0.0, 0.0});
  std::vector<int64_t> counts(max_id, 0);
  for (size_t i = 0; i < labels.ins.size(); ++i) {
    const uint32_t id = labels.ins[i];
    if (id == 0 || !taxonomy.is_thing(labels.sem[i])) continue;
    sums[id - 1][0] += static_cast<double>(cloud.points[i].x);
    sums[id - 1][1] += static_cast<double>(cloud.points[i].y);
    ++counts[id - 1];
  }
  for (uint32_t k = 0; k < max_id; ++k) {
    if (counts[k] > 0) {
      sums[k][0] /= static_cast<double>(counts[k]);
      sums[k][1] /= static_cast<double>(counts[k]);
    }
  }
  return sums;
}

struct ScanOutcome {
  ScanReport report;
  MetricAccumulator stats;
  bool has_stats = false;
};

struct LossInputs {
  InstanceGroups groups;
  bool valid = false;
};

// Per-cell instance groups: each occupied cell votes with the majority
// ground-truth instance id of its source pixels (ties to the smaller id).
LossInputs build_loss_groups(const BevGrid& grid, const ShiftedBev& positions,
                             const RangeImage& image, const PointLabels& gt,
                             const Taxonomy& taxonomy,
                             const std::vector<std::array<double, 2>>& centroids) {
  LossInputs out;
  std::map<uint32_t, std::vector<std::array<double, 2>>> by_instance;
  for (size_t c = 0; c < grid.cells.size(); ++c) {
    std::map<uint32_t, int> votes;
    for (const int32_t px : grid.cells[c].sources) {
      const int32_t point = image.pixel_point[static_cast<size_t>(px)];
      if (point < 0) continue;
      const uint32_t id = gt.ins[static_cast<size_t>(point)];
      if (id > 0 && taxonomy.is_thing(gt.sem[static_cast<size_t>(point)])) ++votes[id];
    }
    uint32_t winner = 0;
    int best = 0;
    for (const auto& [id, n] : votes) {
      if (n > best) {
        winner = id;
        best = n;
      }
    }
    if (winner > 0) by_instance[winner].push_back(positions.positions[c]);
  }
  for (const auto& [id, cells] : by_instance) {
    if (id > centroids.size()) return out;  // inconsistent labels; skip losses
    InstanceGroup group;
    group.points = cells;
    group.gt_centroid = centroids[id - 1];
    out.groups.push_back(std::move(group));
  }
  out.valid = true;
  return out;
}

ScanOutcome process_scan(const PipelineConfig& config, const Taxonomy& taxonomy,
                         const Mlp& sma_mlp, const ScanInput& input, size_t index) {
  ScanOutcome outcome;
  ScanReport& rep = outcome.report;
  rep.name = input.name;
  const auto t_total = Clock::now();

  PointCloud cloud;
  PointLabels gt;
  std::vector<std::array<double, 2>> centroids;
  bool have_centroids = false;
  if (input.synthetic) {
    Scene scene = generate_scene(input.scene);
    cloud = std::move(scene.cloud);
    gt = std::move(scene.labels);
    centroids = std::move(scene.centroids);
    have_centroids = true;
    if (!config.out_dir.empty()) {
      write_file(config.out_dir + "/scans/" + input.name + ".bin", write_scan(cloud));
      write_file(config.out_dir + "/gt/" + input.name + ".label", write_predictions(gt));
    }
  } else {
    cloud = load_scan_file(input.scan_path);
    if (input.label_path.empty() || !fs::exists(input.label_path)) {
      throw IoError("no label file for scan " + input.name);
    }
    gt = load_labels_file(input.label_path, cloud.points.size());
  }
  rep.n_points = cloud.points.size();

  auto t = Clock::now();
  const RangeImage image = spherical_project(cloud, config.projection);
  rep.timings.project_ms = ms_since(t);

  // Semantic oracle: per-pixel class of the pixel's winning point. The
  // trained semantic decoder is out of scope here.
  const size_t n_px = static_cast<size_t>(image.height) * static_cast<size_t>(image.width);
  std::vector<uint32_t> pixel_sem(n_px, 0);
  for (size_t px = 0; px < n_px; ++px) {
    const int32_t point = image.pixel_point[px];
    if (point >= 0) pixel_sem[px] = gt.sem[static_cast<size_t>(point)];
  }
  const std::vector<uint8_t> mask =
      foreground_mask(pixel_sem, image.height, image.width, taxonomy);

  t = Clock::now();
  OffsetMap offsets(image.height, image.width);
  const double sigma = input.sigma_override >= 0 ? input.sigma_override : config.oracle_sigma;
  switch (config.offset_source) {
    case OffsetSource::kOracle: {
      if (!have_centroids) {
        centroids = gt_centroids(cloud, gt, taxonomy);
        have_centroids = true;
      }
      offsets = oracle_offsets(image, gt, centroids, taxonomy, sigma,
                               config.noise_seed + index);
      break;
    }
    case OffsetSource::kFile:
      offsets = load_offsets(config.offset_dir + "/" + input.name + ".offsets",
                             image.height, image.width);
      break;
    case OffsetSource::kNone:
      break;
  }
  rep.timings.offsets_ms = ms_since(t);

  t = Clock::now();
  const ForegroundSet foreground = collect_foreground(image, mask);
  const ForegroundSet shifted = shift_points(foreground, offsets);
  const BevGrid grid = bev_project(shifted, config.bev);
  rep.timings.bev_ms = ms_since(t);

  t = Clock::now();
  const DirectionalComs coms = directional_coms(grid, config.sma_window);
  const ShiftedBev positions = apply_attention(grid, coms, sma_mlp);
  rep.timings.attention_ms = ms_since(t);

  t = Clock::now();
  const ClusterResult clusters = bfs_cluster(grid, positions, config.cluster_radius);
  rep.clusters = clusters.num_clusters;
  std::vector<uint32_t> pred_ins = backmap(clusters, grid, image);
  rep.timings.cluster_ms = ms_since(t);

  t = Clock::now();
  std::vector<uint32_t> pred_sem = unproject_labels(image, pixel_sem);
  fuse_majority(pred_sem, pred_ins, taxonomy);
  rep.timings.fuse_ms = ms_since(t);

  const PointLabels predictions{std::move(pred_sem), std::move(pred_ins)};
  if (!config.out_dir.empty()) {
    write_file(config.out_dir + "/predictions/" + input.name + ".label",
               write_predictions(predictions));
  }

  t = Clock::now();
  const PointLabels gt_filtered = filter_small_instances(gt, config.min_instance_points);
  outcome.stats = match_instances(gt_filtered, predictions, taxonomy);
  outcome.has_stats = true;
  {
    std::set<uint64_t> segs;
    for (size_t i = 0; i < gt_filtered.ins.size(); ++i) {
      if (gt_filtered.ins[i] > 0 && taxonomy.is_thing(gt_filtered.sem[i])) {
        segs.insert((static_cast<uint64_t>(gt_filtered.sem[i]) << 32) | gt_filtered.ins[i]);
      }
    }
    rep.gt_instances = static_cast<int>(segs.size());
  }
  const PanopticScores scan_scores = compute_scores(outcome.stats, taxonomy);
  rep.pq = scan_scores.pq;
  rep.rq = scan_scores.rq;
  rep.sq = scan_scores.sq;
  rep.pq_things = scan_scores.pq_things;
  rep.rq_things = scan_scores.rq_things;
  rep.miou = scan_scores.miou;

  if (!have_centroids) {
    centroids = gt_centroids(cloud, gt, taxonomy);
    have_centroids = true;
  }
  const LossInputs loss_inputs =
      build_loss_groups(grid, positions, image, gt, taxonomy, centroids);
  if (loss_inputs.valid) {
    rep.repel = repel_loss(loss_inputs.groups).value;
    rep.attract = attract_loss(loss_inputs.groups).value;
    const OffsetMap clean =
        oracle_offsets(image, gt, centroids, taxonomy, 0.0, 0);
    rep.offset_l2 = offset_l2_loss(offsets, clean, mask).value;
    LossComponents c;
    c.repel = rep.repel;
    c.attract = rep.attract;
    c.l2 = rep.offset_l2;
    rep.weighted_total = total_loss(c, config.loss_weights);
    rep.has_losses = true;
  }
  rep.timings.eval_ms = ms_since(t);

  rep.timings.total_ms = ms_since(t_total);
  rep.ok = true;
  return outcome;
}

std::string format_double(double v) {
  nlohmann::json j = v;
  return j.dump();
}

void write_per_scan_csv(const std::string& path, const std::vector<ScanReport>& scans) {
  std::ostringstream csv;
  csv << "scan,ok,points,gt_instances,clusters,pq,rq,sq,pq_things,rq_things,miou,"
         "repel,attract,offset_l2,weighted_total,error\n";
  for (const auto& rep : scans) {
    csv << rep.name << ',' << (rep.ok ? 1 : 0) << ',' << rep.n_points << ','
        << rep.gt_instances << ',' << rep.clusters << ',' << format_double(rep.pq) << ','
        << format_double(rep.rq) << ',' << format_double(rep.sq) << ','
        << format_double(rep.pq_things) << ',' << format_double(rep.rq_things) << ','
        << format_double(rep.miou) << ',' << format_double(rep.repel) << ','
        << format_double(rep.attract) << ',' << format_double(rep.offset_l2) << ','
        << format_double(rep.weighted_total) << ',' << rep.error << '\n';
  }
  const std::string text = csv.str();
  write_file(path, {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
}

void write_timings_csv(const std::string& path, const std::vector<ScanReport>& scans) {
  std::ostringstream csv;
  csv << "scan,project_ms,offsets_ms,bev_ms,attention_ms,cluster_ms,fuse_ms,eval_ms,"
         "total_ms\n";
  for (const auto& rep : scans) {
    const auto& tm = rep.timings;
    csv << rep.name << ',' << tm.project_ms << ',' << tm.offsets_ms << ',' << tm.bev_ms
        << ',' << tm.attention_ms << ',' << tm.cluster_ms << ',' << tm.fuse_ms << ','
        << tm.eval_ms << ',' << tm.total_ms << '\n';
  }
  const std::string text = csv.str();
  write_file(path, {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  PipelineConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream parts(line);
    std::string key, value;
    if (!(parts >> key)) continue;
    std::getline(parts, value);
    const auto start = value.find_first_not_of(" \t");
    value = start == std::string::npos ? "" : value.substr(start);
    const auto end = value.find_last_not_of(" \t\r");
    if (end != std::string::npos) value.erase(end + 1);
    if (value.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": key '" + key +
                        "' has no value");
    }
    apply_config_line(config, key, value);
  }
  return config;
}

void apply_config_line(PipelineConfig& config, const std::string& key,
                       const std::string& value) {
  if (key == "height") {
    config.projection.height = static_cast<int>(parse_int(key, value));
  } else if (key == "width") {
    config.projection.width = static_cast<int>(parse_int(key, value));
  } else if (key == "fov_up") {
    config.projection.fov_up_deg = parse_double(key, value);
  } else if (key == "fov_down") {
    config.projection.fov_down_deg = parse_double(key, value);
  } else if (key == "taxonomy") {
    config.taxonomy_path = value;
  } else if (key == "cell_size") {
    config.bev.cell_size = parse_double(key, value);
  } else if (key == "extent") {
    config.bev.extent = parse_double(key, value);
  } else if (key == "kernel") {
    config.sma_window = static_cast<int>(parse_int(key, value));
  } else if (key == "sma_mlp") {
    config.sma_mlp_path = value;
  } else if (key == "radius") {
    config.cluster_radius = parse_double(key, value);
  } else if (key == "min_instance_points") {
    config.min_instance_points = static_cast<size_t>(parse_int(key, value));
  } else if (key == "offsets") {
    if (value == "oracle") {
      config.offset_source = OffsetSource::kOracle;
    } else if (value == "none") {
      config.offset_source = OffsetSource::kNone;
    } else if (value.rfind("file:", 0) == 0) {
      config.offset_source = OffsetSource::kFile;
      config.offset_dir = value.substr(5);
    } else {
      throw ConfigError("offsets must be oracle, none, or file:<dir>");
    }
  } else if (key == "sigma") {
    config.oracle_sigma = parse_double(key, value);
  } else if (key == "noise_seed") {
    config.noise_seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "out") {
    config.out_dir = value;
  } else if (key == "jobs") {
    config.jobs = static_cast<int>(parse_int(key, value));
  } else if (key == "synth_scenes") {
    config.synth_scenes = static_cast<int>(parse_int(key, value));
  } else if (key == "synth_seed") {
    config.synth.seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "synth_instances") {
    parse_int_range(key, value, &config.synth_min_instances, &config.synth_max_instances);
  } else if (key == "synth_ground_points") {
    config.synth.ground_points = static_cast<int>(parse_int(key, value));
  } else if (key == "synth_min_separation") {
    config.synth.min_separation = parse_double(key, value);
  } else if (key == "beta_wce") {
    config.loss_weights.wce = parse_double(key, value);
  } else if (key == "beta_ls") {
    config.loss_weights.ls = parse_double(key, value);
  } else if (key == "beta_tv") {
    config.loss_weights.tv = parse_double(key, value);
  } else if (key == "beta_l2") {
    config.loss_weights.l2 = parse_double(key, value);
  } else if (key == "beta_repel") {
    config.loss_weights.repel = parse_double(key, value);
  } else if (key == "beta_attract") {
    config.loss_weights.attract = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

void validate_config(const PipelineConfig& config) {
  if (config.projection.height <= 0 || config.projection.width <= 0) {
    throw ConfigError("range image dimensions must be positive");
  }
  if (config.projection.fov_up_deg <= config.projection.fov_down_deg) {
    throw ConfigError("fov_up must exceed fov_down");
  }
  if (config.bev.cell_size <= 0 || config.bev.extent <= 0) {
    throw ConfigError("BEV cell size and extent must be positive");
  }
  if (config.sma_window < 0) throw ConfigError("kernel window must be >= 0");
  if (config.cluster_radius <= 0) throw ConfigError("cluster radius must be positive");
  if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (config.oracle_sigma < 0) throw ConfigError("sigma must be >= 0");
  if (config.offset_source == OffsetSource::kFile && config.offset_dir.empty()) {
    throw ConfigError("offsets file:<dir> requires a directory");
  }
  if (config.synth_scenes < 0) throw ConfigError("synth_scenes must be >= 0");
  if (config.synth_min_instances > config.synth_max_instances) {
    throw ConfigError("synth_instances range is inverted");
  }
  const LossWeights& w = config.loss_weights;
  if (w.wce < 0 || w.ls < 0 || w.tv < 0 || w.l2 < 0 || w.repel < 0 || w.attract < 0) {
    throw ConfigError("loss weights must be non-negative");
  }
}

std::vector<ScanInput> discover_scans(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("scan directory not found: " + dir);
  std::vector<ScanInput> inputs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".bin") continue;
    ScanInput input;
    input.name = entry.path().stem().string();
    input.scan_path = entry.path().string();
    fs::path label = entry.path();
    label.replace_extension(".label");
    if (fs::exists(label)) input.label_path = label.string();
    inputs.push_back(std::move(input));
  }
  std::sort(inputs.begin(), inputs.end(),
            [](const ScanInput& a, const ScanInput& b) { return a.name < b.name; });
  return inputs;
}

std::vector<ScanInput> make_synthetic_inputs(const PipelineConfig& config) {
  std::vector<ScanInput> inputs;
  for (int i = 0; i < config.synth_scenes; ++i) {
    ScanInput input;
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d", i);
    input.name = name;
    input.synthetic = true;
    input.scene = config.synth;
    input.scene.seed = config.synth.seed + static_cast<uint64_t>(i);
    if (config.synth_min_instances == config.synth_max_instances) {
      input.scene.num_instances = config.synth_min_instances;
    } else {
      Rng pick(input.scene.seed * 0x9e3779b97f4a7c15ULL + 1);
      input.scene.num_instances = static_cast<int>(
          pick.uniform_int(config.synth_min_instances, config.synth_max_instances));
    }
    inputs.push_back(std::move(input));
  }
  return inputs;
}

RunResult run_pipeline(const PipelineConfig& config, const std::vector<ScanInput>& inputs) {
  validate_config(config);
  const Taxonomy taxonomy = load_taxonomy(config);
  Mlp sma_mlp = config.sma_mlp_path.empty()
                    ? Mlp::zeros({kRangeChannels, kDirections})
                    : Mlp::from_file(config.sma_mlp_path, {kRangeChannels, kDirections});

  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    fs::create_directories(config.out_dir + "/predictions");
    bool any_synth = false;
    for (const auto& input : inputs) any_synth = any_synth || input.synthetic;
    if (any_synth) {
      fs::create_directories(config.out_dir + "/scans");
      fs::create_directories(config.out_dir + "/gt");
    }
  }

  const size_t n = inputs.size();
  std::vector<ScanOutcome> outcomes(n);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t idx = next.fetch_add(1);
      if (idx >= n) break;
      try {
        outcomes[idx] = process_scan(config, taxonomy, sma_mlp, inputs[idx], idx);
      } catch (const std::exception& e) {
        outcomes[idx] = ScanOutcome{};
        outcomes[idx].report.name = inputs[idx].name;
        outcomes[idx].report.ok = false;
        outcomes[idx].report.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(std::max<size_t>(n, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RunResult result;
  MetricAccumulator acc;
  LossComponents loss_sums;
  int loss_scans = 0;
  for (size_t idx = 0; idx < n; ++idx) {
    ScanOutcome& outcome = outcomes[idx];
    if (outcome.has_stats) acc.merge(outcome.stats);
    if (!outcome.report.ok) ++result.failures;
    if (outcome.report.has_losses) {
      loss_sums.repel += outcome.report.repel;
      loss_sums.attract += outcome.report.attract;
      loss_sums.l2 += outcome.report.offset_l2;
      ++loss_scans;
    }
    result.scans.push_back(std::move(outcome.report));
  }
  result.scores = compute_scores(acc, taxonomy);
  if (loss_scans > 0) {
    result.has_losses = true;
    result.mean_losses.repel = loss_sums.repel / loss_scans;
    result.mean_losses.attract = loss_sums.attract / loss_scans;
    result.mean_losses.l2 = loss_sums.l2 / loss_scans;
  }

  if (!config.out_dir.empty()) {
    const std::string json = scores_to_json(result.scores, taxonomy, &result, &config);
    write_file(config.out_dir + "/metrics.json",
               {reinterpret_cast<const uint8_t*>(json.data()), json.size()});
    write_per_scan_csv(config.out_dir + "/per_scan.csv", result.scans);
    write_timings_csv(config.out_dir + "/timings.csv", result.scans);
  }
  return result;
}

std::vector<SweepCell> sweep(const PipelineConfig& base, const std::vector<ScanInput>& inputs,
                             const std::vector<double>& cell_sizes,
                             const std::vector<int>& windows) {
  if (cell_sizes.empty() || windows.empty()) {
    throw ConfigError("sweep needs at least one cell size and one window");
  }
  std::vector<SweepCell> cells;
  std::ostringstream csv;
  csv << "cell_size,kernel,status,pq,pq_dagger,rq,sq,pq_things,rq_things,sq_things,"
         "pq_stuff,rq_stuff,sq_stuff,miou\n";
  for (const double cs : cell_sizes) {
    for (const int k : windows) {
      SweepCell cell;
      cell.cell_size = cs;
      cell.window = k;
      PipelineConfig config = base;
      config.bev.cell_size = cs;
      config.sma_window = k;
      if (!base.out_dir.empty()) {
        std::ostringstream dir;
        dir << base.out_dir << "/sweep_g" << cs << "_k" << k;
        config.out_dir = dir.str();
      }
      try {
        cell.scores = run_pipeline(config, inputs).scores;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      csv << format_double(cs) << ',' << k << ',' << (cell.ok ? "ok" : "error") << ',';
      const PanopticScores& s = cell.scores;
      csv << format_double(s.pq) << ',' << format_double(s.pq_dagger) << ','
          << format_double(s.rq) << ',' << format_double(s.sq) << ','
          << format_double(s.pq_things) << ',' << format_double(s.rq_things) << ','
          << format_double(s.sq_things) << ',' << format_double(s.pq_stuff) << ','
          << format_double(s.rq_stuff) << ',' << format_double(s.sq_stuff) << ','
          << format_double(s.miou) << '\n';
      cells.push_back(std::move(cell));
    }
  }
  if (!base.out_dir.empty()) {
    fs::create_directories(base.out_dir);
    const std::string text = csv.str();
    write_file(base.out_dir + "/sweep.csv",
               {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
  }
  return cells;
}

EvalResult evaluate_dirs(const std::string& gt_dir, const std::string& pred_dir,
                         const Taxonomy& taxonomy, size_t min_points) {
  if (!fs::is_directory(gt_dir)) throw IoError("ground-truth directory not found: " + gt_dir);
  if (!fs::is_directory(pred_dir)) throw IoError("prediction directory not found: " + pred_dir);
  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".label") {
      gt_files.push_back(entry.path());
    }
  }
  std::sort(gt_files.begin(), gt_files.end());

  EvalResult result;
  MetricAccumulator acc;
  for (const auto& gt_path : gt_files) {
    const fs::path pred_path = fs::path(pred_dir) / gt_path.filename();
    try {
      if (!fs::exists(pred_path)) throw IoError("missing prediction: " + pred_path.string());
      const auto gt_bytes = read_file(gt_path.string());
      const PointLabels gt = load_labels(gt_bytes, gt_bytes.size() / 4);
      const auto pred_bytes = read_file(pred_path.string());
      const PointLabels pred = load_labels(pred_bytes, pred_bytes.size() / 4);
      const PointLabels gt_filtered = filter_small_instances(gt, min_points);
      acc.add_scan(gt_filtered, pred, taxonomy);
      ++result.scans;
    } catch (const std::exception& e) {
      result.failures.push_back(gt_path.filename().string() + ": " + e.what());
    }
  }
  result.scores = compute_scores(acc, taxonomy);
  return result;
}

void save_offsets(const std::string& path, const OffsetMap& offsets) {
  std::vector<uint8_t> bytes;
  bytes.reserve(offsets.dx.size() * 8);
  auto append_f32 = [&bytes](float v) {
    const uint32_t bits = std::bit_cast<uint32_t>(v);
    bytes.push_back(static_cast<uint8_t>(bits & 0xff));
    bytes.push_back(static_cast<uint8_t>((bits >> 8) & 0xff));
    bytes.push_back(static_cast<uint8_t>((bits >> 16) & 0xff));
    bytes.push_back(static_cast<uint8_t>((bits >> 24) & 0xff));
  };
  for (size_t k = 0; k < offsets.dx.size(); ++k) {
    append_f32(static_cast<float>(offsets.dx[k]));
    append_f32(static_cast<float>(offsets.dy[k]));
  }
  write_file(path, bytes);
}

OffsetMap load_offsets(const std::string& path, int height, int width) {
  const std::vector<uint8_t> bytes = read_file(path);
  const size_t n = static_cast<size_t>(height) * static_cast<size_t>(width);
  if (bytes.size() != n * 8) {
    throw DimensionError("offset file " + path + " does not match " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
  OffsetMap offsets(height, width);
  auto read_f32 = [&bytes](size_t at) {
    const uint32_t bits = static_cast<uint32_t>(bytes[at]) |
                          (static_cast<uint32_t>(bytes[at + 1]) << 8) |
                          (static_cast<uint32_t>(bytes[at + 2]) << 16) |
                          (static_cast<uint32_t>(bytes[at + 3]) << 24);
    return std::bit_cast<float>(bits);
  };
  for (size_t k = 0; k < n; ++k) {
    offsets.dx[k] = static_cast<double>(read_f32(k * 8));
    offsets.dy[k] = static_cast<double>(read_f32(k * 8 + 4));
  }
  return offsets;
}

std::string scores_to_json(const PanopticScores& scores, const Taxonomy& taxonomy,
                           const RunResult* run, const PipelineConfig* config) {
  nlohmann::ordered_json j;
  if (run != nullptr) {
    j["scans"] = run->scans.size();
    j["failures"] = run->failures;
    nlohmann::ordered_json failed = nlohmann::ordered_json::array();
    for (const auto& rep : run->scans) {
      if (!rep.ok) failed.push_back({{"scan", rep.name}, {"error", rep.error}});
    }
    j["failed"] = failed;
  }
  nlohmann::ordered_json agg;
  agg["pq"] = scores.pq;
  agg["pq_dagger"] = scores.pq_dagger;
  agg["rq"] = scores.rq;
  agg["sq"] = scores.sq;
  agg["pq_things"] = scores.pq_things;
  agg["rq_things"] = scores.rq_things;
  agg["sq_things"] = scores.sq_things;
  agg["pq_stuff"] = scores.pq_stuff;
  agg["rq_stuff"] = scores.rq_stuff;
  agg["sq_stuff"] = scores.sq_stuff;
  agg["miou"] = scores.miou;
  j["aggregate"] = agg;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (const auto& cs : scores.per_class) {
    nlohmann::ordered_json c;
    c["class"] = cs.class_id;
    c["name"] = taxonomy.name_of(cs.class_id);
    c["thing"] = taxonomy.is_thing(cs.class_id);
    c["pq"] = cs.pq;
    c["rq"] = cs.rq;
    c["sq"] = cs.sq;
    c["iou"] = cs.iou;
    c["tp"] = cs.tp;
    c["fp"] = cs.fp;
    c["fn"] = cs.fn;
    c["counted"] = cs.counted;
    per_class.push_back(c);
  }
  j["per_class"] = per_class;
  if (run != nullptr && run->has_losses) {
    nlohmann::ordered_json losses;
    losses["repel"] = run->mean_losses.repel;
    losses["attract"] = run->mean_losses.attract;
    losses["offset_l2"] = run->mean_losses.l2;
    if (config != nullptr) {
      losses["weighted_total"] = total_loss(run->mean_losses, config->loss_weights);
    }
    j["losses"] = losses;
  }
  if (config != nullptr) {
    // Echo the science-relevant settings only; execution knobs like jobs
    // and output paths would break byte-identity across equivalent runs.
    nlohmann::ordered_json c;
    c["height"] = config->projection.height;
    c["width"] = config->projection.width;
    c["fov_up"] = config->projection.fov_up_deg;
    c["fov_down"] = config->projection.fov_down_deg;
    c["cell_size"] = config->bev.cell_size;
    c["extent"] = config->bev.extent;
    c["kernel"] = config->sma_window;
    c["radius"] = config->cluster_radius;
    c["min_instance_points"] = config->min_instance_points;
    c["sigma"] = config->oracle_sigma;
    c["noise_seed"] = config->noise_seed;
    j["config"] = c;
  }
  return j.dump(2) + "\n";
}

}  // namespace panoclust
