#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panoclust/errors.hpp"
#include "panoclust/pipeline.hpp"
#include "panoclust/scan_io.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

void print_summary(const panoclust::RunResult& result) {
  const auto& s = result.scores;
  std::printf("scans %zu  failures %d\n", result.scans.size(), result.failures);
  std::printf("PQ %.4f  PQd %.4f  RQ %.4f  SQ %.4f  mIoU %.4f\n", s.pq, s.pq_dagger,
              s.rq, s.sq, s.miou);
  std::printf("things: PQ %.4f  RQ %.4f  SQ %.4f\n", s.pq_things, s.rq_things,
              s.sq_things);
  std::printf("stuff:  PQ %.4f  RQ %.4f  SQ %.4f\n", s.pq_stuff, s.rq_stuff, s.sq_stuff);
  if (result.has_losses) {
    std::printf("losses: repel %.6f  attract %.6f  offset_l2 %.6f\n",
                result.mean_losses.repel, result.mean_losses.attract,
                result.mean_losses.l2);
  }
}

struct RunFlags {
  std::string config_path, scans_dir, out_dir, offsets, taxonomy;
  double radius = 0, grid = 0, sigma = 0;
  int kernel = 0, jobs = 0, synth = 0;
  long long seed = 0, min_points = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (flat key-value)");
  cmd->add_option("--scans", flags.scans_dir, "directory of .bin scans with .label files");
  cmd->add_option("--synth", flags.synth, "generate this many synthetic scenes instead");
  cmd->add_option("--seed", flags.seed, "base seed for synthetic scenes");
  cmd->add_option("--radius", flags.radius, "clustering radius in meters");
  cmd->add_option("--grid", flags.grid, "BEV cell size in meters");
  cmd->add_option("--kernel", flags.kernel, "directional window size K");
  cmd->add_option("--offsets", flags.offsets, "oracle | none | file:<dir>");
  cmd->add_option("--sigma", flags.sigma, "oracle offset noise sigma in meters");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--jobs", flags.jobs, "worker threads");
  cmd->add_option("--taxonomy", flags.taxonomy, "taxonomy file");
  cmd->add_option("--min-points", flags.min_points, "small-instance filter threshold");
}

panoclust::PipelineConfig build_config(const CLI::App* cmd, const RunFlags& flags) {
  panoclust::PipelineConfig config;
  if (!flags.config_path.empty()) config = panoclust::load_config(flags.config_path);
  if (cmd->count("--radius")) config.cluster_radius = flags.radius;
  if (cmd->count("--grid")) config.bev.cell_size = flags.grid;
  if (cmd->count("--kernel")) config.sma_window = flags.kernel;
  if (cmd->count("--offsets")) {
    panoclust::apply_config_line(config, "offsets", flags.offsets);
  }
  if (cmd->count("--sigma")) config.oracle_sigma = flags.sigma;
  if (cmd->count("--out")) config.out_dir = flags.out_dir;
  if (cmd->count("--jobs")) config.jobs = flags.jobs;
  if (cmd->count("--taxonomy")) config.taxonomy_path = flags.taxonomy;
  if (cmd->count("--min-points")) {
    config.min_instance_points = static_cast<size_t>(flags.min_points);
  }
  if (cmd->count("--synth")) config.synth_scenes = flags.synth;
  if (cmd->count("--seed")) config.synth.seed = static_cast<uint64_t>(flags.seed);
  if (config.out_dir.empty()) config.out_dir = "out";
  return config;
}

std::vector<panoclust::ScanInput> build_inputs(const panoclust::PipelineConfig& config,
                                               const RunFlags& flags) {
  if (!flags.scans_dir.empty()) return panoclust::discover_scans(flags.scans_dir);
  return panoclust::make_synthetic_inputs(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"range-view panoptic clustering pipeline"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "process scans end to end");
  add_run_flags(run_cmd, run_flags);

  RunFlags sweep_flags;
  std::string grid_list = "0.3,0.5,1.0";
  std::string kernel_list = "3,7";
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "grid x kernel parameter sweep over one input set");
  add_run_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--grid-list", grid_list, "comma-separated BEV cell sizes");
  sweep_cmd->add_option("--kernel-list", kernel_list, "comma-separated window sizes");

  std::string eval_gt, eval_pred, eval_taxonomy, eval_out;
  long long eval_min_points = 20;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  eval_cmd->add_option("--gt", eval_gt, "directory of ground-truth .label files")->required();
  eval_cmd->add_option("--pred", eval_pred, "directory of predicted .label files")->required();
  eval_cmd->add_option("--taxonomy", eval_taxonomy, "taxonomy file");
  eval_cmd->add_option("--min-points", eval_min_points, "small-instance filter threshold");
  eval_cmd->add_option("--out", eval_out, "write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const panoclust::PipelineConfig config = build_config(run_cmd, run_flags);
      const auto inputs = build_inputs(config, run_flags);
      const panoclust::RunResult result = panoclust::run_pipeline(config, inputs);
      print_summary(result);
      std::printf("outputs in %s\n", config.out_dir.c_str());
      return (!result.scans.empty() && result.failures == static_cast<int>(result.scans.size()))
                 ? 1
                 : 0;
    }
    if (sweep_cmd->parsed()) {
      const panoclust::PipelineConfig config = build_config(sweep_cmd, sweep_flags);
      const auto inputs = build_inputs(config, sweep_flags);
      std::vector<double> grids;
      for (const auto& g : split_list(grid_list)) grids.push_back(std::stod(g));
      std::vector<int> kernels;
      for (const auto& k : split_list(kernel_list)) kernels.push_back(std::stoi(k));
      const auto cells = panoclust::sweep(config, inputs, grids, kernels);
      std::printf("%-10s %-7s %-7s %-8s %-8s %-8s %-8s\n", "cell_size", "kernel",
                  "status", "PQ", "RQ", "SQ", "mIoU");
      for (const auto& cell : cells) {
        std::printf("%-10.3f %-7d %-7s %-8.4f %-8.4f %-8.4f %-8.4f\n", cell.cell_size,
                    cell.window, cell.ok ? "ok" : "error", cell.scores.pq, cell.scores.rq,
                    cell.scores.sq, cell.scores.miou);
      }
      std::printf("table in %s/sweep.csv\n", config.out_dir.c_str());
      return 0;
    }
    // eval
    const panoclust::Taxonomy taxonomy = eval_taxonomy.empty()
                                             ? panoclust::synthetic_taxonomy()
                                             : panoclust::Taxonomy::from_file(eval_taxonomy);
    const panoclust::EvalResult result = panoclust::evaluate_dirs(
        eval_gt, eval_pred, taxonomy, static_cast<size_t>(eval_min_points));
    for (const auto& failure : result.failures) {
      std::fprintf(stderr, "skipped %s\n", failure.c_str());
    }
    const std::string json = panoclust::scores_to_json(result.scores, taxonomy, nullptr, nullptr);
    if (eval_out.empty()) {
      std::fputs(json.c_str(), stdout);
    } else {
      panoclust::write_file(eval_out,
                            {reinterpret_cast<const uint8_t*>(json.data()), json.size()});
    }
    return result.failures.empty() ? 0 : 1;
  } catch (const panoclust::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
