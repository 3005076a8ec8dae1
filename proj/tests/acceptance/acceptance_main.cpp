// Acceptance gate: ten go/no-go checks over the whole library plus the
// shipped command-line tool. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any of them fail.

#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "panoclust/attention_conv.hpp"
#include "panoclust/bev.hpp"
#include "panoclust/clustering.hpp"
#include "panoclust/directional_attention.hpp"
#include "panoclust/errors.hpp"
#include "panoclust/losses.hpp"
#include "panoclust/metrics.hpp"
#include "panoclust/pipeline.hpp"
#include "panoclust/range_view.hpp"
#include "panoclust/rng.hpp"
#include "panoclust/scan_io.hpp"
#include "panoclust/synthetic.hpp"

namespace fs = std::filesystem;
using namespace panoclust;

namespace {

std::string g_cli_path;
fs::path g_scratch;

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool run_cli(const std::string& args, std::ostream& log) {
  const std::string cmd = "\"" + g_cli_path + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc != 0) log << "    command failed (" << rc << "): " << args << "\n";
  return rc == 0;
}

// ---------------------------------------------------------------- criterion 1

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<int32_t> dsu_clusters(const std::vector<std::array<double, 2>>& pos,
                                  double radius) {
  Dsu dsu(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      const double dx = pos[i][0] - pos[j][0];
      const double dy = pos[i][1] - pos[j][1];
      if (dx * dx + dy * dy <= radius * radius) {
        dsu.unite(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  std::vector<int32_t> labels(pos.size(), 0);
  std::map<int, int32_t> seen;
  int32_t next = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    auto [it, inserted] = seen.emplace(dsu.find(static_cast<int>(i)), next + 1);
    if (inserted) ++next;
    labels[i] = it->second;
  }
  return labels;
}

// Grid with one occupied cell per requested position: sources raster over
// distinct cells, shifted positions supplied by the caller.
struct CellFixture {
  BevGrid grid;
  ShiftedBev shifted;
};

CellFixture cell_fixture(const std::vector<std::array<double, 2>>& positions,
                         double cell_size = 0.5) {
  CellFixture fx;
  ForegroundSet set;
  set.height = 1;
  set.width = static_cast<int>(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    ForegroundEntry e;
    e.shifted_x = static_cast<double>(i % 90) * 1.0 - 44.5;
    e.shifted_y = static_cast<double>(i / 90) * 1.0 - 44.5;
    e.x = e.shifted_x;
    e.y = e.shifted_y;
    e.row = 0;
    e.col = static_cast<int>(i);
    set.entries.push_back(e);
  }
  fx.grid = bev_project(set, BevParams{cell_size, 50.0});
  if (fx.grid.cells.size() != positions.size()) {
    throw DimensionError("fixture cells collided");
  }
  fx.shifted.positions.resize(positions.size());
  for (std::size_t ci = 0; ci < fx.grid.cells.size(); ++ci) {
    const int32_t px = fx.grid.cells[ci].sources[0];
    fx.shifted.positions[ci] = positions[static_cast<std::size_t>(px)];
  }
  return fx;
}

bool criterion_cluster_oracle(std::ostream& log) {
  double worst_ms = 0.0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed * 31 + 7);
    const int n = rng.uniform_int(50, 500);
    std::vector<std::array<double, 2>> positions;
    positions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      positions.push_back({rng.uniform(-40, 40), rng.uniform(-40, 40)});
    }
    const double radius = rng.uniform(0.3, 2.5);
    const CellFixture fx = cell_fixture(positions);

    const auto start = std::chrono::steady_clock::now();
    const ClusterResult result = bfs_cluster(fx.grid, fx.shifted, radius);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    worst_ms = std::max(worst_ms, ms);

    const std::vector<int32_t> expected = dsu_clusters(fx.shifted.positions, radius);
    if (result.cell_cluster != expected) {
      log << "    partition mismatch at seed " << seed << " (n=" << n
          << ", r=" << radius << ")\n";
      return false;
    }
    if (result.num_clusters != *std::max_element(expected.begin(), expected.end())) {
      log << "    cluster count mismatch at seed " << seed << "\n";
      return false;
    }
    if (ms >= 50.0) {
      log << "    clustering took " << ms << " ms at seed " << seed << "\n";
      return false;
    }
  }
  log << "    200 configurations matched; slowest pass " << worst_ms << " ms\n";
  return true;
}

// ------------------------------------------------------------ criteria 2 and 3

std::vector<ScanInput> recovery_inputs(int count) {
  std::vector<ScanInput> inputs;
  for (int s = 0; s < count; ++s) {
    ScanInput input;
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d", s);
    input.name = name;
    input.synthetic = true;
    input.scene = SceneSpec{};
    input.scene.seed = 1000 + static_cast<uint64_t>(s) * 7919;
    input.scene.num_instances = 10 + (s * 30) / 49;  // covers 10 through 40
    input.scene.min_separation = 4.0;
    // Noise schedule sweeps the whole allowed band up to 0.3 m.
    input.sigma_override = 0.3 * static_cast<double>(s) / 49.0;
    inputs.push_back(std::move(input));
  }
  return inputs;
}

bool criterion_ideal_recovery(std::ostream& log) {
  PipelineConfig config;  // defaults: grid 0.5, window 7, radius 1.2
  config.jobs = 4;
  const std::vector<ScanInput> inputs = recovery_inputs(50);
  const RunResult result = run_pipeline(config, inputs);
  if (result.failures != 0) {
    for (const ScanReport& scan : result.scans) {
      if (!scan.ok) log << "    " << scan.name << ": " << scan.error << "\n";
    }
    return false;
  }
  bool ok = true;
  for (const ScanReport& scan : result.scans) {
    if (scan.pq_things != 1.0 || scan.rq_things != 1.0) {
      log << "    " << scan.name << ": PQ_th=" << scan.pq_things
          << " RQ_th=" << scan.rq_things << " (gt=" << scan.gt_instances
          << ", clusters=" << scan.clusters << ")\n";
      ok = false;
    }
  }
  if (result.scores.pq_things != 1.0 || result.scores.rq_things != 1.0) {
    log << "    aggregate PQ_th=" << result.scores.pq_things << " RQ_th="
        << result.scores.rq_things << "\n";
    ok = false;
  }
  if (ok) log << "    50 scenes at sigma 0..0.3 recovered exactly\n";
  return ok;
}

bool criterion_noise_degrades(std::ostream& log) {
  PipelineConfig config;
  config.jobs = 4;
  std::vector<ScanInput> base = recovery_inputs(20);
  std::vector<ScanInput> noisy = base;
  for (ScanInput& input : noisy) input.sigma_override = 2.0;

  const RunResult clean = run_pipeline(config, base);
  const RunResult loud = run_pipeline(config, noisy);
  if (clean.failures != 0 || loud.failures != 0) {
    log << "    run failures: " << clean.failures << " clean, " << loud.failures
        << " noisy\n";
    return false;
  }
  const auto mean_pq = [](const RunResult& r) {
    double acc = 0.0;
    for (const ScanReport& scan : r.scans) acc += scan.pq_things;
    return acc / static_cast<double>(r.scans.size());
  };
  const double before = mean_pq(clean);
  const double after = mean_pq(loud);
  log << "    mean PQ_th over 20 seeds: " << before << " -> " << after
      << " at sigma 2\n";
  return after < before;
}

// ---------------------------------------------------------------- criterion 4

InstanceGroups draw_groups(Rng& rng, int n_groups, int max_points, double span) {
  InstanceGroups groups(static_cast<std::size_t>(n_groups));
  for (auto& g : groups) {
    g.gt_centroid = {rng.uniform(-span, span), rng.uniform(-span, span)};
    const int np = rng.uniform_int(1, max_points);
    for (int p = 0; p < np; ++p) {
      g.points.push_back({g.gt_centroid[0] + rng.uniform(-2, 2),
                          g.gt_centroid[1] + rng.uniform(-2, 2)});
    }
  }
  return groups;
}

std::vector<double> flatten_points(const InstanceGroups& groups) {
  std::vector<double> x;
  for (const auto& g : groups) {
    for (const auto& p : g.points) {
      x.push_back(p[0]);
      x.push_back(p[1]);
    }
  }
  return x;
}

InstanceGroups with_points(const InstanceGroups& groups, std::span<const double> x) {
  InstanceGroups out = groups;
  std::size_t k = 0;
  for (auto& g : out) {
    for (auto& p : g.points) {
      p[0] = x[k++];
      p[1] = x[k++];
    }
  }
  return out;
}

std::vector<double> flatten_grads(const InstanceLoss& loss) {
  std::vector<double> g;
  for (const auto& group : loss.d_points) {
    for (const auto& p : group) {
      g.push_back(p[0]);
      g.push_back(p[1]);
    }
  }
  return g;
}

// A repulsion config is tie-free when every per-point argmin is unique by
// a clear gap and no hinge sits at its boundary, so central differences
// stay on one smooth piece.
bool repel_tie_free(const InstanceGroups& groups) {
  const std::size_t n = groups.size();
  std::vector<double> margin(n, 1e300);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      margin[i] = std::min(margin[i],
                           std::hypot(groups[i].gt_centroid[0] - groups[j].gt_centroid[0],
                                      groups[i].gt_centroid[1] - groups[j].gt_centroid[1]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : groups[i].points) {
      double best = 1e300, second = 1e300;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        for (const auto& b : groups[j].points) {
          const double d = std::hypot(a[0] - b[0], a[1] - b[1]);
          if (d < best) {
            second = best;
            best = d;
          } else {
            second = std::min(second, d);
          }
        }
      }
      if (best < 1e-4) return false;               // coincident pair
      if (second - best < 1e-4) return false;      // argmin tie
      if (std::abs(margin[i] - best) < 1e-4) return false;  // hinge boundary
    }
  }
  return true;
}

bool attract_kink_free(const InstanceGroups& groups) {
  for (const auto& g : groups) {
    std::array<double, 2> mean{0.0, 0.0};
    for (const auto& p : g.points) {
      mean[0] += p[0];
      mean[1] += p[1];
    }
    mean[0] /= static_cast<double>(g.points.size());
    mean[1] /= static_cast<double>(g.points.size());
    for (const auto& p : g.points) {
      if (std::hypot(p[0] - mean[0], p[1] - mean[1]) < 1e-4) return false;
    }
  }
  return true;
}

bool check_gradients(const std::vector<double>& analytic,
                     const std::vector<double>& numeric, const char* what,
                     uint64_t seed, std::ostream& log) {
  if (analytic.size() != numeric.size()) {
    log << "    " << what << " seed " << seed << ": gradient size mismatch\n";
    return false;
  }
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (!close_rel(analytic[i], numeric[i], 1e-4)) {
      log << "    " << what << " seed " << seed << " coord " << i << ": "
          << analytic[i] << " vs " << numeric[i] << "\n";
      return false;
    }
  }
  return true;
}

bool criterion_gradient_checks(std::ostream& log) {
  // Repulsion: 100 tie-free configs with an active hinge.
  int checked = 0;
  for (uint64_t seed = 1; checked < 100; ++seed) {
    if (seed > 4000) {
      log << "    could not draw 100 tie-free repel configs\n";
      return false;
    }
    Rng rng(seed * 977);
    const InstanceGroups groups = draw_groups(rng, rng.uniform_int(2, 4), 4, 4.0);
    if (!repel_tie_free(groups)) continue;
    const InstanceLoss loss = repel_loss(groups);
    if (loss.value == 0.0) continue;  // no active hinge, nothing to check
    const std::vector<double> numeric = numeric_gradient(
        [&](std::span<const double> x) { return repel_loss(with_points(groups, x)).value; },
        flatten_points(groups), 1e-6);
    if (!check_gradients(flatten_grads(loss), numeric, "repel", seed, log)) return false;
    ++checked;
  }

  // Attraction: 100 kink-free configs.
  checked = 0;
  for (uint64_t seed = 1; checked < 100; ++seed) {
    if (seed > 4000) {
      log << "    could not draw 100 kink-free attract configs\n";
      return false;
    }
    Rng rng(seed * 1201);
    const InstanceGroups groups = draw_groups(rng, rng.uniform_int(1, 4), 5, 10.0);
    if (!attract_kink_free(groups)) continue;
    const InstanceLoss loss = attract_loss(groups);
    const std::vector<double> numeric = numeric_gradient(
        [&](std::span<const double> x) { return attract_loss(with_points(groups, x)).value; },
        flatten_points(groups), 1e-6);
    if (!check_gradients(flatten_grads(loss), numeric, "attract", seed, log)) return false;
    ++checked;
  }

  // Squared offsets: 100 random maps and masks.
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed * 1553);
    const int h = rng.uniform_int(2, 5), w = rng.uniform_int(2, 5);
    OffsetMap pred(h, w), target(h, w);
    std::vector<uint8_t> mask(static_cast<std::size_t>(h) * w, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      pred.dx[i] = rng.uniform(-3, 3);
      pred.dy[i] = rng.uniform(-3, 3);
      target.dx[i] = rng.uniform(-3, 3);
      target.dy[i] = rng.uniform(-3, 3);
      mask[i] = rng.uniform() < 0.7 ? 1 : 0;
    }
    mask[0] = 1;  // never empty
    const OffsetL2Loss loss = offset_l2_loss(pred, target, mask);
    std::vector<double> packed;
    packed.insert(packed.end(), pred.dx.begin(), pred.dx.end());
    packed.insert(packed.end(), pred.dy.begin(), pred.dy.end());
    const std::size_t half = pred.dx.size();
    const std::vector<double> numeric = numeric_gradient(
        [&](std::span<const double> x) {
          OffsetMap probe = pred;
          std::copy(x.begin(), x.begin() + static_cast<long>(half), probe.dx.begin());
          std::copy(x.begin() + static_cast<long>(half), x.end(), probe.dy.begin());
          return offset_l2_loss(probe, target, mask).value;
        },
        packed, 1e-6);
    std::vector<double> analytic;
    analytic.insert(analytic.end(), loss.d_pred.dx.begin(), loss.d_pred.dx.end());
    analytic.insert(analytic.end(), loss.d_pred.dy.begin(), loss.d_pred.dy.end());
    if (!check_gradients(analytic, numeric, "l2", seed, log)) return false;
  }

  // Weighted cross entropy: 100 random problems.
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed * 2111);
    const int n_items = rng.uniform_int(1, 6), n_classes = rng.uniform_int(2, 5);
    std::vector<double> logits(static_cast<std::size_t>(n_items) * n_classes);
    for (auto& v : logits) v = rng.uniform(-4, 4);
    std::vector<uint32_t> labels(static_cast<std::size_t>(n_items));
    bool any_live = false;
    for (auto& y : labels) {
      if (rng.uniform() < 0.2) {
        y = 255;
      } else {
        y = static_cast<uint32_t>(rng.uniform_int(0, n_classes - 1));
        any_live = true;
      }
    }
    if (!any_live) labels[0] = 0;
    std::vector<double> weights(static_cast<std::size_t>(n_classes));
    for (auto& w : weights) w = rng.uniform(0.1, 2.0);
    const WeightedCeLoss loss =
        weighted_ce(logits, n_items, n_classes, labels, weights, 255);
    const std::vector<double> numeric = numeric_gradient(
        [&](std::span<const double> x) {
          return weighted_ce(x, n_items, n_classes, labels, weights, 255).value;
        },
        logits, 1e-6);
    if (!check_gradients(loss.d_logits, numeric, "wce", seed, log)) return false;
  }

  log << "    repel/attract/l2/wce each matched on 100 configurations\n";
  return true;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_repel_hand_values(std::ostream& log) {
  InstanceGroups fixture(2);
  fixture[0].gt_centroid = {0.0, 0.0};
  fixture[0].points = {{0.0, 0.0}};
  fixture[1].gt_centroid = {4.0, 0.0};
  fixture[1].points = {{1.0, 0.0}};
  const double fixture_value = repel_loss(fixture).value;
  if (fixture_value != 3.0) {
    log << "    fixture value " << fixture_value << " != 3.0\n";
    return false;
  }

  InstanceGroups lone(1);
  lone[0].gt_centroid = {2.0, 2.0};
  lone[0].points = {{1.0, 2.0}, {3.0, 2.0}};
  if (repel_loss(lone).value != 0.0) {
    log << "    single-instance value nonzero\n";
    return false;
  }

  InstanceGroups separated(2);
  separated[0].gt_centroid = {0.0, 0.0};
  separated[0].points = {{-1.0, 0.0}, {-2.0, 0.5}};
  separated[1].gt_centroid = {4.0, 0.0};
  separated[1].points = {{5.0, 0.0}, {6.0, -0.5}};
  if (repel_loss(separated).value != 0.0) {
    log << "    well-separated value nonzero\n";
    return false;
  }
  log << "    fixture 3.0 exact; lone and separated cases zero\n";
  return true;
}

// ---------------------------------------------------------------- criterion 6

bool criterion_sma_invariants(std::ostream& log) {
  // 1000 random occupied cells: distinct (row, col) pairs with jittered
  // positions inside each cell, random features.
  Rng rng(606);
  const double cell = 0.5;
  std::set<std::pair<int, int>> picked;
  while (picked.size() < 1000) {
    picked.insert({rng.uniform_int(40, 160), rng.uniform_int(40, 160)});
  }
  ForegroundSet set;
  set.height = 1;
  set.width = 1000;
  int idx = 0;
  for (const auto& [row, col] : picked) {
    ForegroundEntry e;
    e.shifted_x = (static_cast<double>(row) + 0.5) * cell - 50.0 + rng.uniform(-0.2, 0.2);
    e.shifted_y = (static_cast<double>(col) + 0.5) * cell - 50.0 + rng.uniform(-0.2, 0.2);
    e.x = e.shifted_x;
    e.y = e.shifted_y;
    e.row = 0;
    e.col = idx++;
    for (int ch = 0; ch < kRangeChannels; ++ch) e.feature[ch] = rng.uniform(-2, 2);
    set.entries.push_back(e);
  }
  const BevGrid grid = bev_project(set, BevParams{cell, 50.0});
  if (grid.cells.size() != 1000) {
    log << "    expected 1000 occupied cells, got " << grid.cells.size() << "\n";
    return false;
  }
  const DirectionalComs coms = directional_coms(grid, 7);
  const Mlp mlp = Mlp::random({kRangeChannels, 10, kDirections}, rng, 1.0);
  const auto mix = attention_mix(grid, mlp);
  const ShiftedBev shifted = apply_attention(grid, coms, mlp);

  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    double sum = 0.0;
    for (int d = 0; d < kDirections; ++d) {
      if (mix[ci][d] <= 0.0) {
        log << "    nonpositive weight at cell " << ci << "\n";
        return false;
      }
      sum += mix[ci][d];
    }
    if (std::abs(sum - 1.0) >= 1e-6) {
      log << "    simplex sum " << sum << " at cell " << ci << "\n";
      return false;
    }
    // Convex-hull containment, checked as the exact convex combination
    // plus the bounding box of the five masses.
    for (int axis = 0; axis < 2; ++axis) {
      double lo = 1e300, hi = -1e300, mixed = 0.0;
      for (int d = 0; d < kDirections; ++d) {
        lo = std::min(lo, coms.coms[ci][d][axis]);
        hi = std::max(hi, coms.coms[ci][d][axis]);
        mixed += mix[ci][d] * coms.coms[ci][d][axis];
      }
      const double got = shifted.positions[ci][axis];
      if (got < lo - 1e-9 || got > hi + 1e-9 || std::abs(got - mixed) > 1e-9) {
        log << "    hull violation at cell " << ci << " axis " << axis << "\n";
        return false;
      }
    }
  }

  // Zero MLP collapses to the plain five-mass mean.
  const ShiftedBev uniform =
      apply_attention(grid, coms, Mlp::zeros({kRangeChannels, kDirections}));
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    double mx = 0.0, my = 0.0;
    for (int d = 0; d < kDirections; ++d) {
      mx += coms.coms[ci][d][0];
      my += coms.coms[ci][d][1];
    }
    if (std::abs(uniform.positions[ci][0] - mx / 5) >= 1e-9 ||
        std::abs(uniform.positions[ci][1] - my / 5) >= 1e-9) {
      log << "    zero-mlp mean violated at cell " << ci << "\n";
      return false;
    }
  }

  // Isolated cells are exact fixpoints under arbitrary attention.
  for (int trial = 0; trial < 50; ++trial) {
    ForegroundSet lone;
    lone.height = 1;
    lone.width = 1;
    ForegroundEntry e;
    e.shifted_x = rng.uniform(-40, 40);
    e.shifted_y = rng.uniform(-40, 40);
    e.row = 0;
    e.col = 0;
    for (int ch = 0; ch < kRangeChannels; ++ch) e.feature[ch] = rng.uniform(-2, 2);
    lone.entries.push_back(e);
    const BevGrid single = bev_project(lone, BevParams{cell, 50.0});
    const Mlp random_mlp = Mlp::random({kRangeChannels, 6, kDirections}, rng, 1.5);
    const ShiftedBev out =
        apply_attention(single, directional_coms(single, 7), random_mlp);
    if (std::abs(out.positions[0][0] - e.shifted_x) > 1e-12 ||
        std::abs(out.positions[0][1] - e.shifted_y) > 1e-12) {
      log << "    isolated fixpoint violated at trial " << trial << "\n";
      return false;
    }
  }

  // Translating every position by whole cells translates the output.
  const double tx = 12 * cell, ty = -9 * cell;
  ForegroundSet moved = set;
  for (ForegroundEntry& e : moved.entries) {
    e.shifted_x += tx;
    e.shifted_y += ty;
  }
  const BevGrid grid_moved = bev_project(moved, BevParams{cell, 50.0});
  if (grid_moved.cells.size() != grid.cells.size()) {
    log << "    translation changed the cell count\n";
    return false;
  }
  const ShiftedBev shifted_moved =
      apply_attention(grid_moved, directional_coms(grid_moved, 7), mlp);
  for (std::size_t ci = 0; ci < grid.cells.size(); ++ci) {
    if (std::abs(shifted_moved.positions[ci][0] - shifted.positions[ci][0] - tx) >= 1e-9 ||
        std::abs(shifted_moved.positions[ci][1] - shifted.positions[ci][1] - ty) >= 1e-9) {
      log << "    translation equivariance violated at cell " << ci << "\n";
      return false;
    }
  }

  log << "    simplex, hull, fixpoint, translation and zero-mlp mean all hold\n";
  return true;
}

// ---------------------------------------------------------------- criterion 7

FeatureMap random_map(Rng& rng, int h, int w, int c, double scale = 1.0) {
  FeatureMap map(h, w, c);
  for (auto& v : map.data) v = rng.uniform(-scale, scale);
  return map;
}

std::vector<double> naive_mlp_eval(const Mlp& mlp, const std::vector<double>& input) {
  std::vector<double> x = input;
  const auto& layers = mlp.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> y(static_cast<std::size_t>(layers[l].out), 0.0);
    for (int o = 0; o < layers[l].out; ++o) {
      double acc = layers[l].biases[static_cast<std::size_t>(o)];
      for (int i = 0; i < layers[l].in; ++i) {
        acc += layers[l].weights[static_cast<std::size_t>(o) * layers[l].in + i] *
               x[static_cast<std::size_t>(i)];
      }
      y[static_cast<std::size_t>(o)] = acc;
    }
    if (l + 1 < layers.size()) {
      for (auto& v : y) v = std::max(v, 0.0);
    }
    x = std::move(y);
  }
  return x;
}

FeatureMap naive_attention_conv(const FeatureMap& input, const FeatureMap& coords,
                                const Mlp& mlp, const KernelSpec& kernel, int n_out) {
  const int n_off = static_cast<int>(kernel.offsets.size());
  const int n_in = input.channels;
  FeatureMap out(input.height, input.width, n_out);
  for (int row = 0; row < input.height; ++row) {
    for (int col = 0; col < input.width; ++col) {
      std::vector<double> delta(static_cast<std::size_t>(n_off) * 5, 0.0);
      for (int k = 0; k < n_off; ++k) {
        const int nr = row + kernel.offsets[static_cast<std::size_t>(k)].first;
        const int nc = col + kernel.offsets[static_cast<std::size_t>(k)].second;
        if (nr < 0 || nr >= input.height || nc < 0 || nc >= input.width) continue;
        for (int ch = 0; ch < 5; ++ch) {
          delta[static_cast<std::size_t>(k) * 5 + ch] =
              coords.at(nr, nc, ch) - coords.at(row, col, ch);
        }
      }
      const std::vector<double> logits = naive_mlp_eval(mlp, delta);
      for (int o = 0; o < n_out; ++o) {
        for (int i = 0; i < n_in; ++i) {
          double max_logit = -1e300;
          for (int k = 0; k < n_off; ++k) {
            max_logit = std::max(
                max_logit, logits[(static_cast<std::size_t>(k) * n_out + o) * n_in + i]);
          }
          double denom = 0.0;
          std::vector<double> weights(static_cast<std::size_t>(n_off));
          for (int k = 0; k < n_off; ++k) {
            weights[static_cast<std::size_t>(k)] = std::exp(
                logits[(static_cast<std::size_t>(k) * n_out + o) * n_in + i] - max_logit);
            denom += weights[static_cast<std::size_t>(k)];
          }
          double acc = 0.0;
          for (int k = 0; k < n_off; ++k) {
            const int nr = row + kernel.offsets[static_cast<std::size_t>(k)].first;
            const int nc = col + kernel.offsets[static_cast<std::size_t>(k)].second;
            if (nr < 0 || nr >= input.height || nc < 0 || nc >= input.width) continue;
            acc += weights[static_cast<std::size_t>(k)] / denom * input.at(nr, nc, i);
          }
          out.at(row, col, o) += acc;
        }
      }
    }
  }
  return out;
}

bool criterion_clsa_checks(std::ostream& log) {
  Rng rng(707);

  // Normalization at every location for two shapes.
  for (const auto shape : {KernelShape::kCross, KernelShape::kDiamond}) {
    const KernelSpec kernel = make_kernel(shape, 5);
    const int n_off = static_cast<int>(kernel.offsets.size());
    const FeatureMap coords = random_map(rng, 6, 7, 5);
    const Mlp mlp = Mlp::random({n_off * 5, 9, n_off * 2 * 2}, rng);
    const AttentionTensor attn = attention_weights(coords, mlp, kernel, 2, 2);
    for (int row = 0; row < 6; ++row) {
      for (int col = 0; col < 7; ++col) {
        for (int o = 0; o < 2; ++o) {
          for (int i = 0; i < 2; ++i) {
            double sum = 0.0;
            for (int k = 0; k < n_off; ++k) sum += attn.at(row, col, k, o, i);
            if (std::abs(sum - 1.0) >= 1e-6) {
              log << "    normalization broke at (" << row << "," << col << ")\n";
              return false;
            }
          }
        }
      }
    }
  }

  // Single-tap kernel is the identity on a channel: its lone attention
  // weight normalizes to exactly one.
  for (int trial = 0; trial < 5; ++trial) {
    const KernelSpec kernel = make_kernel(KernelShape::kCross, 1);
    const FeatureMap input = random_map(rng, 5, 5, 1);
    const FeatureMap coords = random_map(rng, 5, 5, 5);
    const Mlp mlp = Mlp::random({5, 6, 1}, rng);
    const FeatureMap out = attention_conv(input, coords, mlp, kernel, 1);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
      if (out.data[i] != input.data[i]) {
        log << "    single-tap kernel changed the input\n";
        return false;
      }
    }
  }

  // Random 6x6 fixture against the full enumeration.
  {
    const KernelSpec kernel = make_kernel(KernelShape::kCross, 3);
    const int n_off = static_cast<int>(kernel.offsets.size());
    const FeatureMap input = random_map(rng, 6, 6, 2);
    const FeatureMap coords = random_map(rng, 6, 6, 5);
    const Mlp mlp = Mlp::random({n_off * 5, 8, 7, n_off * 2 * 2}, rng);
    const FeatureMap got = attention_conv(input, coords, mlp, kernel, 2);
    const FeatureMap want = naive_attention_conv(input, coords, mlp, kernel, 2);
    for (std::size_t i = 0; i < got.data.size(); ++i) {
      if (std::abs(got.data[i] - want.data[i]) >= 1e-6) {
        log << "    fixture mismatch at flat index " << i << "\n";
        return false;
      }
    }
  }

  // Gradient check against central differences.
  {
    const KernelSpec kernel = make_kernel(KernelShape::kCross, 3);
    const int n_off = static_cast<int>(kernel.offsets.size());
    const FeatureMap input = random_map(rng, 4, 5, 2);
    const FeatureMap coords = random_map(rng, 4, 5, 5);
    Mlp mlp = Mlp::random({n_off * 5, 8, 6, n_off * 2 * 2}, rng);
    FeatureMap direction(4, 5, 2);
    for (auto& v : direction.data) v = rng.uniform(-1, 1);
    const auto loss_of = [&](const Mlp& m, const FeatureMap& x) {
      const FeatureMap out = attention_conv(x, coords, m, kernel, 2);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.data.size(); ++i) {
        acc += out.data[i] * direction.data[i];
      }
      return acc;
    };
    const AttentionConvGradients grads =
        attention_conv_backward(input, coords, mlp, kernel, 2, direction);
    const std::vector<double> numeric_mlp = numeric_gradient(
        [&](std::span<const double> p) {
          Mlp probe = mlp;
          probe.set_flat_params(p);
          return loss_of(probe, input);
        },
        mlp.flat_params(), 1e-5);
    if (!check_gradients(Mlp::flatten_gradients(grads.d_mlp), numeric_mlp, "clsa-mlp", 0,
                         log)) {
      return false;
    }
    const std::vector<double> numeric_input = numeric_gradient(
        [&](std::span<const double> x) {
          FeatureMap probe = input;
          probe.data.assign(x.begin(), x.end());
          return loss_of(mlp, probe);
        },
        input.data, 1e-5);
    if (!check_gradients(grads.d_input.data, numeric_input, "clsa-input", 0, log)) {
      return false;
    }
  }

  log << "    normalization, identity, fixture and gradients all hold\n";
  return true;
}

// ---------------------------------------------------------------- criterion 8

PointLabels runs_of(const std::vector<std::tuple<uint32_t, uint32_t, int>>& spec) {
  PointLabels l;
  for (const auto& [sem, ins, count] : spec) {
    for (int i = 0; i < count; ++i) {
      l.sem.push_back(sem);
      l.ins.push_back(ins);
    }
  }
  return l;
}

bool criterion_metric_fixtures(std::ostream& log) {
  const Taxonomy tax = synthetic_taxonomy();

  const PointLabels perfect = runs_of({{2, 1, 25}, {2, 2, 30}, {3, 3, 20}, {1, 0, 60}});
  const PanopticScores ideal =
      compute_scores(match_instances(perfect, perfect, tax), tax);
  if (ideal.pq != 1.0 || ideal.rq != 1.0 || ideal.sq != 1.0 || ideal.miou != 1.0) {
    log << "    perfect prediction not scored 1.0\n";
    return false;
  }

  PointLabels gt = runs_of({{2, 1, 10}});
  PointLabels pred = gt;
  for (std::size_t i = 6; i < 10; ++i) {
    pred.sem[i] = 1;
    pred.ins[i] = 0;
  }
  const PanopticScores sixty = compute_scores(match_instances(gt, pred, tax), tax);
  double pq2 = -1.0;
  for (const ClassScore& s : sixty.per_class) {
    if (s.class_id == 2) pq2 = s.pq;
  }
  if (std::abs(pq2 - 0.6) >= 1e-9) {
    log << "    IoU-0.6 fixture scored PQ " << pq2 << "\n";
    return false;
  }

  PointLabels gt2 = runs_of({{2, 1, 10}, {2, 2, 10}});
  PointLabels pred2 = gt2;
  for (std::size_t i = 8; i < 20; ++i) {
    pred2.sem[i] = 1;
    pred2.ins[i] = 0;
  }
  const PanopticScores hitmiss = compute_scores(match_instances(gt2, pred2, tax), tax);
  double rq2 = -1.0, pqv = -1.0;
  for (const ClassScore& s : hitmiss.per_class) {
    if (s.class_id == 2) {
      rq2 = s.rq;
      pqv = s.pq;
    }
  }
  if (std::abs(rq2 - 2.0 / 3.0) >= 1e-9 || std::abs(pqv - 8.0 / 15.0) >= 1e-9) {
    log << "    hit+miss fixture RQ " << rq2 << " PQ " << pqv << "\n";
    return false;
  }

  const PointLabels mixed = runs_of({{2, 1, 19}, {2, 2, 20}, {3, 3, 21}, {3, 4, 7}});
  const PointLabels kept = filter_small_instances(mixed, 20);
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    const bool small = mixed.ins[i] == 1 || mixed.ins[i] == 4;
    const uint32_t expected = small ? 0 : mixed.ins[i];
    if (kept.ins[i] != expected || kept.sem[i] != mixed.sem[i]) {
      log << "    filter broke at index " << i << "\n";
      return false;
    }
  }

  log << "    perfect, 0.6-IoU, hit+miss and filter fixtures all exact\n";
  return true;
}

// ---------------------------------------------------------------- criterion 9

bool criterion_round_trips(std::ostream& log) {
  Rng rng(909);
  for (int trial = 0; trial < 1000; ++trial) {
    PointCloud cloud;
    const int n = rng.uniform_int(0, 80);
    for (int i = 0; i < n; ++i) {
      Point p;
      p.x = static_cast<float>(rng.uniform(-80, 80));
      p.y = static_cast<float>(rng.uniform(-80, 80));
      p.z = static_cast<float>(rng.uniform(-5, 5));
      p.r = static_cast<float>(rng.uniform(0, 1));
      cloud.points.push_back(p);
    }
    const PointCloud back = load_scan(write_scan(cloud));
    if (back.size() != cloud.size()) {
      log << "    scan size changed at trial " << trial << "\n";
      return false;
    }
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (std::memcmp(&back.points[i], &cloud.points[i], sizeof(Point)) != 0) {
        log << "    scan bytes changed at trial " << trial << "\n";
        return false;
      }
    }

    PointLabels labels;
    for (int i = 0; i < n; ++i) {
      labels.sem.push_back(static_cast<uint32_t>(rng.uniform_int(0, 65535)));
      labels.ins.push_back(static_cast<uint32_t>(rng.uniform_int(0, 65535)));
    }
    const PointLabels decoded =
        load_labels(write_predictions(labels), labels.size());
    if (decoded != labels) {
      log << "    labels changed at trial " << trial << "\n";
      return false;
    }
  }

  // Pipeline determinism through the shipped binary: two serial runs and
  // one four-way parallel run must emit byte-identical artifacts.
  const fs::path a = g_scratch / "det_a", b = g_scratch / "det_b",
                 c = g_scratch / "det_c";
  const std::string common = "run --synth 6 --seed 42 --sigma 0.25 ";
  if (!run_cli(common + "--jobs 1 --out \"" + a.string() + "\"", log)) return false;
  if (!run_cli(common + "--jobs 1 --out \"" + b.string() + "\"", log)) return false;
  if (!run_cli(common + "--jobs 4 --out \"" + c.string() + "\"", log)) return false;

  const auto same_file = [&](const std::string& rel) {
    const std::string ta = read_text(a / rel);
    if (ta.empty()) {
      log << "    missing or empty artifact " << rel << "\n";
      return false;
    }
    if (ta != read_text(b / rel) || ta != read_text(c / rel)) {
      log << "    artifact differs between runs: " << rel << "\n";
      return false;
    }
    return true;
  };
  if (!same_file("metrics.json") || !same_file("per_scan.csv")) return false;
  for (int s = 0; s < 6; ++s) {
    char name[64];
    std::snprintf(name, sizeof(name), "predictions/scene_%04d.label", s);
    if (!same_file(name)) return false;
    std::snprintf(name, sizeof(name), "gt/scene_%04d.label", s);
    if (!same_file(name)) return false;
  }

  log << "    1000 scan and label round trips exact; artifacts byte-stable\n";
  return true;
}

// --------------------------------------------------------------- criterion 10

bool criterion_sweep_table(std::ostream& log) {
  const fs::path out = g_scratch / "sweep";
  if (!run_cli("sweep --synth 4 --seed 9 --sigma 0.2 --grid-list 0.3,0.5,1.0 "
               "--kernel-list 3,7 --jobs 4 --out \"" +
                   out.string() + "\"",
               log)) {
    return false;
  }
  const std::string table = read_text(out / "sweep.csv");
  if (table.empty()) {
    log << "    sweep.csv missing\n";
    return false;
  }
  std::istringstream lines(table);
  std::string line;
  if (!std::getline(lines, line) || line.find("cell_size,kernel,status") != 0) {
    log << "    unexpected header: " << line << "\n";
    return false;
  }
  std::set<std::pair<int, int>> combos;  // (cell size in cm, kernel)
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream fields(line);
    std::vector<std::string> cols;
    std::string field;
    while (std::getline(fields, field, ',')) cols.push_back(field);
    if (cols.size() != 14) {
      log << "    row has " << cols.size() << " fields: " << line << "\n";
      return false;
    }
    if (cols[2] != "ok") {
      log << "    sweep cell failed: " << line << "\n";
      return false;
    }
    for (std::size_t i = 3; i < cols.size(); ++i) {
      if (!std::isfinite(std::stod(cols[i]))) {
        log << "    non-finite metric in row: " << line << "\n";
        return false;
      }
    }
    combos.insert({static_cast<int>(std::lround(std::stod(cols[0]) * 100)),
                   std::stoi(cols[1])});
  }
  if (rows != 6 || combos.size() != 6) {
    log << "    expected 6 unique rows, found " << rows << "\n";
    return false;
  }
  for (const int g : {30, 50, 100}) {
    for (const int k : {3, 7}) {
      if (!combos.count({g, k})) {
        log << "    missing combination grid " << g << " kernel " << k << "\n";
        return false;
      }
    }
  }
  log << "    3x2 sweep emitted a complete six-row table\n";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance --cli <path-to-cli-binary>\n";
      return 2;
    }
  }
  if (g_cli_path.empty()) {
    std::cerr << "usage: acceptance --cli <path-to-cli-binary>\n";
    return 2;
  }
  g_scratch = fs::temp_directory_path() /
              ("panoclust_accept_" + std::to_string(::getpid()));
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);

  struct Criterion {
    int id;
    const char* title;
    std::function<bool(std::ostream&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "clustering equals the union-find oracle under 50 ms", criterion_cluster_oracle},
      {2, "ideal offsets recover every instance exactly", criterion_ideal_recovery},
      {3, "heavy offset noise strictly degrades recovery", criterion_noise_degrades},
      {4, "loss gradients match finite differences", criterion_gradient_checks},
      {5, "repulsion hand values are exact", criterion_repel_hand_values},
      {6, "directional attention invariants hold", criterion_sma_invariants},
      {7, "adaptive convolution checks hold", criterion_clsa_checks},
      {8, "metric fixtures are exact", criterion_metric_fixtures},
      {9, "formats round-trip and runs are byte-stable", criterion_round_trips},
      {10, "grid/kernel sweep emits a complete table", criterion_sweep_table},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    std::ostringstream log;
    bool ok = false;
    try {
      ok = criterion.run(log);
    } catch (const std::exception& e) {
      log << "    exception: " << e.what() << "\n";
    }
    std::cout << "criterion " << criterion.id << ": " << (ok ? "PASS" : "FAIL")
              << " - " << criterion.title << "\n"
              << log.str();
    if (!ok) ++failures;
  }

  fs::remove_all(g_scratch);
  if (failures > 0) {
    std::cout << failures << " of " << criteria.size() << " criteria failed\n";
    return 1;
  }
  std::cout << "all " << criteria.size() << " criteria passed\n";
  return 0;
}
