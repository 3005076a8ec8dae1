#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "panoclust/clustering.hpp"
#include "panoclust/metrics.hpp"
#include "panoclust/pipeline.hpp"
#include "panoclust/synthetic.hpp"

namespace py = pybind11;
using namespace panoclust;

namespace {

PointCloud cloud_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 4) {
    throw py::value_error("points must be an Nx4 float32 array");
  }
  PointCloud cloud;
  cloud.points.resize(static_cast<size_t>(arr.shape(0)));
  const float* data = arr.data();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    cloud.points[i] = {data[i * 4], data[i * 4 + 1], data[i * 4 + 2], data[i * 4 + 3]};
  }
  return cloud;
}

std::vector<uint32_t> labels_from_array(
    const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 1) throw py::value_error("labels must be a 1-D uint32 array");
  return {arr.data(), arr.data() + arr.shape(0)};
}

py::array_t<uint32_t> to_array(const std::vector<uint32_t>& v) {
  // The shape must be spelled as a container; a bare integer builds a
  // zero-stride array here.
  return py::array_t<uint32_t>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())},
                               v.data());
}

Taxonomy taxonomy_from(const std::vector<uint32_t>& classes,
                       const std::vector<uint32_t>& things) {
  if (classes.empty()) return synthetic_taxonomy();
  std::vector<std::pair<uint32_t, std::string>> listed;
  for (const uint32_t c : classes) listed.emplace_back(c, "class_" + std::to_string(c));
  return Taxonomy(listed, {things.begin(), things.end()});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "range-view panoptic clustering core";

  m.def(
      "generate_scene",
      [](uint64_t seed, int num_instances, double min_separation, int ground_points) {
        SceneSpec spec;
        spec.seed = seed;
        spec.num_instances = num_instances;
        spec.min_separation = min_separation;
        spec.ground_points = ground_points;
        const Scene scene = generate_scene(spec);
        py::array_t<float> points({static_cast<py::ssize_t>(scene.cloud.points.size()),
                                   static_cast<py::ssize_t>(4)});
        float* pd = points.mutable_data();
        for (size_t i = 0; i < scene.cloud.points.size(); ++i) {
          const Point& p = scene.cloud.points[i];
          pd[i * 4] = p.x;
          pd[i * 4 + 1] = p.y;
          pd[i * 4 + 2] = p.z;
          pd[i * 4 + 3] = p.r;
        }
        py::array_t<double> centroids({static_cast<py::ssize_t>(scene.centroids.size()),
                                       static_cast<py::ssize_t>(2)});
        double* cd = centroids.mutable_data();
        for (size_t i = 0; i < scene.centroids.size(); ++i) {
          cd[i * 2] = scene.centroids[i][0];
          cd[i * 2 + 1] = scene.centroids[i][1];
        }
        return py::make_tuple(points, to_array(scene.labels.sem), to_array(scene.labels.ins),
                              centroids);
      },
      py::arg("seed") = 1, py::arg("num_instances") = 10, py::arg("min_separation") = 4.0,
      py::arg("ground_points") = 4000,
      "Seeded synthetic scene: (points Nx4, semantic, instance, centroids Ix2)");

  m.def(
      "cluster_scan",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& points,
         const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& sem,
         const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& ins,
         double cell_size, int kernel, double radius, double sigma, uint64_t noise_seed,
         int height, int width, std::vector<uint32_t> classes,
         std::vector<uint32_t> things) {
        const PointCloud cloud = cloud_from_array(points);
        PointLabels gt{labels_from_array(sem), labels_from_array(ins)};
        if (gt.sem.size() != cloud.points.size() || gt.ins.size() != cloud.points.size()) {
          throw py::value_error("label arrays must match the point count");
        }
        const Taxonomy taxonomy = taxonomy_from(classes, things);

        ProjectionConfig projection;
        projection.height = height;
        projection.width = width;
        const RangeImage image = spherical_project(cloud, projection);

        const size_t n_px = static_cast<size_t>(height) * static_cast<size_t>(width);
        std::vector<uint32_t> pixel_sem(n_px, 0);
        for (size_t px = 0; px < n_px; ++px) {
          if (image.pixel_point[px] >= 0) {
            pixel_sem[px] = gt.sem[static_cast<size_t>(image.pixel_point[px])];
          }
        }
        const auto mask = foreground_mask(pixel_sem, height, width, taxonomy);

        uint32_t max_id = 0;
        for (const uint32_t id : gt.ins) max_id = std::max(max_id, id);
        std::vector<std::array<double, 2>> centroids(max_id, {0.0, 0.0});
        std::vector<int64_t> counts(max_id, 0);
        for (size_t i = 0; i < gt.ins.size(); ++i) {
          if (gt.ins[i] == 0 || !taxonomy.is_thing(gt.sem[i])) continue;
          centroids[gt.ins[i] - 1][0] += cloud.points[i].x;
          centroids[gt.ins[i] - 1][1] += cloud.points[i].y;
          ++counts[gt.ins[i] - 1];
        }
        for (uint32_t k = 0; k < max_id; ++k) {
          if (counts[k] > 0) {
            centroids[k][0] /= static_cast<double>(counts[k]);
            centroids[k][1] /= static_cast<double>(counts[k]);
          }
        }
        const OffsetMap offsets =
            oracle_offsets(image, gt, centroids, taxonomy, sigma, noise_seed);

        BevParams bev;
        bev.cell_size = cell_size;
        const ForegroundSet fg = collect_foreground(image, mask);
        const BevGrid grid = bev_project(shift_points(fg, offsets), bev);
        const DirectionalComs coms = directional_coms(grid, kernel);
        const Mlp mlp = Mlp::zeros({kRangeChannels, kDirections});
        const ShiftedBev pos = apply_attention(grid, coms, mlp);
        const ClusterResult clusters = bfs_cluster(grid, pos, radius);

        std::vector<uint32_t> pred_ins = backmap(clusters, grid, image);
        std::vector<uint32_t> pred_sem = unproject_labels(image, pixel_sem);
        fuse_majority(pred_sem, pred_ins, taxonomy);
        return py::make_tuple(to_array(pred_sem), to_array(pred_ins));
      },
      py::arg("points"), py::arg("sem"), py::arg("ins"), py::arg("cell_size") = 0.5,
      py::arg("kernel") = 7, py::arg("radius") = 1.2, py::arg("sigma") = 0.0,
      py::arg("noise_seed") = 7, py::arg("height") = 64, py::arg("width") = 2048,
      py::arg("classes") = std::vector<uint32_t>{}, py::arg("things") = std::vector<uint32_t>{},
      "Oracle-offset clustering chain; returns (pred_sem, pred_ins) per point");

  m.def(
      "score",
      [](const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& gt_sem,
         const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& gt_ins,
         const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& pred_sem,
         const py::array_t<uint32_t, py::array::c_style | py::array::forcecast>& pred_ins,
         size_t min_points, std::vector<uint32_t> classes, std::vector<uint32_t> things) {
        const Taxonomy taxonomy = taxonomy_from(classes, things);
        PointLabels gt{labels_from_array(gt_sem), labels_from_array(gt_ins)};
        const PointLabels pred{labels_from_array(pred_sem), labels_from_array(pred_ins)};
        gt = filter_small_instances(gt, min_points);
        MetricAccumulator acc;
        acc.add_scan(gt, pred, taxonomy);
        const PanopticScores s = compute_scores(acc, taxonomy);
        py::dict out;
        out["pq"] = s.pq;
        out["pq_dagger"] = s.pq_dagger;
        out["rq"] = s.rq;
        out["sq"] = s.sq;
        out["pq_things"] = s.pq_things;
        out["rq_things"] = s.rq_things;
        out["sq_things"] = s.sq_things;
        out["pq_stuff"] = s.pq_stuff;
        out["rq_stuff"] = s.rq_stuff;
        out["sq_stuff"] = s.sq_stuff;
        out["miou"] = s.miou;
        return out;
      },
      py::arg("gt_sem"), py::arg("gt_ins"), py::arg("pred_sem"), py::arg("pred_ins"),
      py::arg("min_points") = 20, py::arg("classes") = std::vector<uint32_t>{},
      py::arg("things") = std::vector<uint32_t>{},
      "Panoptic quality scores of a prediction against ground truth");
}
