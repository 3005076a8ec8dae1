#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "panoclust/taxonomy.hpp"
#include "panoclust/types.hpp"

namespace panoclust {

// Zeroes instance ids whose (class, id) segment holds fewer than min_points
// points. Semantic labels are untouched.
PointLabels filter_small_instances(const PointLabels& labels, size_t min_points);

// Per-class matching and semantic counts for one or more scans. Merging is
// associative and commutative apart from the order of tp_ious, which only
// ever feeds a mean.
struct ClassCounts {
  std::vector<double> tp_ious;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t sem_intersection = 0;
  int64_t sem_gt = 0;
  int64_t sem_pred = 0;

  int64_t tp() const { return static_cast<int64_t>(tp_ious.size()); }
};

class MetricAccumulator {
 public:
  void add_scan(const PointLabels& gt, const PointLabels& pred, const Taxonomy& taxonomy);
  void merge(const MetricAccumulator& other);
  const std::map<uint32_t, ClassCounts>& classes() const { return classes_; }

 private:
  friend MetricAccumulator match_instances(const PointLabels&, const PointLabels&,
                                           const Taxonomy&);
  std::map<uint32_t, ClassCounts> classes_;
};

// Single-scan segment matching. Points whose ground-truth class is ignored
// are removed from both sides first. Thing segments are (class, id > 0)
// groups; stuff classes form one segment per class. A pair counts as a true
// positive when point-set IoU exceeds 0.5, which makes the matching unique.
MetricAccumulator match_instances(const PointLabels& gt, const PointLabels& pred,
                                  const Taxonomy& taxonomy);

struct ClassScore {
  uint32_t class_id = 0;
  double pq = 0.0;
  double rq = 0.0;
  double sq = 0.0;
  double iou = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  bool counted = false;   // participates in panoptic macro means
  bool in_gt = false;     // has ground-truth points (mIoU averaging set)
};

struct PanopticScores {
  std::vector<ClassScore> per_class;  // ascending class id
  double pq = 0.0;
  double pq_dagger = 0.0;
  double rq = 0.0;
  double sq = 0.0;
  double pq_things = 0.0;
  double rq_things = 0.0;
  double sq_things = 0.0;
  double pq_stuff = 0.0;
  double rq_stuff = 0.0;
  double sq_stuff = 0.0;
  double miou = 0.0;
};

// Per class: SQ = mean matched IoU, RQ = TP/(TP + FP/2 + FN/2), PQ = SQ*RQ.
// Classes with no segments on either side are excluded from macro means.
// The dagger variant scores stuff classes by plain semantic IoU instead of
// gated matching.
PanopticScores compute_scores(const MetricAccumulator& acc, const Taxonomy& taxonomy);

struct IouReport {
  std::map<uint32_t, double> per_class;
  double mean = 0.0;
};

// Semantic IoU per class; the mean runs over classes present in ground truth.
IouReport miou(std::span<const uint32_t> gt_sem, std::span<const uint32_t> pred_sem,
               const Taxonomy& taxonomy);

}  // namespace panoclust
