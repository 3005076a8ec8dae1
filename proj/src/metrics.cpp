#include "panoclust/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "panoclust/errors.hpp"

namespace panoclust {

namespace {

uint64_t segment_key(uint32_t cls, uint32_t ins) {
  return (static_cast<uint64_t>(cls) << 32) | ins;
}

struct SegmentTable {
  // segment key -> dense index; sizes aligned with order of first appearance
  std::unordered_map<uint64_t, size_t> index;
  std::vector<uint64_t> keys;
  std::vector<int64_t> sizes;

  size_t intern(uint64_t key) {
    auto [it, inserted] = index.try_emplace(key, keys.size());
    if (inserted) {
      keys.push_back(key);
      sizes.push_back(0);
    }
    return it->second;
  }
};

// A point belongs to a scored segment when its class is known and non-ignored
// and, for thing classes, its instance id is nonzero. Thing points with a
// zero id (dissolved or filtered instances) belong to no segment.
bool segment_of(uint32_t sem, uint32_t ins, const Taxonomy& tax, uint64_t* key) {
  if (tax.is_ignored(sem)) return false;
  if (tax.is_thing(sem)) {
    if (ins == 0) return false;
    *key = segment_key(sem, ins);
  } else {
    *key = segment_key(sem, 0);
  }
  return true;
}

}  // namespace

PointLabels filter_small_instances(const PointLabels& labels, size_t min_points) {
  if (labels.sem.size() != labels.ins.size()) {
    throw DimensionError("semantic and instance label counts differ");
  }
  std::unordered_map<uint64_t, size_t> counts;
  for (size_t i = 0; i < labels.ins.size(); ++i) {
    if (labels.ins[i] != 0) {
      ++counts[segment_key(labels.sem[i], labels.ins[i])];
    }
  }
  PointLabels out = labels;
  for (size_t i = 0; i < out.ins.size(); ++i) {
    if (out.ins[i] != 0 &&
        counts[segment_key(out.sem[i], out.ins[i])] < min_points) {
      out.ins[i] = 0;
    }
  }
  return out;
}

MetricAccumulator match_instances(const PointLabels& gt, const PointLabels& pred,
                                  const Taxonomy& taxonomy) {
  if (gt.sem.size() != gt.ins.size() || pred.sem.size() != pred.ins.size() ||
      gt.sem.size() != pred.sem.size()) {
    throw DimensionError("ground truth and prediction label counts differ");
  }
  const size_t n = gt.sem.size();

  SegmentTable gt_segments, pred_segments;
  // (gt segment, pred segment) -> shared point count
  std::unordered_map<uint64_t, int64_t> overlap;
  MetricAccumulator acc;
  auto& classes = acc.classes_;

  for (size_t i = 0; i < n; ++i) {
    if (taxonomy.is_ignored(gt.sem[i])) continue;  // void removal hits both sides

    if (taxonomy.is_known(gt.sem[i])) ++classes[gt.sem[i]].sem_gt;
    if (taxonomy.is_known(pred.sem[i]) && !taxonomy.is_ignored(pred.sem[i])) {
      ++classes[pred.sem[i]].sem_pred;
    }
    if (gt.sem[i] == pred.sem[i]) ++classes[gt.sem[i]].sem_intersection;

    uint64_t gkey = 0, pkey = 0;
    const bool has_g = segment_of(gt.sem[i], gt.ins[i], taxonomy, &gkey);
    const bool has_p = segment_of(pred.sem[i], pred.ins[i], taxonomy, &pkey);
    size_t gi = 0, pi = 0;
    if (has_g) {
      gi = gt_segments.intern(gkey);
      ++gt_segments.sizes[gi];
    }
    if (has_p) {
      pi = pred_segments.intern(pkey);
      ++pred_segments.sizes[pi];
    }
    if (has_g && has_p && (gkey >> 32) == (pkey >> 32)) {
      ++overlap[(static_cast<uint64_t>(gi) << 32) | pi];
    }
  }

  std::vector<uint8_t> gt_matched(gt_segments.keys.size(), 0);
  std::vector<uint8_t> pred_matched(pred_segments.keys.size(), 0);
  for (const auto& [pair_key, inter] : overlap) {
    const size_t gi = pair_key >> 32;
    const size_t pi = pair_key & 0xffffffffu;
    const int64_t uni = gt_segments.sizes[gi] + pred_segments.sizes[pi] - inter;
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    if (iou > 0.5) {
      gt_matched[gi] = 1;
      pred_matched[pi] = 1;
      classes[static_cast<uint32_t>(gt_segments.keys[gi] >> 32)].tp_ious.push_back(iou);
    }
  }
  for (size_t gi = 0; gi < gt_segments.keys.size(); ++gi) {
    if (!gt_matched[gi]) {
      ++classes[static_cast<uint32_t>(gt_segments.keys[gi] >> 32)].fn;
    }
  }
  for (size_t pi = 0; pi < pred_segments.keys.size(); ++pi) {
    if (!pred_matched[pi]) {
      ++classes[static_cast<uint32_t>(pred_segments.keys[pi] >> 32)].fp;
    }
  }
  // tp_ious across unordered_map iteration is nondeterministic; sort for
  // bit-stable serialized reports.
  for (auto& [cls, counts] : classes) {
    std::sort(counts.tp_ious.begin(), counts.tp_ious.end());
  }
  return acc;
}

void MetricAccumulator::add_scan(const PointLabels& gt, const PointLabels& pred,
                                 const Taxonomy& taxonomy) {
  merge(match_instances(gt, pred, taxonomy));
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
  for (const auto& [cls, counts] : other.classes_) {
    auto& mine = classes_[cls];
    mine.tp_ious.insert(mine.tp_ious.end(), counts.tp_ious.begin(), counts.tp_ious.end());
    mine.fp += counts.fp;
    mine.fn += counts.fn;
    mine.sem_intersection += counts.sem_intersection;
    mine.sem_gt += counts.sem_gt;
    mine.sem_pred += counts.sem_pred;
  }
}

PanopticScores compute_scores(const MetricAccumulator& acc, const Taxonomy& taxonomy) {
  PanopticScores out;
  double sum_pq = 0, sum_rq = 0, sum_sq = 0, sum_dagger = 0;
  double sum_pq_th = 0, sum_rq_th = 0, sum_sq_th = 0;
  double sum_pq_st = 0, sum_rq_st = 0, sum_sq_st = 0;
  double sum_iou = 0;
  int counted = 0, counted_th = 0, counted_st = 0, gt_classes = 0;

  for (const auto& [cls, counts] : acc.classes()) {
    if (!taxonomy.is_known(cls) || taxonomy.is_ignored(cls)) continue;
    ClassScore score;
    score.class_id = cls;
    score.tp = counts.tp();
    score.fp = counts.fp;
    score.fn = counts.fn;
    score.in_gt = counts.sem_gt > 0;
    score.counted = (score.tp + score.fp + score.fn) > 0;
    if (score.tp > 0) {
      score.sq = std::accumulate(counts.tp_ious.begin(), counts.tp_ious.end(), 0.0) /
                 static_cast<double>(score.tp);
    }
    if (score.counted) {
      score.rq = static_cast<double>(score.tp) /
                 (static_cast<double>(score.tp) + 0.5 * static_cast<double>(score.fp) +
                  0.5 * static_cast<double>(score.fn));
    }
    score.pq = score.sq * score.rq;
    if (counts.sem_gt + counts.sem_pred > 0) {
      const int64_t uni = counts.sem_gt + counts.sem_pred - counts.sem_intersection;
      score.iou = static_cast<double>(counts.sem_intersection) / static_cast<double>(uni);
    }

    if (score.counted) {
      ++counted;
      sum_pq += score.pq;
      sum_rq += score.rq;
      sum_sq += score.sq;
      sum_dagger += taxonomy.is_thing(cls) ? score.pq : score.iou;
      if (taxonomy.is_thing(cls)) {
        ++counted_th;
        sum_pq_th += score.pq;
        sum_rq_th += score.rq;
        sum_sq_th += score.sq;
      } else {
        ++counted_st;
        sum_pq_st += score.pq;
        sum_rq_st += score.rq;
        sum_sq_st += score.sq;
      }
    }
    if (score.in_gt) {
      ++gt_classes;
      sum_iou += score.iou;
    }
    out.per_class.push_back(score);
  }

  if (counted > 0) {
    out.pq = sum_pq / counted;
    out.pq_dagger = sum_dagger / counted;
    out.rq = sum_rq / counted;
    out.sq = sum_sq / counted;
  }
  if (counted_th > 0) {
    out.pq_things = sum_pq_th / counted_th;
    out.rq_things = sum_rq_th / counted_th;
    out.sq_things = sum_sq_th / counted_th;
  }
  if (counted_st > 0) {
    out.pq_stuff = sum_pq_st / counted_st;
    out.rq_stuff = sum_rq_st / counted_st;
    out.sq_stuff = sum_sq_st / counted_st;
  }
  if (gt_classes > 0) {
    out.miou = sum_iou / gt_classes;
  }
  return out;
}

IouReport miou(std::span<const uint32_t> gt_sem, std::span<const uint32_t> pred_sem,
               const Taxonomy& taxonomy) {
  if (gt_sem.size() != pred_sem.size()) {
    throw DimensionError("ground truth and prediction label counts differ");
  }
  struct Cell {
    int64_t inter = 0, gt = 0, pred = 0;
  };
  std::map<uint32_t, Cell> cells;
  for (size_t i = 0; i < gt_sem.size(); ++i) {
    if (taxonomy.is_ignored(gt_sem[i])) continue;
    if (taxonomy.is_known(gt_sem[i])) ++cells[gt_sem[i]].gt;
    if (taxonomy.is_known(pred_sem[i]) && !taxonomy.is_ignored(pred_sem[i])) {
      ++cells[pred_sem[i]].pred;
    }
    if (gt_sem[i] == pred_sem[i]) ++cells[gt_sem[i]].inter;
  }
  IouReport report;
  double sum = 0;
  int present = 0;
  for (const auto& [cls, cell] : cells) {
    const int64_t uni = cell.gt + cell.pred - cell.inter;
    const double iou = uni > 0 ? static_cast<double>(cell.inter) / static_cast<double>(uni) : 0.0;
    report.per_class[cls] = iou;
    if (cell.gt > 0) {
      sum += iou;
      ++present;
    }
  }
  if (present > 0) report.mean = sum / present;
  return report;
}

}  // namespace panoclust
