#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "openable/data.hpp"
#include "openable/report.hpp"

namespace openable {

// Match cascade. det requires the class criterion and box IoU; each later
// level adds a motion criterion. det_state pairs the motion-type check with
// binary open/closed agreement instead of axis/origin.
enum class MatchLevel { det, det_m, det_ma, det_mao, det_state };

inline constexpr std::array<MatchLevel, 5> kAllLevels{
    MatchLevel::det, MatchLevel::det_m, MatchLevel::det_ma, MatchLevel::det_mao,
    MatchLevel::det_state};

struct EvalConfig {
    std::vector<double> iou_thresholds{0.5};
    double axis_thresh_deg = 10.0;
    double origin_thresh_frac = 0.25;
    int max_det = 100;
    double score_thresh = 0.05;
    double nms_iou = 0.5;
    bool undirected_axes = true;
    int jobs = 1;

    bool compute_micro_errors = true;
    bool compute_sweep_errors = false;
    double micro_error_iou = 0.5;
    // Defaults to 0.50:0.05:0.95.
    std::vector<double> sweep_ious = default_sweep_grid();

    static std::vector<double> default_sweep_grid() {
        std::vector<double> g;
        for (int i = 0; i < 10; ++i) g.push_back(static_cast<double>(10 + i) / 20.0);
        return g;
    }

    void validate() const {
        require(!iou_thresholds.empty(), "eval config: empty iou_thresholds");
        for (double t : iou_thresholds)
            require(t > 0.0 && t <= 1.0, "eval config: iou threshold outside (0, 1]");
        require(axis_thresh_deg > 0.0, "eval config: axis threshold must be positive");
        require(origin_thresh_frac > 0.0,
                "eval config: origin threshold must be positive");
        require(max_det >= 1, "eval config: max_det must be >= 1");
        require(score_thresh >= 0.0 && score_thresh <= 1.0,
                "eval config: score threshold outside [0, 1]");
        require(nms_iou >= 0.0 && nms_iou <= 1.0,
                "eval config: nms iou outside [0, 1]");
        require(jobs >= 1, "eval config: jobs must be >= 1");
        require(!compute_sweep_errors || !sweep_ious.empty(),
                "eval config: empty sweep grid");
    }
};

// Maps object-frame detections into the camera frame through the frame's
// predicted extrinsics; camera-frame detections pass through untouched.
inline PredFrame resolve_motions(const PredFrame& pred, const FrameGT& gt) {
    require(pred.frame_id == gt.frame_id,
            "resolve_motions: frame ids differ ('" + pred.frame_id + "' vs '" +
                gt.frame_id + "')");
    PredFrame out = pred;
    for (auto& det : out.detections) {
        if (det.frame_tag != FrameTag::object) continue;
        require(pred.predicted_extrinsics.has_value(),
                "frame '" + pred.frame_id +
                    "': object-frame detection without predicted extrinsics");
        const RigidTransform& t = *pred.predicted_extrinsics;
        det.motion.axis = transform_direction(t, det.motion.axis).normalized();
        if (det.motion.origin)
            det.motion.origin = transform_point(t, *det.motion.origin);
        det.frame_tag = FrameTag::camera;
    }
    return out;
}

// Level predicate for one (detection, ground truth) pair. Motions must
// already be in the camera frame. Returns the box IoU when the pair is
// admissible at `level`, nullopt otherwise. All thresholds are inclusive;
// prismatic joints always pass the origin criterion.
inline std::optional<double> match_predicate(
    MatchLevel level, const Detection& det, const PartAnnotation2D& gt,
    double object_diagonal, const EvalConfig& cfg, double iou_thresh,
    bool require_label) {
    if (require_label && det.label != gt.label) return std::nullopt;
    const double iou = box_iou(det.bbox, gt.bbox);
    if (iou < iou_thresh) return std::nullopt;
    if (level == MatchLevel::det) return iou;

    if (det.motion.type != gt.motion_camera.type) return std::nullopt;
    if (level == MatchLevel::det_m) return iou;

    if (level == MatchLevel::det_state) {
        if (!det.state_open_prob) return std::nullopt;
        const bool pred_open = *det.state_open_prob >= 0.5;
        return pred_open == gt.state.open ? std::optional<double>(iou)
                                          : std::nullopt;
    }

    const double angle = angle_between_axes(det.motion.axis,
                                            gt.motion_camera.axis,
                                            cfg.undirected_axes);
    if (angle > cfg.axis_thresh_deg) return std::nullopt;
    if (level == MatchLevel::det_ma) return iou;

    if (gt.motion_camera.type == MotionType::revolute) {
        if (!det.motion.origin) return std::nullopt;
        const double dist = point_to_line_distance(
            *det.motion.origin, *gt.motion_camera.origin, gt.motion_camera.axis);
        if (dist > cfg.origin_thresh_frac * object_diagonal) return std::nullopt;
    }
    return iou;
}

// 101-point interpolated average precision on [0, 1]. Detections may be
// unsorted; sorting is stable on descending score. With no ground truth the
// result is NaN when there are no detections and 0 otherwise.
inline double average_precision(std::vector<std::pair<double, bool>> dets,
                                std::uint64_t n_gt) {
    if (n_gt == 0) return dets.empty() ? kAbsent : 0.0;
    std::stable_sort(dets.begin(), dets.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const size_t n = dets.size();
    std::vector<double> recall(n), precision(n);
    double tp = 0.0, fp = 0.0;
    for (size_t i = 0; i < n; ++i) {
        (dets[i].second ? tp : fp) += 1.0;
        recall[i] = tp / static_cast<double>(n_gt);
        precision[i] = tp / (tp + fp);
    }
    for (size_t i = n; i-- > 1;)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double sum = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double thr = static_cast<double>(r) / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), thr);
        if (it != recall.end())
            sum += precision[static_cast<size_t>(it - recall.begin())];
    }
    return sum / 101.0;
}

namespace metrics_detail {

inline constexpr size_t kLevels = kAllLevels.size();

struct PerClassTallies {
    std::vector<std::pair<double, bool>> score_tp[kLevels];
    std::uint64_t n_gt = 0;
};

struct ErrorAcc {
    double axis_sum_all = 0, axis_sum_prismatic = 0, axis_sum_revolute = 0;
    double origin_sum = 0;
    std::uint64_t n_all = 0, n_prismatic = 0, n_revolute = 0, n_origin = 0;

    void merge(const ErrorAcc& o) {
        axis_sum_all += o.axis_sum_all;
        axis_sum_prismatic += o.axis_sum_prismatic;
        axis_sum_revolute += o.axis_sum_revolute;
        origin_sum += o.origin_sum;
        n_all += o.n_all;
        n_prismatic += o.n_prismatic;
        n_revolute += o.n_revolute;
        n_origin += o.n_origin;
    }
};

// One frame's contribution: per family, per class, per IoU threshold, per
// level, detection (score, tp) records plus GT counts, and the error
// accumulators. Frames merge associatively in frame order.
struct FrameEval {
    std::vector<PerClassTallies> part;    // [class * T + threshold], 3 classes
    std::vector<PerClassTallies> motion;  // [class * T + threshold], 2 classes
    ErrorAcc micro;
    std::vector<ErrorAcc> sweep;  // per sweep threshold
};

inline size_t level_index(MatchLevel l) { return static_cast<size_t>(l); }

// Score filter, class-wise NMS, descending-score sort, maxDet truncation.
inline std::vector<Detection> preprocess_detections(
    const std::vector<Detection>& dets, const EvalConfig& cfg) {
    std::vector<Detection> filtered;
    for (const auto& d : dets)
        if (d.score >= cfg.score_thresh) filtered.push_back(d);

    const auto kept = greedy_nms_indices(
        filtered.size(), [&](size_t i) { return filtered[i].bbox; },
        [&](size_t i) { return filtered[i].score; },
        [&](size_t i) { return filtered[i].label; }, cfg.nms_iou);

    std::vector<Detection> out;
    out.reserve(kept.size());
    for (size_t i : kept) out.push_back(filtered[i]);
    std::stable_sort(out.begin(), out.end(),
                     [](const Detection& a, const Detection& b) {
                         return a.score > b.score;
                     });
    if (out.size() > static_cast<size_t>(cfg.max_det))
        out.resize(static_cast<size_t>(cfg.max_det));
    return out;
}

inline void run_matches(const std::vector<const Detection*>& dets,
                        const std::vector<const PartAnnotation2D*>& gts,
                        double diagonal, const EvalConfig& cfg,
                        bool require_label, double iou_thresh,
                        PerClassTallies& tallies) {
    tallies.n_gt += gts.size();
    for (MatchLevel level : kAllLevels) {
        const auto result = greedy_match(
            gts.size(), dets.size(), [&](size_t d, size_t g) {
                return match_predicate(level, *dets[d], *gts[g], diagonal, cfg,
                                       iou_thresh, require_label);
            });
        auto& records = tallies.score_tp[level_index(level)];
        for (size_t d = 0; d < dets.size(); ++d)
            records.emplace_back(dets[d]->score, result.det_to_gt[d] >= 0);
    }
}

// Matched-pair errors at one IoU threshold: label-partitioned greedy
// matching requiring equal motion type, then axis/origin errors sliced by
// ground-truth motion type.
inline ErrorAcc frame_errors(
    const std::array<std::vector<const Detection*>, kNumPartLabels>& dets_by_label,
    const std::array<std::vector<const PartAnnotation2D*>, kNumPartLabels>& gts_by_label,
    double diagonal, const EvalConfig& cfg, double iou_thresh) {
    ErrorAcc acc;
    for (int c = 0; c < kNumPartLabels; ++c) {
        const auto& dets = dets_by_label[static_cast<size_t>(c)];
        const auto& gts = gts_by_label[static_cast<size_t>(c)];
        const auto result = greedy_match(
            gts.size(), dets.size(), [&](size_t d, size_t g) {
                return match_predicate(MatchLevel::det_m, *dets[d], *gts[g],
                                       diagonal, cfg, iou_thresh, false);
            });
        for (const auto& [d, g] : result.pairs) {
            const Detection& det = *dets[static_cast<size_t>(d)];
            const PartAnnotation2D& gt = *gts[static_cast<size_t>(g)];
            const double angle = angle_between_axes(
                det.motion.axis, gt.motion_camera.axis, cfg.undirected_axes);
            acc.axis_sum_all += angle;
            acc.n_all += 1;
            if (gt.motion_camera.type == MotionType::prismatic) {
                acc.axis_sum_prismatic += angle;
                acc.n_prismatic += 1;
            } else {
                acc.axis_sum_revolute += angle;
                acc.n_revolute += 1;
                if (det.motion.origin) {
                    const double dist = point_to_line_distance(
                        *det.motion.origin, *gt.motion_camera.origin,
                        gt.motion_camera.axis);
                    acc.origin_sum += dist / diagonal;
                    acc.n_origin += 1;
                }
            }
        }
    }
    return acc;
}

inline FrameEval evaluate_frame(const FrameGT& gt_frame,
                                const PredFrame* pred_frame,
                                const EvalConfig& cfg) {
    const size_t T = cfg.iou_thresholds.size();
    FrameEval ev;
    ev.part.resize(kNumPartLabels * T);
    ev.motion.resize(kNumMotionTypes * T);
    if (cfg.compute_sweep_errors) ev.sweep.resize(cfg.sweep_ious.size());

    std::vector<Detection> dets;
    if (pred_frame) {
        const PredFrame resolved = resolve_motions(*pred_frame, gt_frame);
        dets = preprocess_detections(resolved.detections, cfg);
    }

    std::array<std::vector<const Detection*>, kNumPartLabels> dets_by_label;
    std::array<std::vector<const PartAnnotation2D*>, kNumPartLabels> gts_by_label;
    std::array<std::vector<const Detection*>, kNumMotionTypes> dets_by_type;
    std::array<std::vector<const PartAnnotation2D*>, kNumMotionTypes> gts_by_type;
    for (const auto& d : dets) {
        dets_by_label[static_cast<size_t>(d.label)].push_back(&d);
        dets_by_type[static_cast<size_t>(d.motion.type)].push_back(&d);
    }
    for (const auto& a : gt_frame.annotations) {
        gts_by_label[static_cast<size_t>(a.label)].push_back(&a);
        gts_by_type[static_cast<size_t>(a.motion_camera.type)].push_back(&a);
    }

    const double diagonal = gt_frame.object_diagonal;
    for (size_t t = 0; t < T; ++t) {
        const double thr = cfg.iou_thresholds[t];
        for (int c = 0; c < kNumPartLabels; ++c)
            run_matches(dets_by_label[static_cast<size_t>(c)],
                        gts_by_label[static_cast<size_t>(c)], diagonal, cfg,
                        /*require_label=*/true, thr,
                        ev.part[static_cast<size_t>(c) * T + t]);
        for (int c = 0; c < kNumMotionTypes; ++c)
            run_matches(dets_by_type[static_cast<size_t>(c)],
                        gts_by_type[static_cast<size_t>(c)], diagonal, cfg,
                        /*require_label=*/false, thr,
                        ev.motion[static_cast<size_t>(c) * T + t]);
    }

    if (cfg.compute_micro_errors)
        ev.micro = frame_errors(dets_by_label, gts_by_label, diagonal, cfg,
                                cfg.micro_error_iou);
    if (cfg.compute_sweep_errors)
        for (size_t s = 0; s < cfg.sweep_ious.size(); ++s)
            ev.sweep[s] = frame_errors(dets_by_label, gts_by_label, diagonal,
                                       cfg, cfg.sweep_ious[s]);
    return ev;
}

inline double mean_or_absent(double sum, std::uint64_t n) {
    return n > 0 ? sum / static_cast<double>(n) : kAbsent;
}

// Mean over entries that are present (non-NaN); NaN if none.
inline double mean_present(const std::vector<double>& values) {
    double sum = 0.0;
    size_t n = 0;
    for (double v : values) {
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : kAbsent;
}

}  // namespace metrics_detail

// Full evaluation: part-averaged and motion-averaged mAP cascades at every
// level, per-class breakdowns, and the matched-pair error metrics. Frames
// are matched by frame_id; a prediction frame without ground truth is a
// hard alignment error, a ground-truth frame without predictions counts all
// its parts as missed. Results are independent of frame order and of
// cfg.jobs.
inline MetricsReport evaluate(const GroundTruth& gt, const PredictionSet& preds,
                              const EvalConfig& cfg = {}) {
    using namespace metrics_detail;
    cfg.validate();

    std::map<std::string, const PredFrame*> pred_by_id;
    for (const auto& f : preds.frames) {
        if (!pred_by_id.emplace(f.frame_id, &f).second)
            throw AlignmentError("duplicate prediction frame_id '" + f.frame_id +
                                 "'");
    }
    {
        std::set<std::string> gt_ids;
        for (const auto& f : gt.frames) gt_ids.insert(f.frame_id);
        for (const auto& f : preds.frames)
            if (!gt_ids.count(f.frame_id))
                throw AlignmentError("prediction frame_id '" + f.frame_id +
                                     "' has no ground-truth frame");
    }

    const size_t n_frames = gt.frames.size();
    std::vector<FrameEval> evals(n_frames);
    const int jobs = static_cast<int>(
        std::min(static_cast<size_t>(cfg.jobs), std::max(n_frames, size_t{1})));

    const auto worker_body = [&](size_t i) {
        const FrameGT& frame = gt.frames[i];
        const auto it = pred_by_id.find(frame.frame_id);
        const PredFrame* pf = it == pred_by_id.end() ? nullptr : it->second;
        evals[i] = evaluate_frame(frame, pf, cfg);
    };

    if (jobs <= 1) {
        for (size_t i = 0; i < n_frames; ++i) worker_body(i);
    } else {
        std::atomic<size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= n_frames) return;
                    try {
                        worker_body(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // Ordered, deterministic reduction.
    const size_t T = cfg.iou_thresholds.size();
    std::vector<PerClassTallies> part(kNumPartLabels * T);
    std::vector<PerClassTallies> motion(kNumMotionTypes * T);
    ErrorAcc micro;
    std::vector<ErrorAcc> sweep(cfg.compute_sweep_errors ? cfg.sweep_ious.size()
                                                         : 0);
    for (const auto& ev : evals) {
        for (size_t i = 0; i < part.size(); ++i) {
            part[i].n_gt += ev.part[i].n_gt;
            for (size_t l = 0; l < kLevels; ++l) {
                auto& dst = part[i].score_tp[l];
                const auto& src = ev.part[i].score_tp[l];
                dst.insert(dst.end(), src.begin(), src.end());
            }
        }
        for (size_t i = 0; i < motion.size(); ++i) {
            motion[i].n_gt += ev.motion[i].n_gt;
            for (size_t l = 0; l < kLevels; ++l) {
                auto& dst = motion[i].score_tp[l];
                const auto& src = ev.motion[i].score_tp[l];
                dst.insert(dst.end(), src.begin(), src.end());
            }
        }
        micro.merge(ev.micro);
        for (size_t s = 0; s < sweep.size(); ++s) sweep[s].merge(ev.sweep[s]);
    }

    MetricsReport report;
    report.frames_evaluated = n_frames;
    report.iou_thresholds = cfg.iou_thresholds;
    report.axis_thresh_deg = cfg.axis_thresh_deg;
    report.origin_thresh_frac = cfg.origin_thresh_frac;

    // Per class and level: AP averaged over IoU thresholds, in percent.
    // A class with no ground truth anywhere stays absent and drops out of
    // the family mean.
    const auto class_levels = [&](const std::vector<PerClassTallies>& tallies,
                                  size_t cls) {
        LevelValues lv;
        std::array<double*, kLevels> slots{&lv.det, &lv.m, &lv.ma, &lv.mao,
                                           &lv.state};
        std::uint64_t class_gt = 0;
        for (size_t t = 0; t < T; ++t) class_gt += tallies[cls * T + t].n_gt;
        for (size_t l = 0; l < kLevels; ++l) {
            if (class_gt == 0) continue;
            double sum = 0.0;
            for (size_t t = 0; t < T; ++t) {
                const auto& pc = tallies[cls * T + t];
                sum += average_precision(pc.score_tp[l], pc.n_gt);
            }
            *slots[l] = 100.0 * sum / static_cast<double>(T);
        }
        return lv;
    };
    const auto family_mean = [](const auto& per_class) {
        LevelValues lv;
        std::array<double LevelValues::*, kLevels> members{
            &LevelValues::det, &LevelValues::m, &LevelValues::ma,
            &LevelValues::mao, &LevelValues::state};
        for (auto member : members) {
            std::vector<double> vals;
            for (const auto& c : per_class) vals.push_back(c.*member);
            lv.*member = metrics_detail::mean_present(vals);
        }
        return lv;
    };

    for (size_t c = 0; c < kNumPartLabels; ++c)
        report.per_part_category[c] = class_levels(part, c);
    for (size_t c = 0; c < kNumMotionTypes; ++c)
        report.per_motion_type[c] = class_levels(motion, c);
    report.part_averaged = family_mean(report.per_part_category);
    report.motion_averaged = family_mean(report.per_motion_type);

    if (cfg.compute_micro_errors) {
        MicroErrorStats e;
        e.axis_deg_all = mean_or_absent(micro.axis_sum_all, micro.n_all);
        e.axis_deg_prismatic =
            mean_or_absent(micro.axis_sum_prismatic, micro.n_prismatic);
        e.axis_deg_revolute =
            mean_or_absent(micro.axis_sum_revolute, micro.n_revolute);
        e.origin_frac_revolute = mean_or_absent(micro.origin_sum, micro.n_origin);
        e.matched_all = micro.n_all;
        e.matched_prismatic = micro.n_prismatic;
        e.matched_revolute = micro.n_revolute;
        report.errors_micro = e;
    }
    if (cfg.compute_sweep_errors) {
        SweepErrorStats e;
        std::vector<double> axis_p, axis_r, origin_r;
        double count_p = 0.0, count_r = 0.0;
        for (const auto& acc : sweep) {
            if (acc.n_prismatic > 0)
                axis_p.push_back(acc.axis_sum_prismatic /
                                 static_cast<double>(acc.n_prismatic));
            if (acc.n_revolute > 0)
                axis_r.push_back(acc.axis_sum_revolute /
                                 static_cast<double>(acc.n_revolute));
            if (acc.n_origin > 0)
                origin_r.push_back(acc.origin_sum /
                                   static_cast<double>(acc.n_origin));
            count_p += static_cast<double>(acc.n_prismatic);
            count_r += static_cast<double>(acc.n_revolute);
        }
        e.axis_deg_prismatic = mean_present(axis_p);
        e.axis_deg_revolute = mean_present(axis_r);
        e.axis_deg_macro =
            mean_present({e.axis_deg_prismatic, e.axis_deg_revolute});
        e.origin_frac_revolute = mean_present(origin_r);
        const double n_thr = static_cast<double>(sweep.size());
        e.matched_prismatic = count_p / n_thr;
        e.matched_revolute = count_r / n_thr;
        report.errors_sweep = e;
    }
    return report;
}

// Micro-averaged error metrics alone (the detection matching still applies
// score/NMS/maxDet preprocessing from the config).
inline MicroErrorStats error_metrics_micro(const GroundTruth& gt,
                                           const PredictionSet& preds,
                                           EvalConfig cfg = {},
                                           double iou = 0.5) {
    cfg.compute_micro_errors = true;
    cfg.compute_sweep_errors = false;
    cfg.micro_error_iou = iou;
    const MetricsReport r = evaluate(gt, preds, cfg);
    return *r.errors_micro;
}

// IoU-sweep error metrics: per-type means averaged over thresholds, then
// macro-averaged across motion types.
inline SweepErrorStats error_metrics_sweep(const GroundTruth& gt,
                                           const PredictionSet& preds,
                                           EvalConfig cfg = {}) {
    cfg.compute_sweep_errors = true;
    const MetricsReport r = evaluate(gt, preds, cfg);
    return *r.errors_sweep;
}

}  // namespace openable
