#pragma once

// Deterministic synthetic datasets for tests: articulated objects with
// annotated boxes/masks laid out on a disjoint grid, camera poses from the
// view sampler, and helpers that turn ground truth into (possibly
// perturbed) prediction sets.

#include <string>
#include <vector>

#include "openable/baselines.hpp"
#include "openable/data.hpp"
#include "openable/metrics.hpp"
#include "openable/sampler.hpp"

namespace fixtures {

using namespace openable;

struct FixtureOptions {
    int n_objects = 2;
    int frames_per_object = 3;
    int min_parts = 1;
    int max_parts = 4;
    // When false, GT axes are rotated ~30 degrees off the canonical ones.
    bool canonical_axes = true;
    int image_size = 256;
};

inline MotionSpec make_motion(PartLabel label, const SemanticOBB& obb, Rng& rng,
                              bool canonical_axes) {
    const auto axes = candidate_axes(obb);
    MotionSpec m;
    if (label == PartLabel::drawer) {
        m.type = MotionType::prismatic;
        m.axis = axes[0];  // slides out the front
        m.range = {0.0, 0.2 + 0.4 * rng.uniform()};
    } else {
        m.type = MotionType::revolute;
        m.axis = label == PartLabel::door ? axes[2] : axes[1];
        const double sx = rng.uniform() < 0.5 ? -0.5 : 0.5;
        const double sy = rng.uniform() < 0.5 ? -0.5 : 0.5;
        m.origin = from_anocs(Vec3{sx, sy, 0.0}, obb);
        m.range = {0.0, kPi / 3.0 + rng.uniform() * kPi / 6.0};
    }
    if (!canonical_axes) {
        const Vec3 perp = m.axis.cross(Vec3{0.3, 0.7, 0.64}).normalized();
        m.axis = rotation_about_axis(perp, deg_to_rad(30.0)).apply(m.axis);
    }
    return m;
}

inline ArticulatedObject make_object(const std::string& object_id, Rng& rng,
                                     const FixtureOptions& opt) {
    ArticulatedObject obj;
    obj.object_id = object_id;
    const std::array<const char*, 4> cats{"storage", "fridge", "bin", "oven"};
    obj.category = cats[static_cast<size_t>(rng.uniform_int(4))];
    obj.obb.center = Vec3{0, 0, 0};
    obj.obb.up = Vec3{0, 0, 1};
    obj.obb.front = Vec3{1, 0, 0};
    obj.obb.half_extents = Vec3{0.3 + 0.5 * rng.uniform(),
                                0.3 + 0.5 * rng.uniform(),
                                0.3 + 0.5 * rng.uniform()};

    const int span = opt.max_parts - opt.min_parts;
    const int n_parts = opt.min_parts + (span > 0 ? rng.uniform_int(span + 1) : 0);
    for (int i = 0; i < n_parts; ++i) {
        OpenablePart p;
        p.part_id = object_id + "-part" + std::to_string(i);
        p.label = static_cast<PartLabel>(rng.uniform_int(kNumPartLabels));
        p.motion = make_motion(p.label, obj.obb, rng, opt.canonical_axes);
        obj.parts.push_back(std::move(p));
    }
    return obj;
}

// Boxes on a 3x3 grid of 80px cells: part i stays inside cell i, so
// annotations in one frame never overlap.
inline BoxXYWH grid_box(int part_index, Rng& rng) {
    const int col = part_index % 3;
    const int row = part_index / 3;
    const double x = 6.0 + 84.0 * col + 2.0 * rng.uniform();
    const double y = 6.0 + 84.0 * row + 2.0 * rng.uniform();
    const double w = 40.0 + 30.0 * rng.uniform();
    const double h = 40.0 + 30.0 * rng.uniform();
    return {x, y, w, h};
}

inline MaskRLE box_mask(const BoxXYWH& box, int height, int width) {
    Bitmask m = Bitmask::zeros(height, width);
    const int x0 = std::max(0, static_cast<int>(box[0]));
    const int y0 = std::max(0, static_cast<int>(box[1]));
    const int x1 = std::min(width, static_cast<int>(box[0] + box[2]));
    const int y1 = std::min(height, static_cast<int>(box[1] + box[3]));
    for (int x = x0; x < x1; ++x)
        for (int y = y0; y < y1; ++y) m.set(y, x, 1);
    return rle_encode(m);
}

inline GroundTruth make_ground_truth(std::uint64_t seed,
                                     const FixtureOptions& opt = {}) {
    Rng rng(Rng::mix(seed, 0xf1f1));
    GroundTruth gt;
    for (int o = 0; o < opt.n_objects; ++o)
        gt.objects.push_back(make_object("obj" + std::to_string(o), rng, opt));

    for (int o = 0; o < opt.n_objects; ++o) {
        const ArticulatedObject& obj = gt.objects[static_cast<size_t>(o)];
        for (int f = 0; f < opt.frames_per_object; ++f) {
            FrameGT frame;
            frame.frame_id = obj.object_id + "-f" + std::to_string(f);
            frame.object_id = obj.object_id;
            frame.intrinsics = intrinsics_from_fov(50.0, opt.image_size,
                                                   opt.image_size);
            frame.extrinsics = camera_from_view(
                10.0 + 50.0 * rng.uniform(), -60.0 + 120.0 * rng.uniform(),
                1.8 + rng.uniform(), obj.obb.center);
            for (size_t i = 0; i < obj.parts.size(); ++i) {
                const OpenablePart& part = obj.parts[i];
                PartAnnotation2D ann;
                ann.part_id = part.part_id;
                ann.label = part.label;
                ann.bbox = grid_box(static_cast<int>(i), rng);
                ann.mask = box_mask(ann.bbox, opt.image_size, opt.image_size);
                ann.motion_camera = motion_to_frame(part.motion, frame.extrinsics);
                ann.state.open = rng.uniform() < 0.5;
                ann.state.value = part.motion.range.min +
                                  (part.motion.range.max - part.motion.range.min) *
                                      rng.uniform();
                frame.annotations.push_back(std::move(ann));
            }
            frame.object_diagonal = object_diagonal(obj.obb);
            gt.frames.push_back(std::move(frame));
        }
    }
    return gt;
}

// Ground truth echoed back as detections: score 1, camera frame, exact
// motions, state probability matching the annotated state.
inline PredictionSet perfect_predictions(const GroundTruth& gt) {
    PredictionSet preds;
    for (const auto& frame : gt.frames) {
        PredFrame pf;
        pf.frame_id = frame.frame_id;
        pf.predicted_extrinsics = frame.extrinsics;
        for (const auto& ann : frame.annotations) {
            Detection d;
            d.label = ann.label;
            d.score = 1.0;
            d.bbox = ann.bbox;
            d.mask = ann.mask;
            d.motion.type = ann.motion_camera.type;
            d.motion.axis = ann.motion_camera.axis;
            d.motion.origin = ann.motion_camera.origin;
            d.frame_tag = FrameTag::camera;
            d.state_open_prob = ann.state.open ? 1.0 : 0.0;
            pf.detections.push_back(std::move(d));
        }
        preds.frames.push_back(std::move(pf));
    }
    return preds;
}

// Rotates every detection axis by exactly `angle_deg` about a perpendicular
// direction, leaving everything else untouched.
inline void perturb_axes(PredictionSet& preds, double angle_deg) {
    for (auto& frame : preds.frames) {
        for (auto& det : frame.detections) {
            Vec3 ref{0.3, -0.52, 0.8};
            if (det.motion.axis.cross(ref).norm() < 1e-6) ref = Vec3{1, 0, 0};
            const Vec3 perp = det.motion.axis.cross(ref).normalized();
            det.motion.axis = rotation_about_axis(perp, deg_to_rad(angle_deg))
                                  .apply(det.motion.axis);
        }
    }
}

inline void scramble_prismatic_origins(PredictionSet& preds, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x5c7a));
    for (auto& frame : preds.frames)
        for (auto& det : frame.detections)
            if (det.motion.type == MotionType::prismatic)
                det.motion.origin = Vec3{rng.uniform(-5, 5), rng.uniform(-5, 5),
                                         rng.uniform(-5, 5)};
}

// Noisy predictor: drops parts, jitters boxes, sometimes flips labels,
// types and states, perturbs axes/origins, and adds a few spurious boxes.
inline PredictionSet degraded_predictions(const GroundTruth& gt,
                                          std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0xde60));
    PredictionSet preds;
    for (const auto& frame : gt.frames) {
        PredFrame pf;
        pf.frame_id = frame.frame_id;
        pf.predicted_extrinsics = frame.extrinsics;
        for (const auto& ann : frame.annotations) {
            if (rng.uniform() < 0.15) continue;  // miss
            Detection d;
            d.label = rng.uniform() < 0.8
                          ? ann.label
                          : static_cast<PartLabel>(rng.uniform_int(3));
            d.score = 0.05 + 0.95 * rng.uniform();
            const double jx = 8.0 * (rng.uniform() - 0.5);
            const double jy = 8.0 * (rng.uniform() - 0.5);
            const double jw = 0.8 + 0.4 * rng.uniform();
            const double jh = 0.8 + 0.4 * rng.uniform();
            d.bbox = {ann.bbox[0] + jx, ann.bbox[1] + jy, ann.bbox[2] * jw,
                      ann.bbox[3] * jh};
            d.motion.type = rng.uniform() < 0.85
                                ? ann.motion_camera.type
                                : (ann.motion_camera.type == MotionType::prismatic
                                       ? MotionType::revolute
                                       : MotionType::prismatic);
            const Vec3 perp =
                ann.motion_camera.axis.cross(Vec3{0.3, 0.7, 0.64}).normalized();
            d.motion.axis =
                rotation_about_axis(perp, deg_to_rad(rng.uniform(0.0, 25.0)))
                    .apply(ann.motion_camera.axis);
            if (ann.motion_camera.origin)
                d.motion.origin = *ann.motion_camera.origin +
                                  Vec3{rng.uniform(-0.3, 0.3),
                                       rng.uniform(-0.3, 0.3),
                                       rng.uniform(-0.3, 0.3)};
            else if (rng.uniform() < 0.5)
                d.motion.origin =
                    Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            d.frame_tag = FrameTag::camera;
            if (rng.uniform() < 0.8)
                d.state_open_prob =
                    ann.state.open ? 0.5 + 0.5 * rng.uniform()
                                   : 0.5 * rng.uniform();
            pf.detections.push_back(std::move(d));
        }
        // spurious detections
        const int extra = rng.uniform_int(3);
        for (int i = 0; i < extra; ++i) {
            Detection d;
            d.label = static_cast<PartLabel>(rng.uniform_int(3));
            d.score = 0.05 + 0.95 * rng.uniform();
            d.bbox = grid_box(rng.uniform_int(9), rng);
            d.motion.type = static_cast<MotionType>(rng.uniform_int(2));
            d.motion.axis =
                Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            if (d.motion.axis.norm() < 1e-3) d.motion.axis = Vec3{1, 0, 0};
            d.motion.axis = d.motion.axis.normalized();
            d.motion.origin =
                Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            d.frame_tag = FrameTag::camera;
            if (rng.uniform() < 0.5) d.state_open_prob = rng.uniform();
            pf.detections.push_back(std::move(d));
        }
        preds.frames.push_back(std::move(pf));
    }
    return preds;
}

}  // namespace fixtures
