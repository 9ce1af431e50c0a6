#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "openable/data.hpp"
#include "openable/rng.hpp"

namespace openable {

// Candidate motion parameters in the normalized object box: the three box
// axes and 19 origin candidates (12 edge midpoints, 6 face centers, box
// center) with ANOCs components in {-0.5, 0, 0.5}, enumerated in
// lexicographic order.
struct CanonicalCandidates {
    std::array<Vec3, 19> origins_anocs;
    std::array<Vec3, 3> axes;

    static const CanonicalCandidates& standard() {
        static const CanonicalCandidates c = [] {
            CanonicalCandidates cc;
            cc.axes = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
            const std::array<double, 3> levels{-0.5, 0.0, 0.5};
            size_t n = 0;
            for (double x : levels)
                for (double y : levels)
                    for (double z : levels) {
                        const int zeros = (x == 0.0) + (y == 0.0) + (z == 0.0);
                        if (zeros == 0) continue;  // corners are excluded
                        cc.origins_anocs[n++] = Vec3{x, y, z};
                    }
            return cc;
        }();
        return c;
    }
};

// The 19 candidate origins placed on an actual box: ANOCs candidates scaled
// by the ground-truth extents and carried into object coordinates.
inline std::array<Vec3, 19> candidate_origins(const SemanticOBB& obb) {
    std::array<Vec3, 19> out;
    const auto& cands = CanonicalCandidates::standard();
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = from_anocs(cands.origins_anocs[i], obb);
    return out;
}

// Object-frame directions of the three canonical axes.
inline std::array<Vec3, 3> candidate_axes(const SemanticOBB& obb) {
    obb.validate();
    return obb.axes();
}

// Random-motion baseline: keeps each detection's box, score and mask but
// replaces the label and motion with uniform draws over labels, types, the
// 3 canonical axes and the 19 candidate origins, then maps the motion to
// the camera frame through the given pose. Draws depend only on
// (seed, frame_id, detection index).
inline std::vector<Detection> randmot(const std::vector<Detection>& detections,
                                      const SemanticOBB& obb,
                                      const RigidTransform& pose,
                                      std::uint64_t seed,
                                      const std::string& frame_id) {
    const auto axes = candidate_axes(obb);
    const auto origins = candidate_origins(obb);
    std::vector<Detection> out = detections;
    for (size_t i = 0; i < out.size(); ++i) {
        Rng rng(Rng::mix(Rng::mix(seed, Rng::hash_string(frame_id)), i));
        Detection& d = out[i];
        d.label = static_cast<PartLabel>(rng.uniform_int(kNumPartLabels));
        d.motion.type = static_cast<MotionType>(rng.uniform_int(kNumMotionTypes));
        const Vec3 axis_obj = axes[static_cast<size_t>(rng.uniform_int(3))];
        const Vec3 origin_obj = origins[static_cast<size_t>(rng.uniform_int(19))];
        d.motion.axis = transform_direction(pose, axis_obj).normalized();
        d.motion.origin = transform_point(pose, origin_obj);
        d.frame_tag = FrameTag::camera;
    }
    return out;
}

// Train-set statistics for the most-frequent baseline.
struct LabelStats {
    std::array<std::uint64_t, kNumMotionTypes> type_counts{};
    std::array<std::uint64_t, 3> axis_counts{};
    std::array<std::uint64_t, 19> origin_counts{};

    MotionType modal_type() const {
        return type_counts[1] > type_counts[0] ? MotionType::revolute
                                               : MotionType::prismatic;
    }

    int modal_axis() const {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (axis_counts[static_cast<size_t>(i)] >
                axis_counts[static_cast<size_t>(best)])
                best = i;
        return best;
    }

    std::optional<int> modal_origin() const {
        int best = -1;
        for (int i = 0; i < 19; ++i) {
            const auto c = origin_counts[static_cast<size_t>(i)];
            if (c > 0 && (best < 0 || c > origin_counts[static_cast<size_t>(best)]))
                best = i;
        }
        if (best < 0) return std::nullopt;
        return best;
    }
};

struct FreqStats {
    std::array<std::optional<LabelStats>, kNumPartLabels> per_label;

    const LabelStats& for_label(PartLabel l) const {
        const auto& s = per_label[static_cast<size_t>(l)];
        require(s.has_value(), std::string("most-frequent stats missing label '") +
                                   to_string(l) + "'");
        return *s;
    }
};

// Nearest canonical axis index by undirected angle; ties to the lower index.
inline int snap_axis(const Vec3& axis, const std::array<Vec3, 3>& axes) {
    const Vec3 a = axis.normalized();
    int best = 0;
    double best_dot = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double d = std::abs(a.dot(axes[static_cast<size_t>(i)]));
        if (d > best_dot + 1e-15) {
            best_dot = d;
            best = i;
        }
    }
    return best;
}

// Nearest of the 19 candidates in ANOCs space; ties to the lower index.
inline int snap_origin(const Vec3& origin_anocs) {
    const auto& cands = CanonicalCandidates::standard();
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 19; ++i) {
        const Vec3 diff = origin_anocs - cands.origins_anocs[static_cast<size_t>(i)];
        const double d2 = diff.dot(diff);
        if (d2 < best_d2 - 1e-15) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

// Counts modal motion type / canonical axis / candidate origin per part
// label over the training objects. Axes snap undirected, origins snap in
// ANOCs space. Labels never seen stay empty.
inline FreqStats mostfreq_fit(const GroundTruth& train) {
    require(!train.objects.empty(), "most-frequent fit: empty training set");
    FreqStats stats;
    for (const auto& obj : train.objects) {
        const auto axes = candidate_axes(obj.obb);
        for (const auto& part : obj.parts) {
            auto& slot = stats.per_label[static_cast<size_t>(part.label)];
            if (!slot) slot = LabelStats{};
            slot->type_counts[static_cast<size_t>(part.motion.type)] += 1;
            slot->axis_counts[static_cast<size_t>(snap_axis(part.motion.axis, axes))] += 1;
            if (part.motion.type == MotionType::revolute) {
                const Vec3 o = to_anocs(*part.motion.origin, obj.obb);
                slot->origin_counts[static_cast<size_t>(snap_origin(o))] += 1;
            }
        }
    }
    return stats;
}

// Most-frequent baseline: each detection keeps its label and receives that
// label's modal motion, scaled by the ground-truth box and expressed in the
// camera frame through the pose.
inline std::vector<Detection> mostfreq(const std::vector<Detection>& detections,
                                       const FreqStats& stats,
                                       const SemanticOBB& obb,
                                       const RigidTransform& pose) {
    const auto axes = candidate_axes(obb);
    const auto origins = candidate_origins(obb);
    std::vector<Detection> out = detections;
    for (Detection& d : out) {
        const LabelStats& ls = stats.for_label(d.label);
        d.motion.type = ls.modal_type();
        const Vec3 axis_obj = axes[static_cast<size_t>(ls.modal_axis())];
        d.motion.axis = transform_direction(pose, axis_obj).normalized();
        const auto origin_idx = ls.modal_origin();
        if (origin_idx)
            d.motion.origin =
                transform_point(pose, origins[static_cast<size_t>(*origin_idx)]);
        else
            d.motion.origin.reset();
        d.frame_tag = FrameTag::camera;
    }
    return out;
}

// FreqStats round-trips through JSON so fitted statistics can be reused
// across runs.
inline ojson freq_stats_to_json(const FreqStats& stats) {
    ojson root;
    for (int l = 0; l < kNumPartLabels; ++l) {
        const auto& slot = stats.per_label[static_cast<size_t>(l)];
        if (!slot) continue;
        ojson j;
        j["type_counts"] = slot->type_counts;
        j["axis_counts"] = slot->axis_counts;
        j["origin_counts"] = slot->origin_counts;
        root[to_string(static_cast<PartLabel>(l))] = j;
    }
    return root;
}

inline FreqStats freq_stats_from_json(const ojson& root) {
    using jsonio::fail;
    if (!root.is_object()) fail("$", "expected an object");
    FreqStats stats;
    for (int l = 0; l < kNumPartLabels; ++l) {
        const char* name = to_string(static_cast<PartLabel>(l));
        const ojson* j = jsonio::opt_field(root, name);
        if (!j) continue;
        LabelStats ls;
        const auto read_counts = [&](const char* key, auto& arr) {
            const ojson& a = jsonio::field(*j, key, name);
            if (!a.is_array() || a.size() != arr.size())
                fail(std::string(name) + "." + key, "wrong count array length");
            for (size_t i = 0; i < arr.size(); ++i) {
                if (!a[i].is_number_integer() || a[i].get<std::int64_t>() < 0)
                    fail(std::string(name) + "." + key,
                         "counts must be non-negative integers");
                arr[i] = a[i].get<std::uint64_t>();
            }
        };
        read_counts("type_counts", ls.type_counts);
        read_counts("axis_counts", ls.axis_counts);
        read_counts("origin_counts", ls.origin_counts);
        stats.per_label[static_cast<size_t>(l)] = ls;
    }
    return stats;
}

}  // namespace openable
