#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "openable/geom.hpp"
#include "openable/rng.hpp"

namespace openable {

enum class MotionType { prismatic, revolute };
enum class PartLabel { drawer, door, lid };

inline const char* to_string(MotionType t) {
    return t == MotionType::prismatic ? "prismatic" : "revolute";
}

inline const char* to_string(PartLabel l) {
    switch (l) {
        case PartLabel::drawer: return "drawer";
        case PartLabel::door: return "door";
        default: return "lid";
    }
}

inline constexpr int kNumPartLabels = 3;
inline constexpr int kNumMotionTypes = 2;

struct MotionRange {
    double min = 0.0;
    double max = 0.0;
};

// A single-joint motion: unit axis direction, and for revolute joints a
// point on the rotation axis. Revolute values and ranges are radians,
// prismatic ones meters.
struct MotionSpec {
    MotionType type = MotionType::prismatic;
    Vec3 axis{1, 0, 0};
    std::optional<Vec3> origin;
    MotionRange range;

    void validate() const {
        require(axis.is_finite(), "motion: non-finite axis");
        require(std::abs(axis.norm() - 1.0) <= kGeomTol,
                "motion: axis is not unit length");
        if (type == MotionType::revolute)
            require(origin.has_value(), "invalid motion: revolute without origin");
        if (origin) require(origin->is_finite(), "motion: non-finite origin");
        require(std::isfinite(range.min) && std::isfinite(range.max) &&
                    range.min <= range.max,
                "motion: invalid range");
    }
};

struct OpenablePart {
    std::string part_id;
    PartLabel label = PartLabel::drawer;
    MotionSpec motion;  // in object coordinates
};

struct ArticulatedObject {
    std::string object_id;
    std::string category;
    SemanticOBB obb;
    std::vector<OpenablePart> parts;

    void validate() const {
        require(!object_id.empty(), "object: empty object_id");
        obb.validate();
        std::set<std::string> seen;
        for (const auto& p : parts) {
            require(!p.part_id.empty(), "part: empty part_id");
            require(seen.insert(p.part_id).second,
                    "object '" + object_id + "': duplicate part_id '" +
                        p.part_id + "'");
            p.motion.validate();
        }
    }

    const OpenablePart* find_part(const std::string& part_id) const {
        for (const auto& p : parts)
            if (p.part_id == part_id) return &p;
        return nullptr;
    }
};

// Rigid transform realizing a motion value: translation along the axis for
// prismatic joints, Rodrigues rotation about the axis line for revolute.
inline RigidTransform apply_motion(const MotionSpec& motion, double value) {
    require(std::isfinite(value), "apply_motion: non-finite value");
    motion.validate();
    if (motion.type == MotionType::prismatic) {
        return {RotMat::identity(), motion.axis.normalized() * value};
    }
    const RotMat r = rotation_about_axis(motion.axis, value);
    const Vec3 o = *motion.origin;
    return {r, o - r.apply(o)};
}

// Re-expresses a motion in another frame: the axis moves as a direction,
// the origin as a point. Type and range are frame-independent.
inline MotionSpec motion_to_frame(const MotionSpec& motion,
                                  const RigidTransform& t) {
    MotionSpec out = motion;
    out.axis = transform_direction(t, motion.axis).normalized();
    if (motion.origin) out.origin = transform_point(t, *motion.origin);
    return out;
}

// Full corner-to-corner diagonal of the box.
inline double object_diagonal(const SemanticOBB& obb) {
    obb.validate();
    return 2.0 * obb.half_extents.norm();
}

using MotionState = std::map<std::string, double>;

// State schedule used for view generation: one all-closed state, then for
// each part `n_random` uniform draws inside its range plus the range max,
// with every other part held at its minimum. Yields
// 1 + (n_random + 1) * num_parts states.
inline std::vector<MotionState> motion_state_schedule(
    const ArticulatedObject& obj, int n_random, std::uint64_t seed) {
    obj.validate();
    require(n_random >= 0, "schedule: n_random must be >= 0");

    MotionState closed;
    for (const auto& p : obj.parts) closed[p.part_id] = p.motion.range.min;

    std::vector<MotionState> states;
    states.push_back(closed);

    Rng rng(Rng::mix(seed));
    for (const auto& p : obj.parts) {
        const double lo = p.motion.range.min;
        const double hi = p.motion.range.max;
        for (int i = 0; i < n_random; ++i) {
            double u = rng.uniform();
            if (u == 0.0) u = 0.5;  // keep draws inside the open interval
            MotionState s = closed;
            s[p.part_id] = lo + (hi - lo) * u;
            states.push_back(s);
        }
        MotionState s = closed;
        s[p.part_id] = hi;
        states.push_back(s);
    }
    return states;
}

}  // namespace openable
