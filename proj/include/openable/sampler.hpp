#pragma once

#include <vector>

#include "openable/artic.hpp"
#include "openable/data.hpp"
#include "openable/rng.hpp"

namespace openable {

// One branch of the camera distribution. Angles in degrees, distance in
// meters; each coordinate is a Bates draw with its own order k.
struct ViewCase {
    double probability = 1.0;
    int k_theta = 2;
    double theta_min = 0.0, theta_max = 0.0;
    int k_phi = 2;
    double phi_min = 0.0, phi_max = 0.0;
    int k_d = 2;
    double d_min = 1.0, d_max = 1.0;
};

struct SamplerConfig {
    std::vector<ViewCase> cases = default_cases();
    double vfov_deg = 50.0;
    int width = 256;
    int height = 256;
    int views_per_state = 5;
    int backgrounds_per_image = 4;
    int background_pool = 1000;

    // Mostly above/frontal views, with two lower-probability wider cases.
    static std::vector<ViewCase> default_cases() {
        return {
            {0.6, 2, 30.0, 70.0, 2, -60.0, 60.0, 2, 1.8, 2.8},
            {0.2, 3, -35.0, 35.0, 2, -60.0, 60.0, 2, 1.8, 2.8},
            {0.2, 3, -35.0, 35.0, 3, -90.0, 90.0, 2, 1.6, 3.1},
        };
    }

    void validate() const {
        require(!cases.empty(), "sampler: no view cases");
        double total = 0.0;
        for (const auto& c : cases) {
            require(c.probability >= 0.0, "sampler: negative case probability");
            require(c.k_theta >= 1 && c.k_phi >= 1 && c.k_d >= 1,
                    "sampler: Bates order must be >= 1");
            require(c.theta_min <= c.theta_max && c.phi_min <= c.phi_max &&
                        c.d_min <= c.d_max,
                    "sampler: unordered range");
            require(c.d_min > 0.0, "sampler: non-positive distance");
            total += c.probability;
        }
        require(std::abs(total - 1.0) <= 1e-9,
                "sampler: case probabilities must sum to 1");
        require(vfov_deg > 0.0 && vfov_deg < 180.0, "sampler: vfov out of range");
        require(width > 0 && height > 0, "sampler: non-positive image size");
        require(views_per_state >= 1, "sampler: views_per_state must be >= 1");
        require(backgrounds_per_image >= 0, "sampler: negative background count");
        require(background_pool >= backgrounds_per_image,
                "sampler: background pool smaller than draws per image");
    }
};

// Bates draw: mean of k standard uniforms rescaled to [a, b].
inline double bates(int k, double a, double b, Rng& rng) {
    require(k >= 1, "bates: k must be >= 1");
    require(a <= b, "bates: unordered range");
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += rng.uniform();
    return a + (b - a) / static_cast<double>(k) * sum;
}

struct ViewSample {
    double theta_deg = 0.0;  // elevation
    double phi_deg = 0.0;    // azimuth, 0 = directly in front
    double distance = 0.0;
    int case_index = 0;
};

inline ViewSample sample_view(const SamplerConfig& cfg, Rng& rng) {
    cfg.validate();
    const double u = rng.uniform();
    size_t pick = cfg.cases.size() - 1;
    double cum = 0.0;
    for (size_t i = 0; i < cfg.cases.size(); ++i) {
        cum += cfg.cases[i].probability;
        if (u < cum) {
            pick = i;
            break;
        }
    }
    const ViewCase& c = cfg.cases[pick];
    ViewSample v;
    v.case_index = static_cast<int>(pick);
    v.theta_deg = bates(c.k_theta, c.theta_min, c.theta_max, rng);
    v.phi_deg = bates(c.k_phi, c.phi_min, c.phi_max, rng);
    v.distance = bates(c.k_d, c.d_min, c.d_max, rng);
    return v;
}

// Zero-roll look-at pose for an eye on the sphere around `target` in the
// canonical frame (x front, z up): elevation theta from the horizontal
// plane, azimuth phi from the front direction. Returns the world-to-camera
// transform with the camera looking down +z, x right, y down.
inline RigidTransform camera_from_view(double theta_deg, double phi_deg,
                                       double distance, const Vec3& target) {
    require(distance > 0.0, "camera_from_view: non-positive distance");
    const double th = deg_to_rad(theta_deg);
    const double ph = deg_to_rad(phi_deg);
    const Vec3 offset{distance * std::cos(th) * std::cos(ph),
                      distance * std::cos(th) * std::sin(ph),
                      distance * std::sin(th)};
    const Vec3 eye = target + offset;

    const Vec3 forward_raw = target - eye;
    require(forward_raw.norm() > 0.0, "camera_from_view: eye equals target");
    const Vec3 forward = forward_raw.normalized();
    Vec3 up{0, 0, 1};
    if (forward.cross(up).norm() <= 1e-9) up = Vec3{1, 0, 0};
    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right).normalized();

    const RotMat r = RotMat::from_rows(right, down, forward);
    return {r, r.apply(eye) * -1.0};
}

inline CameraIntrinsics intrinsics_from_fov(double vfov_deg, int width,
                                            int height) {
    require(vfov_deg > 0.0 && vfov_deg < 180.0, "intrinsics: vfov out of range");
    require(width > 0 && height > 0, "intrinsics: non-positive image size");
    CameraIntrinsics k;
    k.width = width;
    k.height = height;
    k.fy = (static_cast<double>(height) / 2.0) /
           std::tan(deg_to_rad(vfov_deg) / 2.0);
    k.fx = k.fy;
    k.cx = static_cast<double>(width) / 2.0;
    k.cy = static_cast<double>(height) / 2.0;
    return k;
}

// One schedule record: a motion state, an object-to-camera pose, shared
// intrinsics, and the background draws for each rendered composite. A view
// stands for 1 + backgrounds_per_image image records (the raw render plus
// one composite per background).
struct ScheduleView {
    MotionState state;
    RigidTransform extrinsics;
    CameraIntrinsics intrinsics;
    std::vector<int> background_indices;

    size_t image_records() const { return 1 + background_indices.size(); }
};

// View schedule for one object: (1 + 4 * num_parts) motion states (with
// n_random = 3), views_per_state cameras each, and backgrounds_per_image
// distinct background indices per view. Per-view RNG streams derive from
// (seed, state index, view index), so generation order does not matter.
inline std::vector<ScheduleView> view_schedule(const ArticulatedObject& obj,
                                               const SamplerConfig& cfg,
                                               std::uint64_t seed,
                                               int n_random = 3) {
    cfg.validate();
    const auto states = motion_state_schedule(obj, n_random, Rng::mix(seed, 1));
    const CameraIntrinsics intr =
        intrinsics_from_fov(cfg.vfov_deg, cfg.width, cfg.height);

    // camera_from_view works in the canonical frame; compose with the
    // object-to-canonical transform so extrinsics map object coordinates.
    const RotMat obb_rot_t = obj.obb.rotation().transposed();
    const RigidTransform obj_to_canon{obb_rot_t,
                                      obb_rot_t.apply(obj.obb.center) * -1.0};

    std::vector<ScheduleView> views;
    for (size_t s = 0; s < states.size(); ++s) {
        for (int v = 0; v < cfg.views_per_state; ++v) {
            Rng rng(Rng::mix(Rng::mix(seed, s + 2),
                             static_cast<std::uint64_t>(v)));
            const ViewSample sample = sample_view(cfg, rng);
            ScheduleView record;
            record.state = states[s];
            record.extrinsics =
                compose(camera_from_view(sample.theta_deg, sample.phi_deg,
                                         sample.distance, Vec3{0, 0, 0}),
                        obj_to_canon);
            record.intrinsics = intr;
            while (static_cast<int>(record.background_indices.size()) <
                   cfg.backgrounds_per_image) {
                const int b = rng.uniform_int(cfg.background_pool);
                bool dup = false;
                for (int seen : record.background_indices)
                    if (seen == b) dup = true;
                if (!dup) record.background_indices.push_back(b);
            }
            views.push_back(std::move(record));
        }
    }
    return views;
}

inline ojson schedule_to_json(const std::vector<ScheduleView>& views) {
    using namespace jsonio;
    ojson root;
    size_t records = 0;
    for (const auto& v : views) records += v.image_records();
    ojson summary;
    summary["num_views"] = views.size();
    summary["num_image_records"] = records;
    root["summary"] = summary;
    root["views"] = ojson::array();
    for (const auto& v : views) {
        ojson jv;
        ojson js = ojson::object();
        for (const auto& [part_id, value] : v.state) js[part_id] = value;
        jv["state"] = js;
        jv["extrinsics"] = transform_json(v.extrinsics);
        ojson ji;
        ji["fx"] = v.intrinsics.fx;
        ji["fy"] = v.intrinsics.fy;
        ji["cx"] = v.intrinsics.cx;
        ji["cy"] = v.intrinsics.cy;
        ji["width"] = v.intrinsics.width;
        ji["height"] = v.intrinsics.height;
        jv["intrinsics"] = ji;
        jv["background_indices"] = v.background_indices;
        root["views"].push_back(jv);
    }
    return root;
}

}  // namespace openable
