#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "openable/artic.hpp"
#include "openable/match.hpp"

namespace openable {

using ojson = nlohmann::ordered_json;

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const {
        require(width > 0 && height > 0, "intrinsics: non-positive image size");
        require(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0,
                "intrinsics: non-positive focal length");
        require(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height,
                "intrinsics: principal point outside image");
    }
};

struct PartState {
    bool open = false;
    double value = 0.0;
};

struct PartAnnotation2D {
    std::string part_id;
    PartLabel label = PartLabel::drawer;
    BoxXYWH bbox{0, 0, 0, 0};
    MaskRLE mask;
    MotionSpec motion_camera;  // camera frame
    PartState state;
};

struct FrameGT {
    std::string frame_id;
    std::string object_id;
    CameraIntrinsics intrinsics;
    RigidTransform extrinsics;  // object -> camera
    std::vector<PartAnnotation2D> annotations;
    double object_diagonal = 0.0;  // derived from the referenced object
};

enum class FrameTag { camera, object };

struct DetectionMotion {
    MotionType type = MotionType::prismatic;
    Vec3 axis{1, 0, 0};
    std::optional<Vec3> origin;
};

struct Detection {
    PartLabel label = PartLabel::drawer;
    double score = 0.0;
    BoxXYWH bbox{0, 0, 0, 0};
    std::optional<MaskRLE> mask;
    DetectionMotion motion;
    FrameTag frame_tag = FrameTag::camera;
    std::optional<double> state_open_prob;
};

struct PredFrame {
    std::string frame_id;
    std::optional<RigidTransform> predicted_extrinsics;
    std::vector<Detection> detections;
};

struct GroundTruth {
    std::vector<ArticulatedObject> objects;
    std::vector<FrameGT> frames;

    const ArticulatedObject* find_object(const std::string& object_id) const {
        for (const auto& o : objects)
            if (o.object_id == object_id) return &o;
        return nullptr;
    }

    const ArticulatedObject& object_for_frame(const FrameGT& f) const {
        const ArticulatedObject* o = find_object(f.object_id);
        require(o != nullptr, "frame '" + f.frame_id +
                                  "': dangling object_id '" + f.object_id + "'");
        return *o;
    }
};

struct PredictionSet {
    std::vector<PredFrame> frames;
};

// ---------------------------------------------------------------------------
// JSON parsing with field-path error messages.

namespace jsonio {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw ValidationError(path + ": " + msg);
}

inline const ojson& field(const ojson& j, const char* key,
                          const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, "missing field '" + std::string(key) + "'");
    return *it;
}

inline const ojson* opt_field(const ojson& j, const char* key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return nullptr;
    return &*it;
}

inline double as_num(const ojson& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "non-finite number");
    return v;
}

inline int as_int(const ojson& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

inline bool as_bool(const ojson& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

inline std::string as_str(const ojson& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline Vec3 as_vec3(const ojson& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
    return {as_num(j[0], path), as_num(j[1], path), as_num(j[2], path)};
}

inline BoxXYWH as_box(const ojson& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) fail(path, "expected [x, y, w, h]");
    BoxXYWH b{as_num(j[0], path), as_num(j[1], path), as_num(j[2], path),
              as_num(j[3], path)};
    if (b[2] < 0.0 || b[3] < 0.0) fail(path, "negative box width/height");
    return b;
}

inline PartLabel as_label(const ojson& j, const std::string& path) {
    const std::string s = as_str(j, path);
    if (s == "drawer") return PartLabel::drawer;
    if (s == "door") return PartLabel::door;
    if (s == "lid") return PartLabel::lid;
    fail(path, "unknown part label '" + s + "'");
}

inline MotionType as_motion_type(const ojson& j, const std::string& path) {
    const std::string s = as_str(j, path);
    if (s == "prismatic") return MotionType::prismatic;
    if (s == "revolute") return MotionType::revolute;
    fail(path, "unknown motion type '" + s + "'");
}

inline RigidTransform as_transform(const ojson& j, const std::string& path) {
    const ojson& rot = field(j, "rotation", path);
    if (!rot.is_array() || rot.size() != 9)
        fail(path + ".rotation", "expected 9 numbers");
    std::array<double, 9> m{};
    for (size_t i = 0; i < 9; ++i) m[i] = as_num(rot[i], path + ".rotation");
    RigidTransform t;
    try {
        t.rotation = RotMat::from_array(m);
    } catch (const Error& e) {
        fail(path + ".rotation", e.what());
    }
    t.translation = as_vec3(field(j, "translation", path), path + ".translation");
    return t;
}

inline MaskRLE as_mask(const ojson& j, const std::string& path) {
    MaskRLE m;
    const ojson& size = field(j, "size", path);
    if (!size.is_array() || size.size() != 2)
        fail(path + ".size", "expected [height, width]");
    m.height = as_int(size[0], path + ".size");
    m.width = as_int(size[1], path + ".size");
    const ojson& counts = field(j, "counts", path);
    if (!counts.is_array()) fail(path + ".counts", "expected an array");
    for (size_t i = 0; i < counts.size(); ++i) {
        const std::string p = path + ".counts";
        if (!counts[i].is_number_integer() || counts[i].get<std::int64_t>() < 0)
            fail(p, "runs must be non-negative integers");
        m.counts.push_back(counts[i].get<std::uint64_t>());
    }
    try {
        m.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return m;
}

// angle_unit applies to the range (and motion state values) of revolute
// joints; radians is canonical.
inline double angle_scale(const ojson& j, const std::string& path) {
    const ojson* unit = opt_field(j, "angle_unit");
    if (!unit) return 1.0;
    const std::string s = as_str(*unit, path + ".angle_unit");
    if (s == "radians") return 1.0;
    if (s == "degrees") return kPi / 180.0;
    fail(path + ".angle_unit", "expected 'radians' or 'degrees'");
}

inline MotionSpec as_motion_spec(const ojson& j, const std::string& path) {
    MotionSpec m;
    m.type = as_motion_type(field(j, "type", path), path + ".type");
    m.axis = as_vec3(field(j, "axis", path), path + ".axis");
    if (const ojson* o = opt_field(j, "origin"))
        m.origin = as_vec3(*o, path + ".origin");
    const double scale =
        m.type == MotionType::revolute ? angle_scale(j, path) : 1.0;
    if (const ojson* r = opt_field(j, "range")) {
        if (!r->is_array() || r->size() != 2)
            fail(path + ".range", "expected [min, max]");
        m.range.min = as_num((*r)[0], path + ".range") * scale;
        m.range.max = as_num((*r)[1], path + ".range") * scale;
    }
    try {
        m.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return m;
}

inline ojson vec3_json(const Vec3& v) { return ojson::array({v.x, v.y, v.z}); }

inline ojson box_json(const BoxXYWH& b) {
    return ojson::array({b[0], b[1], b[2], b[3]});
}

inline ojson transform_json(const RigidTransform& t) {
    ojson j;
    j["rotation"] = t.rotation.m;
    j["translation"] = vec3_json(t.translation);
    return j;
}

inline ojson mask_json(const MaskRLE& m) {
    ojson j;
    j["size"] = ojson::array({m.height, m.width});
    j["counts"] = m.counts;
    return j;
}

inline ojson motion_spec_json(const MotionSpec& m) {
    ojson j;
    j["type"] = to_string(m.type);
    j["axis"] = vec3_json(m.axis);
    if (m.origin) j["origin"] = vec3_json(*m.origin);
    j["range"] = ojson::array({m.range.min, m.range.max});
    j["angle_unit"] = "radians";
    return j;
}

}  // namespace jsonio

// ---------------------------------------------------------------------------
// Ground-truth files.

inline GroundTruth ground_truth_from_json(const ojson& root) {
    using namespace jsonio;
    GroundTruth gt;

    const ojson& objects = field(root, "objects", "$");
    if (!objects.is_array()) fail("$.objects", "expected an array");
    std::set<std::string> object_ids;
    for (size_t i = 0; i < objects.size(); ++i) {
        const std::string path = "objects[" + std::to_string(i) + "]";
        const ojson& jo = objects[i];
        ArticulatedObject obj;
        obj.object_id = as_str(field(jo, "object_id", path), path + ".object_id");
        obj.category = as_str(field(jo, "category", path), path + ".category");
        const ojson& jobb = field(jo, "obb", path);
        obj.obb.center = as_vec3(field(jobb, "center", path), path + ".obb.center");
        obj.obb.up = as_vec3(field(jobb, "up", path), path + ".obb.up");
        obj.obb.front = as_vec3(field(jobb, "front", path), path + ".obb.front");
        obj.obb.half_extents = as_vec3(field(jobb, "half_extents", path),
                                       path + ".obb.half_extents");
        const ojson& jparts = field(jo, "parts", path);
        if (!jparts.is_array()) fail(path + ".parts", "expected an array");
        for (size_t k = 0; k < jparts.size(); ++k) {
            const std::string ppath = path + ".parts[" + std::to_string(k) + "]";
            const ojson& jp = jparts[k];
            OpenablePart part;
            part.part_id = as_str(field(jp, "part_id", ppath), ppath + ".part_id");
            part.label = as_label(field(jp, "label", ppath), ppath + ".label");
            part.motion =
                as_motion_spec(field(jp, "motion", ppath), ppath + ".motion");
            obj.parts.push_back(std::move(part));
        }
        try {
            obj.validate();
        } catch (const Error& e) {
            fail(path, e.what());
        }
        if (!object_ids.insert(obj.object_id).second)
            fail(path, "duplicate object_id '" + obj.object_id + "'");
        gt.objects.push_back(std::move(obj));
    }

    const ojson& frames = field(root, "frames", "$");
    if (!frames.is_array()) fail("$.frames", "expected an array");
    std::set<std::string> frame_ids;
    for (size_t i = 0; i < frames.size(); ++i) {
        const std::string path = "frames[" + std::to_string(i) + "]";
        const ojson& jf = frames[i];
        FrameGT frame;
        frame.frame_id = as_str(field(jf, "frame_id", path), path + ".frame_id");
        if (!frame_ids.insert(frame.frame_id).second)
            fail(path, "duplicate frame_id '" + frame.frame_id + "'");
        frame.object_id = as_str(field(jf, "object_id", path), path + ".object_id");
        const ArticulatedObject* obj = gt.find_object(frame.object_id);
        if (!obj) fail(path, "dangling object_id '" + frame.object_id + "'");

        const ojson& ji = field(jf, "intrinsics", path);
        frame.intrinsics.fx = as_num(field(ji, "fx", path), path + ".intrinsics.fx");
        frame.intrinsics.fy = as_num(field(ji, "fy", path), path + ".intrinsics.fy");
        frame.intrinsics.cx = as_num(field(ji, "cx", path), path + ".intrinsics.cx");
        frame.intrinsics.cy = as_num(field(ji, "cy", path), path + ".intrinsics.cy");
        frame.intrinsics.width =
            as_int(field(ji, "width", path), path + ".intrinsics.width");
        frame.intrinsics.height =
            as_int(field(ji, "height", path), path + ".intrinsics.height");
        try {
            frame.intrinsics.validate();
        } catch (const Error& e) {
            fail(path + ".intrinsics", e.what());
        }

        frame.extrinsics =
            as_transform(field(jf, "extrinsics", path), path + ".extrinsics");

        const ojson& janns = field(jf, "annotations", path);
        if (!janns.is_array()) fail(path + ".annotations", "expected an array");
        for (size_t k = 0; k < janns.size(); ++k) {
            const std::string apath =
                path + ".annotations[" + std::to_string(k) + "]";
            const ojson& ja = janns[k];
            PartAnnotation2D ann;
            ann.part_id = as_str(field(ja, "part_id", apath), apath + ".part_id");
            if (!obj->find_part(ann.part_id))
                fail(apath, "dangling part_id '" + ann.part_id + "'");
            ann.label = as_label(field(ja, "label", apath), apath + ".label");
            ann.bbox = as_box(field(ja, "bbox", apath), apath + ".bbox");
            // Clamp to the image; annotations may extend past borders.
            const double w = frame.intrinsics.width;
            const double h = frame.intrinsics.height;
            ann.bbox[0] = std::clamp(ann.bbox[0], 0.0, w);
            ann.bbox[1] = std::clamp(ann.bbox[1], 0.0, h);
            ann.bbox[2] = std::clamp(ann.bbox[2], 0.0, w - ann.bbox[0]);
            ann.bbox[3] = std::clamp(ann.bbox[3], 0.0, h - ann.bbox[1]);
            ann.mask = as_mask(field(ja, "mask", apath), apath + ".mask");
            if (ann.mask.height != frame.intrinsics.height ||
                ann.mask.width != frame.intrinsics.width)
                fail(apath + ".mask", "mask size differs from image size");
            ann.motion_camera = as_motion_spec(field(ja, "motion_camera", apath),
                                               apath + ".motion_camera");
            const ojson& js = field(ja, "state", apath);
            ann.state.open =
                as_bool(field(js, "open", apath), apath + ".state.open");
            ann.state.value =
                as_num(field(js, "value", apath), apath + ".state.value");
            if (ann.motion_camera.type == MotionType::revolute)
                ann.state.value *= jsonio::angle_scale(
                    field(ja, "motion_camera", apath), apath + ".motion_camera");
            frame.annotations.push_back(std::move(ann));
        }
        frame.object_diagonal = object_diagonal(obj->obb);
        gt.frames.push_back(std::move(frame));
    }
    return gt;
}

inline ojson ground_truth_to_json(const GroundTruth& gt) {
    using namespace jsonio;
    ojson root;
    root["objects"] = ojson::array();
    for (const auto& obj : gt.objects) {
        ojson jo;
        jo["object_id"] = obj.object_id;
        jo["category"] = obj.category;
        ojson jobb;
        jobb["center"] = vec3_json(obj.obb.center);
        jobb["up"] = vec3_json(obj.obb.up);
        jobb["front"] = vec3_json(obj.obb.front);
        jobb["half_extents"] = vec3_json(obj.obb.half_extents);
        jo["obb"] = jobb;
        jo["parts"] = ojson::array();
        for (const auto& p : obj.parts) {
            ojson jp;
            jp["part_id"] = p.part_id;
            jp["label"] = to_string(p.label);
            jp["motion"] = motion_spec_json(p.motion);
            jo["parts"].push_back(jp);
        }
        root["objects"].push_back(jo);
    }
    root["frames"] = ojson::array();
    for (const auto& f : gt.frames) {
        ojson jf;
        jf["frame_id"] = f.frame_id;
        jf["object_id"] = f.object_id;
        ojson ji;
        ji["fx"] = f.intrinsics.fx;
        ji["fy"] = f.intrinsics.fy;
        ji["cx"] = f.intrinsics.cx;
        ji["cy"] = f.intrinsics.cy;
        ji["width"] = f.intrinsics.width;
        ji["height"] = f.intrinsics.height;
        jf["intrinsics"] = ji;
        jf["extrinsics"] = transform_json(f.extrinsics);
        jf["annotations"] = ojson::array();
        for (const auto& a : f.annotations) {
            ojson ja;
            ja["part_id"] = a.part_id;
            ja["label"] = to_string(a.label);
            ja["bbox"] = box_json(a.bbox);
            ja["mask"] = mask_json(a.mask);
            ja["motion_camera"] = motion_spec_json(a.motion_camera);
            ojson js;
            js["open"] = a.state.open;
            js["value"] = a.state.value;
            ja["state"] = js;
            jf["annotations"].push_back(ja);
        }
        root["frames"].push_back(jf);
    }
    return root;
}

// ---------------------------------------------------------------------------
// Prediction files.

inline PredictionSet predictions_from_json(const ojson& root) {
    using namespace jsonio;
    PredictionSet preds;
    const ojson& frames = field(root, "frames", "$");
    if (!frames.is_array()) fail("$.frames", "expected an array");
    std::set<std::string> frame_ids;
    for (size_t i = 0; i < frames.size(); ++i) {
        const std::string path = "frames[" + std::to_string(i) + "]";
        const ojson& jf = frames[i];
        PredFrame frame;
        frame.frame_id = as_str(field(jf, "frame_id", path), path + ".frame_id");
        if (!frame_ids.insert(frame.frame_id).second)
            fail(path, "duplicate frame_id '" + frame.frame_id + "'");
        if (const ojson* je = opt_field(jf, "predicted_extrinsics"))
            frame.predicted_extrinsics =
                as_transform(*je, path + ".predicted_extrinsics");

        const ojson& jdets = field(jf, "detections", path);
        if (!jdets.is_array()) fail(path + ".detections", "expected an array");
        for (size_t k = 0; k < jdets.size(); ++k) {
            const std::string dpath =
                path + ".detections[" + std::to_string(k) + "]";
            const ojson& jd = jdets[k];
            Detection det;
            det.label = as_label(field(jd, "label", dpath), dpath + ".label");
            det.score = as_num(field(jd, "score", dpath), dpath + ".score");
            if (det.score < 0.0 || det.score > 1.0)
                fail(dpath + ".score", "score outside [0, 1]");
            det.bbox = as_box(field(jd, "bbox", dpath), dpath + ".bbox");
            if (const ojson* jm = opt_field(jd, "mask"))
                det.mask = as_mask(*jm, dpath + ".mask");
            const ojson& jmo = field(jd, "motion", dpath);
            det.motion.type = as_motion_type(field(jmo, "type", dpath),
                                             dpath + ".motion.type");
            det.motion.axis =
                as_vec3(field(jmo, "axis", dpath), dpath + ".motion.axis");
            if (det.motion.axis.norm() <= 0.0)
                fail(dpath + ".motion.axis", "zero-length axis");
            if (const ojson* jo = opt_field(jmo, "origin"))
                det.motion.origin = as_vec3(*jo, dpath + ".motion.origin");
            const std::string tag =
                as_str(field(jd, "frame_tag", dpath), dpath + ".frame_tag");
            if (tag == "camera") {
                det.frame_tag = FrameTag::camera;
            } else if (tag == "object") {
                det.frame_tag = FrameTag::object;
                if (!frame.predicted_extrinsics)
                    fail(dpath,
                         "object-frame detection without predicted_extrinsics");
            } else {
                fail(dpath + ".frame_tag", "expected 'camera' or 'object'");
            }
            if (const ojson* jp = opt_field(jd, "state_open_prob")) {
                det.state_open_prob = as_num(*jp, dpath + ".state_open_prob");
                if (*det.state_open_prob < 0.0 || *det.state_open_prob > 1.0)
                    fail(dpath + ".state_open_prob", "outside [0, 1]");
            }
            frame.detections.push_back(std::move(det));
        }
        preds.frames.push_back(std::move(frame));
    }
    return preds;
}

inline ojson predictions_to_json(const PredictionSet& preds) {
    using namespace jsonio;
    ojson root;
    root["frames"] = ojson::array();
    for (const auto& f : preds.frames) {
        ojson jf;
        jf["frame_id"] = f.frame_id;
        if (f.predicted_extrinsics)
            jf["predicted_extrinsics"] = transform_json(*f.predicted_extrinsics);
        jf["detections"] = ojson::array();
        for (const auto& d : f.detections) {
            ojson jd;
            jd["label"] = to_string(d.label);
            jd["score"] = d.score;
            jd["bbox"] = box_json(d.bbox);
            if (d.mask) jd["mask"] = mask_json(*d.mask);
            ojson jm;
            jm["type"] = to_string(d.motion.type);
            jm["axis"] = vec3_json(d.motion.axis);
            if (d.motion.origin) jm["origin"] = vec3_json(*d.motion.origin);
            jd["motion"] = jm;
            jd["frame_tag"] = d.frame_tag == FrameTag::camera ? "camera" : "object";
            if (d.state_open_prob) jd["state_open_prob"] = *d.state_open_prob;
            jf["detections"].push_back(jd);
        }
        root["frames"].push_back(jf);
    }
    return root;
}

// ---------------------------------------------------------------------------
// File helpers.

namespace detail {

inline ojson parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    try {
        return ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

}  // namespace detail

inline std::string dump_json(const ojson& j) { return j.dump(2) + "\n"; }

inline GroundTruth load_ground_truth(const std::string& path) {
    return ground_truth_from_json(detail::parse_file(path));
}

inline PredictionSet load_predictions(const std::string& path) {
    return predictions_from_json(detail::parse_file(path));
}

inline void save_ground_truth(const GroundTruth& gt, const std::string& path) {
    detail::write_text(path, dump_json(ground_truth_to_json(gt)));
}

inline void save_predictions(const PredictionSet& preds,
                             const std::string& path) {
    detail::write_text(path, dump_json(predictions_to_json(preds)));
}

// ---------------------------------------------------------------------------
// Frame selection filter: keep a frame when at least min_openable_pixel_frac
// of its pixels belong to openable parts and at least min_visible_part_frac
// of the object's parts show at least one mask pixel. Both bounds inclusive.

struct FrameFilterConfig {
    double min_openable_pixel_frac = 0.01;
    double min_visible_part_frac = 0.20;
};

inline bool frame_filter(const FrameGT& frame, const ArticulatedObject& obj,
                         const FrameFilterConfig& cfg = {}) {
    const std::uint64_t total = static_cast<std::uint64_t>(
                                    frame.intrinsics.width) *
                                static_cast<std::uint64_t>(frame.intrinsics.height);
    Bitmask covered =
        Bitmask::zeros(frame.intrinsics.height, frame.intrinsics.width);
    std::set<std::string> visible;
    for (const auto& ann : frame.annotations) {
        if (ann.mask.area() > 0) visible.insert(ann.part_id);
        const Bitmask m = rle_decode(ann.mask);
        for (size_t i = 0; i < covered.data.size(); ++i)
            covered.data[i] |= m.data[i];
    }
    std::uint64_t openable = 0;
    for (std::uint8_t v : covered.data) openable += v;

    const double pixel_frac =
        total > 0 ? static_cast<double>(openable) / static_cast<double>(total)
                  : 0.0;
    const double part_frac =
        obj.parts.empty()
            ? 0.0
            : static_cast<double>(visible.size()) /
                  static_cast<double>(obj.parts.size());
    return pixel_frac >= cfg.min_openable_pixel_frac &&
           part_frac >= cfg.min_visible_part_frac;
}

}  // namespace openable
