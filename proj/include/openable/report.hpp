#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "openable/artic.hpp"
#include "openable/error.hpp"

namespace openable {

inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// mAP (percent) per match level. NaN marks a value with no supporting
// ground truth; it serializes as null.
struct LevelValues {
    double det = kAbsent;
    double m = kAbsent;
    double ma = kAbsent;
    double mao = kAbsent;
    double state = kAbsent;
};

// Micro-averaged errors over pairs matched at a single IoU with equal
// motion type. Angles in degrees, origin distances as a fraction of the
// object diagonal.
struct MicroErrorStats {
    double axis_deg_all = kAbsent;
    double axis_deg_prismatic = kAbsent;
    double axis_deg_revolute = kAbsent;
    double origin_frac_revolute = kAbsent;
    std::uint64_t matched_all = 0;
    std::uint64_t matched_prismatic = 0;
    std::uint64_t matched_revolute = 0;
};

// Errors averaged over an IoU-threshold sweep, per motion type, then
// macro-averaged across types. Counts are means over the sweep.
struct SweepErrorStats {
    double axis_deg_macro = kAbsent;
    double axis_deg_prismatic = kAbsent;
    double axis_deg_revolute = kAbsent;
    double origin_frac_revolute = kAbsent;
    double matched_prismatic = 0.0;
    double matched_revolute = 0.0;
};

struct MetricsReport {
    LevelValues part_averaged;
    std::array<LevelValues, kNumPartLabels> per_part_category{};  // drawer, door, lid
    LevelValues motion_averaged;
    std::array<LevelValues, kNumMotionTypes> per_motion_type{};  // prismatic, revolute
    std::optional<MicroErrorStats> errors_micro;
    std::optional<SweepErrorStats> errors_sweep;
    std::uint64_t frames_evaluated = 0;
    std::vector<double> iou_thresholds;
    double axis_thresh_deg = 10.0;
    double origin_thresh_frac = 0.25;
};

namespace report_detail {

using ojson = nlohmann::ordered_json;

inline double round_to(double v, double scale) {
    return std::round(v * scale) / scale;
}

// mAP values carry 4 decimals, error values 6; NaN becomes null.
inline ojson map_value(double v) {
    if (std::isnan(v)) return nullptr;
    return round_to(v, 1e4);
}

inline ojson err_value(double v) {
    if (std::isnan(v)) return nullptr;
    return round_to(v, 1e6);
}

inline ojson levels_json(const LevelValues& lv) {
    ojson j;
    j["det"] = map_value(lv.det);
    j["m"] = map_value(lv.m);
    j["ma"] = map_value(lv.ma);
    j["mao"] = map_value(lv.mao);
    j["state"] = map_value(lv.state);
    return j;
}

inline std::string csv_num(const ojson& v) {
    if (v.is_null()) return "";
    return v.dump();
}

}  // namespace report_detail

inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
    using namespace report_detail;
    ojson root;
    ojson cfg;
    cfg["iou_thresholds"] = r.iou_thresholds;
    cfg["axis_thresh_deg"] = r.axis_thresh_deg;
    cfg["origin_thresh_frac"] = r.origin_thresh_frac;
    root["config"] = cfg;
    root["frames_evaluated"] = r.frames_evaluated;
    root["part_averaged"] = levels_json(r.part_averaged);
    ojson per_label;
    for (int i = 0; i < kNumPartLabels; ++i)
        per_label[to_string(static_cast<PartLabel>(i))] =
            levels_json(r.per_part_category[static_cast<size_t>(i)]);
    root["per_part_category"] = per_label;
    root["motion_averaged"] = levels_json(r.motion_averaged);
    ojson per_type;
    for (int i = 0; i < kNumMotionTypes; ++i)
        per_type[to_string(static_cast<MotionType>(i))] =
            levels_json(r.per_motion_type[static_cast<size_t>(i)]);
    root["per_motion_type"] = per_type;
    if (r.errors_micro) {
        const auto& e = *r.errors_micro;
        ojson je;
        je["axis_deg_all"] = err_value(e.axis_deg_all);
        je["axis_deg_prismatic"] = err_value(e.axis_deg_prismatic);
        je["axis_deg_revolute"] = err_value(e.axis_deg_revolute);
        je["origin_frac_revolute"] = err_value(e.origin_frac_revolute);
        je["matched_all"] = e.matched_all;
        je["matched_prismatic"] = e.matched_prismatic;
        je["matched_revolute"] = e.matched_revolute;
        root["errors_micro"] = je;
    }
    if (r.errors_sweep) {
        const auto& e = *r.errors_sweep;
        ojson je;
        je["axis_deg_macro"] = err_value(e.axis_deg_macro);
        je["axis_deg_prismatic"] = err_value(e.axis_deg_prismatic);
        je["axis_deg_revolute"] = err_value(e.axis_deg_revolute);
        je["origin_frac_revolute"] = err_value(e.origin_frac_revolute);
        je["matched_prismatic"] = err_value(e.matched_prismatic);
        je["matched_revolute"] = err_value(e.matched_revolute);
        root["errors_sweep"] = je;
    }
    return root;
}

inline std::string report_to_csv(const MetricsReport& r) {
    using namespace report_detail;
    std::string out = "section,class,metric,value\n";
    const auto level_rows = [&out](const std::string& section,
                                   const std::string& cls,
                                   const LevelValues& lv) {
        const std::array<std::pair<const char*, double>, 5> rows{
            {{"det", lv.det},
             {"m", lv.m},
             {"ma", lv.ma},
             {"mao", lv.mao},
             {"state", lv.state}}};
        for (const auto& [name, v] : rows)
            out += section + "," + cls + "," + name + "," +
                   csv_num(map_value(v)) + "\n";
    };
    level_rows("part_averaged", "mean", r.part_averaged);
    for (int i = 0; i < kNumPartLabels; ++i)
        level_rows("part_averaged", to_string(static_cast<PartLabel>(i)),
                   r.per_part_category[static_cast<size_t>(i)]);
    level_rows("motion_averaged", "mean", r.motion_averaged);
    for (int i = 0; i < kNumMotionTypes; ++i)
        level_rows("motion_averaged", to_string(static_cast<MotionType>(i)),
                   r.per_motion_type[static_cast<size_t>(i)]);
    if (r.errors_micro) {
        const auto& e = *r.errors_micro;
        out += "errors_micro,all,axis_deg," + csv_num(err_value(e.axis_deg_all)) + "\n";
        out += "errors_micro,prismatic,axis_deg," +
               csv_num(err_value(e.axis_deg_prismatic)) + "\n";
        out += "errors_micro,revolute,axis_deg," +
               csv_num(err_value(e.axis_deg_revolute)) + "\n";
        out += "errors_micro,revolute,origin_frac," +
               csv_num(err_value(e.origin_frac_revolute)) + "\n";
        out += "errors_micro,all,matched," + std::to_string(e.matched_all) + "\n";
        out += "errors_micro,prismatic,matched," +
               std::to_string(e.matched_prismatic) + "\n";
        out += "errors_micro,revolute,matched," +
               std::to_string(e.matched_revolute) + "\n";
    }
    if (r.errors_sweep) {
        const auto& e = *r.errors_sweep;
        out += "errors_sweep,macro,axis_deg," + csv_num(err_value(e.axis_deg_macro)) + "\n";
        out += "errors_sweep,prismatic,axis_deg," +
               csv_num(err_value(e.axis_deg_prismatic)) + "\n";
        out += "errors_sweep,revolute,axis_deg," +
               csv_num(err_value(e.axis_deg_revolute)) + "\n";
        out += "errors_sweep,revolute,origin_frac," +
               csv_num(err_value(e.origin_frac_revolute)) + "\n";
        out += "errors_sweep,prismatic,matched," +
               csv_num(err_value(e.matched_prismatic)) + "\n";
        out += "errors_sweep,revolute,matched," +
               csv_num(err_value(e.matched_revolute)) + "\n";
    }
    return out;
}

inline std::string format_report(const MetricsReport& r,
                                 const std::string& format) {
    if (format == "json") return report_to_json(r).dump(2) + "\n";
    if (format == "csv") return report_to_csv(r);
    throw InvalidInputError("unknown report format '" + format + "'");
}

inline void write_report(const MetricsReport& r, const std::string& path,
                         const std::string& format = "json") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << format_report(r, format);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace openable
