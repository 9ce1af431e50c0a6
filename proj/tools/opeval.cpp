// opeval: evaluation, heuristic baselines, validation, dataset statistics
// and view-schedule generation for openable-part detection datasets.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "openable/baselines.hpp"
#include "openable/data.hpp"
#include "openable/metrics.hpp"
#include "openable/sampler.hpp"

namespace {

using namespace openable;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitSchema = 2;
constexpr int kExitAlignment = 3;
constexpr int kExitUsage = 64;

int log_level() {
    const char* env = std::getenv("OPD_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "quiet") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[opeval] " << msg << "\n";
}

struct EvalArgs {
    std::string gt_path;
    std::string pred_path;
    std::vector<double> ious{0.5};
    double axis_thresh = 10.0;
    double origin_thresh = 0.25;
    int max_det = 100;
    double score_thresh = 0.05;
    double nms_iou = 0.5;
    bool undirected_axes = true;
    std::string errors_mode = "micro";
    std::string out_path;
    std::string format = "json";
    int jobs = 1;
};

int run_eval(const EvalArgs& args) {
    const GroundTruth gt = load_ground_truth(args.gt_path);
    const PredictionSet preds = load_predictions(args.pred_path);
    log_info("loaded " + std::to_string(gt.frames.size()) + " gt frames, " +
             std::to_string(preds.frames.size()) + " prediction frames");

    EvalConfig cfg;
    cfg.iou_thresholds = args.ious;
    cfg.axis_thresh_deg = args.axis_thresh;
    cfg.origin_thresh_frac = args.origin_thresh;
    cfg.max_det = args.max_det;
    cfg.score_thresh = args.score_thresh;
    cfg.nms_iou = args.nms_iou;
    cfg.undirected_axes = args.undirected_axes;
    cfg.jobs = args.jobs;
    cfg.compute_micro_errors =
        args.errors_mode == "micro" || args.errors_mode == "both";
    cfg.compute_sweep_errors =
        args.errors_mode == "sweep" || args.errors_mode == "both";

    const MetricsReport report = evaluate(gt, preds, cfg);
    if (args.out_path.empty()) {
        std::cout << format_report(report, args.format);
    } else {
        write_report(report, args.out_path, args.format);
        log_info("report written to " + args.out_path);
    }
    return kExitOk;
}

struct BaselineArgs {
    std::string mode;
    std::string gt_path;
    std::string detections_path;
    std::string train_stats_path;
    std::string gt_train_path;
    std::uint64_t seed = 17;
    std::string out_path;
};

int run_baseline(const BaselineArgs& args) {
    if (args.mode == "mostfreq" && args.train_stats_path.empty() &&
        args.gt_train_path.empty()) {
        std::cerr << "opeval baseline: --mode mostfreq needs --train-stats or "
                     "--gt-train\n";
        return kExitUsage;
    }

    const GroundTruth gt = load_ground_truth(args.gt_path);
    const PredictionSet dets = load_predictions(args.detections_path);

    FreqStats stats;
    if (args.mode == "mostfreq") {
        if (!args.train_stats_path.empty()) {
            stats = freq_stats_from_json(detail::parse_file(args.train_stats_path));
        } else {
            stats = mostfreq_fit(load_ground_truth(args.gt_train_path));
        }
    }

    std::map<std::string, const FrameGT*> gt_by_id;
    for (const auto& f : gt.frames) gt_by_id[f.frame_id] = &f;

    PredictionSet out;
    for (const auto& frame : dets.frames) {
        const auto it = gt_by_id.find(frame.frame_id);
        if (it == gt_by_id.end())
            throw AlignmentError("detections frame_id '" + frame.frame_id +
                                 "' has no ground-truth frame");
        if (!frame.predicted_extrinsics)
            throw ValidationError("frame '" + frame.frame_id +
                                  "': baselines need predicted_extrinsics");
        const ArticulatedObject& obj = gt.object_for_frame(*it->second);
        PredFrame result = frame;
        if (args.mode == "randmot") {
            result.detections =
                randmot(frame.detections, obj.obb, *frame.predicted_extrinsics,
                        args.seed, frame.frame_id);
        } else {
            result.detections = mostfreq(frame.detections, stats, obj.obb,
                                         *frame.predicted_extrinsics);
        }
        out.frames.push_back(std::move(result));
    }
    save_predictions(out, args.out_path);
    log_info("baseline predictions written to " + args.out_path);
    return kExitOk;
}

struct ValidateArgs {
    std::string gt_path;
    bool apply_frame_filter = false;
    double min_pixel_frac = 0.01;
    double min_visible_frac = 0.20;
};

int run_validate(const ValidateArgs& args) {
    const GroundTruth gt = load_ground_truth(args.gt_path);
    std::cout << "ok: " << gt.objects.size() << " objects, " << gt.frames.size()
              << " frames, 0 violations\n";
    if (args.apply_frame_filter) {
        FrameFilterConfig cfg{args.min_pixel_frac, args.min_visible_frac};
        int failures = 0;
        for (const auto& frame : gt.frames) {
            if (!frame_filter(frame, gt.object_for_frame(frame), cfg)) {
                std::cout << "frame-filter: frame '" << frame.frame_id
                          << "' fails the selection filter\n";
                ++failures;
            }
        }
        std::cout << "frame-filter: " << failures << " of " << gt.frames.size()
                  << " frames fail\n";
    }
    return kExitOk;
}

int run_stats(const std::string& gt_path) {
    const GroundTruth gt = load_ground_truth(gt_path);

    struct CategoryStats {
        std::uint64_t objects = 0;
        std::uint64_t parts = 0;
        std::uint64_t frames = 0;
        std::array<std::uint64_t, kNumPartLabels> by_label{};
        std::array<std::uint64_t, kNumMotionTypes> by_motion{};
    };
    std::map<std::string, CategoryStats> cats;
    CategoryStats total;

    for (const auto& obj : gt.objects) {
        auto& c = cats[obj.category];
        c.objects += 1;
        total.objects += 1;
        for (const auto& p : obj.parts) {
            c.parts += 1;
            total.parts += 1;
            c.by_label[static_cast<size_t>(p.label)] += 1;
            total.by_label[static_cast<size_t>(p.label)] += 1;
            c.by_motion[static_cast<size_t>(p.motion.type)] += 1;
            total.by_motion[static_cast<size_t>(p.motion.type)] += 1;
        }
    }
    for (const auto& frame : gt.frames) {
        cats[gt.object_for_frame(frame).category].frames += 1;
        total.frames += 1;
    }

    const auto stats_json = [](const CategoryStats& c) {
        ojson j;
        j["objects"] = c.objects;
        j["parts"] = c.parts;
        j["frames"] = c.frames;
        ojson by_label;
        for (int l = 0; l < kNumPartLabels; ++l)
            by_label[to_string(static_cast<PartLabel>(l))] =
                c.by_label[static_cast<size_t>(l)];
        j["parts_by_label"] = by_label;
        ojson by_motion;
        for (int m = 0; m < kNumMotionTypes; ++m)
            by_motion[to_string(static_cast<MotionType>(m))] =
                c.by_motion[static_cast<size_t>(m)];
        j["parts_by_motion"] = by_motion;
        return j;
    };

    ojson root;
    ojson jcats = ojson::object();
    for (const auto& [name, c] : cats) jcats[name] = stats_json(c);
    root["categories"] = jcats;
    root["totals"] = stats_json(total);
    std::cout << dump_json(root);
    return kExitOk;
}

struct SampleViewsArgs {
    std::string gt_path;
    std::string object_id;
    std::uint64_t seed = 0;
    std::string out_path;
    int n_random = 3;
    int views_per_state = 5;
    int backgrounds_per_image = 4;
};

int run_sample_views(const SampleViewsArgs& args) {
    const GroundTruth gt = load_ground_truth(args.gt_path);
    const ArticulatedObject* obj = gt.find_object(args.object_id);
    if (!obj)
        throw ValidationError("unknown object_id '" + args.object_id + "'");

    SamplerConfig cfg;
    cfg.views_per_state = args.views_per_state;
    cfg.backgrounds_per_image = args.backgrounds_per_image;
    const auto views = view_schedule(*obj, cfg, args.seed, args.n_random);
    detail::write_text(args.out_path, dump_json(schedule_to_json(views)));
    log_info(std::to_string(views.size()) + " view records written to " +
             args.out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"openable-part detection evaluation toolkit"};
    app.require_subcommand(1);

    EvalArgs eval_args;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval_cmd->add_option("--gt", eval_args.gt_path, "ground-truth file")
        ->required();
    eval_cmd->add_option("--pred", eval_args.pred_path, "prediction file")
        ->required();
    eval_cmd->add_option("--iou", eval_args.ious, "box IoU threshold(s)");
    eval_cmd->add_option("--axis-thresh", eval_args.axis_thresh,
                         "axis error threshold, degrees");
    eval_cmd->add_option("--origin-thresh", eval_args.origin_thresh,
                         "origin threshold, fraction of object diagonal");
    eval_cmd->add_option("--max-det", eval_args.max_det,
                         "max detections per frame");
    eval_cmd->add_option("--score-thresh", eval_args.score_thresh,
                         "confidence threshold");
    eval_cmd->add_option("--nms-iou", eval_args.nms_iou, "NMS IoU threshold");
    eval_cmd->add_flag("--undirected-axes,!--directed-axes",
                       eval_args.undirected_axes,
                       "fold antiparallel axes together (default on)");
    eval_cmd->add_option("--errors", eval_args.errors_mode,
                         "error metrics to compute")
        ->check(CLI::IsMember({"micro", "sweep", "both"}));
    eval_cmd->add_option("--out", eval_args.out_path,
                         "report path (stdout when omitted)");
    eval_cmd->add_option("--format", eval_args.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    eval_cmd->add_option("--jobs", eval_args.jobs, "worker threads")
        ->check(CLI::PositiveNumber);

    BaselineArgs baseline_args;
    CLI::App* baseline_cmd = app.add_subcommand(
        "baseline", "fill detection motions with a heuristic baseline");
    baseline_cmd->add_option("--mode", baseline_args.mode, "baseline")
        ->required()
        ->check(CLI::IsMember({"randmot", "mostfreq"}));
    baseline_cmd->add_option("--gt", baseline_args.gt_path, "ground-truth file")
        ->required();
    baseline_cmd
        ->add_option("--detections", baseline_args.detections_path,
                     "detections with predicted extrinsics")
        ->required();
    baseline_cmd->add_option("--train-stats", baseline_args.train_stats_path,
                             "fitted statistics file (mostfreq)");
    baseline_cmd->add_option("--gt-train", baseline_args.gt_train_path,
                             "training ground truth to fit (mostfreq)");
    baseline_cmd->add_option("--seed", baseline_args.seed, "random seed");
    baseline_cmd->add_option("--out", baseline_args.out_path, "output file")
        ->required();

    ValidateArgs validate_args;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check a ground-truth file");
    validate_cmd->add_option("--gt", validate_args.gt_path, "ground-truth file")
        ->required();
    validate_cmd->add_flag("--frame-filter", validate_args.apply_frame_filter,
                           "also report frames failing the selection filter");
    validate_cmd->add_option("--filter-pixel-frac",
                             validate_args.min_pixel_frac,
                             "min openable-pixel fraction");
    validate_cmd->add_option("--filter-visible-frac",
                             validate_args.min_visible_frac,
                             "min visible-part fraction");

    std::string stats_gt_path;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "dataset statistics by category");
    stats_cmd->add_option("--gt", stats_gt_path, "ground-truth file")->required();

    SampleViewsArgs sample_args;
    CLI::App* sample_cmd = app.add_subcommand(
        "sample-views", "generate a camera/state view schedule for an object");
    sample_cmd->add_option("--gt", sample_args.gt_path, "ground-truth file")
        ->required();
    sample_cmd->add_option("--object", sample_args.object_id, "object id")
        ->required();
    sample_cmd->add_option("--seed", sample_args.seed, "random seed");
    sample_cmd->add_option("--out", sample_args.out_path, "output file")
        ->required();
    sample_cmd->add_option("--n-random", sample_args.n_random,
                           "random states per part");
    sample_cmd->add_option("--views-per-state", sample_args.views_per_state,
                           "cameras per motion state");
    sample_cmd->add_option("--backgrounds", sample_args.backgrounds_per_image,
                           "background draws per view");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(eval_cmd)) return run_eval(eval_args);
        if (app.got_subcommand(baseline_cmd)) return run_baseline(baseline_args);
        if (app.got_subcommand(validate_cmd)) return run_validate(validate_args);
        if (app.got_subcommand(stats_cmd)) return run_stats(stats_gt_path);
        if (app.got_subcommand(sample_cmd)) return run_sample_views(sample_args);
    } catch (const AlignmentError& e) {
        std::cerr << "opeval: " << e.what() << "\n";
        return kExitAlignment;
    } catch (const ValidationError& e) {
        std::cerr << "opeval: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "opeval: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitUsage;
}
