#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "openable/data.hpp"
#include "support/fixtures.hpp"

using namespace openable;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path dir;
    TempDir() {
        static int counter = 0;
        dir = std::filesystem::temp_directory_path() /
              ("openable-test-" + std::to_string(::getpid()) + "-" +
               std::to_string(counter++));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("rle encode/decode basics") {
    Bitmask zeros = Bitmask::zeros(4, 4);
    const MaskRLE all_zero = rle_encode(zeros);
    REQUIRE(all_zero.counts.size() == 1);
    CHECK(all_zero.counts[0] == 16);
    CHECK(all_zero.area() == 0);

    Bitmask ones = Bitmask::zeros(4, 4);
    for (auto& v : ones.data) v = 1;
    const MaskRLE all_one = rle_encode(ones);
    REQUIRE(all_one.counts.size() == 2);
    CHECK(all_one.counts[0] == 0);
    CHECK(all_one.counts[1] == 16);
    CHECK(all_one.area() == 16);

    MaskRLE bad;
    bad.height = 4;
    bad.width = 4;
    bad.counts = {10};
    CHECK_THROWS_AS(rle_decode(bad), InvalidInputError);
}

TEST_CASE("rle round trip on random masks") {
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const int h = 1 + rng.uniform_int(24);
        const int w = 1 + rng.uniform_int(24);
        Bitmask m = Bitmask::zeros(h, w);
        const double density = rng.uniform();
        for (auto& v : m.data) v = rng.uniform() < density ? 1 : 0;
        const Bitmask round = rle_decode(rle_encode(m));
        REQUIRE(round.data.size() == m.data.size());
        CHECK(round.data == m.data);
    }
}

TEST_CASE("ground truth load/save round trip is a fixed point") {
    const GroundTruth gt = fixtures::make_ground_truth(5);
    TempDir tmp;

    save_ground_truth(gt, tmp.path("gt.json"));
    const std::string first = slurp(tmp.path("gt.json"));

    const GroundTruth loaded = load_ground_truth(tmp.path("gt.json"));
    CHECK(loaded.objects.size() == gt.objects.size());
    CHECK(loaded.frames.size() == gt.frames.size());
    CHECK(loaded.frames[0].object_diagonal ==
          doctest::Approx(gt.frames[0].object_diagonal));

    save_ground_truth(loaded, tmp.path("gt2.json"));
    CHECK(slurp(tmp.path("gt2.json")) == first);
}

TEST_CASE("prediction load/save round trip is a fixed point") {
    const GroundTruth gt = fixtures::make_ground_truth(6);
    const PredictionSet preds = fixtures::degraded_predictions(gt, 7);
    TempDir tmp;

    save_predictions(preds, tmp.path("pred.json"));
    const std::string first = slurp(tmp.path("pred.json"));
    const PredictionSet loaded = load_predictions(tmp.path("pred.json"));
    save_predictions(loaded, tmp.path("pred2.json"));
    CHECK(slurp(tmp.path("pred2.json")) == first);
}

TEST_CASE("empty frames load fine") {
    const GroundTruth gt =
        ground_truth_from_json(ojson::parse(R"({"objects":[],"frames":[]})"));
    CHECK(gt.objects.empty());
    CHECK(gt.frames.empty());

    const PredictionSet preds =
        predictions_from_json(ojson::parse(R"({"frames":[]})"));
    CHECK(preds.frames.empty());
}

TEST_CASE("schema violations carry field paths") {
    const char* dangling_object = R"({
      "objects": [],
      "frames": [{
        "frame_id": "f", "object_id": "missing",
        "intrinsics": {"fx":100,"fy":100,"cx":64,"cy":64,"width":128,"height":128},
        "extrinsics": {"rotation":[1,0,0,0,1,0,0,0,1],"translation":[0,0,0]},
        "annotations": []
      }]
    })";
    CHECK_THROWS_WITH_AS(ground_truth_from_json(ojson::parse(dangling_object)),
                         doctest::Contains("frames[0]"), ValidationError);

    const char* bad_axis = R"({
      "objects": [{
        "object_id": "o", "category": "storage",
        "obb": {"center":[0,0,0],"up":[0,0,1],"front":[1,0,0],"half_extents":[1,1,1]},
        "parts": [{"part_id":"p","label":"drawer",
                   "motion":{"type":"prismatic","axis":[1,1,0],"range":[0,1]}}]
      }],
      "frames": []
    })";
    CHECK_THROWS_WITH_AS(ground_truth_from_json(ojson::parse(bad_axis)),
                         doctest::Contains("parts[0]"), ValidationError);

    const char* revolute_no_origin = R"({
      "objects": [{
        "object_id": "o", "category": "storage",
        "obb": {"center":[0,0,0],"up":[0,0,1],"front":[1,0,0],"half_extents":[1,1,1]},
        "parts": [{"part_id":"p","label":"door",
                   "motion":{"type":"revolute","axis":[0,0,1],"range":[0,1]}}]
      }],
      "frames": []
    })";
    CHECK_THROWS_AS(ground_truth_from_json(ojson::parse(revolute_no_origin)),
                    ValidationError);

    // object-frame detection needs predicted extrinsics
    const char* object_frame_det = R"({
      "frames": [{
        "frame_id": "f",
        "detections": [{"label":"drawer","score":0.5,"bbox":[0,0,5,5],
                        "motion":{"type":"prismatic","axis":[1,0,0]},
                        "frame_tag":"object"}]
      }]
    })";
    CHECK_THROWS_WITH_AS(predictions_from_json(ojson::parse(object_frame_det)),
                         doctest::Contains("detections[0]"), ValidationError);
}

TEST_CASE("angle_unit degrees converts revolute ranges") {
    const char* degrees_file = R"({
      "objects": [{
        "object_id": "o", "category": "storage",
        "obb": {"center":[0,0,0],"up":[0,0,1],"front":[1,0,0],"half_extents":[1,1,1]},
        "parts": [{"part_id":"p","label":"door",
                   "motion":{"type":"revolute","axis":[0,0,1],"origin":[0,0,0],
                             "range":[0,90],"angle_unit":"degrees"}}]
      }],
      "frames": []
    })";
    const GroundTruth gt = ground_truth_from_json(ojson::parse(degrees_file));
    CHECK(gt.objects[0].parts[0].motion.range.max ==
          doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("annotation boxes are clamped to the image") {
    GroundTruth gt = fixtures::make_ground_truth(8, {1, 1, 1, 1});
    gt.frames[0].annotations[0].bbox = {250.0, -5.0, 40.0, 40.0};
    TempDir tmp;
    save_ground_truth(gt, tmp.path("gt.json"));
    const GroundTruth loaded = load_ground_truth(tmp.path("gt.json"));
    const BoxXYWH& b = loaded.frames[0].annotations[0].bbox;
    CHECK(b[0] == 250.0);
    CHECK(b[1] == 0.0);
    CHECK(b[0] + b[2] <= 256.0);
    CHECK(b[1] + b[3] <= 256.0);
}

TEST_CASE("frame filter thresholds are inclusive") {
    // 10x10 image, one part with exactly 1 visible pixel = 1% coverage
    ArticulatedObject obj;
    obj.object_id = "o";
    obj.category = "bin";
    for (int i = 0; i < 10; ++i) {
        OpenablePart p;
        p.part_id = "p" + std::to_string(i);
        p.label = PartLabel::drawer;
        p.motion.type = MotionType::prismatic;
        p.motion.axis = {1, 0, 0};
        p.motion.range = {0, 1};
        obj.parts.push_back(p);
    }

    // 10x20 image: one pixel is 0.5%, two pixels exactly 1%
    FrameGT frame;
    frame.frame_id = "f";
    frame.object_id = "o";
    frame.intrinsics = {50, 50, 10, 5, 20, 10};
    frame.object_diagonal = object_diagonal(obj.obb);

    const auto one_pixel_ann = [&](const std::string& part_id, int x) {
        PartAnnotation2D ann;
        ann.part_id = part_id;
        ann.label = PartLabel::drawer;
        ann.bbox = {static_cast<double>(x), 0, 1, 1};
        Bitmask m = Bitmask::zeros(10, 20);
        m.set(0, x, 1);
        ann.mask = rle_encode(m);
        ann.motion_camera = obj.parts[0].motion;
        return ann;
    };

    SUBCASE("zero openable pixels fails") {
        PartAnnotation2D empty = one_pixel_ann("p0", 0);
        empty.mask = rle_encode(Bitmask::zeros(10, 20));
        frame.annotations = {empty};
        CHECK_FALSE(frame_filter(frame, obj));
    }

    SUBCASE("exactly 1% pixels and 2 of 10 parts visible passes") {
        frame.annotations = {one_pixel_ann("p0", 0), one_pixel_ann("p1", 1)};
        // 2 pixels of 200 = exactly 1%, 2/10 parts = exactly 20%
        CHECK(frame_filter(frame, obj));
        // one visible part (10% < 20%) fails even with enough pixels
        frame.annotations = {one_pixel_ann("p0", 0)};
        CHECK_FALSE(frame_filter(frame, obj));
    }

    SUBCASE("5% pixels but 1 of 10 parts visible fails") {
        PartAnnotation2D big = one_pixel_ann("p0", 0);
        Bitmask m = Bitmask::zeros(10, 20);
        for (int i = 0; i < 10; ++i) m.set(i, 0, 1);
        big.mask = rle_encode(m);
        frame.annotations = {big};
        CHECK_FALSE(frame_filter(frame, obj));
    }

    SUBCASE("monotone: adding openable pixels never flips true to false") {
        frame.annotations = {one_pixel_ann("p0", 0), one_pixel_ann("p1", 1)};
        REQUIRE(frame_filter(frame, obj));
        PartAnnotation2D more = one_pixel_ann("p2", 2);
        Bitmask m = Bitmask::zeros(10, 20);
        for (int y = 0; y < 10; ++y) m.set(y, 2, 1);
        more.mask = rle_encode(m);
        frame.annotations.push_back(more);
        CHECK(frame_filter(frame, obj));
    }
}

TEST_CASE("parse errors report position") {
    TempDir tmp;
    {
        std::ofstream out(tmp.path("broken.json"));
        out << "{\"objects\": [,]}";
    }
    CHECK_THROWS_AS(load_ground_truth(tmp.path("broken.json")), ValidationError);
    CHECK_THROWS_AS(load_ground_truth(tmp.path("nonexistent.json")),
                    ValidationError);
}
