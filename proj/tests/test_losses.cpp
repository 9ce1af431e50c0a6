#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "openable/losses.hpp"
#include "openable/rng.hpp"
#include "support/oracles.hpp"

using namespace openable;

namespace {

double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
    return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("smooth_l1 values") {
    CHECK(smooth_l1({0.0}).value == doctest::Approx(0.0));
    CHECK(smooth_l1({2.0}).value == doctest::Approx(1.5));
    CHECK(smooth_l1({-2.0}).value == doctest::Approx(1.5));
    CHECK(smooth_l1({0.5}).value == doctest::Approx(0.125));
    // beta scaling
    CHECK(smooth_l1({0.5}, 2.0).value == doctest::Approx(0.0625));
    CHECK(smooth_l1({0.3, -0.4}).value == doctest::Approx(0.045 + 0.08));
    CHECK_THROWS_AS(smooth_l1({1.0}, 0.0), InvalidInputError);
}

TEST_CASE("smooth_l1 is continuous and C1 at |x| = beta") {
    for (double beta : {1.0, 0.35, 2.5}) {
        const double eps = 1e-13 * beta;
        const double below = smooth_l1({beta - eps}, beta).value;
        const double above = smooth_l1({beta + eps}, beta).value;
        CHECK(std::abs(below - above) < 1e-12);
        const double gbelow = smooth_l1({beta - eps}, beta).gradient[0];
        const double gabove = smooth_l1({beta + eps}, beta).gradient[0];
        CHECK(std::abs(gbelow - gabove) < 1e-12);
    }
}

TEST_CASE("smooth_l1 gradient matches central differences") {
    Rng rng(3);
    int checked = 0;
    while (checked < 100) {
        std::vector<double> x(1 + static_cast<size_t>(rng.uniform_int(5)));
        for (auto& v : x) v = rng.uniform(-3, 3);
        // stay away from the |x| = beta seam where the fd stencil straddles
        bool near_seam = false;
        for (double v : x)
            if (std::abs(std::abs(v) - 1.0) < 1e-3) near_seam = true;
        if (near_seam) continue;
        ++checked;

        const auto got = smooth_l1(x);
        const auto fd = oracles::finite_difference(
            [](const std::vector<double>& y) { return smooth_l1(y).value; }, x);
        for (size_t i = 0; i < x.size(); ++i)
            CHECK(rel_err(got.gradient[i], fd[i]) < 1e-4);
    }
}

TEST_CASE("cross_entropy values") {
    for (size_t k : {2u, 3u, 7u}) {
        const std::vector<double> uniform(k, 0.7);
        CHECK(cross_entropy(uniform, 0).value ==
              doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));
    }
    // overflow-safe log-sum-exp
    const auto big = cross_entropy({1000.0, 0.0}, 0);
    CHECK(std::isfinite(big.value));
    CHECK(big.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(cross_entropy({1.0, 2.0}, 2), InvalidInputError);
}

TEST_CASE("cross_entropy gradient matches central differences") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> logits(2 + static_cast<size_t>(rng.uniform_int(4)));
        for (auto& v : logits) v = rng.uniform(-4, 4);
        const size_t label =
            static_cast<size_t>(rng.uniform_int(static_cast<int>(logits.size())));
        const auto got = cross_entropy(logits, label);
        const auto fd = oracles::finite_difference(
            [label](const std::vector<double>& l) {
                return cross_entropy(l, label).value;
            },
            logits);
        for (size_t i = 0; i < logits.size(); ++i)
            CHECK(rel_err(got.gradient[i], fd[i]) < 1e-4);
    }
}

TEST_CASE("motion_loss composition") {
    MotionSpec gt;
    gt.type = MotionType::revolute;
    gt.axis = {0, 0, 1};
    gt.origin = Vec3{0.5, -0.25, 1.0};
    gt.range = {0, 1};

    SUBCASE("exact prediction leaves only the CE term") {
        MotionPrediction pred;
        pred.type_logits = {-10.0, 10.0};  // confident revolute
        pred.axis = {0, 0, 1};
        pred.origin = {0.5, -0.25, 1.0};
        const auto out = motion_loss(pred, gt);
        CHECK(out.value == doctest::Approx(cross_entropy(pred.type_logits, 1).value)
                               .epsilon(1e-12));
        CHECK(out.axis_grad.norm() == doctest::Approx(0.0));
        CHECK(out.origin_grad.norm() == doctest::Approx(0.0));
    }

    SUBCASE("prismatic ground truth ignores the origin residual") {
        MotionSpec prism;
        prism.type = MotionType::prismatic;
        prism.axis = {1, 0, 0};
        prism.range = {0, 1};
        MotionPrediction pred;
        pred.type_logits = {1.0, -1.0};
        pred.axis = {1, 0, 0};
        pred.origin = {1e6, 1e6, 1e6};
        const auto out = motion_loss(pred, prism);
        CHECK(out.value ==
              doctest::Approx(cross_entropy(pred.type_logits, 0).value)
                  .epsilon(1e-12));
        CHECK(out.origin_grad.norm() == 0.0);
    }

    SUBCASE("doubling lambda_a doubles the axis component") {
        MotionPrediction pred;
        pred.type_logits = {0.0, 0.0};
        pred.axis = {0.2, -0.1, 0.9};
        pred.origin = {0.5, -0.25, 1.0};
        LossWeights w;
        const double base = motion_loss(pred, gt, w).value;
        LossWeights doubled = w;
        doubled.lambda_a *= 2.0;
        const double more = motion_loss(pred, gt, doubled).value;
        const double ce = w.lambda_c * cross_entropy(pred.type_logits, 1).value;
        CHECK(more - ce == doctest::Approx(2.0 * (base - ce)).epsilon(1e-12));
    }

    SUBCASE("gradients match finite differences") {
        Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            MotionPrediction pred;
            pred.type_logits = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
            pred.axis = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
            pred.origin = {rng.uniform(-2, 2), rng.uniform(-2, 2),
                           rng.uniform(-2, 2)};
            // keep residuals away from |x| = beta
            bool seam = false;
            for (double v : {pred.axis.x - 0.0, pred.axis.y - 0.0,
                             pred.axis.z - 1.0, pred.origin.x - 0.5,
                             pred.origin.y + 0.25, pred.origin.z - 1.0})
                if (std::abs(std::abs(v) - 1.0) < 1e-3) seam = true;
            if (seam) continue;

            const auto got = motion_loss(pred, gt);
            const auto fd_axis = oracles::finite_difference(
                [&](const std::vector<double>& a) {
                    MotionPrediction p = pred;
                    p.axis = {a[0], a[1], a[2]};
                    return motion_loss(p, gt).value;
                },
                {pred.axis.x, pred.axis.y, pred.axis.z});
            CHECK(rel_err(got.axis_grad.x, fd_axis[0]) < 1e-4);
            CHECK(rel_err(got.axis_grad.y, fd_axis[1]) < 1e-4);
            CHECK(rel_err(got.axis_grad.z, fd_axis[2]) < 1e-4);

            const auto fd_logits = oracles::finite_difference(
                [&](const std::vector<double>& l) {
                    MotionPrediction p = pred;
                    p.type_logits = l;
                    return motion_loss(p, gt).value;
                },
                pred.type_logits);
            CHECK(rel_err(got.type_logit_grad[0], fd_logits[0]) < 1e-4);
            CHECK(rel_err(got.type_logit_grad[1], fd_logits[1]) < 1e-4);
        }
    }
}

TEST_CASE("extrinsic_loss") {
    const RigidTransform gt{rotation_about_axis({0, 0, 1}, 0.3), {1, 2, 3}};
    const auto target = extrinsic_vec12(gt);

    SUBCASE("exact prediction costs zero") {
        const std::vector<double> pred(target.begin(), target.end());
        CHECK(extrinsic_loss(pred, gt).value == doctest::Approx(0.0));
    }

    SUBCASE("one entry off by 0.5 costs 15 * 0.125") {
        std::vector<double> pred(target.begin(), target.end());
        pred[4] += 0.5;
        CHECK(extrinsic_loss(pred, gt).value == doctest::Approx(1.875));
    }

    SUBCASE("wrong length is rejected") {
        CHECK_THROWS_AS(extrinsic_loss(std::vector<double>(11, 0.0), gt),
                        InvalidInputError);
    }

    SUBCASE("gradient matches central differences") {
        Rng rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> pred(12);
            bool seam = false;
            for (size_t i = 0; i < 12; ++i) {
                pred[i] = rng.uniform(-2, 2);
                if (std::abs(std::abs(pred[i] - target[i]) - 1.0) < 1e-3)
                    seam = true;
            }
            if (seam) continue;
            const auto got = extrinsic_loss(pred, gt);
            const auto fd = oracles::finite_difference(
                [&](const std::vector<double>& p) {
                    return extrinsic_loss(p, gt).value;
                },
                pred);
            for (size_t i = 0; i < 12; ++i)
                CHECK(rel_err(got.gradient[i], fd[i]) < 1e-4);
        }
    }
}

TEST_CASE("losses are non-negative") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(-5, 5);
        CHECK(smooth_l1(x).value >= 0.0);
        std::vector<double> logits(3);
        for (auto& v : logits) v = rng.uniform(-5, 5);
        CHECK(cross_entropy(logits, 0).value >= 0.0);
    }
}
