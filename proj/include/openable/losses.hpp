#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "openable/artic.hpp"

namespace openable {

struct LossWeights {
    double lambda_c = 1.0;
    double lambda_a = 8.0;
    double lambda_o = 8.0;
    double lambda_ext = 15.0;
};

struct LossValue {
    double value = 0.0;
    std::vector<double> gradient;
};

// Elementwise smooth L1, summed: 0.5 x^2 / beta for |x| < beta, otherwise
// |x| - 0.5 beta. Value and derivative agree from both sides at |x| = beta.
inline LossValue smooth_l1(const std::vector<double>& x, double beta = 1.0) {
    require(beta > 0.0, "smooth_l1: beta must be positive");
    LossValue out;
    out.gradient.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        if (std::abs(v) < beta) {
            out.value += 0.5 * v * v / beta;
            out.gradient[i] = v / beta;
        } else {
            out.value += std::abs(v) - 0.5 * beta;
            out.gradient[i] = v > 0.0 ? 1.0 : -1.0;
        }
    }
    return out;
}

// Softmax cross entropy via log-sum-exp; gradient is softmax minus one-hot.
inline LossValue cross_entropy(const std::vector<double>& logits, size_t label) {
    require(label < logits.size(), "cross_entropy: label index out of range");
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    const double lse = m + std::log(sum);

    LossValue out;
    out.value = lse - logits[label];
    out.gradient.resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        out.gradient[i] = std::exp(logits[i] - lse);
        if (i == label) out.gradient[i] -= 1.0;
    }
    return out;
}

struct MotionPrediction {
    std::vector<double> type_logits;  // [prismatic, revolute]
    Vec3 axis;
    Vec3 origin;
};

struct MotionLossResult {
    double value = 0.0;
    std::vector<double> type_logit_grad;
    Vec3 axis_grad;
    Vec3 origin_grad;  // zero for prismatic ground truth
};

// Weighted motion loss: cross entropy on the type plus smooth L1 on the
// axis residual, and on the origin residual for revolute ground truth only.
inline MotionLossResult motion_loss(const MotionPrediction& pred,
                                    const MotionSpec& gt,
                                    const LossWeights& w = {},
                                    double beta = 1.0) {
    gt.validate();
    require(pred.type_logits.size() == kNumMotionTypes,
            "motion_loss: expected one logit per motion type");

    MotionLossResult out;
    const auto ce =
        cross_entropy(pred.type_logits, static_cast<size_t>(gt.type));
    out.value += w.lambda_c * ce.value;
    out.type_logit_grad = ce.gradient;
    for (double& g : out.type_logit_grad) g *= w.lambda_c;

    const Vec3 gt_axis = gt.axis.normalized();
    const auto axis_l1 = smooth_l1(
        {pred.axis.x - gt_axis.x, pred.axis.y - gt_axis.y, pred.axis.z - gt_axis.z},
        beta);
    out.value += w.lambda_a * axis_l1.value;
    out.axis_grad = Vec3{axis_l1.gradient[0], axis_l1.gradient[1],
                         axis_l1.gradient[2]} *
                    w.lambda_a;

    if (gt.type == MotionType::revolute) {
        const Vec3 o = *gt.origin;
        const auto origin_l1 = smooth_l1(
            {pred.origin.x - o.x, pred.origin.y - o.y, pred.origin.z - o.z}, beta);
        out.value += w.lambda_o * origin_l1.value;
        out.origin_grad = Vec3{origin_l1.gradient[0], origin_l1.gradient[1],
                               origin_l1.gradient[2]} *
                          w.lambda_o;
    }
    return out;
}

// Row-major rotation entries followed by the translation.
inline std::array<double, 12> extrinsic_vec12(const RigidTransform& t) {
    std::array<double, 12> v{};
    for (size_t i = 0; i < 9; ++i) v[i] = t.rotation.m[i];
    v[9] = t.translation.x;
    v[10] = t.translation.y;
    v[11] = t.translation.z;
    return v;
}

// Pose loss on the 12-vector extrinsic representation.
inline LossValue extrinsic_loss(const std::vector<double>& pred_vec12,
                                const RigidTransform& gt,
                                double lambda_ext = 15.0, double beta = 1.0) {
    require(pred_vec12.size() == 12, "extrinsic_loss: expected 12 entries");
    const auto target = extrinsic_vec12(gt);
    std::vector<double> residual(12);
    for (size_t i = 0; i < 12; ++i) residual[i] = pred_vec12[i] - target[i];
    LossValue l1 = smooth_l1(residual, beta);
    LossValue out;
    out.value = lambda_ext * l1.value;
    out.gradient.resize(12);
    for (size_t i = 0; i < 12; ++i) out.gradient[i] = lambda_ext * l1.gradient[i];
    return out;
}

}  // namespace openable
