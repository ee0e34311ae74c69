#pragma once

#include "loca/gradients.hpp"

namespace loca {

// ADAM moments, shape-congruent with the model they optimize.
struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_model(const MLPModel& m);
};

// One bias-corrected ADAM update: theta -= lr * m_hat / (sqrt(v_hat) + eps).
// Throws NumericError naming the parameter location on non-finite gradients.
void adam_step(AdamState& state, MLPModel& model, const GradientSet& grads, double lr);

} // namespace loca
