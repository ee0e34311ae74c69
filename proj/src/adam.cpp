#include "loca/adam.hpp"

#include <cmath>

namespace loca {

AdamState AdamState::for_model(const MLPModel& m) {
    AdamState s;
    for (int l = 0; l < m.num_layers(); ++l) {
        s.m_w.push_back(Matrix::Zero(m.weights[l].rows(), m.weights[l].cols()));
        s.v_w.push_back(Matrix::Zero(m.weights[l].rows(), m.weights[l].cols()));
        s.m_b.push_back(Vector::Zero(m.biases[l].size()));
        s.v_b.push_back(Vector::Zero(m.biases[l].size()));
    }
    return s;
}

void adam_step(AdamState& state, MLPModel& model, const GradientSet& grads, double lr) {
    if (lr <= 0) throw ConfigError("adam_step: learning rate must be positive");
    const int L = model.num_layers();
    if (static_cast<int>(grads.w.size()) != L || static_cast<int>(state.m_w.size()) != L)
        throw ShapeError("adam_step: gradient/state shapes do not match model");

    for (int l = 0; l < L; ++l) {
        if (!grads.w[l].allFinite())
            throw NumericError("non-finite gradient in layer " + std::to_string(l) + " weights");
        if (!grads.b[l].allFinite())
            throw NumericError("non-finite gradient in layer " + std::to_string(l) + " biases");
    }

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    const double b1 = state.beta1, b2 = state.beta2;

    for (int l = 0; l < L; ++l) {
        state.m_w[l] = b1 * state.m_w[l] + (1.0 - b1) * grads.w[l];
        state.v_w[l] = b2 * state.v_w[l].array() + (1.0 - b2) * grads.w[l].array().square();
        model.weights[l].array() -=
            lr * (state.m_w[l].array() / bc1) / ((state.v_w[l].array() / bc2).sqrt() + state.epsilon);

        state.m_b[l] = b1 * state.m_b[l] + (1.0 - b1) * grads.b[l];
        state.v_b[l] = b2 * state.v_b[l].array() + (1.0 - b2) * grads.b[l].array().square();
        model.biases[l].array() -=
            lr * (state.m_b[l].array() / bc1) / ((state.v_b[l].array() / bc2).sqrt() + state.epsilon);
    }
}

} // namespace loca
