#pragma once

#include "loca/mlp.hpp"

namespace loca {

// Per-parameter gradients, shape-congruent with the owning model.
struct GradientSet {
    std::vector<Matrix> w;
    std::vector<Vector> b;

    static GradientSet zeros_like(const MLPModel& m);
    void set_zero();
    double squared_norm() const;
};

// Reusable per-batch buffers: post-activation outputs of every layer plus
// backprop scratch. Reuse across minibatches to avoid reallocation.
struct ForwardCache {
    std::vector<Matrix> h; // h[l] = output of layer l, l = 0..L-1
    Matrix g;              // current backprop gradient
    Matrix g_prev;
};

// Forward pass caching every layer output; returns the final activation
// (a reference into the cache).
const Matrix& mlp_forward_cached(const MLPModel& model, const Matrix& batch, ForwardCache& cache);

// Backprop `d_out` = dL/d(output) through the network. Accumulates nothing:
// `grads` is overwritten. Returns dL/d(input) when want_input_grad is set.
Matrix mlp_backward(const MLPModel& model, const Matrix& input, ForwardCache& cache,
                    Matrix& d_out, GradientSet& grads, bool want_input_grad);

// Whitening loss over a batch of whole clouds (points has n_clouds blocks of
// cloud_size rows) and its exact gradient, including differentiation through
// each cloud's empirical covariance. Returns the loss value.
double whitening_loss_grad(const MLPModel& encoder, const Matrix& points, int n_clouds,
                           double sigma, GradientSet& grads, ForwardCache& cache);

// Reconstruction loss over a batch of points and its gradient with respect to
// both encoder and decoder parameters. Returns the loss value.
double reconstruction_loss_grad(const MLPModel& encoder, const MLPModel& decoder,
                                const Matrix& points, GradientSet& g_enc, GradientSet& g_dec,
                                ForwardCache& c_enc, ForwardCache& c_dec);

enum class LossKind { Whitening, Reconstruction };

LossKind parse_loss_kind(const std::string& name);

// Auxiliary inputs for the generic entry point: sigma for the whitening loss,
// decoder for the reconstruction loss.
struct LossAux {
    double sigma = 0.0;
    const MLPModel* decoder = nullptr;
};

// Generic gradient entry point (gradients of the encoder parameters).
GradientSet loss_gradients(const MLPModel& encoder, LossKind kind, const Matrix& points,
                           int n_clouds, const LossAux& aux);

} // namespace loca
