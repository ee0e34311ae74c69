#include "loca/gradients.hpp"

namespace loca {

GradientSet GradientSet::zeros_like(const MLPModel& m) {
    GradientSet g;
    for (int l = 0; l < m.num_layers(); ++l) {
        g.w.push_back(Matrix::Zero(m.weights[l].rows(), m.weights[l].cols()));
        g.b.push_back(Vector::Zero(m.biases[l].size()));
    }
    return g;
}

void GradientSet::set_zero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
}

double GradientSet::squared_norm() const {
    double s = 0;
    for (const auto& m : w) s += m.squaredNorm();
    for (const auto& v : b) s += v.squaredNorm();
    return s;
}

const Matrix& mlp_forward_cached(const MLPModel& model, const Matrix& batch, ForwardCache& cache) {
    if (batch.cols() != model.input_dim())
        throw ShapeError("forward: batch/model dimension mismatch");
    const int L = model.num_layers();
    cache.h.resize(L);
    const Matrix* prev = &batch;
    for (int l = 0; l < L; ++l) {
        Matrix& h = cache.h[l];
        h.resize(prev->rows(), model.weights[l].rows());
        h.noalias() = (*prev) * model.weights[l].transpose();
        h.rowwise() += model.biases[l].transpose();
        if (!model.layer_is_linear(l)) apply_activation_inplace(h, model.activation);
        prev = &h;
    }
    return cache.h.back();
}

namespace {

// g *= activation'(preactivation), recovered from the post-activation value.
void scale_by_activation_derivative(Matrix& g, const Matrix& post, Activation a) {
    if (a == Activation::Tanh) {
        g.array() *= 1.0 - post.array().square();
    } else {
        g.array() *=
            kLeakyReluSlope + (1.0 - kLeakyReluSlope) * (post.array() > 0.0).cast<double>();
    }
}

} // namespace

Matrix mlp_backward(const MLPModel& model, const Matrix& input, ForwardCache& cache,
                    Matrix& d_out, GradientSet& grads, bool want_input_grad) {
    const int L = model.num_layers();
    grads.w.resize(L);
    grads.b.resize(L);
    Matrix& g = cache.g;
    Matrix& g_prev = cache.g_prev;
    g = std::move(d_out);
    for (int l = L - 1; l >= 0; --l) {
        if (!model.layer_is_linear(l)) scale_by_activation_derivative(g, cache.h[l], model.activation);
        const Matrix& below = l > 0 ? cache.h[l - 1] : input;
        grads.w[l].resize(model.weights[l].rows(), model.weights[l].cols());
        grads.w[l].noalias() = g.transpose() * below;
        grads.b[l] = g.colwise().sum().transpose();
        if (l > 0 || want_input_grad) {
            g_prev.resize(g.rows(), model.weights[l].cols());
            g_prev.noalias() = g * model.weights[l];
            std::swap(g, g_prev);
        }
    }
    return want_input_grad ? g : Matrix();
}

double whitening_loss_grad(const MLPModel& encoder, const Matrix& points, int n_clouds,
                           double sigma, GradientSet& grads, ForwardCache& cache) {
    if (sigma <= 0) throw ConfigError("whitening loss requires sigma > 0");
    if (n_clouds < 1 || points.rows() % n_clouds != 0)
        throw ShapeError("whitening: points rows must be n_clouds * cloud_size");
    const int m = static_cast<int>(points.rows()) / n_clouds;
    if (m < 2) throw DataError("whitening: clouds need at least 2 points");

    const Matrix& z = mlp_forward_cached(encoder, points, cache);
    const int d = static_cast<int>(z.cols());
    const double s2 = sigma * sigma;

    Matrix dz(z.rows(), d);
    Matrix centered(m, d), cov(d, d);
    const Matrix id = Matrix::Identity(d, d);
    double loss = 0;
    const double gscale = 4.0 / (s2 * (m - 1) * n_clouds);
    for (int c = 0; c < n_clouds; ++c) {
        auto block = z.middleRows(static_cast<long>(c) * m, m);
        centered = block.rowwise() - block.colwise().mean();
        cov.noalias() = centered.transpose() * centered;
        cov = cov / (s2 * (m - 1)) - id; // now holds A = C/sigma^2 - I
        loss += cov.squaredNorm();
        dz.middleRows(static_cast<long>(c) * m, m).noalias() = gscale * (centered * cov);
    }
    loss /= n_clouds;
    mlp_backward(encoder, points, cache, dz, grads, false);
    return loss;
}

double reconstruction_loss_grad(const MLPModel& encoder, const MLPModel& decoder,
                                const Matrix& points, GradientSet& g_enc, GradientSet& g_dec,
                                ForwardCache& c_enc, ForwardCache& c_dec) {
    if (decoder.output_dim() != static_cast<int>(points.cols()))
        throw ShapeError("reconstruction: decoder output dim must match data dim");
    const long k = points.rows();
    if (k < 1) throw ShapeError("reconstruction: empty batch");
    const Matrix& codes = mlp_forward_cached(encoder, points, c_enc);
    const Matrix& recon = mlp_forward_cached(decoder, codes, c_dec);
    Matrix d_recon = recon - points;
    const double loss = d_recon.squaredNorm() / static_cast<double>(k);
    d_recon *= 2.0 / static_cast<double>(k);
    Matrix d_codes = mlp_backward(decoder, codes, c_dec, d_recon, g_dec, true);
    mlp_backward(encoder, points, c_enc, d_codes, g_enc, false);
    return loss;
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "whitening") return LossKind::Whitening;
    if (name == "reconstruction") return LossKind::Reconstruction;
    throw ConfigError("unknown loss kind '" + name + "'");
}

GradientSet loss_gradients(const MLPModel& encoder, LossKind kind, const Matrix& points,
                           int n_clouds, const LossAux& aux) {
    GradientSet g;
    ForwardCache cache;
    switch (kind) {
    case LossKind::Whitening:
        whitening_loss_grad(encoder, points, n_clouds, aux.sigma, g, cache);
        return g;
    case LossKind::Reconstruction: {
        if (!aux.decoder) throw ConfigError("reconstruction gradients need a decoder");
        GradientSet g_dec;
        ForwardCache c_dec;
        reconstruction_loss_grad(encoder, *aux.decoder, points, g, g_dec, cache, c_dec);
        return g;
    }
    }
    throw ConfigError("unknown loss kind");
}

} // namespace loca
