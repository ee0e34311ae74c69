#include "loca/mlp.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "loca/rng.hpp"

namespace loca {

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "leaky_relu") return Activation::LeakyRelu;
    throw ConfigError("unknown activation '" + name + "' (expected tanh or leaky_relu)");
}

std::string activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "leaky_relu";
}

long MLPModel::parameter_count() const {
    long n = 0;
    for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

void MLPModel::validate() const {
    if (layer_sizes.size() < 2) throw ConfigError("model needs at least 2 layer sizes");
    for (int s : layer_sizes)
        if (s <= 0) throw ConfigError("layer sizes must be positive");
    if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size())
        throw ShapeError("weight/bias count does not match layer_sizes");
    for (int l = 0; l < num_layers(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l])
            throw ShapeError("weight matrix " + std::to_string(l) + " has wrong shape");
        if (biases[l].size() != layer_sizes[l + 1])
            throw ShapeError("bias vector " + std::to_string(l) + " has wrong shape");
    }
    if (linear_tail < 0 || linear_tail > num_layers())
        throw ConfigError("linear_tail must be in [0, number of layers]");
}

MLPModel mlp_init(const std::vector<int>& layer_sizes, Activation activation,
                  int linear_tail, uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("mlp_init: need at least 2 layer sizes");
    for (int s : layer_sizes)
        if (s <= 0) throw ConfigError("mlp_init: layer sizes must be positive");
    if (linear_tail < 0 || linear_tail > static_cast<int>(layer_sizes.size()) - 1)
        throw ConfigError("mlp_init: linear_tail out of range");

    MLPModel m;
    m.layer_sizes = layer_sizes;
    m.activation = activation;
    m.linear_tail = linear_tail;
    Rng rng(seed);
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l], out = layer_sizes[l + 1];
        Matrix w(out, in);
        const double limit = std::sqrt(6.0 / (in + out));
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-limit, limit);
        m.weights.push_back(std::move(w));
        m.biases.push_back(Vector::Zero(out));
    }
    return m;
}

void apply_activation_inplace(Matrix& h, Activation a) {
    if (a == Activation::Tanh) {
        // tanh through exp: Eigen vectorizes exp for doubles but not tanh.
        h.array() = 2.0 / (1.0 + (-2.0 * h.array()).exp()) - 1.0;
    } else {
        h.array() = (h.array() > 0.0).select(h.array(), kLeakyReluSlope * h.array());
    }
}

Matrix mlp_forward(const MLPModel& model, const Matrix& batch) {
    if (batch.cols() != model.input_dim())
        throw ShapeError("mlp_forward: batch has " + std::to_string(batch.cols()) +
                         " columns, model expects " + std::to_string(model.input_dim()));
    Matrix h = batch;
    for (int l = 0; l < model.num_layers(); ++l) {
        Matrix next = h * model.weights[l].transpose();
        next.rowwise() += model.biases[l].transpose();
        if (!model.layer_is_linear(l)) apply_activation_inplace(next, model.activation);
        h = std::move(next);
    }
    return h;
}

namespace {

constexpr char kMlpMagic[8] = {'L', 'O', 'C', 'A', 'M', 'L', 'P', '\1'};

void write_bytes(std::ofstream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& is, void* p, size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw DataError("model file truncated");
}

} // namespace

void save_mlp(const MLPModel& model, const std::string& path) {
    model.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    write_bytes(os, kMlpMagic, sizeof(kMlpMagic));
    int64_t n_sizes = static_cast<int64_t>(model.layer_sizes.size());
    write_bytes(os, &n_sizes, sizeof(n_sizes));
    for (int s : model.layer_sizes) {
        int64_t v = s;
        write_bytes(os, &v, sizeof(v));
    }
    uint8_t act = model.activation == Activation::Tanh ? 0 : 1;
    write_bytes(os, &act, sizeof(act));
    int64_t tail = model.linear_tail;
    write_bytes(os, &tail, sizeof(tail));
    for (int l = 0; l < model.num_layers(); ++l) {
        // row-major parameter dump
        for (int r = 0; r < model.weights[l].rows(); ++r)
            for (int c = 0; c < model.weights[l].cols(); ++c) {
                double v = model.weights[l](r, c);
                write_bytes(os, &v, sizeof(v));
            }
        for (int r = 0; r < model.biases[l].size(); ++r) {
            double v = model.biases[l](r);
            write_bytes(os, &v, sizeof(v));
        }
    }
    if (!os) throw DataError("failed writing model to '" + path + "'");
}

MLPModel load_mlp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open model file '" + path + "'");
    char magic[8];
    read_bytes(is, magic, sizeof(magic));
    if (std::memcmp(magic, kMlpMagic, sizeof(magic)) != 0)
        throw DataError("'" + path + "' is not a model file (bad magic)");
    int64_t n_sizes = 0;
    read_bytes(is, &n_sizes, sizeof(n_sizes));
    if (n_sizes < 2 || n_sizes > 1000) throw DataError("model file has invalid layer count");
    MLPModel m;
    for (int64_t i = 0; i < n_sizes; ++i) {
        int64_t v = 0;
        read_bytes(is, &v, sizeof(v));
        m.layer_sizes.push_back(static_cast<int>(v));
    }
    uint8_t act = 0;
    read_bytes(is, &act, sizeof(act));
    m.activation = act == 0 ? Activation::Tanh : Activation::LeakyRelu;
    int64_t tail = 0;
    read_bytes(is, &tail, sizeof(tail));
    m.linear_tail = static_cast<int>(tail);
    for (size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        Matrix w(m.layer_sizes[l + 1], m.layer_sizes[l]);
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) read_bytes(is, &w(r, c), sizeof(double));
        Vector b(m.layer_sizes[l + 1]);
        for (int r = 0; r < b.size(); ++r) read_bytes(is, &b(r), sizeof(double));
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    m.validate();
    return m;
}

} // namespace loca
