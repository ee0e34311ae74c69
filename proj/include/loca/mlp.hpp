#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loca/common.hpp"

namespace loca {

enum class Activation { Tanh, LeakyRelu };

constexpr double kLeakyReluSlope = 0.01;

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

// Dense feed-forward network. weights[l] maps layer_sizes[l] -> layer_sizes[l+1]
// and is stored as an (out x in) matrix; the activation is skipped on the last
// linear_tail layers so the network tail is affine.
struct MLPModel {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Activation activation = Activation::Tanh;
    int linear_tail = 2;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    bool layer_is_linear(int l) const { return l >= num_layers() - linear_tail; }
    long parameter_count() const;

    void validate() const; // throws ShapeError/ConfigError on inconsistent shapes
};

// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases.
// Deterministic for a fixed seed; weights are filled layer by layer, row-major.
MLPModel mlp_init(const std::vector<int>& layer_sizes, Activation activation,
                  int linear_tail, uint64_t seed);

// Batch forward pass; rows are samples. Returns K x d_out for a K x d_in batch.
Matrix mlp_forward(const MLPModel& model, const Matrix& batch);

void apply_activation_inplace(Matrix& h, Activation a);

// Versioned binary serialization (magic "LOCAMLP\1", little-endian doubles).
void save_mlp(const MLPModel& model, const std::string& path);
MLPModel load_mlp(const std::string& path);

} // namespace loca
