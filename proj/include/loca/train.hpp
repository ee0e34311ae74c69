#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loca/dataset.hpp"
#include "loca/mlp.hpp"

namespace loca {

struct TrainConfig {
    // Full layer size lists, input dim first. The last entry of encoder_layers
    // is the embedding dimension; decoder_layers must start with it and end
    // with the ambient dimension.
    std::vector<int> encoder_layers;
    std::vector<int> decoder_layers;
    Activation encoder_activation = Activation::Tanh;
    Activation decoder_activation = Activation::Tanh;
    int linear_tail = 2;

    int batch_clouds = 200;
    std::vector<double> lr_schedule = {1e-3, 3e-4, 1e-4};
    int eval_every = 100;   // epochs between validation checks
    int patience = 2000;    // epochs without improvement before a stage stops
    long max_epochs_per_stage = 0; // safety cap, 0 = unlimited
    double validation_fraction = 0.1;
    // Hidden-layer biases drawn uniform in [-spread, spread] at init instead
    // of zero; tiles the tanh units across the input range, which speeds up
    // boundary-layer features considerably. 0 keeps the zero-bias init.
    double init_bias_spread = 0.0;
    uint64_t seed = 0;

    int embedding_dim() const { return encoder_layers.empty() ? 0 : encoder_layers.back(); }
    void validate(int ambient_dim, int n_clouds) const;
};

// Key-value text config ("key = value", '#' comments). Layer lists and the
// learning-rate schedule are comma-separated.
TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& path);

struct HistoryRow {
    long epoch = 0;
    double lr = 0;
    double train_whitening = 0, train_reconstruction = 0;
    double val_whitening = 0, val_reconstruction = 0;
};

struct TrainedLoca {
    MLPModel encoder;
    MLPModel decoder;
    double sigma_used = 0;
    std::vector<HistoryRow> history;
    uint64_t seed = 0;
    int embedding_dim = 0;
    double best_val_whitening = 0, best_val_reconstruction = 0;
    long epochs_run = 0;
};

// Algorithm: split clouds into train/validation, then per epoch run one pass
// of whitening updates on the encoder over cloud minibatches followed by one
// pass of reconstruction updates on encoder+decoder over the same clouds.
// Validation (sum of both losses) is checked every eval_every epochs with the
// best weights checkpointed; a learning-rate stage ends after `patience`
// epochs without improvement, weights are restored, and the next rate starts.
TrainedLoca train_loca(const BurstDataset& ds, const TrainConfig& cfg);

// Same, but starting from explicit initial weights instead of seeded init.
TrainedLoca train_loca(const BurstDataset& ds, const TrainConfig& cfg,
                       const MLPModel& encoder0, const MLPModel& decoder0);

Matrix encode(const TrainedLoca& model, const Matrix& points);
Matrix decode(const TrainedLoca& model, const Matrix& codes);

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

struct DimSweepResult {
    int selected = 0;
    std::vector<int> dims;
    std::vector<double> val_whitening; // NaN for dimensions that failed to train
};

// Trains one model per embedding dimension 1..d_max (rewriting the embedding
// entries of the layer lists) and picks the smallest dimension whose final
// validation whitening loss is within a factor 2 of the minimum.
DimSweepResult estimate_embedding_dim(const BurstDataset& ds, int d_max, const TrainConfig& base);

} // namespace loca
