#include "loca/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "loca/adam.hpp"
#include "loca/gradients.hpp"
#include "loca/losses.hpp"
#include "loca/rng.hpp"

namespace loca {

void TrainConfig::validate(int ambient_dim, int n_clouds) const {
    if (encoder_layers.size() < 2 || decoder_layers.size() < 2)
        throw ConfigError("train config: layer lists need at least 2 entries");
    if (encoder_layers.front() != ambient_dim)
        throw ConfigError("train config: encoder input dim must equal ambient dim " +
                          std::to_string(ambient_dim));
    if (decoder_layers.front() != encoder_layers.back())
        throw ConfigError("train config: decoder input dim must equal embedding dim");
    if (decoder_layers.back() != ambient_dim)
        throw ConfigError("train config: decoder output dim must equal ambient dim");
    if (lr_schedule.empty()) throw ConfigError("train config: lr_schedule is empty");
    for (double lr : lr_schedule)
        if (lr <= 0) throw ConfigError("train config: learning rates must be positive");
    if (validation_fraction <= 0 || validation_fraction >= 1)
        throw ConfigError("train config: validation_fraction must be in (0,1)");
    if (eval_every < 1 || patience < 1) throw ConfigError("train config: eval_every and patience must be >= 1");
    const int n_val = std::max(1, static_cast<int>(std::lround(validation_fraction * n_clouds)));
    const int n_train = n_clouds - n_val;
    if (n_train < 1) throw ConfigError("train config: no training clouds after validation split");
    if (batch_clouds < 1 || batch_clouds > n_train)
        throw ConfigError("train config: batch_clouds must be in [1, training clouds]");
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

TrainConfig load_train_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        try {
            if (key == "encoder_layers") cfg.encoder_layers = parse_int_list(val);
            else if (key == "decoder_layers") cfg.decoder_layers = parse_int_list(val);
            else if (key == "encoder_activation") cfg.encoder_activation = parse_activation(val);
            else if (key == "decoder_activation") cfg.decoder_activation = parse_activation(val);
            else if (key == "linear_tail") cfg.linear_tail = std::stoi(val);
            else if (key == "batch_clouds") cfg.batch_clouds = std::stoi(val);
            else if (key == "lr_schedule") cfg.lr_schedule = parse_double_list(val);
            else if (key == "eval_every") cfg.eval_every = std::stoi(val);
            else if (key == "patience") cfg.patience = std::stoi(val);
            else if (key == "max_epochs_per_stage") cfg.max_epochs_per_stage = std::stol(val);
            else if (key == "validation_fraction") cfg.validation_fraction = std::stod(val);
            else if (key == "init_bias_spread") cfg.init_bias_spread = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    return cfg;
}

namespace {

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_same_v<T, double>) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.12g", v[i]);
            s += buf;
        } else {
            s += std::to_string(v[i]);
        }
    }
    return s;
}

} // namespace

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << "encoder_layers = " << join(cfg.encoder_layers) << "\n"
       << "decoder_layers = " << join(cfg.decoder_layers) << "\n"
       << "encoder_activation = " << activation_name(cfg.encoder_activation) << "\n"
       << "decoder_activation = " << activation_name(cfg.decoder_activation) << "\n"
       << "linear_tail = " << cfg.linear_tail << "\n"
       << "batch_clouds = " << cfg.batch_clouds << "\n"
       << "lr_schedule = " << join(cfg.lr_schedule) << "\n"
       << "eval_every = " << cfg.eval_every << "\n"
       << "patience = " << cfg.patience << "\n"
       << "max_epochs_per_stage = " << cfg.max_epochs_per_stage << "\n"
       << "validation_fraction = " << cfg.validation_fraction << "\n"
       << "init_bias_spread = " << cfg.init_bias_spread << "\n"
       << "seed = " << cfg.seed << "\n";
}

namespace {

// Copies the rows of the given clouds (in order) into a contiguous buffer.
void gather_clouds(const BurstDataset& ds, const std::vector<int>& clouds, Matrix& out) {
    const int m = ds.cloud_size;
    out.resize(static_cast<long>(clouds.size()) * m, ds.points.cols());
    for (size_t i = 0; i < clouds.size(); ++i)
        out.middleRows(static_cast<long>(i) * m, m) = ds.cloud(clouds[i]);
}

struct Checkpoint {
    std::vector<Matrix> enc_w, dec_w;
    std::vector<Vector> enc_b, dec_b;
    void store(const MLPModel& enc, const MLPModel& dec) {
        enc_w = enc.weights;
        enc_b = enc.biases;
        dec_w = dec.weights;
        dec_b = dec.biases;
    }
    void restore(MLPModel& enc, MLPModel& dec) const {
        enc.weights = enc_w;
        enc.biases = enc_b;
        dec.weights = dec_w;
        dec.biases = dec_b;
    }
};

} // namespace

TrainedLoca train_loca(const BurstDataset& ds, const TrainConfig& cfg,
                       const MLPModel& encoder0, const MLPModel& decoder0) {
    ds.validate();
    cfg.validate(ds.ambient_dim(), ds.n_clouds);
    if (encoder0.input_dim() != ds.ambient_dim() ||
        decoder0.input_dim() != encoder0.output_dim() ||
        decoder0.output_dim() != ds.ambient_dim())
        throw ShapeError("train_loca: initial models do not map D -> d -> D");

    const double sigma = ds.sigma ? *ds.sigma : std::sqrt(estimate_sigma2(ds));
    const int n = ds.n_clouds;
    const int n_val = std::max(1, static_cast<int>(std::lround(cfg.validation_fraction * n)));
    const int n_train = n - n_val;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(cfg.seed, 0));
    split_rng.shuffle(order.begin(), order.end());
    std::vector<int> train_clouds(order.begin(), order.begin() + n_train);
    std::vector<int> val_clouds(order.begin() + n_train, order.end());

    Matrix train_points, val_points;
    gather_clouds(ds, train_clouds, train_points);
    gather_clouds(ds, val_clouds, val_points);

    MLPModel enc = encoder0, dec = decoder0;
    Rng epoch_rng(derive_seed(cfg.seed, 3));

    TrainedLoca out;
    out.seed = cfg.seed;
    out.sigma_used = sigma;
    out.embedding_dim = enc.output_dim();

    Checkpoint best;
    best.store(enc, dec);
    double best_val = std::numeric_limits<double>::infinity();

    GradientSet g_enc, g_dec;
    ForwardCache c_enc, c_dec;
    Matrix batch;
    std::vector<int> batch_ids;

    // One optimizer per network, moments carried across learning-rate stages:
    // resetting them mid-training kicks every parameter by ~lr on the first
    // bias-corrected step and measurably regresses a converged model.
    AdamState adam_enc = AdamState::for_model(enc);
    AdamState adam_dec = AdamState::for_model(dec);

    long epoch = 0;
    auto evaluate = [&](double lr) {
        HistoryRow row;
        row.epoch = epoch;
        row.lr = lr;
        row.train_whitening = whitening_loss_points(enc, train_points, n_train, sigma);
        row.train_reconstruction = reconstruction_loss_points(enc, dec, train_points);
        row.val_whitening = whitening_loss_points(enc, val_points, n_val, sigma);
        row.val_reconstruction = reconstruction_loss_points(enc, dec, val_points);
        out.history.push_back(row);
        const double total = row.val_whitening + row.val_reconstruction;
        if (!std::isfinite(total))
            throw NumericError("training diverged: non-finite validation loss at epoch " +
                               std::to_string(epoch));
        if (total < best_val) {
            best_val = total;
            best.store(enc, dec);
            out.best_val_whitening = row.val_whitening;
            out.best_val_reconstruction = row.val_reconstruction;
            return true;
        }
        return false;
    };
    evaluate(cfg.lr_schedule.front());

    for (double lr : cfg.lr_schedule) {
        const long stage_start = epoch;
        long last_improve = epoch;
        while (true) {
            if (cfg.max_epochs_per_stage > 0 && epoch - stage_start >= cfg.max_epochs_per_stage)
                break;
            ++epoch;
            epoch_rng.shuffle(train_clouds.begin(), train_clouds.end());
            const int n_batches = (n_train + cfg.batch_clouds - 1) / cfg.batch_clouds;

            for (int pass = 0; pass < 2; ++pass) {
                for (int bi = 0; bi < n_batches; ++bi) {
                    const int lo = bi * cfg.batch_clouds;
                    const int hi = std::min(n_train, lo + cfg.batch_clouds);
                    batch_ids.assign(train_clouds.begin() + lo, train_clouds.begin() + hi);
                    gather_clouds(ds, batch_ids, batch);
                    double loss;
                    if (pass == 0) {
                        loss = whitening_loss_grad(enc, batch, hi - lo, sigma, g_enc, c_enc);
                        if (!std::isfinite(loss))
                            throw NumericError("training diverged: non-finite whitening loss at epoch " +
                                               std::to_string(epoch) + " (lr=" + std::to_string(lr) + ")");
                        adam_step(adam_enc, enc, g_enc, lr);
                    } else {
                        loss = reconstruction_loss_grad(enc, dec, batch, g_enc, g_dec, c_enc, c_dec);
                        if (!std::isfinite(loss))
                            throw NumericError("training diverged: non-finite reconstruction loss at epoch " +
                                               std::to_string(epoch) + " (lr=" + std::to_string(lr) + ")");
                        adam_step(adam_enc, enc, g_enc, lr);
                        adam_step(adam_dec, dec, g_dec, lr);
                    }
                }
            }

            if (epoch % cfg.eval_every == 0) {
                if (evaluate(lr)) last_improve = epoch;
                else if (epoch - last_improve >= cfg.patience) break;
            }
        }
        best.restore(enc, dec);
    }

    out.encoder = std::move(enc);
    out.decoder = std::move(dec);
    out.epochs_run = epoch;
    return out;
}

TrainedLoca train_loca(const BurstDataset& ds, const TrainConfig& cfg) {
    ds.validate();
    cfg.validate(ds.ambient_dim(), ds.n_clouds);
    MLPModel enc = mlp_init(cfg.encoder_layers, cfg.encoder_activation, cfg.linear_tail,
                            derive_seed(cfg.seed, 1));
    MLPModel dec = mlp_init(cfg.decoder_layers, cfg.decoder_activation, cfg.linear_tail,
                            derive_seed(cfg.seed, 2));
    if (cfg.init_bias_spread > 0) {
        Rng brng(derive_seed(cfg.seed, 4));
        for (MLPModel* m : {&enc, &dec})
            for (int l = 0; l + 1 < m->num_layers(); ++l)
                for (long r = 0; r < m->biases[l].size(); ++r)
                    m->biases[l](r) = brng.uniform(-cfg.init_bias_spread, cfg.init_bias_spread);
    }
    return train_loca(ds, cfg, enc, dec);
}

Matrix encode(const TrainedLoca& model, const Matrix& points) {
    return mlp_forward(model.encoder, points);
}

Matrix decode(const TrainedLoca& model, const Matrix& codes) {
    return mlp_forward(model.decoder, codes);
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << "epoch,split,loss_kind,value\n";
    char buf[64];
    auto emit = [&](long epoch, const char* split, const char* kind, double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        os << epoch << "," << split << "," << kind << "," << buf << "\n";
    };
    for (const auto& row : history) {
        emit(row.epoch, "train", "whitening", row.train_whitening);
        emit(row.epoch, "train", "reconstruction", row.train_reconstruction);
        emit(row.epoch, "validation", "whitening", row.val_whitening);
        emit(row.epoch, "validation", "reconstruction", row.val_reconstruction);
    }
}

DimSweepResult estimate_embedding_dim(const BurstDataset& ds, int d_max, const TrainConfig& base) {
    if (d_max < 1) throw ConfigError("estimate_embedding_dim: d_max must be >= 1");
    DimSweepResult res;
    const int tail_entries = std::max(1, base.linear_tail);
    for (int d = 1; d <= d_max; ++d) {
        TrainConfig cfg = base;
        const int ne = static_cast<int>(cfg.encoder_layers.size());
        for (int i = std::max(1, ne - tail_entries); i < ne; ++i) cfg.encoder_layers[i] = d;
        cfg.decoder_layers.front() = d;
        res.dims.push_back(d);
        try {
            TrainedLoca trained = train_loca(ds, cfg);
            res.val_whitening.push_back(trained.best_val_whitening);
        } catch (const std::exception& e) {
            std::cerr << "warning: dimension " << d << " failed to train: " << e.what() << "\n";
            res.val_whitening.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    double min_loss = std::numeric_limits<double>::infinity();
    for (double v : res.val_whitening)
        if (std::isfinite(v)) min_loss = std::min(min_loss, v);
    if (!std::isfinite(min_loss))
        throw NumericError("estimate_embedding_dim: every dimension failed to train");
    for (size_t i = 0; i < res.val_whitening.size(); ++i) {
        if (std::isfinite(res.val_whitening[i]) && res.val_whitening[i] <= 2.0 * min_loss) {
            res.selected = res.dims[i];
            break;
        }
    }
    return res;
}

} // namespace loca
