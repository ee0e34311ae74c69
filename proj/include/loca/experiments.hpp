#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "loca/train.hpp"

namespace loca::exp {

// Doubles in results files are rounded to 12 significant digits so reruns are
// byte-identical after formatting.
double round12(double v);
nlohmann::json jnum(double v);

uint64_t fnv1a64(const std::string& bytes);
uint64_t fnv1a64_file(const std::string& path);

// Output directory with an exclusive lockfile. write_manifest() lists every
// file present (size + checksum) so reruns are audit-comparable.
class RunDir {
public:
    explicit RunDir(const std::string& path);
    ~RunDir();
    RunDir(const RunDir&) = delete;
    RunDir& operator=(const RunDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const;
    void write_json(const std::string& name, const nlohmann::json& j) const;
    void write_manifest(const nlohmann::json& run_info) const;

private:
    std::string path_;
    std::string lock_path_;
};

void write_embedding_csv(const Matrix& coords, const std::string& path);
Matrix read_embedding_csv(const std::string& path);

// Trained model bundle on disk: encoder.mlp + decoder.mlp + loca_model.json.
void save_trained(const TrainedLoca& model, const RunDir& dir);
TrainedLoca load_trained(const std::string& dir);

// Common size/seed overrides so the full pipelines can also run as scaled-down
// smoke tests.
struct ExperimentOptions {
    uint64_t seed = 1;
    bool baselines = true;
    std::optional<int> n;
    std::optional<int> m;
    std::optional<double> sigma;
    std::optional<TrainConfig> train; // full override of the preset
    std::string reuse_dir;            // frame_interp: reuse a frame_oos run
};

TrainConfig mushroom_train_preset(int ambient_dim);
TrainConfig sphere_train_preset();
TrainConfig wifi_train_preset(int n_transmitters);

nlohmann::json run_mushroom(const ExperimentOptions& opts, const RunDir& dir);
nlohmann::json run_frame_oos(const ExperimentOptions& opts, const RunDir& dir);
nlohmann::json run_frame_interp(const ExperimentOptions& opts, const RunDir& dir);
nlohmann::json run_sphere(const ExperimentOptions& opts, const RunDir& dir);
nlohmann::json run_wifi(const ExperimentOptions& opts, const RunDir& dir);
nlohmann::json run_dim_sweep(const std::string& data_kind, int d_max,
                             const ExperimentOptions& opts, const RunDir& dir);
nlohmann::json run_lemma1(const ExperimentOptions& opts, const RunDir& dir);

// Dispatcher used by the CLI `experiment` subcommand.
nlohmann::json run_experiment(const std::string& name, const ExperimentOptions& opts,
                              const RunDir& dir);

} // namespace loca::exp
