#include "loca/experiments.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "loca/eval.hpp"
#include "loca/generators.hpp"
#include "loca/losses.hpp"
#include "loca/rng.hpp"
#include "loca/spectral.hpp"

namespace fs = std::filesystem;

namespace loca::exp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr long kScatterPairs = 20000;
constexpr long kMaxStressPairs = 200000; // pair subsample threshold for N > 2000
constexpr uint64_t kEvalSeed = 0xE7A1;
} // namespace

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

nlohmann::json jnum(double v) {
    if (std::isnan(v)) return nullptr;
    return round12(v);
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "' for checksumming");
    std::ostringstream ss;
    ss << is.rdbuf();
    return fnv1a64(ss.str());
}

RunDir::RunDir(const std::string& path) : path_(path) {
    fs::create_directories(path_);
    lock_path_ = (fs::path(path_) / ".lock").string();
    int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw DataError("output directory '" + path_ +
                        "' is locked by another run (remove .lock if stale)");
    ::close(fd);
}

RunDir::~RunDir() { ::unlink(lock_path_.c_str()); }

std::string RunDir::file(const std::string& name) const {
    return (fs::path(path_) / name).string();
}

void RunDir::write_json(const std::string& name, const nlohmann::json& j) const {
    std::ofstream os(file(name));
    if (!os) throw DataError("cannot open '" + file(name) + "' for writing");
    os << j.dump(2) << "\n";
}

void RunDir::write_manifest(const nlohmann::json& run_info) const {
    nlohmann::json files = nlohmann::json::array();
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(path_)) {
        const std::string name = entry.path().filename().string();
        if (name == ".lock" || name == "manifest.json") continue;
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        char sum[24];
        std::snprintf(sum, sizeof(sum), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(file(name))));
        files.push_back({{"name", name},
                         {"bytes", static_cast<long>(fs::file_size(file(name)))},
                         {"fnv1a64", sum}});
    }
    nlohmann::json manifest;
    manifest["run"] = run_info;
    manifest["files"] = files;
    write_json("manifest.json", manifest);
}

void write_embedding_csv(const Matrix& coords, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << "index";
    for (long c = 0; c < coords.cols(); ++c) os << ",coord_" << c + 1;
    os << "\n";
    char buf[40];
    for (long r = 0; r < coords.rows(); ++r) {
        os << r;
        for (long c = 0; c < coords.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), ",%.12g", coords(r, c));
            os << buf;
        }
        os << "\n";
    }
}

Matrix read_embedding_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open embedding file '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw DataError("'" + path + "' is empty");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> row;
        bool first = true;
        while (std::getline(ss, tok, ',')) {
            if (first) { first = false; continue; } // index column
            row.push_back(std::stod(tok));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("'" + path + "' has no data rows");
    Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw DataError("'" + path + "' has ragged rows");
        for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

void save_trained(const TrainedLoca& model, const RunDir& dir) {
    save_mlp(model.encoder, dir.file("encoder.mlp"));
    save_mlp(model.decoder, dir.file("decoder.mlp"));
    nlohmann::json meta;
    meta["sigma_used"] = jnum(model.sigma_used);
    meta["embedding_dim"] = model.embedding_dim;
    meta["seed"] = model.seed;
    meta["epochs_run"] = model.epochs_run;
    meta["best_val_whitening"] = jnum(model.best_val_whitening);
    meta["best_val_reconstruction"] = jnum(model.best_val_reconstruction);
    dir.write_json("loca_model.json", meta);
    write_history_csv(model.history, dir.file("history.csv"));
}

TrainedLoca load_trained(const std::string& dir) {
    const fs::path p(dir);
    std::ifstream is((p / "loca_model.json").string());
    if (!is) throw DataError("no trained model in '" + dir + "' (loca_model.json missing)");
    nlohmann::json meta = nlohmann::json::parse(is);
    TrainedLoca model;
    model.encoder = load_mlp((p / "encoder.mlp").string());
    model.decoder = load_mlp((p / "decoder.mlp").string());
    model.sigma_used = meta.at("sigma_used").get<double>();
    model.embedding_dim = meta.at("embedding_dim").get<int>();
    model.seed = meta.at("seed").get<uint64_t>();
    model.epochs_run = meta.value("epochs_run", 0L);
    model.best_val_whitening = meta.value("best_val_whitening", 0.0);
    model.best_val_reconstruction = meta.value("best_val_reconstruction", 0.0);
    return model;
}

TrainConfig mushroom_train_preset(int ambient_dim) {
    TrainConfig cfg;
    cfg.encoder_layers = {ambient_dim, 50, 50, 2, 2};
    cfg.decoder_layers = {2, 50, 50, ambient_dim, ambient_dim};
    cfg.encoder_activation = Activation::Tanh;
    cfg.decoder_activation = Activation::Tanh;
    // Small cloud batches trade gradient noise for ~20x more optimizer steps
    // per pass at the same flop cost; the annealed schedule absorbs the noise.
    cfg.batch_clouds = 10;
    cfg.lr_schedule = {1e-3, 3e-4, 1e-4, 3e-5};
    cfg.eval_every = 25;
    cfg.patience = 250;
    cfg.max_epochs_per_stage = 650;
    cfg.init_bias_spread = 1.0;
    return cfg;
}

TrainConfig sphere_train_preset() {
    TrainConfig cfg;
    cfg.encoder_layers = {2, 100, 100, 3, 3};
    cfg.decoder_layers = {3, 100, 100, 2, 2};
    cfg.encoder_activation = Activation::Tanh;
    cfg.decoder_activation = Activation::LeakyRelu;
    cfg.batch_clouds = 10;
    cfg.lr_schedule = {1e-3, 3e-4, 1e-4};
    cfg.eval_every = 25;
    cfg.patience = 200;
    cfg.max_epochs_per_stage = 400;
    cfg.init_bias_spread = 1.0;
    return cfg;
}

TrainConfig wifi_train_preset(int n_transmitters) {
    TrainConfig cfg;
    cfg.encoder_layers = {n_transmitters, 200, 200, 2, 2};
    cfg.decoder_layers = {2, 200, 200, n_transmitters, n_transmitters};
    cfg.encoder_activation = Activation::Tanh;
    cfg.decoder_activation = Activation::LeakyRelu;
    cfg.batch_clouds = 50;
    cfg.lr_schedule = {1e-3, 3e-4, 1e-4};
    cfg.eval_every = 25;
    cfg.patience = 200;
    cfg.max_epochs_per_stage = 400;
    cfg.init_bias_spread = 1.0;
    return cfg;
}

namespace {

eval::PairSampling sampling_for(long n) {
    if (n <= 2000) return {};
    return {kMaxStressPairs, kEvalSeed};
}

nlohmann::json stress_entry(const Matrix& embedding, const Matrix& latents) {
    const auto sampling = sampling_for(embedding.rows());
    const double scale = eval::optimal_scale(embedding, latents, sampling);
    const auto rep = eval::stress(embedding, latents, scale, sampling);
    nlohmann::json j;
    j["stress"] = jnum(rep.stress);
    j["rms_distance_error"] = jnum(rep.rms_distance_error);
    j["scale"] = jnum(rep.scale_applied);
    j["n_pairs"] = rep.n_pairs_used;
    j["n_points"] = static_cast<long>(embedding.rows());
    return j;
}

nlohmann::json loca_summary(const TrainedLoca& model) {
    nlohmann::json j;
    j["sigma_used"] = jnum(model.sigma_used);
    j["epochs_run"] = model.epochs_run;
    j["best_val_whitening"] = jnum(model.best_val_whitening);
    j["best_val_reconstruction"] = jnum(model.best_val_reconstruction);
    return j;
}

TrainedLoca train_with(const ExperimentOptions& opts, const BurstDataset& ds,
                       TrainConfig preset) {
    TrainConfig cfg = opts.train ? *opts.train : preset;
    cfg.seed = opts.seed;
    return train_loca(ds, cfg);
}

} // namespace

nlohmann::json run_mushroom(const ExperimentOptions& opts, const RunDir& dir) {
    const int n = opts.n.value_or(2000), m = opts.m.value_or(200);
    const double sigma = opts.sigma.value_or(0.01);
    auto ds = gen::sample_plane_bursts(gen::Region2D::unit_square(), n, m, sigma,
                                       derive_seed(opts.seed, 10));
    save_dataset(ds, dir.file("dataset.bds"));

    TrainedLoca model = train_with(opts, ds, mushroom_train_preset(ds.ambient_dim()));
    save_trained(model, dir);

    nlohmann::json res;
    res["experiment"] = "mushroom";
    res["seed"] = opts.seed;
    res["n"] = n;
    res["m"] = m;
    res["sigma"] = jnum(sigma);

    Matrix emb = encode(model, ds.anchors);
    write_embedding_csv(emb, dir.file("loca_embedding.csv"));
    res["loca"] = stress_entry(emb, *ds.latents);
    res["loca"].update(loca_summary(model));
    eval::export_distance_scatter(emb, *ds.latents, res["loca"]["scale"].get<double>(),
                                  kScatterPairs, kEvalSeed, dir.file("loca_scatter.csv"));

    if (opts.baselines) {
        const int d = 2;
        auto dm = spectral::dm_embed(ds.anchors, d);
        res["dm"] = stress_entry(dm.coords, *ds.latents);
        res["dm"]["epsilon"] = jnum(dm.epsilon);
        eval::export_distance_scatter(dm.coords, *ds.latents, res["dm"]["scale"].get<double>(),
                                      kScatterPairs, kEvalSeed, dir.file("dm_scatter.csv"));
        auto adm = spectral::adm_embed(ds, d, 1, {.rank = 2});
        res["adm"] = stress_entry(adm.coords, *ds.latents);
        res["adm"]["epsilon"] = jnum(adm.epsilon);
        eval::export_distance_scatter(adm.coords, *ds.latents, res["adm"]["scale"].get<double>(),
                                      kScatterPairs, kEvalSeed, dir.file("adm_scatter.csv"));
    }
    return res;
}

namespace {

// 0 = interpolation (inside the hole), 1 = frame, 2 = extrapolation
int frame_region_of(double x, double y) {
    if (x > 0.1 && x < 0.9 && y > 0.1 && y < 0.9) return 0;
    if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) return 1;
    return 2;
}

} // namespace

nlohmann::json run_frame_oos(const ExperimentOptions& opts, const RunDir& dir) {
    const int n = opts.n.value_or(2000), m = opts.m.value_or(200);
    const double sigma = opts.sigma.value_or(0.01);
    auto region = gen::Region2D::frame({0, 0}, {1, 1}, {0.1, 0.1}, {0.9, 0.9});
    auto ds = gen::sample_plane_bursts(region, n, m, sigma, derive_seed(opts.seed, 10));
    save_dataset(ds, dir.file("dataset.bds"));

    TrainedLoca model = train_with(opts, ds, mushroom_train_preset(ds.ambient_dim()));
    save_trained(model, dir);

    nlohmann::json res;
    res["experiment"] = "frame_oos";
    res["seed"] = opts.seed;
    res["loca"] = loca_summary(model);
    res["train"] = stress_entry(encode(model, ds.anchors), *ds.latents);

    // test set over [-0.025, 1.025]^2
    const int n_test = 20000;
    Matrix test_latents(n_test, 2);
    Rng rng(derive_seed(opts.seed, 20));
    for (int i = 0; i < n_test; ++i) {
        test_latents(i, 0) = rng.uniform(-0.025, 1.025);
        test_latents(i, 1) = rng.uniform(-0.025, 1.025);
    }
    Matrix test_emb = encode(model, gen::f1_transform(test_latents));

    const char* names[3] = {"interpolation", "frame", "extrapolation"};
    nlohmann::json regions;
    for (int r = 0; r < 3; ++r) {
        std::vector<long> idx;
        for (int i = 0; i < n_test; ++i)
            if (frame_region_of(test_latents(i, 0), test_latents(i, 1)) == r) idx.push_back(i);
        Matrix lat(static_cast<long>(idx.size()), 2), emb(static_cast<long>(idx.size()), 2);
        for (size_t i = 0; i < idx.size(); ++i) {
            lat.row(static_cast<long>(i)) = test_latents.row(idx[i]);
            emb.row(static_cast<long>(i)) = test_emb.row(idx[i]);
        }
        regions[names[r]] = stress_entry(emb, lat);
    }
    res["regions"] = regions;
    write_embedding_csv(test_emb, dir.file("test_embedding.csv"));
    return res;
}

nlohmann::json run_frame_interp(const ExperimentOptions& opts, const RunDir& dir) {
    TrainedLoca model;
    nlohmann::json res;
    res["experiment"] = "frame_interp";
    res["seed"] = opts.seed;
    if (!opts.reuse_dir.empty()) {
        model = load_trained(opts.reuse_dir);
        res["reused_model"] = true;
    } else {
        const int n = opts.n.value_or(2000), m = opts.m.value_or(200);
        const double sigma = opts.sigma.value_or(0.01);
        auto region = gen::Region2D::frame({0, 0}, {1, 1}, {0.1, 0.1}, {0.9, 0.9});
        auto ds = gen::sample_plane_bursts(region, n, m, sigma, derive_seed(opts.seed, 10));
        model = train_with(opts, ds, mushroom_train_preset(ds.ambient_dim()));
        save_trained(model, dir);
        res["reused_model"] = false;
    }
    res["loca"] = loca_summary(model);

    const int n_boundary = 400;
    const int n_steps = 9;
    auto fi = gen::frame_interpolation_pairs(n_boundary, n_steps);
    Matrix boundary_codes = mlp_forward(model.encoder, fi.boundary_obs);

    std::ofstream pts(dir.file("interpolation_points.csv"));
    pts << "latent_x,latent_y,target_x,target_y,decoded_x,decoded_y\n";
    char buf[160];

    double sum = 0, sum_sq = 0, max_err = 0;
    long count = 0;
    for (const auto& seg : fi.segments) {
        Matrix codes(seg.latent.rows(), boundary_codes.cols());
        const Eigen::RowVectorXd ca = boundary_codes.row(seg.a);
        const Eigen::RowVectorXd cb = boundary_codes.row(seg.b);
        for (long s = 0; s < codes.rows(); ++s) {
            const double t = static_cast<double>(s + 1) / (n_steps + 1);
            codes.row(s) = ca + t * (cb - ca);
        }
        Matrix decoded = mlp_forward(model.decoder, codes);
        for (long s = 0; s < codes.rows(); ++s) {
            const double err = (decoded.row(s) - seg.obs.row(s)).squaredNorm();
            sum += err;
            sum_sq += err * err;
            max_err = std::max(max_err, err);
            ++count;
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                          seg.latent(s, 0), seg.latent(s, 1), seg.obs(s, 0), seg.obs(s, 1),
                          decoded(s, 0), decoded(s, 1));
            pts << buf;
        }
    }
    const double mean = sum / count;
    res["interpolation"] = {
        {"mse_mean", jnum(mean)},
        {"mse_std", jnum(std::sqrt(std::max(0.0, sum_sq / count - mean * mean)))},
        {"mse_max", jnum(max_err)},
        {"n_points", count},
        {"n_boundary", n_boundary},
        {"n_steps", n_steps},
    };
    return res;
}

nlohmann::json run_sphere(const ExperimentOptions& opts, const RunDir& dir) {
    const int n_lattice = opts.n.value_or(800), m = opts.m.value_or(400);
    const double sigma = opts.sigma.value_or(0.01);
    const gen::AlphaRange train_range{kPi / 3, 5 * kPi / 6, true, true};
    auto ds = gen::sphere_bursts(train_range, n_lattice, m, sigma, derive_seed(opts.seed, 10));
    save_dataset(ds, dir.file("dataset.bds"));

    TrainConfig preset = sphere_train_preset();
    TrainedLoca model = train_with(opts, ds, preset);
    save_trained(model, dir);

    nlohmann::json res;
    res["experiment"] = "sphere";
    res["seed"] = opts.seed;
    res["n_clouds"] = ds.n_clouds;
    res["m"] = m;
    res["sigma"] = jnum(sigma);

    Matrix emb = encode(model, ds.anchors);
    write_embedding_csv(emb, dir.file("loca_embedding.csv"));
    res["loca"] = stress_entry(emb, *ds.latents);
    res["loca"].update(loca_summary(model));
    eval::export_distance_scatter(emb, *ds.latents, res["loca"]["scale"].get<double>(),
                                  kScatterPairs, kEvalSeed, dir.file("loca_scatter.csv"));

    // unseen lower cap
    const gen::AlphaRange cap_range{5 * kPi / 6, kPi, false, true};
    const Matrix lattice = gen::fibonacci_sphere(n_lattice);
    std::vector<long> cap_idx;
    for (long i = 0; i < lattice.rows(); ++i) {
        const double alpha = std::acos(std::clamp(lattice(i, 2), -1.0, 1.0));
        if (cap_range.contains(alpha)) cap_idx.push_back(i);
    }
    Matrix cap_latents(static_cast<long>(cap_idx.size()), 3);
    for (size_t i = 0; i < cap_idx.size(); ++i)
        cap_latents.row(static_cast<long>(i)) = lattice.row(cap_idx[i]);
    Matrix cap_emb = encode(model, gen::stereographic_project(cap_latents));
    res["cap"] = stress_entry(cap_emb, cap_latents);

    if (opts.baselines) {
        const int d = 3;
        auto dm = spectral::dm_embed(ds.anchors, d);
        res["dm"] = stress_entry(dm.coords, *ds.latents);
        res["dm"]["epsilon"] = jnum(dm.epsilon);
        auto adm = spectral::adm_embed(ds, d, 1, {.rank = 2});
        res["adm"] = stress_entry(adm.coords, *ds.latents);
        res["adm"]["epsilon"] = jnum(adm.epsilon);
    }
    return res;
}

nlohmann::json run_wifi(const ExperimentOptions& opts, const RunDir& dir) {
    auto plan = gen::default_floor_plan();
    gen::save_floor_plan(plan, dir.file("floorplan.txt"));
    const int n = opts.n.value_or(4000), m = opts.m.value_or(6);
    const double radius = 0.5, eps = 600;
    auto ds = gen::wifi_simulate(plan, n, m, radius, eps, derive_seed(opts.seed, 10));
    save_dataset(ds, dir.file("dataset.bds"));

    TrainedLoca model =
        train_with(opts, ds, wifi_train_preset(static_cast<int>(plan.transmitters.rows())));
    save_trained(model, dir);

    nlohmann::json res;
    res["experiment"] = "wifi";
    res["seed"] = opts.seed;
    res["n"] = n;
    res["m"] = m;
    res["radius"] = jnum(radius);
    res["eps"] = jnum(eps);
    res["diagonal"] = jnum(plan.diagonal());

    auto position_error = [&](const Matrix& emb, const std::string& csv_name) {
        auto align = eval::procrustes_calibrate(emb, *ds.latents, /*with_scale=*/true);
        Matrix aligned = align.apply(emb);
        write_embedding_csv(aligned, dir.file(csv_name));
        const double mean_err = (aligned - *ds.latents).rowwise().norm().mean();
        nlohmann::json j;
        j["mean_position_error"] = jnum(mean_err);
        j["pct_of_diagonal"] = jnum(100.0 * mean_err / plan.diagonal());
        nlohmann::json rot = nlohmann::json::array();
        for (long r = 0; r < align.rotation.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (long c = 0; c < align.rotation.cols(); ++c) row.push_back(jnum(align.rotation(r, c)));
            rot.push_back(row);
        }
        j["calibration"] = {{"rotation", rot},
                            {"shift", {jnum(align.shift(0)), jnum(align.shift(1))}},
                            {"scale", jnum(align.scale)},
                            {"residual_mse", jnum(align.residual_mse)}};
        return j;
    };

    Matrix emb = encode(model, ds.anchors);
    res["loca"] = position_error(emb, "loca_positions.csv");
    res["loca"].update(loca_summary(model));

    if (opts.baselines) {
        auto dm = spectral::dm_embed(ds.anchors, 2);
        res["dm"] = position_error(dm.coords, "dm_positions.csv");
        res["dm"]["epsilon"] = jnum(dm.epsilon);
    }
    return res;
}

nlohmann::json run_dim_sweep(const std::string& data_kind, int d_max,
                             const ExperimentOptions& opts, const RunDir& dir) {
    BurstDataset ds;
    TrainConfig base;
    if (data_kind == "mushroom") {
        ds = gen::sample_plane_bursts(gen::Region2D::unit_square(), opts.n.value_or(600),
                                      opts.m.value_or(100), opts.sigma.value_or(0.01),
                                      derive_seed(opts.seed, 10));
        base = mushroom_train_preset(ds.ambient_dim());
        base.batch_clouds = 100;
    } else if (data_kind == "sphere") {
        const gen::AlphaRange train_range{kPi / 3, 5 * kPi / 6, true, true};
        ds = gen::sphere_bursts(train_range, opts.n.value_or(800), opts.m.value_or(100),
                                opts.sigma.value_or(0.01), derive_seed(opts.seed, 10));
        base = sphere_train_preset();
    } else {
        throw ConfigError("dim-sweep: unknown dataset kind '" + data_kind + "'");
    }
    if (opts.train) {
        base = *opts.train;
    } else {
        // shortened schedule: single rate, tight patience
        base.lr_schedule = {1e-3};
        base.eval_every = 25;
        base.patience = 150;
        base.max_epochs_per_stage = 400;
        base.batch_clouds = 25;
    }
    base.seed = opts.seed;

    auto sweep = estimate_embedding_dim(ds, d_max, base);

    nlohmann::json res;
    res["experiment"] = "dim_sweep";
    res["data"] = data_kind;
    res["seed"] = opts.seed;
    res["d_max"] = d_max;
    res["selected_dim"] = sweep.selected;
    nlohmann::json losses = nlohmann::json::array();
    for (size_t i = 0; i < sweep.dims.size(); ++i)
        losses.push_back({{"dim", sweep.dims[i]}, {"val_whitening", jnum(sweep.val_whitening[i])}});
    res["losses"] = losses;

    std::ofstream csv(dir.file("dim_sweep.csv"));
    csv << "dim,val_whitening\n";
    char buf[48];
    for (size_t i = 0; i < sweep.dims.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g\n", sweep.dims[i], sweep.val_whitening[i]);
        csv << buf;
    }
    return res;
}

nlohmann::json run_lemma1(const ExperimentOptions& opts, const RunDir& dir) {
    nlohmann::json res;
    res["experiment"] = "lemma1";
    res["seed"] = opts.seed;

    Matrix a(3, 2);
    a << 2.0, 0.0, 0.0, 0.5, 1.0, 1.0;
    Vector x0_lin(2);
    x0_lin << 0.3, -0.2;

    const std::vector<long> m_grid = {1000, 10000, 100000};
    nlohmann::json lin;
    lin["m"] = m_grid;
    nlohmann::json lin_err = nlohmann::json::array();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m_grid.size(); ++i) {
        const double err = eval::lemma1_check(eval::MapKind::Linear, x0_lin, 0.1, m_grid[i],
                                              derive_seed(opts.seed, 30 + i), &a);
        lin_err.push_back(jnum(err));
        const double lx = std::log(static_cast<double>(m_grid[i])), ly = std::log(err);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double nm = static_cast<double>(m_grid.size());
    lin["rel_error"] = lin_err;
    lin["loglog_slope"] = jnum((nm * sxy - sx * sy) / (nm * sxx - sx * sx));
    res["linear"] = lin;

    Vector x0_f1(2);
    x0_f1 << 0.5, 0.5;
    const double e_big =
        eval::lemma1_check(eval::MapKind::F1, x0_f1, 0.02, 100000, derive_seed(opts.seed, 40));
    const double e_small =
        eval::lemma1_check(eval::MapKind::F1, x0_f1, 0.01, 100000, derive_seed(opts.seed, 41));
    res["f1"] = {{"sigma", {0.02, 0.01}},
                 {"rel_error", {jnum(e_big), jnum(e_small)}},
                 {"error_ratio", jnum(e_big / e_small)}};

    Vector x0_st(3);
    x0_st << 0.6, 0.3, -0.74162;
    const double e_st = eval::lemma1_check(eval::MapKind::Stereographic, x0_st, 0.01, 100000,
                                           derive_seed(opts.seed, 42));
    res["stereographic"] = {{"sigma", 0.01}, {"rel_error", jnum(e_st)}};

    std::ofstream csv(dir.file("lemma1.csv"));
    csv << "map,sigma,m,rel_error\n";
    char buf[96];
    for (size_t i = 0; i < m_grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "linear,0.1,%ld,%.12g\n", m_grid[i],
                      lin_err[i].get<double>());
        csv << buf;
    }
    std::snprintf(buf, sizeof(buf), "f1,0.02,100000,%.12g\n", e_big);
    csv << buf;
    std::snprintf(buf, sizeof(buf), "f1,0.01,100000,%.12g\n", e_small);
    csv << buf;
    std::snprintf(buf, sizeof(buf), "stereographic,0.01,100000,%.12g\n", e_st);
    csv << buf;
    return res;
}

nlohmann::json run_experiment(const std::string& name, const ExperimentOptions& opts,
                              const RunDir& dir) {
    nlohmann::json res;
    if (name == "mushroom") res = run_mushroom(opts, dir);
    else if (name == "frame_oos") res = run_frame_oos(opts, dir);
    else if (name == "frame_interp") res = run_frame_interp(opts, dir);
    else if (name == "sphere") res = run_sphere(opts, dir);
    else if (name == "wifi") res = run_wifi(opts, dir);
    else if (name == "dim_sweep_mushroom") res = run_dim_sweep("mushroom", 4, opts, dir);
    else if (name == "dim_sweep_sphere") res = run_dim_sweep("sphere", 5, opts, dir);
    else if (name == "lemma1") res = run_lemma1(opts, dir);
    else throw ConfigError("unknown experiment '" + name + "'");

    dir.write_json("results.json", res);
    dir.write_manifest({{"experiment", name}, {"seed", opts.seed}});
    return res;
}

} // namespace loca::exp
