// Reproduction harness: dataset generators, LOCA training, spectral baselines,
// evaluation, and end-to-end experiment bundles. Exit codes: 0 success,
// 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <Eigen/Core>
#include <filesystem>
#include <iostream>

#include "loca/eval.hpp"
#include "loca/experiments.hpp"
#include "loca/generators.hpp"
#include "loca/losses.hpp"
#include "loca/parallel.hpp"
#include "loca/rng.hpp"
#include "loca/spectral.hpp"
#include "loca/train.hpp"

namespace fs = std::filesystem;
using namespace loca;

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_input(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("input file does not exist: '" + path + "'");
}

std::vector<int> int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

struct GenerateArgs {
    std::string kind;
    std::string out;
    int n = 2000, m = 200;
    double sigma = 0.01;
    uint64_t seed = 1;
    // sphere
    int lattice = 800;
    double alpha_min = kPi / 3, alpha_max = 5 * kPi / 6;
    bool exclude_min = false, exclude_max = false;
    // wifi
    double radius = 0.5, eps = 600;
    std::string plan_file;
    std::string save_plan;
};

int cmd_generate(const GenerateArgs& a) {
    BurstDataset ds;
    if (a.kind == "mushroom") {
        ds = gen::sample_plane_bursts(gen::Region2D::unit_square(), a.n, a.m, a.sigma, a.seed);
    } else if (a.kind == "frame") {
        auto region = gen::Region2D::frame({0, 0}, {1, 1}, {0.1, 0.1}, {0.9, 0.9});
        ds = gen::sample_plane_bursts(region, a.n, a.m, a.sigma, a.seed);
    } else if (a.kind == "sphere") {
        gen::AlphaRange range{a.alpha_min, a.alpha_max, !a.exclude_min, !a.exclude_max};
        ds = gen::sphere_bursts(range, a.lattice, a.m, a.sigma, a.seed);
    } else if (a.kind == "wifi") {
        gen::FloorPlan plan;
        if (a.plan_file.empty()) {
            plan = gen::default_floor_plan();
        } else {
            require_input(a.plan_file);
            plan = gen::load_floor_plan(a.plan_file);
        }
        if (!a.save_plan.empty()) gen::save_floor_plan(plan, a.save_plan);
        const int m = a.m == 200 ? 6 : a.m; // wifi default cloud size is 6 receivers
        ds = gen::wifi_simulate(plan, a.n == 2000 ? 4000 : a.n, m, a.radius, a.eps, a.seed);
    } else {
        throw ConfigError("unknown generator '" + a.kind + "'");
    }
    save_dataset(ds, a.out);
    nlohmann::json manifest;
    manifest["command"] = "generate " + a.kind;
    manifest["seed"] = a.seed;
    manifest["n_clouds"] = ds.n_clouds;
    manifest["cloud_size"] = ds.cloud_size;
    manifest["ambient_dim"] = ds.ambient_dim();
    manifest["latent_dim"] = ds.latent_dim();
    char sum[24];
    std::snprintf(sum, sizeof(sum), "%016llx",
                  static_cast<unsigned long long>(exp::fnv1a64_file(a.out)));
    manifest["files"] = {{{"name", a.out}, {"fnv1a64", sum},
                          {"bytes", static_cast<long>(fs::file_size(a.out))}}};
    std::ofstream os(a.out + ".manifest.json");
    os << manifest.dump(2) << "\n";
    std::cout << "wrote " << a.out << " (" << ds.n_clouds << " clouds of " << ds.cloud_size
              << " points, D=" << ds.ambient_dim() << ")\n";
    return 0;
}

struct TrainArgs {
    std::string dataset;
    std::string out_dir;
    std::string config_file;
    std::string enc_layers, dec_layers;
    std::string enc_act, dec_act;
    std::string lr_schedule;
    int batch_clouds = -1, eval_every = -1, patience = -1, linear_tail = -1;
    long max_epochs = -1;
    double val_fraction = -1;
    uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_train(const TrainArgs& a) {
    require_input(a.dataset);
    BurstDataset ds = load_dataset(a.dataset);

    TrainConfig cfg;
    if (!a.config_file.empty()) {
        require_input(a.config_file);
        cfg = load_train_config(a.config_file);
    } else {
        // architecture defaults follow the planar experiments
        cfg = exp::mushroom_train_preset(ds.ambient_dim());
        cfg.patience = 2000;
        cfg.eval_every = 100;
        cfg.max_epochs_per_stage = 0;
    }
    if (!a.enc_layers.empty()) cfg.encoder_layers = int_list(a.enc_layers);
    if (!a.dec_layers.empty()) cfg.decoder_layers = int_list(a.dec_layers);
    if (!a.enc_act.empty()) cfg.encoder_activation = parse_activation(a.enc_act);
    if (!a.dec_act.empty()) cfg.decoder_activation = parse_activation(a.dec_act);
    if (!a.lr_schedule.empty()) cfg.lr_schedule = double_list(a.lr_schedule);
    if (a.batch_clouds > 0) cfg.batch_clouds = a.batch_clouds;
    if (a.eval_every > 0) cfg.eval_every = a.eval_every;
    if (a.patience > 0) cfg.patience = a.patience;
    if (a.linear_tail >= 0) cfg.linear_tail = a.linear_tail;
    if (a.max_epochs >= 0) cfg.max_epochs_per_stage = a.max_epochs;
    if (a.val_fraction > 0) cfg.validation_fraction = a.val_fraction;
    if (a.seed_set) cfg.seed = a.seed;

    exp::RunDir dir(a.out_dir);
    TrainedLoca model = train_loca(ds, cfg);
    exp::save_trained(model, dir);
    save_train_config(cfg, dir.file("train_config.txt"));
    dir.write_manifest({{"command", "train"}, {"dataset", a.dataset}, {"seed", cfg.seed}});
    std::cout << "trained " << model.epochs_run << " epochs; best validation losses: whitening "
              << model.best_val_whitening << ", reconstruction " << model.best_val_reconstruction
              << "\n";
    return 0;
}

int cmd_embed(const std::string& encoder_file, const std::string& dataset_file,
              const std::string& out) {
    require_input(encoder_file);
    require_input(dataset_file);
    MLPModel enc = load_mlp(encoder_file);
    BurstDataset ds = load_dataset(dataset_file);
    exp::write_embedding_csv(mlp_forward(enc, ds.anchors), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_decode(const std::string& decoder_file, const std::string& codes_file,
               const std::string& out) {
    require_input(decoder_file);
    require_input(codes_file);
    MLPModel dec = load_mlp(decoder_file);
    Matrix codes = exp::read_embedding_csv(codes_file);
    exp::write_embedding_csv(mlp_forward(dec, codes), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_baseline(const std::string& kind, const std::string& dataset_file,
                 const std::string& out_dir, int dim, int t, int rank, double tol) {
    require_input(dataset_file);
    BurstDataset ds = load_dataset(dataset_file);
    exp::RunDir dir(out_dir);
    spectral::SpectralEmbedding se;
    if (kind == "dm") se = spectral::dm_embed(ds.anchors, dim, t);
    else se = spectral::adm_embed(ds, dim, t, {.rank = rank, .rel_tol = tol});
    exp::write_embedding_csv(se.coords, dir.file(kind + "_embedding.csv"));

    nlohmann::json info;
    info["method"] = kind;
    info["epsilon"] = exp::jnum(se.epsilon);
    info["t"] = se.t;
    nlohmann::json evs = nlohmann::json::array();
    for (long i = 0; i < se.eigenvalues.size(); ++i) evs.push_back(exp::jnum(se.eigenvalues(i)));
    info["eigenvalues"] = evs;
    if (ds.latents) {
        const double scale = eval::optimal_scale(se.coords, *ds.latents,
                                                 {ds.n_clouds > 2000 ? 200000 : 0, 0xE7A1});
        auto rep = eval::stress(se.coords, *ds.latents, scale,
                                {ds.n_clouds > 2000 ? 200000 : 0, 0xE7A1});
        info["stress"] = exp::jnum(rep.stress);
        info["scale"] = exp::jnum(scale);
    }
    dir.write_json("results.json", info);
    dir.write_manifest({{"command", "baseline " + kind}, {"dataset", dataset_file}});
    std::cout << "epsilon " << se.epsilon << ", top eigenvalues";
    for (long i = 0; i < se.eigenvalues.size(); ++i) std::cout << " " << se.eigenvalues(i);
    std::cout << "\n";
    return 0;
}

int cmd_evaluate(const std::string& embedding_file, const std::string& dataset_file,
                 const std::string& out_dir, bool no_scale, long max_pairs, uint64_t pair_seed) {
    require_input(embedding_file);
    require_input(dataset_file);
    Matrix emb = exp::read_embedding_csv(embedding_file);
    BurstDataset ds = load_dataset(dataset_file);
    if (!ds.latents) throw DataError("dataset has no ground-truth latents to evaluate against");

    exp::RunDir dir(out_dir);
    eval::PairSampling sampling{max_pairs, pair_seed};
    const double scale = no_scale ? 1.0 : eval::optimal_scale(emb, *ds.latents, sampling);
    auto rep = eval::stress(emb, *ds.latents, scale, sampling);
    eval::export_distance_scatter(emb, *ds.latents, scale, 20000, pair_seed,
                                  dir.file("scatter.csv"));
    nlohmann::json j;
    j["stress"] = exp::jnum(rep.stress);
    j["rms_distance_error"] = exp::jnum(rep.rms_distance_error);
    j["scale"] = exp::jnum(rep.scale_applied);
    j["n_pairs"] = rep.n_pairs_used;
    dir.write_json("stress_report.json", j);
    dir.write_manifest({{"command", "evaluate"}, {"embedding", embedding_file}});
    std::cout << "stress " << rep.stress << " (scale " << rep.scale_applied << ", "
              << rep.n_pairs_used << " pairs)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Eigen::setNbThreads(max_threads());

    CLI::App app{"LOCA: burst-sampled isometric embeddings, spectral baselines, and the "
                 "synthetic experiment suite"};
    app.require_subcommand(1);

    GenerateArgs ga;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic burst dataset");
    generate->add_option("kind", ga.kind, "mushroom|frame|sphere|wifi")->required();
    generate->add_option("--out", ga.out, "output dataset file")->required();
    generate->add_option("--n", ga.n, "anchor count (wifi default 4000)");
    generate->add_option("--m", ga.m, "cloud size (wifi default 6)");
    generate->add_option("--sigma", ga.sigma, "burst scale");
    generate->add_option("--seed", ga.seed, "rng seed");
    generate->add_option("--lattice", ga.lattice, "sphere: Fibonacci lattice size");
    generate->add_option("--alpha-min", ga.alpha_min, "sphere: min polar angle");
    generate->add_option("--alpha-max", ga.alpha_max, "sphere: max polar angle");
    generate->add_flag("--exclude-min", ga.exclude_min, "sphere: open lower alpha bound");
    generate->add_flag("--exclude-max", ga.exclude_max, "sphere: open upper alpha bound");
    generate->add_option("--radius", ga.radius, "wifi: receiver circle radius (pixels)");
    generate->add_option("--eps", ga.eps, "wifi: RBF scale (pixels)");
    generate->add_option("--plan", ga.plan_file, "wifi: floor plan file (default: built-in)");
    generate->add_option("--save-plan", ga.save_plan, "wifi: write the floor plan used");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a LOCA encoder/decoder pair");
    train->add_option("--dataset", ta.dataset)->required();
    train->add_option("--out", ta.out_dir, "output directory")->required();
    train->add_option("--config", ta.config_file, "key-value training config file");
    train->add_option("--encoder-layers", ta.enc_layers, "comma list incl. input dim");
    train->add_option("--decoder-layers", ta.dec_layers);
    train->add_option("--encoder-activation", ta.enc_act, "tanh|leaky_relu");
    train->add_option("--decoder-activation", ta.dec_act);
    train->add_option("--lr-schedule", ta.lr_schedule, "comma list of learning rates");
    train->add_option("--batch-clouds", ta.batch_clouds);
    train->add_option("--eval-every", ta.eval_every);
    train->add_option("--patience", ta.patience);
    train->add_option("--linear-tail", ta.linear_tail);
    train->add_option("--max-epochs", ta.max_epochs, "per-stage cap, 0 = unlimited");
    train->add_option("--val-fraction", ta.val_fraction);
    train->add_option("--seed", ta.seed)->each([&](const std::string&) { ta.seed_set = true; });

    std::string embed_enc, embed_ds, embed_out;
    auto* embed = app.add_subcommand("embed", "Embed dataset anchors with a trained encoder");
    embed->add_option("--encoder", embed_enc)->required();
    embed->add_option("--dataset", embed_ds)->required();
    embed->add_option("--out", embed_out)->required();

    std::string dec_model, dec_codes, dec_out;
    auto* decode = app.add_subcommand("decode", "Decode embedding-space codes");
    decode->add_option("--decoder", dec_model)->required();
    decode->add_option("--codes", dec_codes, "CSV with index,coord_* columns")->required();
    decode->add_option("--out", dec_out)->required();

    std::string bl_kind, bl_ds, bl_out;
    int bl_dim = 2, bl_t = 1, bl_rank = 0;
    double bl_tol = 1e-3;
    auto* baseline = app.add_subcommand("baseline", "Diffusion Maps / Anisotropic DM embedding");
    baseline->add_option("kind", bl_kind, "dm|adm")->required()
        ->check(CLI::IsMember({"dm", "adm"}));
    baseline->add_option("--dataset", bl_ds)->required();
    baseline->add_option("--out", bl_out, "output directory")->required();
    baseline->add_option("--dim", bl_dim);
    baseline->add_option("--t", bl_t);
    baseline->add_option("--rank", bl_rank, "adm: pseudo-inverse rank (0 = tolerance)");
    baseline->add_option("--tol", bl_tol, "adm: relative eigenvalue tolerance");

    std::string ev_emb, ev_ds, ev_out;
    bool ev_no_scale = false;
    long ev_pairs = 0;
    uint64_t ev_pair_seed = 0xE7A1;
    auto* evaluate = app.add_subcommand("evaluate", "Stress of an embedding against latents");
    evaluate->add_option("--embedding", ev_emb)->required();
    evaluate->add_option("--dataset", ev_ds)->required();
    evaluate->add_option("--out", ev_out, "output directory")->required();
    evaluate->add_flag("--no-scale", ev_no_scale, "skip the optimal global scale");
    evaluate->add_option("--max-pairs", ev_pairs, "pair subsample size (0 = all pairs)");
    evaluate->add_option("--pair-seed", ev_pair_seed);

    std::string ex_name, ex_out, ex_reuse;
    exp::ExperimentOptions ex_opts;
    int ex_n = -1, ex_m = -1;
    double ex_sigma = -1;
    bool ex_no_baselines = false;
    auto* experiment = app.add_subcommand("experiment", "End-to-end reproduction pipelines");
    experiment->add_option("name", ex_name,
                           "mushroom|frame_oos|frame_interp|sphere|wifi|dim_sweep_mushroom|"
                           "dim_sweep_sphere|lemma1")
        ->required();
    experiment->add_option("--out", ex_out, "output directory")->required();
    experiment->add_option("--seed", ex_opts.seed);
    experiment->add_option("--reuse", ex_reuse, "frame_interp: reuse a frame_oos run directory");
    experiment->add_option("--n", ex_n, "override anchor/lattice count");
    experiment->add_option("--m", ex_m, "override cloud size");
    experiment->add_option("--sigma", ex_sigma, "override burst scale");
    experiment->add_flag("--no-baselines", ex_no_baselines, "skip DM/A-DM");

    std::string sw_data, sw_out;
    int sw_dmax = 0;
    exp::ExperimentOptions sw_opts;
    int sw_n = -1, sw_m = -1;
    auto* dimsweep = app.add_subcommand("dim-sweep", "Embedding-dimension estimation sweep");
    dimsweep->add_option("--data", sw_data, "mushroom|sphere")->required()
        ->check(CLI::IsMember({"mushroom", "sphere"}));
    dimsweep->add_option("--out", sw_out, "output directory")->required();
    dimsweep->add_option("--d-max", sw_dmax, "default: 4 for mushroom, 5 for sphere");
    dimsweep->add_option("--seed", sw_opts.seed);
    dimsweep->add_option("--n", sw_n);
    dimsweep->add_option("--m", sw_m);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(ga);
        if (train->parsed()) return cmd_train(ta);
        if (embed->parsed()) return cmd_embed(embed_enc, embed_ds, embed_out);
        if (decode->parsed()) return cmd_decode(dec_model, dec_codes, dec_out);
        if (baseline->parsed())
            return cmd_baseline(bl_kind, bl_ds, bl_out, bl_dim, bl_t, bl_rank, bl_tol);
        if (evaluate->parsed())
            return cmd_evaluate(ev_emb, ev_ds, ev_out, ev_no_scale, ev_pairs, ev_pair_seed);
        if (experiment->parsed()) {
            if (ex_n > 0) ex_opts.n = ex_n;
            if (ex_m > 0) ex_opts.m = ex_m;
            if (ex_sigma > 0) ex_opts.sigma = ex_sigma;
            ex_opts.baselines = !ex_no_baselines;
            ex_opts.reuse_dir = ex_reuse;
            if (!ex_reuse.empty()) require_input(ex_reuse);
            exp::RunDir dir(ex_out);
            nlohmann::json res = exp::run_experiment(ex_name, ex_opts, dir);
            std::cout << res.dump(2) << "\n";
            return 0;
        }
        if (dimsweep->parsed()) {
            if (sw_n > 0) sw_opts.n = sw_n;
            if (sw_m > 0) sw_opts.m = sw_m;
            if (sw_dmax <= 0) sw_dmax = sw_data == "sphere" ? 5 : 4;
            exp::RunDir dir(sw_out);
            nlohmann::json res = exp::run_dim_sweep(sw_data, sw_dmax, sw_opts, dir);
            dir.write_json("results.json", res);
            dir.write_manifest({{"experiment", "dim_sweep"}, {"data", sw_data}});
            std::cout << res.dump(2) << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
