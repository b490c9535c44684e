// Command-line front end: scenario generation, inversion, transfer
// learning, evaluation, and rendering. One run per process; every run
// directory gets a manifest listing its outputs.
//
// Exit codes: 0 ok, 2 bad input, 3 config/fingerprint mismatch,
// 4 numerical failure.

#include "ipdnn/inversion.hpp"
#include "ipdnn/mie.hpp"
#include "ipdnn/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace ipdnn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "1";

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    double alpha = 2.0;
    double beta = 1.0;
    int max_iters = 2000;
    std::string activation = "glow";
    int tx_subset = 0; // 0: all transmitters
    int threads = 0;   // 0: leave Eigen's default
};

void add_common(CLI::App* app, CommonOpts& o)
{
    app->add_option("--config", o.config_path, "JSON file with inversion settings");
    app->add_option("--seed", o.seed, "RNG seed");
    app->add_option("--alpha", o.alpha, "boundary-term weight");
    app->add_option("--beta", o.beta, "TV-term weight");
    app->add_option("--max-iters", o.max_iters, "iteration budget");
    app->add_option("--activation", o.activation, "glow|relu|leakyrelu|tanh|softsign");
    app->add_option("--tx-subset", o.tx_subset, "use only the first K transmitters");
    app->add_option("--threads", o.threads, "cap internal linear-algebra threads");
}

// file settings first, then command-line values override
InversionConfig resolve_config(const CLI::App* app, const CommonOpts& o)
{
    InversionConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) throw parse_error("cannot open " + o.config_path);
        json j;
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw parse_error(o.config_path + ": " + e.what());
        }
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("alpha")) cfg.weights.alpha = j["alpha"].get<double>();
        if (j.contains("beta")) cfg.weights.beta = j["beta"].get<double>();
        if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
        if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
        if (j.contains("activation"))
            cfg.activation = parse_activation(j["activation"].get<std::string>());
        if (j.contains("stop_tol")) cfg.stop_tol = j["stop_tol"].get<double>();
        if (j.contains("threshold_period")) cfg.threshold_period = j["threshold_period"].get<int>();
        if (j.contains("min_update_iter")) cfg.min_update_iter = j["min_update_iter"].get<int>();
        if (j.contains("stability_window"))
            cfg.stability_window = j["stability_window"].get<int>();
    }
    auto given = [&](const std::string& flag) { return app->count(flag) > 0; };
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--alpha")) cfg.weights.alpha = o.alpha;
    if (given("--beta")) cfg.weights.beta = o.beta;
    if (given("--max-iters")) cfg.max_iters = o.max_iters;
    if (given("--activation")) cfg.activation = parse_activation(o.activation);
    cfg.validate();
    return cfg;
}

json config_to_json(const InversionConfig& cfg)
{
    json j;
    j["seed"] = cfg.seed;
    j["alpha"] = cfg.weights.alpha;
    j["beta"] = cfg.weights.beta;
    j["max_iters"] = cfg.max_iters;
    j["lr"] = cfg.lr;
    j["activation"] = activation_name(cfg.activation);
    j["stop_tol"] = cfg.stop_tol;
    j["threshold_period"] = cfg.threshold_period;
    j["min_update_iter"] = cfg.min_update_iter;
    j["stability_window"] = cfg.stability_window;
    return j;
}

void write_json_atomic(const fs::path& path, const json& j)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << j.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

struct Manifest {
    std::string command;
    json config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;

    void write(const fs::path& dir) const
    {
        json j;
        j["command"] = command;
        j["config"] = config;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["seed"] = seed;
        j["artifact_version"] = kArtifactVersion;
        j["wall_time_s"] = wall_time_s;
        write_json_atomic(dir / "manifest.json", j);
    }
};

Setup subset_setup(const Setup& s, int tx_subset)
{
    if (tx_subset <= 0 || tx_subset >= static_cast<int>(s.tx_positions.size())) return s;
    Setup out = s;
    out.tx_positions.resize(tx_subset);
    return out;
}

MeasurementSet subset_measurements(const MeasurementSet& m, int tx_subset)
{
    if (tx_subset <= 0 || tx_subset >= m.n_tx()) return m;
    MeasurementSet out = m;
    out.samples = m.samples.leftCols(tx_subset).eval();
    return out;
}

void write_run_outputs(const fs::path& dir, const ReconstructionResult& res, const Setup& setup,
                       const InversionConfig& cfg, const PermittivityMap* truth, Manifest& man)
{
    write_json_atomic(dir / "config.json", config_to_json(cfg));
    write_log_csv((dir / "log.csv").string(), res.log);
    save_permittivity((dir / "eps_hat.csv").string(), res.eps_hat);
    render_map(res.eps_hat, (dir / "eps_hat.pgm").string());
    render_mask(res.final_mask, (dir / "mask_final.pbm").string());
    save_checkpoint((dir / "checkpoint.bin").string(), res.params, setup.grid_fingerprint());

    json summary;
    summary["iterations"] = res.iterations;
    summary["best_iter"] = res.best_iter;
    summary["wall_time_s"] = res.wall_time_s;
    summary["final_data_loss"] = res.log.back().data;
    summary["final_total_loss"] = res.log.back().total;
    summary["best_total_loss"] = res.log[res.best_iter - 1].total;
    summary["n_active_cells"] = res.final_mask.count();
    summary["initial_mask_empty"] = res.initial_mask_empty;
    if (truth) summary["rel_err"] = relative_error(*truth, res.eps_hat);
    write_json_atomic(dir / "summary.json", summary);

    for (const char* f : {"config.json", "log.csv", "eps_hat.csv", "eps_hat.pgm",
                          "mask_final.pbm", "checkpoint.bin", "summary.json"})
        man.outputs.push_back(f);
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("mask_k", 0) == 0) man.outputs.push_back(name);
    }
    man.config = config_to_json(cfg);
    man.seed = cfg.seed;
    man.wall_time_s = res.wall_time_s;
}

int cmd_generate(const std::string& scene_path, const std::string& out_dir, double noise,
                 std::uint64_t seed, bool fine_grid)
{
    const auto t0 = std::chrono::steady_clock::now();
    const SceneSpec scene = load_scene(scene_path);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    const PermittivityMap truth = rasterize(scene);

    // optional inverse-crime mitigation: synthesize on a 2x finer grid
    MeasurementSet meas;
    if (fine_grid) {
        SceneSpec fine = scene;
        fine.setup.n_side = 2 * scene.setup.n_side;
        meas = forward(rasterize(fine), fine.setup);
    } else {
        meas = forward(truth, scene.setup);
    }
    meas.setup_fingerprint = scene.setup.fingerprint();
    if (noise > 0.0) meas = add_noise(meas, noise, seed);

    save_setup((dir / "setup.json").string(), scene.setup);
    save_permittivity((dir / "truth_eps.csv").string(), truth);
    render_map(truth, (dir / "truth_eps.pgm").string());
    save_measurements((dir / "measurements.csv").string(), meas);

    Manifest man;
    man.command = "generate";
    man.inputs = {scene_path};
    man.outputs = {"setup.json", "truth_eps.csv", "truth_eps.pgm", "measurements.csv"};
    man.seed = seed;
    man.config = {{"noise", noise}, {"fine_grid", fine_grid}};
    man.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    man.write(dir);
    std::cout << "wrote " << out_dir << " (" << meas.n_rx() << "x" << meas.n_tx()
              << " samples)\n";
    return 0;
}

int cmd_invert(const CLI::App* app, const std::string& meas_path, const std::string& setup_path,
               const std::string& out_dir, const CommonOpts& o, const std::string& truth_path,
               const std::string& checkpoint_path, bool is_pretrain)
{
    const InversionConfig base = resolve_config(app, o);
    Setup setup = subset_setup(load_setup(setup_path), o.tx_subset);
    MeasurementSet meas = subset_measurements(load_measurements(meas_path), o.tx_subset);
    meas.setup_fingerprint = setup.fingerprint();

    PermittivityMap truth;
    const PermittivityMap* truth_ptr = nullptr;
    if (!truth_path.empty()) {
        truth = load_permittivity(truth_path);
        if (truth.n_side() != setup.n_side)
            throw parse_error("truth grid does not match setup n_side");
        truth_ptr = &truth;
    }

    fs::create_directories(out_dir);
    InversionConfig cfg = base;
    cfg.mask_dump_dir = out_dir;

    ReconstructionResult res;
    if (!checkpoint_path.empty())
        res = finetune_from_file(checkpoint_path, meas, setup, cfg, truth_ptr);
    else
        res = invert(meas, setup, cfg, std::nullopt, truth_ptr);

    Manifest man;
    man.command = is_pretrain ? "pretrain" : (checkpoint_path.empty() ? "invert" : "finetune");
    man.inputs = {meas_path, setup_path};
    if (!truth_path.empty()) man.inputs.push_back(truth_path);
    if (!checkpoint_path.empty()) man.inputs.push_back(checkpoint_path);
    write_run_outputs(out_dir, res, setup, cfg, truth_ptr, man);
    man.write(out_dir);

    std::cout << "iterations " << res.iterations << ", best total "
              << res.log[res.best_iter - 1].total << " at iter " << res.best_iter;
    if (truth_ptr) std::cout << ", rel_err " << relative_error(*truth_ptr, res.eps_hat);
    std::cout << "\n";
    return 0;
}

int cmd_eval(const std::string& est_path, const std::string& truth_path)
{
    const PermittivityMap est = load_permittivity(est_path);
    const PermittivityMap truth = load_permittivity(truth_path);
    if (est.n_side() != truth.n_side()) throw parse_error("grids do not match");
    std::cout << "rel_err " << relative_error(truth, est) << "\n";
    return 0;
}

int cmd_render(const std::string& eps_path, const std::string& out_path,
               const std::string& channel)
{
    render_map(load_permittivity(eps_path), out_path, channel);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"2-D TM inverse-scattering solver (physics-trained network)"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "rasterize a scene and synthesize measurements");
    std::string scene_path, out_dir;
    double noise = 0.0;
    std::uint64_t gen_seed = 0;
    bool fine_grid = false;
    gen->add_option("scene", scene_path, "scene JSON")->required();
    gen->add_option("out_dir", out_dir, "output directory")->required();
    gen->add_option("--noise", noise, "additive noise ratio (Frobenius)");
    gen->add_option("--seed", gen_seed, "noise seed");
    gen->add_flag("--fine-grid", fine_grid, "synthesize on a 2x finer grid");

    // invert / pretrain / finetune share options
    CommonOpts inv_o, pre_o, fin_o;
    std::string meas_path, setup_path, run_dir, truth_path;
    auto* inv = app.add_subcommand("invert", "reconstruct permittivity from measurements");
    inv->add_option("measurements", meas_path, "measurement CSV")->required();
    inv->add_option("setup", setup_path, "setup JSON")->required();
    inv->add_option("out_dir", run_dir, "run directory")->required();
    inv->add_option("--truth", truth_path, "truth permittivity CSV for per-iteration error");
    add_common(inv, inv_o);

    std::string pre_meas, pre_setup, pre_dir;
    auto* pre = app.add_subcommand("pretrain", "train on defect-free measurements");
    pre->add_option("measurements", pre_meas, "measurement CSV")->required();
    pre->add_option("setup", pre_setup, "setup JSON")->required();
    pre->add_option("out_dir", pre_dir, "run directory")->required();
    add_common(pre, pre_o);

    std::string fin_ck, fin_meas, fin_setup, fin_dir, fin_truth;
    auto* fin = app.add_subcommand("finetune", "continue from a pretrained checkpoint");
    fin->add_option("checkpoint", fin_ck, "checkpoint.bin from a pretrain run")->required();
    fin->add_option("measurements", fin_meas, "measurement CSV")->required();
    fin->add_option("setup", fin_setup, "setup JSON")->required();
    fin->add_option("out_dir", fin_dir, "run directory")->required();
    fin->add_option("--truth", fin_truth, "truth permittivity CSV");
    add_common(fin, fin_o);

    // eval / render
    std::string ev_est, ev_truth;
    auto* ev = app.add_subcommand("eval", "relative Frobenius error against a truth map");
    ev->add_option("estimate", ev_est)->required();
    ev->add_option("truth", ev_truth)->required();

    std::string rd_eps, rd_out, rd_channel = "re";
    auto* rd = app.add_subcommand("render", "render a permittivity CSV to PGM");
    rd->add_option("eps", rd_eps)->required();
    rd->add_option("out", rd_out)->required();
    rd->add_option("--channel", rd_channel, "re|im");

    CLI11_PARSE(app, argc, argv);

    try {
        const CommonOpts* active = inv->parsed() ? &inv_o : pre->parsed() ? &pre_o : &fin_o;
        if (active->threads > 0) Eigen::setNbThreads(active->threads);
        if (gen->parsed()) return cmd_generate(scene_path, out_dir, noise, gen_seed, fine_grid);
        if (inv->parsed())
            return cmd_invert(inv, meas_path, setup_path, run_dir, inv_o, truth_path, "", false);
        if (pre->parsed()) return cmd_invert(pre, pre_meas, pre_setup, pre_dir, pre_o, "", "", true);
        if (fin->parsed())
            return cmd_invert(fin, fin_meas, fin_setup, fin_dir, fin_o, fin_truth, fin_ck, false);
        if (ev->parsed()) return cmd_eval(ev_est, ev_truth);
        if (rd->parsed()) return cmd_render(rd_eps, rd_out, rd_channel);
    } catch (const fingerprint_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const degenerate_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
