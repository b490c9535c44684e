#pragma once

// Training orchestration: BP initialization, masked forward/adjoint
// iterations with Adam, scheduled subregion refinement, best-iterate
// tracking, and the pretrain/finetune transfer workflows.

#include "ipdnn/em_core.hpp"
#include "ipdnn/io.hpp"
#include "ipdnn/objective.hpp"
#include "ipdnn/subregion.hpp"

#include <chrono>
#include <limits>
#include <optional>

namespace ipdnn {

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct fingerprint_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InversionConfig {
    int max_iters = 2000;
    double lr = 1e-3;
    LossWeights weights{};
    int threshold_period = 100;
    int min_update_iter = 500;
    int stability_window = 5;
    std::uint64_t seed = 0;
    Activation activation = Activation::glow;
    double stop_tol = 0.0;           // 0: run to max_iters
    std::string mask_dump_dir;       // when set, dump mask_k*.pbm on updates

    void validate() const
    {
        if (max_iters < 1 || threshold_period < 1 || stability_window < 1)
            throw std::invalid_argument("InversionConfig: periods must be positive");
        if (min_update_iter < threshold_period)
            throw std::invalid_argument("InversionConfig: min_update_iter < threshold_period");
        if (!(lr > 0.0)) throw std::invalid_argument("InversionConfig: lr must be > 0");
        if (weights.alpha < 0.0 || weights.beta < 0.0)
            throw std::invalid_argument("InversionConfig: loss weights must be >= 0");
    }
};

struct LogRow {
    int iter = 0;
    double data = 0.0, bound = 0.0, tv = 0.0, total = 0.0;
    double rel_err = std::numeric_limits<double>::quiet_NaN(); // when truth given
    int n_active = 0;
};

struct ReconstructionResult {
    PermittivityMap eps_hat;  // best iterate by total loss
    PermittivityMap eps0;     // BP initial estimate (fixed network input)
    BinaryMask final_mask;
    std::vector<LogRow> log;
    double wall_time_s = 0.0;
    int iterations = 0;
    int best_iter = 0;
    NetworkParams params;     // best-iterate parameters
    bool initial_mask_empty = false;
};

// ||eps_true - eps_hat||_F / ||eps_true||_F
inline double relative_error(const PermittivityMap& eps_true, const PermittivityMap& eps_hat)
{
    return (eps_true.values - eps_hat.values).norm() / eps_true.values.norm();
}

inline void write_log_csv(const std::string& path, const std::vector<LogRow>& log)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "iter,data,bound,tv,total,rel_err,n_active_cells\n";
    f.precision(17);
    for (const LogRow& r : log) {
        f << r.iter << ',' << r.data << ',' << r.bound << ',' << r.tv << ',' << r.total << ',';
        if (std::isfinite(r.rel_err)) f << r.rel_err;
        f << ',' << r.n_active << '\n';
    }
}

inline ReconstructionResult invert(const MeasurementSet& meas, const Setup& setup,
                                   const InversionConfig& cfg,
                                   const std::optional<NetworkParams>& init_params = std::nullopt,
                                   const PermittivityMap* truth = nullptr,
                                   const GreensOperators* greens_in = nullptr)
{
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();
    setup.validate();
    if (meas.n_rx() != static_cast<int>(setup.rx_positions.size()) ||
        meas.n_tx() != static_cast<int>(setup.tx_positions.size()))
        throw std::invalid_argument("invert: measurement dimensions do not match setup");

    const Grid grid = Grid::make(setup);
    GreensOperators greens_local;
    const GreensOperators* greens = greens_in;
    if (!greens) {
        greens_local = assemble_greens(setup, grid);
        greens = &greens_local;
    }
    const Eigen::MatrixXcd E_inc = incident_fields(setup, grid);

    ReconstructionResult res;
    res.eps0 = bp_initializer(meas, setup, *greens);
    BinaryMask b0 = threshold_mask(res.eps0);
    if (b0.empty()) {
        b0 = BinaryMask::full(setup.n_side);
        res.initial_mask_empty = true;
    }
    BinaryMask mask = b0;

    NetworkParams params = init_params ? *init_params : net_init(cfg.seed, setup.n_side);
    if (params.n_side != setup.n_side)
        throw std::invalid_argument("invert: init_params grid shape mismatch");
    AdamState adam = AdamState::init(params, cfg.lr);
    StabilityTracker tracker;
    tracker.window = cfg.stability_window;

    if (!cfg.mask_dump_dir.empty()) render_mask(mask, cfg.mask_dump_dir + "/mask_k0.pbm");

    double best_total = std::numeric_limits<double>::infinity();
    double prev_total = std::numeric_limits<double>::quiet_NaN();
    bool first_update_done = false;

    for (int k = 1; k <= cfg.max_iters; ++k) {
        const ObjectiveResult r =
            evaluate_objective(params, cfg.activation, res.eps0, meas, *greens, E_inc, mask,
                               cfg.weights, /*want_grad=*/true);
        if (!std::isfinite(r.loss.total))
            throw numerical_error("invert: non-finite loss at iteration " + std::to_string(k));

        LogRow row;
        row.iter = k;
        row.data = r.loss.data;
        row.bound = r.loss.bound;
        row.tv = r.loss.tv;
        row.total = r.loss.total;
        row.n_active = mask.count();
        if (truth) row.rel_err = relative_error(*truth, r.eps_hat);
        res.log.push_back(row);

        if (r.loss.total < best_total) {
            best_total = r.loss.total;
            res.best_iter = k;
            res.eps_hat = r.eps_hat;
            res.params = params;
        }

        adam_step(params, r.grad, adam);

        if (schedule(k, cfg.threshold_period, cfg.min_update_iter) != ScheduleAction::none) {
            const BinaryMask b_k = threshold_mask(r.eps_hat);
            const bool stable = stability_update(tracker, b_k.count());
            if (schedule(k, cfg.threshold_period, cfg.min_update_iter) ==
                    ScheduleAction::threshold_and_maybe_update &&
                stable) {
                const BinaryMask updated = update_mask(mask, b_k, b0, !first_update_done);
                if (!(updated == mask)) {
                    mask = updated;
                    if (!cfg.mask_dump_dir.empty())
                        render_mask(mask, cfg.mask_dump_dir + "/mask_k" + std::to_string(k) + ".pbm");
                }
                first_update_done = true;
            }
        }

        res.iterations = k;
        // floor keeps the relative test meaningful when the loss sits at zero
        if (cfg.stop_tol > 0.0 && std::isfinite(prev_total) &&
            std::abs(r.loss.total - prev_total) <= cfg.stop_tol * std::max(prev_total, 1e-30))
            break;
        prev_total = r.loss.total;
    }

    res.final_mask = mask;
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

// Transfer learning: train on defect-free measurements, persist the
// parameters with the grid fingerprint of the creating setup.
inline ReconstructionResult pretrain(const MeasurementSet& sound_meas, const Setup& setup,
                                     const InversionConfig& cfg,
                                     const std::string& checkpoint_path = {},
                                     const GreensOperators* greens = nullptr)
{
    ReconstructionResult res = invert(sound_meas, setup, cfg, std::nullopt, nullptr, greens);
    if (!checkpoint_path.empty())
        save_checkpoint(checkpoint_path, res.params, setup.grid_fingerprint());
    return res;
}

inline ReconstructionResult finetune(const NetworkParams& checkpoint, std::uint64_t checkpoint_fp,
                                     const MeasurementSet& defect_meas, const Setup& setup,
                                     const InversionConfig& cfg,
                                     const PermittivityMap* truth = nullptr,
                                     const GreensOperators* greens = nullptr)
{
    if (checkpoint.n_side != setup.n_side)
        throw fingerprint_error("finetune: checkpoint grid shape does not match setup");
    if (checkpoint_fp != setup.grid_fingerprint())
        throw fingerprint_error("finetune: checkpoint fingerprint does not match setup");
    return invert(defect_meas, setup, cfg, checkpoint, truth, greens);
}

inline ReconstructionResult finetune_from_file(const std::string& checkpoint_path,
                                               const MeasurementSet& defect_meas,
                                               const Setup& setup, const InversionConfig& cfg,
                                               const PermittivityMap* truth = nullptr,
                                               const GreensOperators* greens = nullptr)
{
    std::uint64_t fp = 0;
    const NetworkParams p = load_checkpoint(checkpoint_path, &fp);
    return finetune(p, fp, defect_meas, setup, cfg, truth, greens);
}

} // namespace ipdnn
