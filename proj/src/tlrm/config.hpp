#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlrm/common.hpp"

namespace tlrm::harness {

// Flat `section.key = value` experiment configuration. Every field has a
// default; unknown keys are rejected. Sentinels (0 or -1 where noted) mean
// "resolve from the dataset kind", so one file can stay terse.
struct Config {
    // dataset
    std::string dataset_kind = "ppc";  // ppc | balls

    // ppc generator
    double ppc_omega = 2.0 * 3.141592653589793 * 0.2;
    double ppc_zeta = 0.1;
    double ppc_dt = 0.05;
    double ppc_position_std = 0.5;
    double ppc_q = -1.0;  // -1: derive from position_std
    int ppc_n_neurons = 15;
    double ppc_tile_lo = -2.0;
    double ppc_tile_hi = 2.0;
    double ppc_sigma_tc = -1.0;  // -1: center spacing
    double ppc_gain = 4.0;
    int ppc_train_trajectories = 40;
    int ppc_test_trajectories = 10;
    int ppc_steps = 1000;

    // balls generator
    int balls_n = 3;
    double balls_radius = 1.2;
    double balls_box_size = 10.0;
    double balls_speed = 0.5;
    double balls_dt = 1.0;
    int balls_res = 15;
    int balls_train_trajectories = 40;
    int balls_test_trajectories = 10;
    int balls_steps = 100;

    // model
    std::string model_variant = "refh";  // refh|trbm|rtrbm|rvae|tvae|kf1|kf2
    int model_hidden = 0;                // 0: per-dataset default
    int model_latent_d = 0;              // rvae latent dim, 0: per-dataset default
    int model_cd_k = 1;
    double model_momentum = 0.9;
    int model_bptt_horizon = 16;
    int model_predict_sweeps = 25;
    double model_natural_clamp = 30.0;
    double model_var_floor = 1e-6;
    int model_kf_em_iters = 50;

    // training
    int train_epochs = 0;   // 0: per-model default
    double train_lr = 0.0;  // 0: per-model default
    std::vector<std::uint64_t> train_seeds;  // defaults depend on the dataset kind

    // eval
    std::string eval_metric = "mse";

    // ---- derived accessors (resolve sentinels) ----
    double resolved_ppc_q() const;
    double resolved_ppc_sigma_tc() const;
    int resolved_hidden(const std::string& variant) const;
    int resolved_latent_d() const;
    double resolved_lr(const std::string& variant) const;
    int resolved_epochs(const std::string& variant) const;
    std::vector<std::uint64_t> resolved_seeds() const;
};

Config default_config(const std::string& dataset_kind);
Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);
// Canonical form: every key, fixed order, %.17g numbers.
std::string serialize_config(const Config& cfg);
// Apply one `section.key = value` assignment.
void apply_config_entry(Config& cfg, const std::string& key, const std::string& value);

}  // namespace tlrm::harness
