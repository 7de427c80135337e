#include "tlrm/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tlrm::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(x);
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

std::vector<std::uint64_t> to_seed_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stoull(tok));
        } catch (const std::exception&) {
            throw ConfigError("config: bad seed in " + key + ": '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("config: empty seed list for " + key);
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Config default_config(const std::string& dataset_kind) {
    if (dataset_kind != "ppc" && dataset_kind != "balls")
        throw ConfigError("config: unknown dataset kind '" + dataset_kind + "'");
    Config cfg;
    cfg.dataset_kind = dataset_kind;
    if (dataset_kind == "ppc")
        cfg.train_seeds = {1, 2, 3, 4, 5};
    else
        cfg.train_seeds = {1, 2, 3};
    return cfg;
}

void apply_config_entry(Config& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset.kind") {
        if (value != "ppc" && value != "balls")
            throw ConfigError("config: unknown dataset kind '" + value + "'");
        cfg.dataset_kind = value;
    } else if (key == "ppc.omega") cfg.ppc_omega = to_double(key, value);
    else if (key == "ppc.zeta") cfg.ppc_zeta = to_double(key, value);
    else if (key == "ppc.dt") cfg.ppc_dt = to_double(key, value);
    else if (key == "ppc.position_std") cfg.ppc_position_std = to_double(key, value);
    else if (key == "ppc.q") cfg.ppc_q = to_double(key, value);
    else if (key == "ppc.n_neurons") cfg.ppc_n_neurons = to_int(key, value);
    else if (key == "ppc.tile_lo") cfg.ppc_tile_lo = to_double(key, value);
    else if (key == "ppc.tile_hi") cfg.ppc_tile_hi = to_double(key, value);
    else if (key == "ppc.sigma_tc") cfg.ppc_sigma_tc = to_double(key, value);
    else if (key == "ppc.gain") cfg.ppc_gain = to_double(key, value);
    else if (key == "ppc.train_trajectories") cfg.ppc_train_trajectories = to_int(key, value);
    else if (key == "ppc.test_trajectories") cfg.ppc_test_trajectories = to_int(key, value);
    else if (key == "ppc.steps") cfg.ppc_steps = to_int(key, value);
    else if (key == "balls.n_balls") cfg.balls_n = to_int(key, value);
    else if (key == "balls.radius") cfg.balls_radius = to_double(key, value);
    else if (key == "balls.box_size") cfg.balls_box_size = to_double(key, value);
    else if (key == "balls.speed") cfg.balls_speed = to_double(key, value);
    else if (key == "balls.dt") cfg.balls_dt = to_double(key, value);
    else if (key == "balls.res") cfg.balls_res = to_int(key, value);
    else if (key == "balls.train_trajectories") cfg.balls_train_trajectories = to_int(key, value);
    else if (key == "balls.test_trajectories") cfg.balls_test_trajectories = to_int(key, value);
    else if (key == "balls.steps") cfg.balls_steps = to_int(key, value);
    else if (key == "model.variant") {
        static const char* known[] = {"refh", "trbm", "rtrbm", "rvae", "tvae", "kf1", "kf2"};
        bool ok = false;
        for (const char* k : known) ok = ok || value == k;
        if (!ok) throw ConfigError("config: unknown model variant '" + value + "'");
        cfg.model_variant = value;
    } else if (key == "model.hidden") cfg.model_hidden = to_int(key, value);
    else if (key == "model.latent_d") cfg.model_latent_d = to_int(key, value);
    else if (key == "model.cd_k") cfg.model_cd_k = to_int(key, value);
    else if (key == "model.momentum") cfg.model_momentum = to_double(key, value);
    else if (key == "model.bptt_horizon") cfg.model_bptt_horizon = to_int(key, value);
    else if (key == "model.predict_sweeps") cfg.model_predict_sweeps = to_int(key, value);
    else if (key == "model.natural_clamp") cfg.model_natural_clamp = to_double(key, value);
    else if (key == "model.var_floor") cfg.model_var_floor = to_double(key, value);
    else if (key == "model.kf_em_iters") cfg.model_kf_em_iters = to_int(key, value);
    else if (key == "train.epochs") cfg.train_epochs = to_int(key, value);
    else if (key == "train.lr") cfg.train_lr = to_double(key, value);
    else if (key == "train.seeds") cfg.train_seeds = to_seed_list(key, value);
    else if (key == "eval.metric") {
        if (value != "mse") throw ConfigError("config: unsupported eval metric '" + value + "'");
        cfg.eval_metric = value;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

Config parse_config_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string kind = "ppc";
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "dataset.kind") kind = value;
        entries.emplace_back(std::move(key), std::move(value));
    }
    Config cfg = default_config(kind);
    for (const auto& [key, value] : entries) apply_config_entry(cfg, key, value);
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const Config& cfg) {
    std::ostringstream out;
    out << "dataset.kind = " << cfg.dataset_kind << "\n";
    out << "ppc.omega = " << fmt(cfg.ppc_omega) << "\n";
    out << "ppc.zeta = " << fmt(cfg.ppc_zeta) << "\n";
    out << "ppc.dt = " << fmt(cfg.ppc_dt) << "\n";
    out << "ppc.position_std = " << fmt(cfg.ppc_position_std) << "\n";
    out << "ppc.q = " << fmt(cfg.ppc_q) << "\n";
    out << "ppc.n_neurons = " << cfg.ppc_n_neurons << "\n";
    out << "ppc.tile_lo = " << fmt(cfg.ppc_tile_lo) << "\n";
    out << "ppc.tile_hi = " << fmt(cfg.ppc_tile_hi) << "\n";
    out << "ppc.sigma_tc = " << fmt(cfg.ppc_sigma_tc) << "\n";
    out << "ppc.gain = " << fmt(cfg.ppc_gain) << "\n";
    out << "ppc.train_trajectories = " << cfg.ppc_train_trajectories << "\n";
    out << "ppc.test_trajectories = " << cfg.ppc_test_trajectories << "\n";
    out << "ppc.steps = " << cfg.ppc_steps << "\n";
    out << "balls.n_balls = " << cfg.balls_n << "\n";
    out << "balls.radius = " << fmt(cfg.balls_radius) << "\n";
    out << "balls.box_size = " << fmt(cfg.balls_box_size) << "\n";
    out << "balls.speed = " << fmt(cfg.balls_speed) << "\n";
    out << "balls.dt = " << fmt(cfg.balls_dt) << "\n";
    out << "balls.res = " << cfg.balls_res << "\n";
    out << "balls.train_trajectories = " << cfg.balls_train_trajectories << "\n";
    out << "balls.test_trajectories = " << cfg.balls_test_trajectories << "\n";
    out << "balls.steps = " << cfg.balls_steps << "\n";
    out << "model.variant = " << cfg.model_variant << "\n";
    out << "model.hidden = " << cfg.model_hidden << "\n";
    out << "model.latent_d = " << cfg.model_latent_d << "\n";
    out << "model.cd_k = " << cfg.model_cd_k << "\n";
    out << "model.momentum = " << fmt(cfg.model_momentum) << "\n";
    out << "model.bptt_horizon = " << cfg.model_bptt_horizon << "\n";
    out << "model.predict_sweeps = " << cfg.model_predict_sweeps << "\n";
    out << "model.natural_clamp = " << fmt(cfg.model_natural_clamp) << "\n";
    out << "model.var_floor = " << fmt(cfg.model_var_floor) << "\n";
    out << "model.kf_em_iters = " << cfg.model_kf_em_iters << "\n";
    out << "train.epochs = " << cfg.train_epochs << "\n";
    out << "train.lr = " << fmt(cfg.train_lr) << "\n";
    out << "train.seeds =";
    for (std::uint64_t s : cfg.train_seeds) out << " " << s;
    out << "\n";
    out << "eval.metric = " << cfg.eval_metric << "\n";
    return out.str();
}

double Config::resolved_ppc_q() const {
    return ppc_q;  // callers use ppc world helpers when q < 0
}

double Config::resolved_ppc_sigma_tc() const {
    if (ppc_sigma_tc > 0.0) return ppc_sigma_tc;
    return (ppc_tile_hi - ppc_tile_lo) / static_cast<double>(ppc_n_neurons - 1);
}

int Config::resolved_hidden(const std::string& variant) const {
    if (model_hidden > 0) return model_hidden;
    const bool is_ppc = dataset_kind == "ppc";
    if (variant == "rvae" || variant == "tvae") return is_ppc ? 64 : 256;
    return is_ppc ? 60 : 400;
}

int Config::resolved_latent_d() const {
    if (model_latent_d > 0) return model_latent_d;
    return dataset_kind == "ppc" ? 10 : 32;
}

double Config::resolved_lr(const std::string& variant) const {
    if (train_lr > 0.0) return train_lr;
    if (variant == "rvae" || variant == "tvae") return 1e-3;
    return dataset_kind == "ppc" ? 1e-3 : 1e-4;
}

int Config::resolved_epochs(const std::string& variant) const {
    if (train_epochs > 0) return train_epochs;
    const bool is_ppc = dataset_kind == "ppc";
    if (variant == "rvae" || variant == "tvae") return is_ppc ? 10 : 30;
    return is_ppc ? 10 : 30;
}

std::vector<std::uint64_t> Config::resolved_seeds() const {
    if (!train_seeds.empty()) return train_seeds;
    return dataset_kind == "ppc" ? std::vector<std::uint64_t>{1, 2, 3, 4, 5}
                                 : std::vector<std::uint64_t>{1, 2, 3};
}

}  // namespace tlrm::harness
