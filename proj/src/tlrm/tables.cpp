#include "tlrm/tables.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

namespace tlrm::harness {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<VectorXd> count_rows(const ppc::PpcSequence& seq) {
    std::vector<VectorXd> out;
    out.reserve(static_cast<std::size_t>(seq.counts.rows()));
    for (Eigen::Index t = 0; t < seq.counts.rows(); ++t)
        out.push_back(seq.counts.row(t).transpose());
    return out;
}

std::vector<VectorXd> frame_rows(const std::vector<MatrixXd>& frames) {
    std::vector<VectorXd> out;
    out.reserve(frames.size());
    for (const MatrixXd& f : frames) {
        VectorXd v(f.size());
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < f.rows(); ++i)
            for (Eigen::Index j = 0; j < f.cols(); ++j) v(k++) = f(i, j);
        out.push_back(std::move(v));
    }
    return out;
}

MatrixXd vector_to_frame(const VectorXd& v, int res) {
    MatrixXd f(res, res);
    Eigen::Index k = 0;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) f(i, j) = v(k++);
    return f;
}

VectorXd mean_observation(const std::vector<std::vector<VectorXd>>& seqs) {
    VectorXd acc = VectorXd::Zero(seqs.at(0).at(0).size());
    std::size_t n = 0;
    for (const auto& seq : seqs)
        for (const auto& v : seq) {
            acc += v;
            ++n;
        }
    return acc / static_cast<double>(n);
}

efh::Variant efh_variant_from(const std::string& name) {
    if (name == "refh") return efh::Variant::refh;
    if (name == "trbm") return efh::Variant::trbm;
    if (name == "rtrbm") return efh::Variant::rtrbm;
    throw ConfigError("unknown harmonium variant '" + name + "'");
}

}  // namespace

// ---------------------------------------------------------------- EFH / PPC

namespace {

efh::EfhParams train_efh(const std::vector<std::vector<VectorXd>>& train_obs,
                         efh::UnitKind obs_kind, const Config& cfg, const std::string& variant,
                         std::uint64_t master, std::uint64_t seed_label,
                         const std::function<double(const efh::EfhParams&)>& decode_probe,
                         std::vector<TrainLogRow>* log) {
    const auto H = static_cast<std::size_t>(cfg.resolved_hidden(variant));
    const std::size_t obs_dim = train_obs.at(0).at(0).size();

    Rng init_rng = make_rng(master, "efh.init", seed_label);
    efh::EfhParams params = efh::make_efh(obs_dim, obs_kind, H, init_rng);
    efh::init_visible_bias(params, mean_observation(train_obs));
    params.natural_clamp = cfg.model_natural_clamp;

    efh::EfhHyper hyper;
    hyper.variant = efh_variant_from(variant);
    hyper.cd_k = cfg.model_cd_k;
    hyper.lr = cfg.resolved_lr(variant);
    hyper.momentum = cfg.model_momentum;
    hyper.bptt_horizon = cfg.model_bptt_horizon;
    hyper.predict_sweeps = cfg.model_predict_sweeps;
    const int epochs = cfg.resolved_epochs(variant);

    efh::CdState state = efh::CdState::for_params(params);
    Rng train_rng = make_rng(master, "efh.train", seed_label);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        state.recon_error_acc = 0.0;
        state.steps = 0;
        for (const auto& seq : train_obs) {
            if (hyper.variant == efh::Variant::rtrbm)
                efh::train_rtrbm_sequence(params, state, seq, hyper, train_rng);
            else
                efh::train_sequence(params, state, hyper.variant, seq, hyper, train_rng);
        }
        if (log) {
            TrainLogRow row;
            row.epoch = epoch;
            row.train_metric =
                state.steps > 0 ? state.recon_error_acc / static_cast<double>(state.steps) : 0.0;
            row.decode_mse = decode_probe ? decode_probe(params)
                                          : std::numeric_limits<double>::quiet_NaN();
            log->push_back(row);
        }
    }
    return params;
}

}  // namespace

efh::EfhParams train_efh_ppc(const PpcDataset& ds, const Config& cfg, const std::string& variant,
                             std::uint64_t master, std::uint64_t seed_label,
                             std::vector<TrainLogRow>* log) {
    std::vector<std::vector<VectorXd>> train_obs;
    train_obs.reserve(ds.train.size());
    for (const auto& seq : ds.train) train_obs.push_back(count_rows(seq));
    std::function<double(const efh::EfhParams&)> probe;
    if (log)
        probe = [&](const efh::EfhParams& p) { return eval_efh_ppc(p, ds.code, ds.test); };
    return train_efh(train_obs, efh::UnitKind::poisson, cfg, variant, master, seed_label, probe,
                     log);
}

double eval_efh_ppc(const efh::EfhParams& params, const ppc::PopulationCode& code,
                    const std::vector<ppc::PpcSequence>& test) {
    double acc = 0.0;
    std::size_t n = 0;
    long warnings = 0;
    for (const auto& seq : test) {
        const auto obs = count_rows(seq);
        const auto zbars = efh::eval_suffstats(params, obs);
        for (std::size_t t = 0; t < zbars.size(); ++t) {
            const VectorXd rates = efh::decode_observation(params, zbars[t], &warnings);
            const double est = ppc::com_decode_real(code, rates);
            const double err = est - seq.states(static_cast<Eigen::Index>(t), 0);
            acc += err * err;
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

efh::EfhParams train_efh_balls(const BallsDataset& ds, const Config& cfg,
                               const std::string& variant, std::uint64_t master,
                               std::uint64_t seed_label, std::vector<TrainLogRow>* log) {
    std::vector<std::vector<VectorXd>> train_obs;
    train_obs.reserve(ds.train.size());
    for (const auto& traj : ds.train) train_obs.push_back(frame_rows(traj));
    return train_efh(train_obs, efh::UnitKind::real_bernoulli, cfg, variant, master, seed_label,
                     nullptr, log);
}

double eval_efh_balls(const efh::EfhParams& params,
                      const std::vector<std::vector<MatrixXd>>& test, int sweeps,
                      std::uint64_t master, std::uint64_t seed_label) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < test.size(); ++s) {
        const auto obs = frame_rows(test[s]);
        const auto zbars = efh::eval_suffstats(params, obs);
        Rng rng = make_rng(master, "efh.predict", seed_label * 1000 + s);
        for (std::size_t t = 0; t + 1 < obs.size(); ++t) {
            const VectorXd pred = efh::predict_next(params, zbars[t], obs[t], sweeps, rng);
            acc += (pred - obs[t + 1]).squaredNorm() / static_cast<double>(obs[t + 1].size());
            ++n;
        }
    }
    return acc / static_cast<double>(n);
}

// ---------------------------------------------------------------- rVAE

namespace {

rvae::RvaeParams train_rvae(const std::vector<std::vector<VectorXd>>& train_obs,
                            const rvae::RvaeConfig& rcfg, double lr, int epochs,
                            std::uint64_t master, std::uint64_t seed_label,
                            const std::function<double(rvae::RvaeParams&)>& decode_probe,
                            std::vector<TrainLogRow>* log) {
    Rng init_rng = make_rng(master, "rvae.init", seed_label);
    rvae::RvaeParams params = rvae::make_rvae(rcfg, init_rng);

    auto named = params.named_params();
    std::vector<diff::Tensor*> ptrs;
    for (auto& [name, t] : named) ptrs.push_back(t);
    diff::AdamState opt = diff::AdamState::for_params(ptrs);
    diff::AdamConfig adam;
    adam.lr = lr;

    Rng train_rng = make_rng(master, "rvae.train", seed_label);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        double loss_acc = 0.0;
        std::size_t steps = 0;
        for (const auto& seq : train_obs) {
            std::vector<double> trace;
            rvae::run_sequence(params, &opt, seq, true, adam, train_rng, &trace);
            for (double v : trace) loss_acc += v;
            steps += trace.size();
        }
        if (log) {
            TrainLogRow row;
            row.epoch = epoch;
            row.train_metric = loss_acc / static_cast<double>(steps);
            row.decode_mse = decode_probe ? decode_probe(params)
                                          : std::numeric_limits<double>::quiet_NaN();
            log->push_back(row);
        }
    }
    return params;
}

}  // namespace

rvae::RvaeParams train_rvae_ppc(const PpcDataset& ds, const Config& cfg,
                                const std::string& variant, std::uint64_t master,
                                std::uint64_t seed_label, std::vector<TrainLogRow>* log) {
    std::vector<std::vector<VectorXd>> train_obs;
    for (const auto& seq : ds.train) train_obs.push_back(count_rows(seq));

    rvae::RvaeConfig rcfg;
    rcfg.obs_dim = static_cast<std::size_t>(cfg.ppc_n_neurons);
    rcfg.d = static_cast<std::size_t>(cfg.resolved_latent_d());
    rcfg.enc_hidden = static_cast<std::size_t>(cfg.resolved_hidden(variant));
    rcfg.dec_hidden = rcfg.enc_hidden;
    rcfg.emission = rvae::EmissionKind::poisson;
    rcfg.variant = variant == "tvae" ? rvae::Variant::tvae : rvae::Variant::rvae;
    rcfg.var_floor = cfg.model_var_floor;

    std::function<double(rvae::RvaeParams&)> probe;
    std::vector<MatrixXd> test_counts;
    std::vector<VectorXd> test_truth;
    if (log) {
        for (const auto& seq : ds.test) {
            test_counts.push_back(seq.counts);
            test_truth.push_back(seq.states.col(0));
        }
        probe = [&](rvae::RvaeParams& p) {
            return rvae::ppc_eval(p, test_counts, ds.code, test_truth);
        };
    }
    return train_rvae(train_obs, rcfg, cfg.resolved_lr(variant), cfg.resolved_epochs(variant),
                      master, seed_label, probe, log);
}

rvae::RvaeParams train_rvae_balls(const BallsDataset& ds, const Config& cfg,
                                  std::uint64_t master, std::uint64_t seed_label,
                                  std::vector<TrainLogRow>* log) {
    std::vector<std::vector<VectorXd>> train_obs;
    for (const auto& traj : ds.train) train_obs.push_back(frame_rows(traj));

    rvae::RvaeConfig rcfg;
    rcfg.obs_dim = static_cast<std::size_t>(ds.res) * static_cast<std::size_t>(ds.res);
    rcfg.d = static_cast<std::size_t>(cfg.resolved_latent_d());
    rcfg.enc_hidden = static_cast<std::size_t>(cfg.resolved_hidden("rvae"));
    rcfg.dec_hidden = rcfg.enc_hidden;
    rcfg.emission = rvae::EmissionKind::gaussian;
    rcfg.bounded_emission = true;  // pixels live in [0,1]
    rcfg.variant = rvae::Variant::rvae;
    rcfg.var_floor = cfg.model_var_floor;

    return train_rvae(train_obs, rcfg, cfg.resolved_lr("rvae"), cfg.resolved_epochs("rvae"),
                      master, seed_label, nullptr, log);
}

// ---------------------------------------------------------------- Kalman

kalman::LgdsParams fit_kf_ppc(const PpcDataset& ds, int d, const Config& cfg,
                              std::uint64_t master, std::uint64_t seed_label) {
    std::vector<std::vector<kalman::PseudoObs>> obs;
    obs.reserve(ds.train.size());
    for (const auto& seq : ds.train)
        obs.push_back(kalman::to_pseudo_obs_sequence(ds.code, seq.counts));
    kalman::EmOptions opt;
    opt.iters = cfg.model_kf_em_iters;
    opt.dt = cfg.ppc_dt;
    Rng rng = make_rng(master, "kf.init", seed_label * 10 + static_cast<std::uint64_t>(d));
    return kalman::em_fit(obs, d, opt, rng);
}

double eval_kf_ppc(const kalman::LgdsParams& params, const ppc::PopulationCode& code,
                   const std::vector<ppc::PpcSequence>& test) {
    std::vector<std::vector<kalman::PseudoObs>> obs;
    std::vector<VectorXd> truth;
    for (const auto& seq : test) {
        obs.push_back(kalman::to_pseudo_obs_sequence(code, seq.counts));
        truth.push_back(seq.states.col(0));
    }
    return kalman::kf_position_mse(params, obs, truth);
}

// ---------------------------------------------------------------- baselines

double order0_ppc(const ppc::PopulationCode& code, const std::vector<ppc::PpcSequence>& test,
                  std::size_t* zero_spike_frames) {
    double acc = 0.0;
    std::size_t n = 0, skipped = 0;
    for (const auto& seq : test) {
        for (Eigen::Index t = 0; t < seq.counts.rows(); ++t) {
            const VectorXd counts = seq.counts.row(t).transpose();
            if (counts.sum() <= 0.0) {
                ++skipped;
                continue;
            }
            const double err = ppc::com_decode(code, counts) - seq.states(t, 0);
            acc += err * err;
            ++n;
        }
    }
    if (zero_spike_frames) *zero_spike_frames = skipped;
    if (n == 0) throw NoSpikesError("order0_ppc: every frame was empty");
    return acc / static_cast<double>(n);
}

double order0_balls(const std::vector<std::vector<MatrixXd>>& test) {
    double acc = 0.0;
    for (const auto& traj : test) acc += balls::order0_mse(traj);
    return acc / static_cast<double>(test.size());
}

// ---------------------------------------------------------------- tables

namespace {

int worker_count(std::size_t n_cells) {
    int n = 0;
    if (const char* env = std::getenv("TLRM_THREADS")) n = std::atoi(env);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return std::min<int>(n, static_cast<int>(n_cells));
}

// Runs independent cells on a small worker pool; results land in fixed
// slots so scheduling cannot affect the output.
void run_cells(std::vector<std::function<void()>>& cells) {
    const int workers = worker_count(cells.size());
    if (workers <= 1) {
        for (auto& cell : cells) cell();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                cells[i]();
            }
        });
    for (auto& t : pool) t.join();
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    int n = 0;
    for (double x : v)
        if (std::isfinite(x)) {
            acc += x;
            ++n;
        }
    return n > 0 ? acc / n : std::numeric_limits<double>::quiet_NaN();
}

double stddev_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    int n = 0;
    for (double x : v)
        if (std::isfinite(x)) {
            acc += (x - m) * (x - m);
            ++n;
        }
    return n > 1 ? std::sqrt(acc / (n - 1)) : 0.0;
}

}  // namespace

TableResult reproduce_table1(const Config& cfg, std::uint64_t master_seed) {
    if (cfg.dataset_kind != "ppc")
        throw ConfigError("table1 needs dataset.kind = ppc");
    const std::vector<std::string> models = {"order0", "tvae", "trbm", "kf1",
                                             "rvae",   "refh", "rtrbm", "kf2"};
    TableResult table;
    table.seed_labels = cfg.resolved_seeds();
    const std::size_t n_seeds = table.seed_labels.size();
    for (const auto& m : models) {
        TableRow row;
        row.model = m;
        row.per_seed.assign(n_seeds, std::numeric_limits<double>::quiet_NaN());
        table.rows.push_back(row);
    }

    std::vector<std::string> notes(models.size() * n_seeds);
    std::vector<std::function<void()>> cells;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        for (std::size_t k = 0; k < n_seeds; ++k) {
            cells.push_back([&, mi, k] {
                const std::string& model = models[mi];
                const std::uint64_t label = table.seed_labels[k];
                try {
                    PpcDataset ds = generate_ppc_dataset(cfg, derive_seed(master_seed, "table1.data", label));
                    double mse = 0.0;
                    if (model == "order0") {
                        mse = order0_ppc(ds.code, ds.test);
                    } else if (model == "kf1" || model == "kf2") {
                        const int d = model == "kf1" ? 1 : 2;
                        auto params = fit_kf_ppc(ds, d, cfg, master_seed, label);
                        mse = eval_kf_ppc(params, ds.code, ds.test);
                    } else if (model == "rvae" || model == "tvae") {
                        auto params = train_rvae_ppc(ds, cfg, model, master_seed, label);
                        std::vector<MatrixXd> counts;
                        std::vector<VectorXd> truth;
                        for (const auto& seq : ds.test) {
                            counts.push_back(seq.counts);
                            truth.push_back(seq.states.col(0));
                        }
                        mse = rvae::ppc_eval(params, counts, ds.code, truth);
                    } else {
                        auto params = train_efh_ppc(ds, cfg, model, master_seed, label);
                        mse = eval_efh_ppc(params, ds.code, ds.test);
                    }
                    table.rows[mi].per_seed[k] = mse;
                } catch (const std::exception& e) {
                    notes[mi * n_seeds + k] =
                        models[mi] + "/seed" + std::to_string(table.seed_labels[k]) +
                        " failed: " + e.what();
                }
            });
        }
    }
    run_cells(cells);

    for (auto& row : table.rows) {
        row.mean = mean_of(row.per_seed);
        row.stddev = stddev_of(row.per_seed);
        row.n_seeds = static_cast<int>(n_seeds);
    }
    for (auto& n : notes)
        if (!n.empty()) table.notes.push_back(n);
    return table;
}

TableResult reproduce_table2(const Config& cfg, std::uint64_t master_seed) {
    if (cfg.dataset_kind != "balls")
        throw ConfigError("table2 needs dataset.kind = balls");
    const std::vector<std::string> models = {"order0", "trbm", "refh", "rtrbm"};
    TableResult table;
    table.seed_labels = cfg.resolved_seeds();
    const std::size_t n_seeds = table.seed_labels.size();
    for (const auto& m : models) {
        TableRow row;
        row.model = m;
        row.per_seed.assign(n_seeds, std::numeric_limits<double>::quiet_NaN());
        table.rows.push_back(row);
    }

    std::vector<std::string> notes(models.size() * n_seeds);
    std::vector<std::function<void()>> cells;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        for (std::size_t k = 0; k < n_seeds; ++k) {
            cells.push_back([&, mi, k] {
                const std::string& model = models[mi];
                const std::uint64_t label = table.seed_labels[k];
                try {
                    BallsDataset ds =
                        generate_balls_dataset(cfg, derive_seed(master_seed, "table2.data", label));
                    double mse = 0.0;
                    if (model == "order0") {
                        mse = order0_balls(ds.test);
                    } else {
                        auto params = train_efh_balls(ds, cfg, model, master_seed, label);
                        mse = eval_efh_balls(params, ds.test, cfg.model_predict_sweeps,
                                             master_seed, label);
                    }
                    table.rows[mi].per_seed[k] = mse;
                } catch (const std::exception& e) {
                    notes[mi * n_seeds + k] =
                        models[mi] + "/seed" + std::to_string(table.seed_labels[k]) +
                        " failed: " + e.what();
                }
            });
        }
    }
    run_cells(cells);

    for (auto& row : table.rows) {
        row.mean = mean_of(row.per_seed);
        row.stddev = stddev_of(row.per_seed);
        row.n_seeds = static_cast<int>(n_seeds);
    }
    for (auto& n : notes)
        if (!n.empty()) table.notes.push_back(n);
    return table;
}

void write_table_csv(const std::string& path, const TableResult& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_table_csv: cannot open '" + path + "'");
    out << "model,mse_mean,mse_std,n_seeds\n";
    char buf[96];
    for (const auto& row : table.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6e,%.6e,%d\n", row.model.c_str(), row.mean,
                      row.stddev, row.n_seeds);
        out << buf;
    }
}

void write_per_seed_csv(const std::string& path, const TableResult& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_per_seed_csv: cannot open '" + path + "'");
    out << "model,seed,mse\n";
    char buf[96];
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.per_seed.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%s,%llu,%.6e\n", row.model.c_str(),
                          static_cast<unsigned long long>(table.seed_labels[k]),
                          row.per_seed[k]);
            out << buf;
        }
    }
}

// ---------------------------------------------------------------- commands

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

std::string sniff_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open data file '" + path + "'");
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    return std::string(magic, 4);
}

void write_train_log(const std::string& path, const std::vector<TrainLogRow>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open train log '" + path + "'");
    out << "epoch,train_metric,decode_mse\n";
    char buf[96];
    for (const auto& row : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.6e,%.6e\n", row.epoch, row.train_metric,
                      row.decode_mse);
        out << buf;
    }
}

PpcDataset ppc_dataset_from_file(const Config& cfg, const std::string& path) {
    PpcDataset ds;
    ds.model = oscillator_from_config(cfg);
    ds.code = population_from_config(cfg);
    ds.train = read_ppc_file(path);
    return ds;
}

}  // namespace

void run_gen_data(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    ensure_dir(out_dir);
    if (cfg.dataset_kind == "ppc") {
        PpcDataset ds = generate_ppc_dataset(cfg, seed);
        write_ppc_file(out_dir + "/ppc_train.bin", ds.train);
        write_ppc_file(out_dir + "/ppc_test.bin", ds.test);
        write_ppc_csv(out_dir + "/ppc_train.csv", ds.train);
        write_ppc_csv(out_dir + "/ppc_test.csv", ds.test);
    } else {
        BallsDataset ds = generate_balls_dataset(cfg, seed);
        write_balls_file(out_dir + "/balls_train.bin", ds.train);
        write_balls_file(out_dir + "/balls_test.bin", ds.test);
    }
}

std::string run_train(const Config& cfg, const std::string& model, const std::string& data_path,
                      std::uint64_t seed, const std::string& out_dir) {
    ensure_dir(out_dir);
    const std::string magic = sniff_magic(data_path);
    const std::string ckpt_path = out_dir + "/" + model + ".tlrm";
    const std::string log_path = out_dir + "/" + model + "_train_log.csv";
    const std::string snapshot = serialize_config(cfg);
    std::vector<TrainLogRow> log;

    if (magic == "PPC1") {
        PpcDataset ds = ppc_dataset_from_file(cfg, data_path);
        // the dataset's test split is not in the file; decode probes use train
        ds.test = ds.train;
        if (model == "kf1" || model == "kf2") {
            auto params = fit_kf_ppc(ds, model == "kf1" ? 1 : 2, cfg, seed, 0);
            save_checkpoint(ckpt_path, lgds_to_checkpoint(params, model, seed, snapshot));
        } else if (model == "rvae" || model == "tvae") {
            auto params = train_rvae_ppc(ds, cfg, model, seed, 0, &log);
            save_checkpoint(ckpt_path, rvae_to_checkpoint(params, model, seed, snapshot));
        } else {
            auto params = train_efh_ppc(ds, cfg, model, seed, 0, &log);
            save_checkpoint(ckpt_path, efh_to_checkpoint(params, model, seed, snapshot));
        }
    } else if (magic == "BBL1") {
        BallsDataset ds;
        ds.world = world_from_config(cfg);
        ds.train = read_balls_file(data_path);
        ds.res = static_cast<int>(ds.train.at(0).at(0).rows());
        if (model == "rvae") {
            auto params = train_rvae_balls(ds, cfg, seed, 0, &log);
            save_checkpoint(ckpt_path, rvae_to_checkpoint(params, model, seed, snapshot));
        } else if (model == "refh" || model == "trbm" || model == "rtrbm") {
            auto params = train_efh_balls(ds, cfg, model, seed, 0, &log);
            save_checkpoint(ckpt_path, efh_to_checkpoint(params, model, seed, snapshot));
        } else {
            throw UnsupportedVariantError("model '" + model + "' does not train on ball data");
        }
    } else {
        throw IoError("unrecognized dataset file '" + data_path + "'");
    }
    if (!log.empty()) write_train_log(log_path, log);
    return ckpt_path;
}

double run_eval(const std::string& ckpt_path, const std::string& data_path, std::uint64_t seed) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Config cfg = parse_config_text(ckpt.config_text);
    const std::string magic = sniff_magic(data_path);

    if (magic == "PPC1") {
        auto sequences = read_ppc_file(data_path);
        ppc::PopulationCode code = population_from_config(cfg);
        if (ckpt.tag == "kf1" || ckpt.tag == "kf2") {
            auto params = lgds_from_checkpoint(ckpt);
            return eval_kf_ppc(params, code, sequences);
        }
        if (ckpt.tag == "rvae" || ckpt.tag == "tvae") {
            auto params = rvae_from_checkpoint(ckpt);
            std::vector<MatrixXd> counts;
            std::vector<VectorXd> truth;
            for (const auto& seq : sequences) {
                counts.push_back(seq.counts);
                truth.push_back(seq.states.col(0));
            }
            return rvae::ppc_eval(params, counts, code, truth);
        }
        auto params = efh_from_checkpoint(ckpt);
        return eval_efh_ppc(params, code, sequences);
    }
    if (magic == "BBL1") {
        auto trajectories = read_balls_file(data_path);
        if (ckpt.tag == "rvae" || ckpt.tag == "tvae")
            throw UnsupportedVariantError(
                "clamped Gibbs prediction is not defined for the VAE variants");
        if (ckpt.tag == "kf1" || ckpt.tag == "kf2")
            throw UnsupportedVariantError("state-space oracles evaluate on PPC data only");
        auto params = efh_from_checkpoint(ckpt);
        return eval_efh_balls(params, trajectories, cfg.model_predict_sweeps, seed, 0);
    }
    throw IoError("unrecognized dataset file '" + data_path + "'");
}

double run_predict(const std::string& ckpt_path, const std::string& data_path,
                   std::uint64_t seed, const std::string& out_dir) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Config cfg = parse_config_text(ckpt.config_text);
    if (sniff_magic(data_path) != "BBL1")
        throw UnsupportedVariantError("predict expects a BBL1 ball dataset");
    if (ckpt.tag != "refh" && ckpt.tag != "trbm" && ckpt.tag != "rtrbm")
        throw UnsupportedVariantError("predict needs a harmonium checkpoint");
    ensure_dir(out_dir);

    auto trajectories = read_balls_file(data_path);
    auto params = efh_from_checkpoint(ckpt);
    const int res = static_cast<int>(trajectories.at(0).at(0).rows());

    // dump the first trajectory's predictions alongside the score
    const auto obs = frame_rows(trajectories[0]);
    const auto zbars = efh::eval_suffstats(params, obs);
    Rng rng = make_rng(seed, "predict.dump", 0);
    char name[64];
    for (std::size_t t = 0; t + 1 < obs.size(); ++t) {
        const VectorXd pred =
            efh::predict_next(params, zbars[t], obs[t], cfg.model_predict_sweeps, rng);
        std::snprintf(name, sizeof(name), "/pred_%04zu.pgm", t + 1);
        write_pgm(out_dir + name, vector_to_frame(pred, res));
    }
    return eval_efh_balls(params, trajectories, cfg.model_predict_sweeps, seed, 0);
}

void run_generate(const std::string& ckpt_path, std::uint64_t seed, const std::string& out_dir) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Config cfg = parse_config_text(ckpt.config_text);
    if (ckpt.tag != "rvae" && ckpt.tag != "tvae")
        throw UnsupportedVariantError("generate needs a VAE checkpoint");
    auto params = rvae_from_checkpoint(ckpt);
    ensure_dir(out_dir);

    Rng rng = make_rng(seed, "generate", 0);
    if (cfg.dataset_kind == "balls") {
        const int res = cfg.balls_res;
        auto frames = rvae::generate_backward(params, static_cast<std::size_t>(cfg.balls_steps), rng);
        char name[64];
        for (std::size_t t = 0; t < frames.size(); ++t) {
            std::snprintf(name, sizeof(name), "/gen_%04zu.pgm", t);
            write_pgm(out_dir + name, vector_to_frame(frames[t], res));
        }
    } else {
        auto rates = rvae::generate_backward(params, static_cast<std::size_t>(cfg.ppc_steps), rng);
        std::ofstream out(out_dir + "/generated_rates.csv", std::ios::binary);
        if (!out) throw IoError("cannot open generated_rates.csv");
        out << "step";
        for (Eigen::Index i = 0; i < rates[0].size(); ++i) out << ",rate" << i;
        out << "\n";
        char buf[32];
        for (std::size_t t = 0; t < rates.size(); ++t) {
            out << t;
            for (Eigen::Index i = 0; i < rates[t].size(); ++i) {
                std::snprintf(buf, sizeof(buf), ",%.6e", rates[t](i));
                out << buf;
            }
            out << "\n";
        }
    }
}

void run_dump_frames(const std::string& data_path, const std::string& out_dir,
                     std::uint32_t max_frames) {
    if (sniff_magic(data_path) != "BBL1")
        throw IoError("dump-frames expects a BBL1 ball dataset");
    ensure_dir(out_dir);
    auto trajectories = read_balls_file(data_path);
    char name[64];
    std::uint32_t written = 0;
    for (std::size_t s = 0; s < trajectories.size() && written < max_frames; ++s) {
        for (std::size_t t = 0; t < trajectories[s].size() && written < max_frames; ++t) {
            std::snprintf(name, sizeof(name), "/traj%03zu_frame%04zu.pgm", s, t);
            write_pgm(out_dir + name, trajectories[s][t]);
            ++written;
        }
    }
}

void run_table1(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    ensure_dir(out_dir);
    TableResult table = reproduce_table1(cfg, seed);
    write_table_csv(out_dir + "/table1.csv", table);
    write_per_seed_csv(out_dir + "/table1_seeds.csv", table);
    for (const auto& note : table.notes) std::fprintf(stderr, "warning: %s\n", note.c_str());
}

void run_table2(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    ensure_dir(out_dir);
    TableResult table = reproduce_table2(cfg, seed);
    write_table_csv(out_dir + "/table2.csv", table);
    write_per_seed_csv(out_dir + "/table2_seeds.csv", table);
    for (const auto& note : table.notes) std::fprintf(stderr, "warning: %s\n", note.c_str());
}

}  // namespace tlrm::harness
