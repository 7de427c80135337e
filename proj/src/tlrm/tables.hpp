#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlrm/checkpoint.hpp"
#include "tlrm/config.hpp"
#include "tlrm/dataset.hpp"

namespace tlrm::harness {

// ---- per-model training / evaluation drivers ----

struct TrainLogRow {
    int epoch = 0;
    double train_metric = 0.0;  // CD reconstruction error or mean free energy
    double decode_mse = 0.0;    // PPC decode MSE on the test split; NaN elsewhere
};

efh::EfhParams train_efh_ppc(const PpcDataset& ds, const Config& cfg, const std::string& variant,
                             std::uint64_t master, std::uint64_t seed_label,
                             std::vector<TrainLogRow>* log = nullptr);
double eval_efh_ppc(const efh::EfhParams& params, const ppc::PopulationCode& code,
                    const std::vector<ppc::PpcSequence>& test);

efh::EfhParams train_efh_balls(const BallsDataset& ds, const Config& cfg,
                               const std::string& variant, std::uint64_t master,
                               std::uint64_t seed_label, std::vector<TrainLogRow>* log = nullptr);
double eval_efh_balls(const efh::EfhParams& params,
                      const std::vector<std::vector<Eigen::MatrixXd>>& test, int sweeps,
                      std::uint64_t master, std::uint64_t seed_label);

rvae::RvaeParams train_rvae_ppc(const PpcDataset& ds, const Config& cfg,
                                const std::string& variant, std::uint64_t master,
                                std::uint64_t seed_label, std::vector<TrainLogRow>* log = nullptr);
rvae::RvaeParams train_rvae_balls(const BallsDataset& ds, const Config& cfg,
                                  std::uint64_t master, std::uint64_t seed_label,
                                  std::vector<TrainLogRow>* log = nullptr);

kalman::LgdsParams fit_kf_ppc(const PpcDataset& ds, int d, const Config& cfg,
                              std::uint64_t master, std::uint64_t seed_label);
double eval_kf_ppc(const kalman::LgdsParams& params, const ppc::PopulationCode& code,
                   const std::vector<ppc::PpcSequence>& test);

// Per-frame center-of-mass decode, zero-spike frames excluded from the mean
// (their count reported separately).
double order0_ppc(const ppc::PopulationCode& code, const std::vector<ppc::PpcSequence>& test,
                  std::size_t* zero_spike_frames = nullptr);
double order0_balls(const std::vector<std::vector<Eigen::MatrixXd>>& test);

// ---- table reproduction ----

struct TableRow {
    std::string model;
    double mean = 0.0;
    double stddev = 0.0;
    int n_seeds = 0;
    std::vector<double> per_seed;  // NaN marks a failed cell
};

struct TableResult {
    std::vector<TableRow> rows;
    std::vector<std::uint64_t> seed_labels;
    std::vector<std::string> notes;  // failure markers
};

TableResult reproduce_table1(const Config& cfg, std::uint64_t master_seed);
TableResult reproduce_table2(const Config& cfg, std::uint64_t master_seed);

void write_table_csv(const std::string& path, const TableResult& table);
void write_per_seed_csv(const std::string& path, const TableResult& table);

// ---- single-run commands behind the CLI ----

void run_gen_data(const Config& cfg, std::uint64_t seed, const std::string& out_dir);
std::string run_train(const Config& cfg, const std::string& model, const std::string& data_path,
                      std::uint64_t seed, const std::string& out_dir);
double run_eval(const std::string& ckpt_path, const std::string& data_path, std::uint64_t seed);
double run_predict(const std::string& ckpt_path, const std::string& data_path,
                   std::uint64_t seed, const std::string& out_dir);
void run_generate(const std::string& ckpt_path, std::uint64_t seed, const std::string& out_dir);
void run_dump_frames(const std::string& data_path, const std::string& out_dir,
                     std::uint32_t max_frames);
void run_table1(const Config& cfg, std::uint64_t seed, const std::string& out_dir);
void run_table2(const Config& cfg, std::uint64_t seed, const std::string& out_dir);

}  // namespace tlrm::harness
