#pragma once

#include <string>
#include <vector>

#include "tlrm/balls_world.hpp"
#include "tlrm/config.hpp"
#include "tlrm/ppc_world.hpp"

namespace tlrm::harness {

struct PpcDataset {
    ppc::OscillatorModel model;
    ppc::PopulationCode code;
    std::vector<ppc::PpcSequence> train;
    std::vector<ppc::PpcSequence> test;
};

struct BallsDataset {
    balls::BallWorld world;
    int res = 0;
    std::vector<std::vector<Eigen::MatrixXd>> train;  // per trajectory: T frames
    std::vector<std::vector<Eigen::MatrixXd>> test;
};

ppc::OscillatorModel oscillator_from_config(const Config& cfg);
ppc::PopulationCode population_from_config(const Config& cfg);
balls::BallWorld world_from_config(const Config& cfg);

// Deterministic generation: every trajectory draws from named sub-streams of
// the master seed, so the same (config, seed) pair always yields the same
// bytes.
PpcDataset generate_ppc_dataset(const Config& cfg, std::uint64_t master_seed);
BallsDataset generate_balls_dataset(const Config& cfg, std::uint64_t master_seed);

// PPC1: little-endian header {magic "PPC1", u32 T, u32 n_neurons, u32 n_traj},
// then per trajectory float64 states (T x 2) and uint16 counts (T x n).
void write_ppc_file(const std::string& path, const std::vector<ppc::PpcSequence>& sequences);
std::vector<ppc::PpcSequence> read_ppc_file(const std::string& path);
void write_ppc_csv(const std::string& path, const std::vector<ppc::PpcSequence>& sequences);

// BBL1: little-endian header {magic "BBL1", u32 T, u32 res, u32 n_traj},
// then float32 frames (T x res x res) per trajectory.
void write_balls_file(const std::string& path,
                      const std::vector<std::vector<Eigen::MatrixXd>>& trajectories);
std::vector<std::vector<Eigen::MatrixXd>> read_balls_file(const std::string& path);

// Binary 8-bit PGM, values scaled from [0,1].
void write_pgm(const std::string& path, const Eigen::MatrixXd& frame);

}  // namespace tlrm::harness
