#include "tlrm/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace tlrm::harness {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

float read_f32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

ppc::OscillatorModel oscillator_from_config(const Config& cfg) {
    double q = cfg.ppc_q;
    if (q < 0.0)
        q = ppc::q_for_position_std(cfg.ppc_omega, cfg.ppc_zeta, cfg.ppc_dt, cfg.ppc_position_std);
    return ppc::build_oscillator(cfg.ppc_omega, cfg.ppc_zeta, cfg.ppc_dt, q);
}

ppc::PopulationCode population_from_config(const Config& cfg) {
    return ppc::make_population(cfg.ppc_n_neurons, cfg.ppc_tile_lo, cfg.ppc_tile_hi,
                                cfg.ppc_sigma_tc, cfg.ppc_gain);
}

balls::BallWorld world_from_config(const Config& cfg) {
    balls::BallWorld w;
    w.n_balls = cfg.balls_n;
    w.radius = cfg.balls_radius;
    w.box_size = cfg.balls_box_size;
    w.speed = cfg.balls_speed;
    w.dt = cfg.balls_dt;
    return w;
}

PpcDataset generate_ppc_dataset(const Config& cfg, std::uint64_t master_seed) {
    PpcDataset ds;
    ds.model = oscillator_from_config(cfg);
    ds.code = population_from_config(cfg);
    const auto T = static_cast<std::size_t>(cfg.ppc_steps);
    for (int i = 0; i < cfg.ppc_train_trajectories; ++i) {
        Rng latent = make_rng(master_seed, "ppc.train.latent", static_cast<std::uint64_t>(i));
        Rng spikes = make_rng(master_seed, "ppc.train.spikes", static_cast<std::uint64_t>(i));
        ds.train.push_back(ppc::generate_sequence(ds.model, ds.code, T, latent, spikes));
    }
    for (int i = 0; i < cfg.ppc_test_trajectories; ++i) {
        Rng latent = make_rng(master_seed, "ppc.test.latent", static_cast<std::uint64_t>(i));
        Rng spikes = make_rng(master_seed, "ppc.test.spikes", static_cast<std::uint64_t>(i));
        ds.test.push_back(ppc::generate_sequence(ds.model, ds.code, T, latent, spikes));
    }
    return ds;
}

BallsDataset generate_balls_dataset(const Config& cfg, std::uint64_t master_seed) {
    BallsDataset ds;
    ds.world = world_from_config(cfg);
    ds.res = cfg.balls_res;
    const auto T = static_cast<std::size_t>(cfg.balls_steps);
    auto make_split = [&](const char* stream, int count,
                          std::vector<std::vector<Eigen::MatrixXd>>& out) {
        for (int i = 0; i < count; ++i) {
            Rng rng = make_rng(master_seed, stream, static_cast<std::uint64_t>(i));
            auto states = balls::simulate_balls(ds.world, T, rng);
            std::vector<Eigen::MatrixXd> frames;
            frames.reserve(states.size());
            for (const auto& st : states) frames.push_back(balls::rasterize(ds.world, st, ds.res));
            out.push_back(std::move(frames));
        }
    };
    make_split("balls.train", cfg.balls_train_trajectories, ds.train);
    make_split("balls.test", cfg.balls_test_trajectories, ds.test);
    return ds;
}

void write_ppc_file(const std::string& path, const std::vector<ppc::PpcSequence>& sequences) {
    if (sequences.empty()) throw DomainError("write_ppc_file: no sequences");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_ppc_file: cannot open '" + path + "'");
    const auto T = static_cast<std::uint32_t>(sequences[0].states.rows());
    const auto n = static_cast<std::uint32_t>(sequences[0].counts.cols());
    out.write("PPC1", 4);
    write_u32(out, T);
    write_u32(out, n);
    write_u32(out, static_cast<std::uint32_t>(sequences.size()));
    for (const auto& seq : sequences) {
        if (seq.states.rows() != T || seq.counts.rows() != T || seq.counts.cols() != n)
            throw ShapeError("write_ppc_file: ragged sequences");
        for (std::uint32_t t = 0; t < T; ++t) {
            write_f64(out, seq.states(t, 0));
            write_f64(out, seq.states(t, 1));
        }
        for (std::uint32_t t = 0; t < T; ++t)
            for (std::uint32_t i = 0; i < n; ++i) {
                const double c = seq.counts(t, i);
                if (c < 0.0 || c > 65535.0)
                    throw DomainError("write_ppc_file: count outside uint16 range");
                write_u16(out, static_cast<std::uint16_t>(c));
            }
    }
    if (!out) throw IoError("write_ppc_file: short write to '" + path + "'");
}

std::vector<ppc::PpcSequence> read_ppc_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_ppc_file: cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::strncmp(magic, "PPC1", 4) != 0)
        throw IoError("read_ppc_file: bad magic in '" + path + "'");
    const std::uint32_t T = read_u32(in);
    const std::uint32_t n = read_u32(in);
    const std::uint32_t n_traj = read_u32(in);
    std::vector<ppc::PpcSequence> out(n_traj);
    for (auto& seq : out) {
        seq.states.resize(T, 2);
        seq.counts.resize(T, n);
        for (std::uint32_t t = 0; t < T; ++t) {
            seq.states(t, 0) = read_f64(in);
            seq.states(t, 1) = read_f64(in);
        }
        for (std::uint32_t t = 0; t < T; ++t)
            for (std::uint32_t i = 0; i < n; ++i) seq.counts(t, i) = read_u16(in);
    }
    if (!in) throw IoError("read_ppc_file: truncated file '" + path + "'");
    return out;
}

void write_ppc_csv(const std::string& path, const std::vector<ppc::PpcSequence>& sequences) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_ppc_csv: cannot open '" + path + "'");
    out << "trajectory,t,position,velocity";
    const auto n = sequences.empty() ? 0 : sequences[0].counts.cols();
    for (Eigen::Index i = 0; i < n; ++i) out << ",n" << i;
    out << "\n";
    char buf[64];
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        const auto& seq = sequences[s];
        for (Eigen::Index t = 0; t < seq.states.rows(); ++t) {
            out << s << "," << t;
            std::snprintf(buf, sizeof(buf), ",%.6e,%.6e", seq.states(t, 0), seq.states(t, 1));
            out << buf;
            for (Eigen::Index i = 0; i < n; ++i)
                out << "," << static_cast<long>(seq.counts(t, i));
            out << "\n";
        }
    }
}

void write_balls_file(const std::string& path,
                      const std::vector<std::vector<Eigen::MatrixXd>>& trajectories) {
    if (trajectories.empty() || trajectories[0].empty())
        throw DomainError("write_balls_file: no frames");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_balls_file: cannot open '" + path + "'");
    const auto T = static_cast<std::uint32_t>(trajectories[0].size());
    const auto res = static_cast<std::uint32_t>(trajectories[0][0].rows());
    out.write("BBL1", 4);
    write_u32(out, T);
    write_u32(out, res);
    write_u32(out, static_cast<std::uint32_t>(trajectories.size()));
    for (const auto& traj : trajectories) {
        if (traj.size() != T) throw ShapeError("write_balls_file: ragged trajectories");
        for (const auto& frame : traj) {
            if (frame.rows() != res || frame.cols() != res)
                throw ShapeError("write_balls_file: frame size mismatch");
            for (Eigen::Index i = 0; i < frame.rows(); ++i)
                for (Eigen::Index j = 0; j < frame.cols(); ++j)
                    write_f32(out, static_cast<float>(frame(i, j)));
        }
    }
    if (!out) throw IoError("write_balls_file: short write to '" + path + "'");
}

std::vector<std::vector<Eigen::MatrixXd>> read_balls_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_balls_file: cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::strncmp(magic, "BBL1", 4) != 0)
        throw IoError("read_balls_file: bad magic in '" + path + "'");
    const std::uint32_t T = read_u32(in);
    const std::uint32_t res = read_u32(in);
    const std::uint32_t n_traj = read_u32(in);
    std::vector<std::vector<Eigen::MatrixXd>> out(n_traj);
    for (auto& traj : out) {
        traj.reserve(T);
        for (std::uint32_t t = 0; t < T; ++t) {
            Eigen::MatrixXd frame(res, res);
            for (std::uint32_t i = 0; i < res; ++i)
                for (std::uint32_t j = 0; j < res; ++j) frame(i, j) = read_f32(in);
            traj.push_back(std::move(frame));
        }
    }
    if (!in) throw IoError("read_balls_file: truncated file '" + path + "'");
    return out;
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open '" + path + "'");
    out << "P5\n" << frame.cols() << " " << frame.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < frame.rows(); ++i)
        for (Eigen::Index j = 0; j < frame.cols(); ++j) {
            const double v = std::clamp(frame(i, j), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(v * 255.0 + 0.5)));
        }
}

}  // namespace tlrm::harness
