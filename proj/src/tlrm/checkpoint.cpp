#include "tlrm/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace tlrm::harness {

namespace {

constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

diff::Tensor from_matrix(const Eigen::MatrixXd& m) { return diff::Tensor::from_matrix(m); }
diff::Tensor from_vector(const Eigen::VectorXd& v) { return diff::Tensor::from_vector(v); }

}  // namespace

const diff::Tensor& Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw IoError("checkpoint: missing tensor '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return true;
    return false;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot open '" + path + "'");
    out.write("TLRM", 4);
    write_u32(out, kVersion);
    write_string(out, ckpt.tag);
    write_u64(out, ckpt.seed);
    write_string(out, ckpt.config_text);
    write_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        write_string(out, name);
        write_u32(out, static_cast<std::uint32_t>(tensor.shape().size()));
        for (std::size_t d : tensor.shape()) write_u64(out, d);
        for (std::size_t i = 0; i < tensor.size(); ++i) write_f64(out, tensor[i]);
    }
    if (!out) throw IoError("save_checkpoint: short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::strncmp(magic, "TLRM", 4) != 0)
        throw IoError("load_checkpoint: bad magic in '" + path + "'");
    const std::uint32_t version = read_u32(in);
    if (version != kVersion)
        throw IoError("load_checkpoint: unsupported version in '" + path + "'");
    Checkpoint ckpt;
    ckpt.tag = read_string(in);
    ckpt.seed = read_u64(in);
    ckpt.config_text = read_string(in);
    const std::uint32_t count = read_u32(in);
    for (std::uint32_t k = 0; k < count; ++k) {
        std::string name = read_string(in);
        const std::uint32_t rank = read_u32(in);
        std::vector<std::size_t> shape(rank);
        std::size_t n = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(read_u64(in));
            n *= d;
        }
        std::vector<double> data(n);
        for (auto& v : data) v = read_f64(in);
        ckpt.tensors.emplace_back(std::move(name), diff::Tensor(std::move(shape), std::move(data)));
    }
    if (!in) throw IoError("load_checkpoint: truncated file '" + path + "'");
    return ckpt;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("file_hash: cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

Checkpoint efh_to_checkpoint(const efh::EfhParams& params, const std::string& tag,
                             std::uint64_t seed, const std::string& config_text) {
    Checkpoint ckpt;
    ckpt.tag = tag;
    ckpt.seed = seed;
    ckpt.config_text = config_text;
    ckpt.tensors.emplace_back("W", from_matrix(params.W));
    ckpt.tensors.emplace_back("b_vis", from_vector(params.b_vis));
    ckpt.tensors.emplace_back("b_hid", from_vector(params.b_hid));
    const auto& obs = params.layout.at(0);
    ckpt.tensors.emplace_back(
        "meta", diff::Tensor({4}, {static_cast<double>(obs.size),
                                   obs.kind == efh::UnitKind::poisson ? 0.0 : 1.0,
                                   static_cast<double>(params.hidden()), params.natural_clamp}));
    return ckpt;
}

efh::EfhParams efh_from_checkpoint(const Checkpoint& ckpt) {
    const diff::Tensor& meta = ckpt.find("meta");
    efh::EfhParams p;
    const auto obs_dim = static_cast<std::size_t>(meta[0]);
    const auto kind = meta[1] == 0.0 ? efh::UnitKind::poisson : efh::UnitKind::real_bernoulli;
    const auto hidden = static_cast<std::size_t>(meta[2]);
    p.natural_clamp = meta[3];
    p.W = ckpt.find("W").to_matrix();
    p.b_vis = ckpt.find("b_vis").to_vector();
    p.b_hid = ckpt.find("b_hid").to_vector();
    p.layout = {{obs_dim, kind, efh::Role::observation},
                {hidden, efh::UnitKind::real_bernoulli, efh::Role::prev_suffstats}};
    efh::validate_layout(p);
    return p;
}

Checkpoint rvae_to_checkpoint(const rvae::RvaeParams& params, const std::string& tag,
                              std::uint64_t seed, const std::string& config_text) {
    Checkpoint ckpt;
    ckpt.tag = tag;
    ckpt.seed = seed;
    ckpt.config_text = config_text;
    const rvae::RvaeConfig& c = params.cfg;
    ckpt.tensors.emplace_back(
        "meta",
        diff::Tensor({8}, {static_cast<double>(c.obs_dim), static_cast<double>(c.d),
                           static_cast<double>(c.enc_hidden), static_cast<double>(c.dec_hidden),
                           c.emission == rvae::EmissionKind::gaussian ? 0.0 : 1.0,
                           c.variant == rvae::Variant::rvae ? 0.0 : 1.0,
                           c.bounded_emission ? 1.0 : 0.0, c.var_floor}));
    for (const auto& [name, tensor] : params.named_params())
        ckpt.tensors.emplace_back(name, *tensor);
    return ckpt;
}

rvae::RvaeParams rvae_from_checkpoint(const Checkpoint& ckpt) {
    const diff::Tensor& meta = ckpt.find("meta");
    rvae::RvaeConfig c;
    c.obs_dim = static_cast<std::size_t>(meta[0]);
    c.d = static_cast<std::size_t>(meta[1]);
    c.enc_hidden = static_cast<std::size_t>(meta[2]);
    c.dec_hidden = static_cast<std::size_t>(meta[3]);
    c.emission = meta[4] == 0.0 ? rvae::EmissionKind::gaussian : rvae::EmissionKind::poisson;
    c.variant = meta[5] == 0.0 ? rvae::Variant::rvae : rvae::Variant::tvae;
    c.bounded_emission = meta[6] != 0.0;
    c.var_floor = meta[7];
    Rng rng(0);
    rvae::RvaeParams p = rvae::make_rvae(c, rng);
    for (auto& [name, tensor] : p.named_params()) {
        const diff::Tensor& stored = ckpt.find(name);
        if (!stored.same_shape(*tensor))
            throw IoError("checkpoint: tensor shape mismatch for '" + name + "'");
        *tensor = stored;
    }
    return p;
}

Checkpoint lgds_to_checkpoint(const kalman::LgdsParams& params, const std::string& tag,
                              std::uint64_t seed, const std::string& config_text) {
    Checkpoint ckpt;
    ckpt.tag = tag;
    ckpt.seed = seed;
    ckpt.config_text = config_text;
    ckpt.tensors.emplace_back("A", from_matrix(params.A));
    ckpt.tensors.emplace_back("Q", from_matrix(params.Q));
    ckpt.tensors.emplace_back("C", from_matrix(params.C));
    ckpt.tensors.emplace_back("mu0", from_vector(params.mu0));
    ckpt.tensors.emplace_back("S0", from_matrix(params.S0));
    return ckpt;
}

kalman::LgdsParams lgds_from_checkpoint(const Checkpoint& ckpt) {
    kalman::LgdsParams p;
    p.A = ckpt.find("A").to_matrix();
    p.Q = ckpt.find("Q").to_matrix();
    p.C = ckpt.find("C").to_matrix();
    p.mu0 = ckpt.find("mu0").to_vector();
    p.S0 = ckpt.find("S0").to_matrix();
    p.d = static_cast<int>(p.A.rows());
    return p;
}

}  // namespace tlrm::harness
