#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tlrm/config.hpp"
#include "tlrm/harmonium.hpp"
#include "tlrm/kalman_em.hpp"
#include "tlrm/rvae.hpp"
#include "tlrm/tensor.hpp"

namespace tlrm::harness {

// On-disk model container: magic "TLRM", format version, model tag, seed
// record, config snapshot, then a named real64 tensor table. Round-trips
// bit-identically.
struct Checkpoint {
    std::string tag;  // refh|trbm|rtrbm|rvae|tvae|kf1|kf2
    std::uint64_t seed = 0;
    std::string config_text;
    std::vector<std::pair<std::string, diff::Tensor>> tensors;

    const diff::Tensor& find(const std::string& name) const;
    bool has(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over the serialized bytes; used for determinism checks.
std::uint64_t file_hash(const std::string& path);

Checkpoint efh_to_checkpoint(const efh::EfhParams& params, const std::string& tag,
                             std::uint64_t seed, const std::string& config_text);
efh::EfhParams efh_from_checkpoint(const Checkpoint& ckpt);

Checkpoint rvae_to_checkpoint(const rvae::RvaeParams& params, const std::string& tag,
                              std::uint64_t seed, const std::string& config_text);
rvae::RvaeParams rvae_from_checkpoint(const Checkpoint& ckpt);

Checkpoint lgds_to_checkpoint(const kalman::LgdsParams& params, const std::string& tag,
                              std::uint64_t seed, const std::string& config_text);
kalman::LgdsParams lgds_from_checkpoint(const Checkpoint& ckpt);

}  // namespace tlrm::harness
