#pragma once

#include <vector>

#include "tlrm/tensor.hpp"

namespace tlrm::diff {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;

    static AdamState for_params(const std::vector<Tensor*>& params);
};

// Standard bias-corrected AdaM update, applied in place.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, const AdamConfig& cfg);

}  // namespace tlrm::diff
