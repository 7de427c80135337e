#include "tlrm.h"

#include <cstring>
#include <memory>
#include <string>

#include "tlrm/common.hpp"
#include "tlrm/config.hpp"
#include "tlrm/tables.hpp"

using namespace tlrm;

struct tlrm_ctx {
    harness::Config cfg;
    std::uint64_t seed = 1;
};

namespace {

thread_local std::string g_last_error;

tlrm_status classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return TLRM_E_USAGE;
    if (dynamic_cast<const IoError*>(&e)) return TLRM_E_IO;
    if (dynamic_cast<const ShapeError*>(&e)) return TLRM_E_SHAPE;
    if (dynamic_cast<const ContractError*>(&e)) return TLRM_E_CONTRACT;
    if (dynamic_cast<const NoSpikesError*>(&e)) return TLRM_E_NO_SPIKES;
    if (dynamic_cast<const PlacementError*>(&e)) return TLRM_E_PLACEMENT;
    if (dynamic_cast<const SingularityError*>(&e)) return TLRM_E_SINGULAR;
    if (dynamic_cast<const UnsupportedVariantError*>(&e)) return TLRM_E_UNSUPPORTED;
    if (dynamic_cast<const DomainError*>(&e)) return TLRM_E_DOMAIN;
    return TLRM_E_RUNTIME;
}

template <class Fn>
tlrm_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return TLRM_OK;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return classify(e);
    } catch (...) {
        g_last_error = "unknown error";
        return TLRM_E_RUNTIME;
    }
}

tlrm_status require(bool cond, const char* msg) {
    if (cond) return TLRM_OK;
    g_last_error = msg;
    return TLRM_E_USAGE;
}

}  // namespace

extern "C" {

const char* tlrm_version(void) { return "1.0.0"; }

const char* tlrm_last_error(void) { return g_last_error.c_str(); }

tlrm_status tlrm_ctx_create(const char* config_path, const char* dataset_kind, uint64_t seed,
                            tlrm_ctx** out) {
    if (tlrm_status s = require(out != nullptr, "tlrm_ctx_create: out is null")) return s;
    *out = nullptr;
    return guarded([&] {
        auto ctx = std::make_unique<tlrm_ctx>();
        if (config_path != nullptr)
            ctx->cfg = harness::load_config(config_path);
        else
            ctx->cfg = harness::default_config(dataset_kind ? dataset_kind : "ppc");
        ctx->seed = seed;
        *out = ctx.release();
    });
}

void tlrm_ctx_destroy(tlrm_ctx* ctx) { delete ctx; }

tlrm_status tlrm_ctx_set(tlrm_ctx* ctx, const char* key, const char* value) {
    if (tlrm_status s = require(ctx && key && value, "tlrm_ctx_set: null argument")) return s;
    return guarded([&] { harness::apply_config_entry(ctx->cfg, key, value); });
}

tlrm_status tlrm_gen_data(tlrm_ctx* ctx, const char* out_dir) {
    if (tlrm_status s = require(ctx && out_dir, "tlrm_gen_data: null argument")) return s;
    return guarded([&] { harness::run_gen_data(ctx->cfg, ctx->seed, out_dir); });
}

tlrm_status tlrm_train(tlrm_ctx* ctx, const char* model, const char* data_path,
                       const char* out_dir, char* ckpt_path_out, size_t ckpt_path_len) {
    if (tlrm_status s = require(ctx && model && data_path && out_dir, "tlrm_train: null argument"))
        return s;
    return guarded([&] {
        std::string path = harness::run_train(ctx->cfg, model, data_path, ctx->seed, out_dir);
        if (ckpt_path_out && ckpt_path_len > 0) {
            std::strncpy(ckpt_path_out, path.c_str(), ckpt_path_len - 1);
            ckpt_path_out[ckpt_path_len - 1] = '\0';
        }
    });
}

tlrm_status tlrm_eval(tlrm_ctx* ctx, const char* ckpt_path, const char* data_path,
                      double* mse_out) {
    if (tlrm_status s =
            require(ctx && ckpt_path && data_path && mse_out, "tlrm_eval: null argument"))
        return s;
    return guarded([&] { *mse_out = harness::run_eval(ckpt_path, data_path, ctx->seed); });
}

tlrm_status tlrm_predict(tlrm_ctx* ctx, const char* ckpt_path, const char* data_path,
                         const char* out_dir, double* mse_out) {
    if (tlrm_status s = require(ctx && ckpt_path && data_path && out_dir && mse_out,
                                "tlrm_predict: null argument"))
        return s;
    return guarded(
        [&] { *mse_out = harness::run_predict(ckpt_path, data_path, ctx->seed, out_dir); });
}

tlrm_status tlrm_generate(tlrm_ctx* ctx, const char* ckpt_path, const char* out_dir) {
    if (tlrm_status s = require(ctx && ckpt_path && out_dir, "tlrm_generate: null argument"))
        return s;
    return guarded([&] { harness::run_generate(ckpt_path, ctx->seed, out_dir); });
}

tlrm_status tlrm_table1(tlrm_ctx* ctx, const char* out_dir) {
    if (tlrm_status s = require(ctx && out_dir, "tlrm_table1: null argument")) return s;
    return guarded([&] { harness::run_table1(ctx->cfg, ctx->seed, out_dir); });
}

tlrm_status tlrm_table2(tlrm_ctx* ctx, const char* out_dir) {
    if (tlrm_status s = require(ctx && out_dir, "tlrm_table2: null argument")) return s;
    return guarded([&] { harness::run_table2(ctx->cfg, ctx->seed, out_dir); });
}

tlrm_status tlrm_dump_frames(tlrm_ctx* ctx, const char* data_path, const char* out_dir,
                             uint32_t max_frames) {
    if (tlrm_status s = require(ctx && data_path && out_dir, "tlrm_dump_frames: null argument"))
        return s;
    return guarded([&] { harness::run_dump_frames(data_path, out_dir, max_frames); });
}

}  // extern "C"
