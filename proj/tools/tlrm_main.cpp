// Command-line front end; talks to the library strictly through the C API.

#include <tlrm.h>

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>

namespace {

struct CtxDeleter {
    void operator()(tlrm_ctx* c) const { tlrm_ctx_destroy(c); }
};
using CtxPtr = std::unique_ptr<tlrm_ctx, CtxDeleter>;

int fail(tlrm_status status) {
    std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(status), tlrm_last_error());
    return 2;
}

CtxPtr make_ctx(const std::string& config, const std::string& kind, std::uint64_t seed,
                tlrm_status& status) {
    tlrm_ctx* raw = nullptr;
    status = tlrm_ctx_create(config.empty() ? nullptr : config.c_str(),
                             kind.empty() ? nullptr : kind.c_str(), seed, &raw);
    return CtxPtr(raw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporally-local recurrent models"};
    app.require_subcommand(1);

    std::string config, out = ".", model, ckpt, data;
    std::uint64_t seed = 1;
    app.add_option("--config", config, "experiment configuration file")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--out", out, "output directory")->capture_default_str();

    auto* gen = app.add_subcommand("gen-data", "generate train/test dataset files");
    auto* train = app.add_subcommand("train", "train a model on a dataset file");
    train->add_option("--model", model, "refh|trbm|rtrbm|rvae|tvae|kf1|kf2")->required();
    train->add_option("data", data, "dataset file")->required();
    auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset file");
    eval->add_option("checkpoint", ckpt)->required();
    eval->add_option("data", data)->required();
    auto* predict = app.add_subcommand("predict", "next-frame prediction on ball data");
    predict->add_option("checkpoint", ckpt)->required();
    predict->add_option("data", data)->required();
    auto* generate = app.add_subcommand("generate", "backward generation from a VAE checkpoint");
    generate->add_option("checkpoint", ckpt)->required();
    auto* table1 = app.add_subcommand("table1", "PPC position-MSE table, all models");
    auto* table2 = app.add_subcommand("table2", "bouncing-ball prediction table");
    auto* dump = app.add_subcommand("dump-frames", "write ball dataset frames as PGM");
    dump->add_option("data", data)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    tlrm_status status = TLRM_OK;
    const std::string kind = table2->parsed() ? "balls" : "";
    CtxPtr ctx = make_ctx(config, kind, seed, status);
    if (status != TLRM_OK) return fail(status);

    if (gen->parsed()) {
        status = tlrm_gen_data(ctx.get(), out.c_str());
    } else if (train->parsed()) {
        char ckpt_path[1024] = {0};
        status = tlrm_train(ctx.get(), model.c_str(), data.c_str(), out.c_str(), ckpt_path,
                            sizeof(ckpt_path));
        if (status == TLRM_OK) std::printf("checkpoint: %s\n", ckpt_path);
    } else if (eval->parsed()) {
        double mse = 0.0;
        status = tlrm_eval(ctx.get(), ckpt.c_str(), data.c_str(), &mse);
        if (status == TLRM_OK) std::printf("mse: %.6e\n", mse);
    } else if (predict->parsed()) {
        double mse = 0.0;
        status = tlrm_predict(ctx.get(), ckpt.c_str(), data.c_str(), out.c_str(), &mse);
        if (status == TLRM_OK) std::printf("prediction mse: %.6e\n", mse);
    } else if (generate->parsed()) {
        status = tlrm_generate(ctx.get(), ckpt.c_str(), out.c_str());
    } else if (table1->parsed()) {
        status = tlrm_table1(ctx.get(), out.c_str());
        if (status == TLRM_OK) std::printf("wrote %s/table1.csv\n", out.c_str());
    } else if (table2->parsed()) {
        status = tlrm_table2(ctx.get(), out.c_str());
        if (status == TLRM_OK) std::printf("wrote %s/table2.csv\n", out.c_str());
    } else if (dump->parsed()) {
        status = tlrm_dump_frames(ctx.get(), data.c_str(), out.c_str(), UINT32_MAX);
    }

    return status == TLRM_OK ? 0 : fail(status);
}
