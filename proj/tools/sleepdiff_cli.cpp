// Command-line front end. Talks to the library exclusively through the C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sleepdiff/sleepdiff.h"

namespace {

struct ConfigDeleter {
    void operator()(sd_config* c) const { sd_config_free(c); }
};
using ConfigPtr = std::unique_ptr<sd_config, ConfigDeleter>;

struct CommonOpts {
    std::string config_file;
    std::string sources;
    int target = -1;
    int epochs = -1, batch = -1, n_seq = -1, d = -1, layers = -1;
    int mdta_heads = -1, seq_heads = -1;
    double lr = -1, dropout = -1, lambda_rec = -1, lambda_align = -1;
    long long seed = -1;
    int da = -1, se = -1, ca = -1, fa = -1, id = -1;
};

void add_common_flags(CLI::App* app, CommonOpts& o) {
    app->add_option("--config", o.config_file, "key=value config file");
    app->add_option("--sources", o.sources, "comma-separated source domain ids");
    app->add_option("--target", o.target, "held-out target domain id");
    app->add_option("--epochs", o.epochs, "training epochs");
    app->add_option("--batch", o.batch, "batch size (sequences)");
    app->add_option("--lr", o.lr, "learning rate");
    app->add_option("--dropout", o.dropout, "dropout probability");
    app->add_option("--lambda-rec", o.lambda_rec, "reconstruction loss weight");
    app->add_option("--lambda-align", o.lambda_align, "alignment loss weight");
    app->add_option("--n-seq", o.n_seq, "epochs per sequence");
    app->add_option("--d", o.d, "model width");
    app->add_option("--layers", o.layers, "encoder layers");
    app->add_option("--mdta-heads", o.mdta_heads, "per-epoch attention heads");
    app->add_option("--seq-heads", o.seq_heads, "sequence-level attention heads");
    app->add_option("--seed", o.seed, "rng seed");
    app->add_option("--da", o.da, "differential attention on/off (1/0)");
    app->add_option("--se", o.se, "conv signal embedding on/off (1/0)");
    app->add_option("--ca", o.ca, "cross-modal attention on/off (1/0)");
    app->add_option("--fa", o.fa, "feature alignment losses on/off (1/0)");
    app->add_option("--id", o.id, "standard MHSA at sequence level on/off (1/0)");
}

ConfigPtr build_config(const CommonOpts& o) {
    ConfigPtr cfg(sd_config_create());
    if (!o.config_file.empty() &&
        sd_config_load_file(cfg.get(), o.config_file.c_str()) != SD_OK) {
        std::fprintf(stderr, "error: %s\n", sd_last_error());
        std::exit(1);
    }
    auto set = [&](const char* k, const std::string& v) {
        sd_config_set(cfg.get(), k, v.c_str());
    };
    if (!o.sources.empty()) set("sources", o.sources);
    if (o.target >= 0) set("target", std::to_string(o.target));
    if (o.epochs >= 0) set("epochs", std::to_string(o.epochs));
    if (o.batch >= 0) set("batch", std::to_string(o.batch));
    if (o.lr >= 0) set("lr", std::to_string(o.lr));
    if (o.dropout >= 0) set("dropout", std::to_string(o.dropout));
    if (o.lambda_rec >= 0) set("lambda_rec", std::to_string(o.lambda_rec));
    if (o.lambda_align >= 0) set("lambda_align", std::to_string(o.lambda_align));
    if (o.n_seq >= 0) set("n_seq", std::to_string(o.n_seq));
    if (o.d >= 0) set("d", std::to_string(o.d));
    if (o.layers >= 0) set("layers", std::to_string(o.layers));
    if (o.mdta_heads >= 0) set("mdta_heads", std::to_string(o.mdta_heads));
    if (o.seq_heads >= 0) set("seq_heads", std::to_string(o.seq_heads));
    if (o.seed >= 0) {
        set("seed", std::to_string(o.seed));
        set("gen.seed", std::to_string(o.seed));
    }
    for (auto [k, v] : {std::pair<const char*, int>{"da", o.da}, {"se", o.se}, {"ca", o.ca},
                        {"fa", o.fa}, {"id", o.id}})
        if (v >= 0) set(k, std::to_string(v));
    return cfg;
}

std::vector<const char*> c_paths(const std::vector<std::string>& v) {
    std::vector<const char*> out;
    for (const auto& s : v) out.push_back(s.c_str());
    return out;
}

int finish(sd_status st, char* report) {
    if (report) {
        std::fputs(report, stdout);
        sd_string_free(report);
    }
    if (st != SD_OK) {
        std::fprintf(stderr, "error: %s\n", sd_last_error());
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-channel differential transformer for sleep staging"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write synthetic .slpd domain files");
    CommonOpts gen_o;
    std::string gen_out = "data";
    int gen_domains = -1, gen_recordings = -1, gen_epochs = -1;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--domains", gen_domains, "number of domains (2-5)");
    gen->add_option("--recordings", gen_recordings, "recordings per domain");
    gen->add_option("--rec-epochs", gen_epochs, "30 s epochs per recording");
    add_common_flags(gen, gen_o);

    // train
    auto* train = app.add_subcommand("train", "train one model");
    CommonOpts train_o;
    std::vector<std::string> train_data;
    std::string train_ckpt = "model.sdfm";
    train->add_option("--data", train_data, "input .slpd files")->required();
    train->add_option("--checkpoint", train_ckpt, "checkpoint output path");
    add_common_flags(train, train_o);

    // loocv
    auto* loocv = app.add_subcommand("loocv", "leave-one-domain-out protocol");
    CommonOpts loocv_o;
    std::vector<std::string> loocv_data;
    std::string loocv_csv;
    loocv->add_option("--data", loocv_data, "input .slpd files")->required();
    loocv->add_option("--csv", loocv_csv, "summary CSV output path");
    add_common_flags(loocv, loocv_o);

    // ablate
    auto* ablate = app.add_subcommand("ablate", "six-row ablation sweep");
    CommonOpts ablate_o;
    std::vector<std::string> ablate_data;
    std::string ablate_csv;
    ablate->add_option("--data", ablate_data, "input .slpd files")->required();
    ablate->add_option("--csv", ablate_csv, "summary CSV output path");
    add_common_flags(ablate, ablate_o);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::vector<std::string> eval_data;
    std::string eval_ckpt;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
    eval->add_option("--data", eval_data, "input .slpd files")->required();

    // export-attn
    auto* exp = app.add_subcommand("export-attn", "export attention maps");
    std::string exp_ckpt, exp_data, exp_out = "attention";
    exp->add_option("--checkpoint", exp_ckpt, "checkpoint path")->required();
    exp->add_option("--data", exp_data, "one .slpd file")->required();
    exp->add_option("--out", exp_out, "output directory");

    // gradcheck
    app.add_subcommand("gradcheck", "run the gradient check suite");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        auto cfg = build_config(gen_o);
        if (gen_domains >= 0)
            sd_config_set(cfg.get(), "gen.domains", std::to_string(gen_domains).c_str());
        if (gen_recordings >= 0)
            sd_config_set(cfg.get(), "gen.recordings", std::to_string(gen_recordings).c_str());
        if (gen_epochs >= 0)
            sd_config_set(cfg.get(), "gen.epochs", std::to_string(gen_epochs).c_str());
        return finish(sd_generate(cfg.get(), gen_out.c_str()), nullptr);
    }
    if (train->parsed()) {
        auto cfg = build_config(train_o);
        auto paths = c_paths(train_data);
        char* report = nullptr;
        sd_status st =
            sd_train(cfg.get(), paths.data(), paths.size(), train_ckpt.c_str(), &report);
        return finish(st, report);
    }
    if (loocv->parsed()) {
        auto cfg = build_config(loocv_o);
        auto paths = c_paths(loocv_data);
        char* report = nullptr;
        sd_status st = sd_loocv(cfg.get(), paths.data(), paths.size(),
                                loocv_csv.empty() ? nullptr : loocv_csv.c_str(), &report);
        return finish(st, report);
    }
    if (ablate->parsed()) {
        auto cfg = build_config(ablate_o);
        auto paths = c_paths(ablate_data);
        char* report = nullptr;
        sd_status st = sd_ablate(cfg.get(), paths.data(), paths.size(),
                                 ablate_csv.empty() ? nullptr : ablate_csv.c_str(), &report);
        return finish(st, report);
    }
    if (eval->parsed()) {
        auto paths = c_paths(eval_data);
        char* report = nullptr;
        sd_status st = sd_evaluate(eval_ckpt.c_str(), paths.data(), paths.size(), &report);
        return finish(st, report);
    }
    if (exp->parsed()) {
        int n_maps = 0;
        sd_status st =
            sd_export_attention(exp_ckpt.c_str(), exp_data.c_str(), exp_out.c_str(), &n_maps);
        if (st == SD_OK) std::printf("wrote %d attention maps to %s\n", n_maps, exp_out.c_str());
        return finish(st, nullptr);
    }
    // gradcheck
    char* report = nullptr;
    sd_status st = sd_gradcheck(&report);
    return finish(st, report);
}
