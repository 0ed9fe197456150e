#include "sleepdiff/sleepdiff.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "core/checkpoint.hpp"
#include "core/container.hpp"
#include "core/harness.hpp"

using namespace sleepdiff;
namespace fs = std::filesystem;

namespace {

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

sd_status fail(sd_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

// Maps library exceptions onto the coarse C status codes.
template <typename Fn>
sd_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ContainerError& e) {
        return fail(SD_ERR_FORMAT, e.what());
    } catch (const CheckpointError& e) {
        return fail(SD_ERR_FORMAT, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(SD_ERR_INVALID_ARG, e.what());
    } catch (const std::exception& e) {
        return fail(SD_ERR_RUNTIME, e.what());
    }
}

std::vector<std::string> to_paths(const char* const* paths, size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (!paths[i]) throw std::invalid_argument("null path");
        out.emplace_back(paths[i]);
    }
    return out;
}

}  // namespace

struct sd_config {
    std::map<std::string, std::string> kv;
};

extern "C" {

const char* sd_last_error(void) { return g_last_error.c_str(); }

void sd_string_free(char* s) { std::free(s); }

sd_config* sd_config_create(void) { return new sd_config(); }

void sd_config_free(sd_config* cfg) { delete cfg; }

sd_status sd_config_set(sd_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(SD_ERR_INVALID_ARG, "null argument");
    cfg->kv[key] = value;
    return SD_OK;
}

char* sd_config_get(const sd_config* cfg, const char* key) {
    if (!cfg || !key) return nullptr;
    auto it = cfg->kv.find(key);
    return it == cfg->kv.end() ? nullptr : dup_string(it->second);
}

sd_status sd_config_load_file(sd_config* cfg, const char* path) {
    if (!cfg || !path) return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        std::ifstream is(path);
        if (!is) return fail(SD_ERR_IO, std::string("cannot open: ") + path);
        std::stringstream ss;
        ss << is.rdbuf();
        for (auto& [k, v] : decode_config(ss.str())) cfg->kv[k] = v;
        return SD_OK;
    });
}

sd_status sd_config_save_file(const sd_config* cfg, const char* path) {
    if (!cfg || !path) return fail(SD_ERR_INVALID_ARG, "null argument");
    std::ofstream os(path);
    if (!os) return fail(SD_ERR_IO, std::string("cannot write: ") + path);
    os << encode_config(cfg->kv);
    return SD_OK;
}

sd_status sd_generate(const sd_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        auto get = [&](const std::string& k, const std::string& dflt) {
            auto it = cfg->kv.find(k);
            return it == cfg->kv.end() ? dflt : it->second;
        };
        int n_domains = std::stoi(get("gen.domains", "5"));
        int n_recordings = std::stoi(get("gen.recordings", "40"));
        int epochs = std::stoi(get("gen.epochs", "20"));
        uint64_t seed = std::stoull(get("gen.seed", get("seed", "0")));

        auto specs = default_domain_specs();
        if (n_domains < 2 || n_domains > static_cast<int>(specs.size()))
            return fail(SD_ERR_INVALID_ARG, "gen.domains must be in [2, 5]");
        specs.resize(n_domains);
        for (auto& s : specs) {
            std::string p = "gen.domain" + std::to_string(s.domain_id) + ".";
            s.gain = std::stod(get(p + "gain", std::to_string(s.gain)));
            s.noise_std = std::stod(get(p + "noise", std::to_string(s.noise_std)));
            s.polarity = std::stoi(get(p + "polarity", std::to_string(s.polarity)));
            s.spectral_tilt = std::stod(get(p + "tilt", std::to_string(s.spectral_tilt)));
            s.reference_offset = std::stod(get(p + "offset", std::to_string(s.reference_offset)));
            s.native_rate = std::stoi(get(p + "rate", std::to_string(s.native_rate)));
        }

        fs::create_directories(out_dir);
        for (const auto& spec : specs) {
            auto recs = synth_domain(spec, n_recordings, epochs, seed);
            for (size_t r = 0; r < recs.size(); ++r) {
                std::string name = "domain" + std::to_string(spec.domain_id) + "_rec" +
                                   std::to_string(r) + ".slpd";
                write_container(recs[r], (fs::path(out_dir) / name).string());
            }
        }
        return SD_OK;
    });
}

sd_status sd_train(const sd_config* cfg, const char* const* data_paths, size_t n_paths,
                   const char* checkpoint_out, char** report_out) {
    if (!cfg || !data_paths || !checkpoint_out)
        return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        ExperimentConfig ec = ExperimentConfig::from_kv(cfg->kv);
        auto pools = load_domain_pools(to_paths(data_paths, n_paths), ec.n_seq);

        std::vector<DomainPool> sources;
        for (auto& p : pools) {
            if (p.domain_id == ec.target) continue;  // leakage guard
            if (ec.sources.empty() ||
                std::find(ec.sources.begin(), ec.sources.end(), p.domain_id) != ec.sources.end())
                sources.push_back(std::move(p));
        }
        if (ec.sources.empty())
            for (const auto& s : sources) ec.sources.push_back(s.domain_id);

        std::ostringstream log;
        Trainer trainer(ec, &sources);
        trainer.train(&log);
        save_model(trainer.model(), ec, checkpoint_out);
        if (report_out) *report_out = dup_string(log.str());
        return SD_OK;
    });
}

sd_status sd_evaluate(const char* checkpoint_path, const char* const* data_paths, size_t n_paths,
                      char** report_out) {
    if (!checkpoint_path || !data_paths) return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        auto lm = load_model(checkpoint_path);
        auto pools = load_domain_pools(to_paths(data_paths, n_paths), lm.cfg.n_seq);
        std::vector<SequenceSample<float>> seqs;
        for (auto& p : pools)
            for (auto& s : p.sequences) seqs.push_back(std::move(s));
        auto m = evaluate(lm.model, seqs);
        if (report_out) *report_out = dup_string(format_metrics(m));
        return SD_OK;
    });
}

sd_status sd_loocv(const sd_config* cfg, const char* const* data_paths, size_t n_paths,
                   const char* csv_out, char** report_out) {
    if (!cfg || !data_paths) return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        ExperimentConfig ec = ExperimentConfig::from_kv(cfg->kv);
        auto pools = load_domain_pools(to_paths(data_paths, n_paths), ec.n_seq);
        auto summary = run_loocv(ec, pools);
        if (csv_out) {
            std::ofstream os(csv_out);
            if (!os) return fail(SD_ERR_IO, std::string("cannot write: ") + csv_out);
            os << summary.to_csv();
        }
        if (report_out) *report_out = dup_string(summary.to_console());
        return SD_OK;
    });
}

sd_status sd_ablate(const sd_config* cfg, const char* const* data_paths, size_t n_paths,
                    const char* csv_out, char** report_out) {
    if (!cfg || !data_paths) return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        ExperimentConfig ec = ExperimentConfig::from_kv(cfg->kv);
        auto pools = load_domain_pools(to_paths(data_paths, n_paths), ec.n_seq);
        auto rows = run_ablation(ec, pools);

        std::string csv = "variant,da,se,ca,fa,id,accuracy,macro_f1\n";
        std::string console = "variant   DA SE CA FA ID  accuracy  macro-F1\n";
        char buf[160];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%d,%d,%.2f,%.2f\n", r.name.c_str(), r.da,
                          r.se, r.ca, r.fa, r.id, r.accuracy, r.macro_f1);
            csv += buf;
            std::snprintf(buf, sizeof buf, "%-8s  %2d %2d %2d %2d %2d  %8.2f  %8.2f\n",
                          r.name.c_str(), r.da, r.se, r.ca, r.fa, r.id, r.accuracy, r.macro_f1);
            console += buf;
        }
        if (csv_out) {
            std::ofstream os(csv_out);
            if (!os) return fail(SD_ERR_IO, std::string("cannot write: ") + csv_out);
            os << csv;
        }
        if (report_out) *report_out = dup_string(console);
        return SD_OK;
    });
}

sd_status sd_export_attention(const char* checkpoint_path, const char* data_path,
                              const char* out_dir, int* n_dsa_maps_out) {
    if (!checkpoint_path || !data_path || !out_dir)
        return fail(SD_ERR_INVALID_ARG, "null argument");
    return guarded([&]() {
        auto lm = load_model(checkpoint_path);
        Recording rec = read_container(data_path);
        auto seqs = assemble_sequences<float>(rec, lm.cfg.n_seq);
        if (seqs.empty())
            return fail(SD_ERR_INVALID_ARG, "container too short for one sequence");
        int n = export_attention(lm.model, seqs[0], out_dir);
        if (n_dsa_maps_out) *n_dsa_maps_out = n;
        return SD_OK;
    });
}

sd_status sd_gradcheck(char** report_out) {
    return guarded([&]() {
        bool ok = false;
        std::string report = run_gradient_suite(ok);
        if (report_out) *report_out = dup_string(report);
        return ok ? SD_OK : fail(SD_ERR_RUNTIME, "gradient suite reported failures");
    });
}

}  // extern "C"
