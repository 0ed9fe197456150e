#include "core/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "core/checkpoint.hpp"
#include "core/container.hpp"
#include "core/gradcheck.hpp"

namespace sleepdiff {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    for (int s : sources)
        if (s == target) throw std::invalid_argument("config: target must not be a source");
    if (!sources.empty() && batch % static_cast<int>(sources.size()) != 0)
        throw std::invalid_argument("config: batch must be divisible by the number of sources");
    if (batch <= 0 || epochs <= 0 || lr <= 0) throw std::invalid_argument("config: bad scalar");
}

ModelConfig ExperimentConfig::model_config() const {
    ModelConfig m;
    m.d = d;
    m.n_seq = n_seq;
    m.layers = layers;
    m.mdta_heads = mdta_heads;
    m.seq_heads = seq_heads;
    m.dropout = dropout;
    m.da = da;
    m.se = se;
    m.ca = ca;
    m.fa = fa;
    m.id = id;
    m.seed = seed;
    return m;
}

std::map<std::string, std::string> ExperimentConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    std::string src;
    for (size_t i = 0; i < sources.size(); ++i)
        src += (i ? "," : "") + std::to_string(sources[i]);
    kv["sources"] = src;
    kv["target"] = std::to_string(target);
    kv["epochs"] = std::to_string(epochs);
    kv["batch"] = std::to_string(batch);
    kv["lr"] = std::to_string(lr);
    kv["dropout"] = std::to_string(dropout);
    kv["lambda_rec"] = std::to_string(lambda_rec);
    kv["lambda_align"] = std::to_string(lambda_align);
    kv["n_seq"] = std::to_string(n_seq);
    kv["d"] = std::to_string(d);
    kv["layers"] = std::to_string(layers);
    kv["mdta_heads"] = std::to_string(mdta_heads);
    kv["seq_heads"] = std::to_string(seq_heads);
    kv["seed"] = std::to_string(seed);
    kv["da"] = da ? "1" : "0";
    kv["se"] = se ? "1" : "0";
    kv["ca"] = ca ? "1" : "0";
    kv["fa"] = fa ? "1" : "0";
    kv["id"] = id ? "1" : "0";
    return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    auto geti = [&](const char* k, int dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : std::stoi(it->second);
    };
    auto getd = [&](const char* k, double dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : std::stod(it->second);
    };
    auto it = kv.find("sources");
    if (it != kv.end() && !it->second.empty()) {
        std::istringstream is(it->second);
        std::string tok;
        while (std::getline(is, tok, ',')) c.sources.push_back(std::stoi(tok));
    }
    c.target = geti("target", c.target);
    c.epochs = geti("epochs", c.epochs);
    c.batch = geti("batch", c.batch);
    c.lr = getd("lr", c.lr);
    c.dropout = getd("dropout", c.dropout);
    c.lambda_rec = getd("lambda_rec", c.lambda_rec);
    c.lambda_align = getd("lambda_align", c.lambda_align);
    c.n_seq = geti("n_seq", c.n_seq);
    c.d = geti("d", c.d);
    c.layers = geti("layers", c.layers);
    c.mdta_heads = geti("mdta_heads", c.mdta_heads);
    c.seq_heads = geti("seq_heads", c.seq_heads);
    auto its = kv.find("seed");
    if (its != kv.end()) c.seed = std::stoull(its->second);
    c.da = geti("da", 1) != 0;
    c.se = geti("se", 1) != 0;
    c.ca = geti("ca", 1) != 0;
    c.fa = geti("fa", 1) != 0;
    c.id = geti("id", 1) != 0;
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ExperimentConfig::from_kv(decode_config(ss.str()));
}

void save_config_file(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write config file: " + path);
    os << encode_config(cfg.to_kv());
}

// -------------------------------------------------------------- batching

BatchBuilder::BatchBuilder(const std::vector<DomainPool>* pools, int batch, Rng rng)
    : pools_(pools), batch_(batch), rng_(rng) {
    if (pools->size() < 2) throw std::invalid_argument("build_batch: need >= 2 source domains");
    if (batch % static_cast<int>(pools->size()) != 0)
        throw std::invalid_argument("build_batch: batch not divisible by domain count");
    per_domain_ = batch / static_cast<int>(pools->size());
    order_.resize(pools->size());
    cursor_.resize(pools->size());
    start_pass();
}

void BatchBuilder::start_pass() {
    for (size_t p = 0; p < pools_->size(); ++p) {
        auto& idx = order_[p];
        idx.resize((*pools_)[p].sequences.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        rng_.shuffle(idx);
        cursor_[p] = 0;
    }
}

int BatchBuilder::batches_per_pass() const {
    size_t shortest = SIZE_MAX;
    for (const auto& p : *pools_) shortest = std::min(shortest, p.sequences.size());
    return static_cast<int>((shortest + per_domain_ - 1) / per_domain_);
}

std::vector<const SequenceSample<float>*> BatchBuilder::next_batch() {
    std::vector<const SequenceSample<float>*> out;
    for (size_t p = 0; p < pools_->size(); ++p) {
        size_t left = order_[p].size() - cursor_[p];
        size_t take = std::min<size_t>(per_domain_, left);
        if (take == 0) return {};  // a domain ran dry: skip the remainder
        for (size_t i = 0; i < take; ++i)
            out.push_back(&(*pools_)[p].sequences[order_[p][cursor_[p] + i]]);
        cursor_[p] += take;
    }
    return out;
}

// -------------------------------------------------------------- training

Trainer::Trainer(const ExperimentConfig& cfg, const std::vector<DomainPool>* pools)
    : cfg_(cfg),
      pools_(pools),
      model_(Model<float>::build(cfg.model_config())),
      opt_(model_.store, cfg.lr),
      batches_(pools, cfg.batch, Rng(cfg.seed).split(101)),
      dropout_rng_(Rng(cfg.seed).split(102)) {
    cfg_.validate();
}

TrainStepResult Trainer::step(const std::vector<const SequenceSample<float>*>& batch) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    Tape<float> tape;
    ForwardOpts<float> opts;
    opts.training = true;
    opts.dropout_rng = &dropout_rng_;

    VarPtr<float> cls_sum, rec_sum;
    std::map<int, std::vector<VarPtr<float>>> feats_by_domain;
    TrainStepResult result;

    for (const auto* seq : batch) {
        auto out = model_.forward_sequence(&tape, *seq, opts);
        auto c = cls_loss(&tape, out.logits, seq->labels);
        auto r = rec_loss(&tape, out.target, out.recon);
        cls_sum = cls_sum ? add(&tape, cls_sum, c) : c;
        rec_sum = rec_sum ? add(&tape, rec_sum, r) : r;
        feats_by_domain[seq->domain_id].push_back(out.enc_s);

        for (int e = 0; e < cfg_.n_seq; ++e) {
            int best = 0;
            for (int k = 1; k < model_.cfg.n_classes; ++k)
                if (out.logits->val.at(e, k) > out.logits->val.at(e, best)) best = k;
            result.correct += (best == seq->labels[e]);
            result.scored++;
        }
    }

    double inv_b = 1.0 / static_cast<double>(batch.size());
    auto cls = scale(&tape, cls_sum, inv_b);
    auto rec = scale(&tape, rec_sum, inv_b);

    auto exp_l = zero_scalar<float>();
    auto cov_l = zero_scalar<float>();
    auto seq_l = zero_scalar<float>();
    if (cfg_.fa && feats_by_domain.size() >= 2) {
        std::vector<VarPtr<float>> epoch_feats;
        std::vector<std::vector<VarPtr<float>>> seq_feats;
        for (auto& [dom, fs_list] : feats_by_domain) {
            epoch_feats.push_back(fs_list.size() == 1 ? fs_list[0]
                                                      : concat_rows(&tape, fs_list));
            seq_feats.push_back(fs_list);
        }
        exp_l = exp_loss(&tape, epoch_feats);
        cov_l = cov_loss(&tape, epoch_feats);
        seq_l = seq_align_loss(&tape, seq_feats);
    }

    auto total = total_loss(&tape, cls, rec, exp_l, cov_l, seq_l, cfg_.lambda_rec,
                            cfg_.lambda_align);

    auto& L = result.losses;
    L.cls = cls->val[0];
    L.rec = rec->val[0];
    L.epo = exp_l->val[0];
    L.cov = cov_l->val[0];
    L.exp = L.epo;
    L.seq = seq_l->val[0];
    L.total = total->val[0];
    L.cls_per_epoch = L.cls / cfg_.n_seq;
    L.lambda_rec = cfg_.lambda_rec;
    L.lambda_align = cfg_.lambda_align;

    if (!std::isfinite(L.total)) {
        std::string doms;
        for (const auto* s : batch) doms += std::to_string(s->domain_id) + " ";
        throw std::runtime_error(
            "train_step: non-finite loss, aborting. domains: " + doms + " cls=" +
            std::to_string(L.cls) + " rec=" + std::to_string(L.rec) + " epo=" +
            std::to_string(L.epo) + " cov=" + std::to_string(L.cov) + " seq=" +
            std::to_string(L.seq));
    }

    model_.store.zero_grad();
    tape.backward(total);
    opt_.step();
    ++steps_;
    return result;
}

LossBundle Trainer::run_epoch() {
    batches_.start_pass();
    LossBundle mean;
    int n = 0;
    while (true) {
        auto batch = batches_.next_batch();
        if (batch.empty()) break;
        auto r = step(batch);
        mean.cls += r.losses.cls;
        mean.rec += r.losses.rec;
        mean.epo += r.losses.epo;
        mean.cov += r.losses.cov;
        mean.seq += r.losses.seq;
        mean.total += r.losses.total;
        ++n;
    }
    if (n > 0) {
        mean.cls /= n;
        mean.rec /= n;
        mean.epo /= n;
        mean.cov /= n;
        mean.seq /= n;
        mean.total /= n;
        mean.exp = mean.epo;
        mean.cls_per_epoch = mean.cls / cfg_.n_seq;
    }
    return mean;
}

void Trainer::train(std::ostream* log) {
    for (int e = 1; e <= cfg_.epochs; ++e) {
        LossBundle b = run_epoch();
        if (log)
            *log << "epoch " << e << "/" << cfg_.epochs << "  total " << b.total << "  cls "
                 << b.cls << "  rec " << b.rec << "  epo " << b.epo << "  cov " << b.cov
                 << "  seq " << b.seq << "\n";
    }
}

// ------------------------------------------------------------ evaluation

MetricsReport evaluate(const Model<float>& model,
                       const std::vector<SequenceSample<float>>& target_sequences) {
    if (target_sequences.empty()) throw std::invalid_argument("evaluate: no target sequences");
    std::vector<int> truth, pred;
    for (const auto& seq : target_sequences) {
        auto out = model.forward_sequence(nullptr, seq);
        for (int e = 0; e < model.cfg.n_seq; ++e) {
            int best = 0;
            for (int k = 1; k < model.cfg.n_classes; ++k)
                if (out.logits->val.at(e, k) > out.logits->val.at(e, best)) best = k;
            truth.push_back(seq.labels[e]);
            pred.push_back(best);
        }
    }
    return compute_metrics(truth, pred);
}

double measure_epoch_alignment(const Model<float>& model, const std::vector<DomainPool>& pools,
                               int max_sequences_per_domain) {
    std::vector<VarPtr<float>> per_domain;
    for (const auto& pool : pools) {
        std::vector<VarPtr<float>> feats;
        for (const auto& seq : pool.sequences) {
            if (static_cast<int>(feats.size()) >= max_sequences_per_domain) break;
            feats.push_back(model.forward_sequence(nullptr, seq).enc_s);
        }
        if (!feats.empty())
            per_domain.push_back(feats.size() == 1 ? feats[0]
                                                   : concat_rows<float>(nullptr, feats));
    }
    return exp_loss<float>(nullptr, per_domain)->val[0];
}

// ------------------------------------------------------------ checkpoints

void save_model(const Model<float>& model, const ExperimentConfig& cfg, const std::string& path) {
    save_checkpoint(model.store, cfg.to_kv(), path);
}

LoadedModel load_model(const std::string& path) {
    auto ck = read_checkpoint(path);
    ExperimentConfig cfg = ExperimentConfig::from_kv(ck.config);
    LoadedModel lm{cfg, Model<float>::build(cfg.model_config())};
    apply_checkpoint(lm.model.store, ck);
    return lm;
}

// -------------------------------------------------------- attention export

namespace {

std::string map_csv(const AttentionRecord& r) {
    std::string s;
    char buf[32];
    for (int q = 0; q < r.n_q; ++q) {
        for (int k = 0; k < r.n_k; ++k) {
            std::snprintf(buf, sizeof buf, "%.8g", r.map[static_cast<size_t>(q) * r.n_k + k]);
            s += buf;
            s += (k + 1 < r.n_k) ? ',' : '\n';
        }
    }
    return s;
}

std::string kind_name(AttnKind k) {
    switch (k) {
        case AttnKind::dsa: return "dsa";
        case AttnKind::dca: return "dca";
        default: return "sequence";
    }
}

// Heat strip: the global token's attention over the 20 series tokens, each
// spread across its 150-sample span under the epoch waveform.
std::string render_svg(const AttentionRecord& r, const Tensor<float>& signal) {
    const int w = 900, h = 220, strip_h = 30, n_tok = r.n_k - 1;
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    // normalized weights of the global query row over series keys
    std::vector<double> wts(n_tok);
    double mx = 1e-12;
    for (int k = 0; k < n_tok; ++k) {
        wts[k] = std::abs(r.map[static_cast<size_t>(r.n_q - 1) * r.n_k + k]);
        mx = std::max(mx, wts[k]);
    }
    for (int k = 0; k < n_tok; ++k) {
        int x0 = k * w / n_tok;
        int x1 = (k + 1) * w / n_tok;
        int heat = static_cast<int>(255.0 * wts[k] / mx);
        os << "<rect x='" << x0 << "' y='" << h - strip_h << "' width='" << x1 - x0
           << "' height='" << strip_h << "' fill='rgb(" << heat << ",0," << 255 - heat
           << ")'/>\n";
    }
    os << "<path fill='none' stroke='black' stroke-width='0.6' d='M";
    int n = static_cast<int>(signal.numel());
    float lo = signal[0], hi = signal[0];
    for (size_t i = 0; i < signal.numel(); ++i) {
        lo = std::min(lo, signal[i]);
        hi = std::max(hi, signal[i]);
    }
    double span = std::max(1e-6f, hi - lo);
    for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(i) * w / n;
        double y = (h - strip_h - 10) * (1.0 - (signal[i] - lo) / span) + 5;
        os << (i ? " L" : "") << x << " " << y;
    }
    os << "'/>\n</svg>\n";
    return os.str();
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s)
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else {
            out += c;
        }
    return out;
}

}  // namespace

int export_attention(const Model<float>& model, const SequenceSample<float>& sequence,
                     const std::string& out_dir, bool svg) {
    fs::create_directories(out_dir);
    AttnSink sink;
    ForwardOpts<float> opts;
    opts.sink = &sink;
    model.forward_sequence(nullptr, sequence, opts);

    std::ostringstream index;
    index << "[\n";
    int dsa_count = 0;
    bool first = true;
    for (const auto& r : sink.records) {
        std::string name = kind_name(r.kind) + "_e" + std::to_string(r.epoch) + "_l" +
                           std::to_string(r.layer) + "_h" + std::to_string(r.head) +
                           (r.modality.empty() ? "" : "_" + r.modality) + ".csv";
        std::ofstream os(fs::path(out_dir) / name);
        os << map_csv(r);
        if (!first) index << ",\n";
        first = false;
        index << "  {\"file\": \"" << json_escape(name) << "\", \"kind\": \"" << kind_name(r.kind)
              << "\", \"layer\": " << r.layer << ", \"head\": " << r.head
              << ", \"epoch\": " << r.epoch << ", \"modality\": \"" << json_escape(r.modality)
              << "\", \"lambda\": " << r.lambda << ", \"rows\": " << r.n_q
              << ", \"cols\": " << r.n_k << "}";
        if (r.kind == AttnKind::dsa) {
            ++dsa_count;
            if (svg && r.epoch == 0 && r.head == 0) {
                const auto& sig = r.modality == "eog" ? sequence.eog[0] : sequence.eeg[0];
                std::ofstream sv(fs::path(out_dir) /
                                 ("strip_l" + std::to_string(r.layer) + "_" + r.modality + ".svg"));
                sv << render_svg(r, sig);
            }
        }
    }
    index << "\n]\n";
    std::ofstream idx(fs::path(out_dir) / "index.json");
    idx << index.str();
    return dsa_count;
}

// ----------------------------------------------------------------- loocv

std::string LoocvSummary::to_csv() const {
    std::string s = "held_out,accuracy,macro_f1\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.2f,%.2f\n", r.held_out, r.accuracy, r.macro_f1);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "average,%.2f,%.2f\n", avg_accuracy, avg_macro_f1);
    s += buf;
    return s;
}

std::string LoocvSummary::to_console() const {
    std::string s = "held-out  accuracy  macro-F1\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%8d  %8.2f  %8.2f\n", r.held_out, r.accuracy, r.macro_f1);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, " average  %8.2f  %8.2f\n", avg_accuracy, avg_macro_f1);
    s += buf;
    return s;
}

LoocvSummary run_loocv(const ExperimentConfig& base, const std::vector<DomainPool>& pools,
                       std::ostream* log) {
    if (pools.size() < 3) throw std::invalid_argument("loocv: need >= 3 domains");
    LoocvSummary summary;
    for (size_t hold = 0; hold < pools.size(); ++hold) {
        std::vector<DomainPool> sources;
        for (size_t p = 0; p < pools.size(); ++p)
            if (p != hold) sources.push_back(pools[p]);
        ExperimentConfig cfg = base;
        cfg.target = pools[hold].domain_id;
        cfg.sources.clear();
        for (const auto& s : sources) cfg.sources.push_back(s.domain_id);
        if (cfg.batch % static_cast<int>(sources.size()) != 0)
            cfg.batch = static_cast<int>(sources.size()) *
                        std::max(1, cfg.batch / static_cast<int>(sources.size()));
        if (log) *log << "training with domain " << cfg.target << " held out\n";
        Trainer trainer(cfg, &sources);
        trainer.train(log);
        auto m = evaluate(trainer.model(), pools[hold].sequences);
        if (log) *log << format_metrics(m);
        summary.rows.push_back({cfg.target, m.accuracy, m.macro_f1});
    }
    for (const auto& r : summary.rows) {
        summary.avg_accuracy += r.accuracy;
        summary.avg_macro_f1 += r.macro_f1;
    }
    summary.avg_accuracy /= summary.rows.size();
    summary.avg_macro_f1 /= summary.rows.size();
    return summary;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base,
                                      const std::vector<DomainPool>& pools,
                                      std::ostream* log) {
    struct Row {
        const char* name;
        bool da, se, ca, fa, id;
    };
    static const Row rows[] = {
        {"full", true, true, true, true, true},  {"-DA", false, true, true, true, true},
        {"-SE", true, false, true, true, true},  {"-CA", true, true, false, true, true},
        {"-FA", true, true, true, false, true},  {"-ID", true, true, true, true, false},
    };
    if (base.target < 0) throw std::invalid_argument("ablate: config needs a target domain");
    std::vector<DomainPool> sources;
    const DomainPool* target = nullptr;
    for (const auto& p : pools) {
        if (p.domain_id == base.target)
            target = &p;
        else
            sources.push_back(p);
    }
    if (!target) throw std::invalid_argument("ablate: target domain not found in pools");

    std::vector<AblationRow> out;
    for (const auto& row : rows) {
        ExperimentConfig cfg = base;
        cfg.da = row.da;
        cfg.se = row.se;
        cfg.ca = row.ca;
        cfg.fa = row.fa;
        cfg.id = row.id;
        if (log) *log << "ablation " << row.name << "\n";
        Trainer trainer(cfg, &sources);
        trainer.train(log);
        auto m = evaluate(trainer.model(), target->sequences);
        out.push_back({row.name, row.da, row.se, row.ca, row.fa, row.id, m.accuracy, m.macro_f1});
    }
    return out;
}

// -------------------------------------------------------------- gradcheck

std::string run_gradient_suite(bool& all_passed) {
    // Kept alongside the unit tests: same checks, callable from the CLI.
    all_passed = true;
    std::ostringstream os;
    auto report = [&](const std::string& name, const GradCheckReport& r) {
        os << (r.passed ? "pass" : "FAIL") << "  " << name;
        if (!r.passed) {
            os << "  " << r.describe();
            all_passed = false;
        }
        os << "\n";
    };

    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);

        {  // linear + gelu
            auto x = make_var(Tensor<double>::uniform({3, 4}, rng, -1, 1), true);
            auto w = make_var(Tensor<double>::uniform({4, 5}, rng, -1, 1), true);
            auto b = make_var(Tensor<double>::uniform({1, 5}, rng, -1, 1), true);
            auto fn = [&](Tape<double>* t) {
                return sum_all(t, gelu(t, linear(t, x, w, b)));
            };
            report("linear+gelu seed " + std::to_string(seed), grad_check_vars(fn, {x, w, b}, 1e-5));
        }
        {  // softmax
            auto x = make_var(Tensor<double>::uniform({3, 6}, rng, -2, 2), true);
            auto w = make_var(Tensor<double>::uniform({3, 6}, rng, -1, 1), true);
            auto fn = [&](Tape<double>* t) {
                return sum_all(t, mul(t, softmax_rows(t, x), w));
            };
            report("softmax seed " + std::to_string(seed), grad_check_vars(fn, {x}, 1e-5));
        }
        {  // layer_norm
            auto x = make_var(Tensor<double>::uniform({3, 6}, rng, -2, 2), true);
            auto g = make_var(Tensor<double>::uniform({1, 6}, rng, 0.5, 1.5), true);
            auto b = make_var(Tensor<double>::uniform({1, 6}, rng, -0.5, 0.5), true);
            auto w = make_var(Tensor<double>::uniform({3, 6}, rng, -1, 1), true);
            auto fn = [&](Tape<double>* t) {
                return sum_all(t, mul(t, layer_norm(t, x, g, b), w));
            };
            report("layer_norm seed " + std::to_string(seed),
                   grad_check_vars(fn, {x, g, b}, 1e-5));
        }
        {  // conv1d
            auto x = make_var(Tensor<double>::uniform({2, 12}, rng, -1, 1), true);
            auto w = make_var(Tensor<double>::uniform({3, 2 * 5}, rng, -1, 1), true);
            auto b = make_var(Tensor<double>::uniform({3, 1}, rng, -1, 1), true);
            auto fn = [&](Tape<double>* t) {
                return sum_all(t, conv1d(t, x, w, b, 5, 1, 2));
            };
            report("conv1d seed " + std::to_string(seed), grad_check_vars(fn, {x, w, b}, 1e-5));
        }
        {  // diff attention head incl lambda, via multi_head on 1 head
            ParamStore<double> store;
            Rng prng = rng.split(7);
            auto p = make_diff_attn(store, "g", 8, 2, 2, true, prng);
            for (auto* lv : {&p.lq1, &p.lk1, &p.lq2, &p.lk2})
                for (size_t i = 0; i < (*lv)->val.numel(); ++i)
                    (*lv)->val[i] = rng.uniform(-0.4, 0.4);
            auto x = make_var(Tensor<double>::uniform({4, 8}, rng, -1, 1), true);
            auto w = make_var(Tensor<double>::uniform({4, 8}, rng, -1, 1), true);
            auto fn = [&](Tape<double>* t) {
                return sum_all(t, mul(t, multi_head_diff_attn(t, x, x, p), w));
            };
            std::vector<VarPtr<double>> vars{x, p.Wq, p.Wk, p.Wv, p.Wo, p.lq1, p.lk1, p.lq2, p.lk2};
            report("multi_head_diff_attn seed " + std::to_string(seed),
                   grad_check_vars(fn, vars, 1e-5));
        }
        {  // losses including the PCC path
            auto f0 = make_var(Tensor<double>::uniform({4, 6}, rng, -1, 1), true);
            auto f1 = make_var(Tensor<double>::uniform({5, 6}, rng, -1, 1), true);
            std::vector<VarPtr<double>> doms{f0, f1};
            auto fn_align = [&](Tape<double>* t) {
                auto e = exp_loss(t, doms);
                auto c = cov_loss(t, doms);
                std::vector<std::vector<VarPtr<double>>> sq{{f0}, {slice_rows(t, f1, 0, 4)}};
                auto s = seq_align_loss(t, sq);
                return add(t, add(t, e, c), s);
            };
            report("alignment losses seed " + std::to_string(seed),
                   grad_check_vars(fn_align, {f0, f1}, 1e-5));

            auto logits = make_var(Tensor<double>::uniform({4, 5}, rng, -2, 2), true);
            auto fn_cls = [&](Tape<double>* t) { return cls_loss(t, logits, {0, 1, 2, 3}); };
            report("cls loss seed " + std::to_string(seed),
                   grad_check_vars(fn_cls, {logits}, 1e-5));

            auto xa = make_var(Tensor<double>::uniform({2, 9}, rng, -1, 1), true);
            auto xb = make_var(Tensor<double>::uniform({2, 9}, rng, -1, 1), true);
            auto fn_rec = [&](Tape<double>* t) { return rec_loss(t, xa, xb); };
            report("rec loss seed " + std::to_string(seed), grad_check_vars(fn_rec, {xa, xb}, 1e-5));
        }
    }

    {  // mdta layer, reduced configuration, one seed (expensive)
        Rng rng(3);
        ParamStore<double> store;
        Rng prng = rng.split(1);
        auto layer = make_mdta_layer(store, "m", 8, 2, 1, true, true, prng);
        auto s_eeg = make_var(Tensor<double>::uniform({3, 8}, rng, -1, 1), true);
        auto g_eeg = make_var(Tensor<double>::uniform({1, 8}, rng, -1, 1), true);
        auto s_eog = make_var(Tensor<double>::uniform({3, 8}, rng, -1, 1), true);
        auto g_eog = make_var(Tensor<double>::uniform({1, 8}, rng, -1, 1), true);
        auto w = make_var(Tensor<double>::uniform({4, 8}, rng, -1, 1), true);
        auto fn = [&](Tape<double>* t) {
            ModalityState<double> eeg{s_eeg, g_eeg}, eog{s_eog, g_eog};
            MdtaRunCtx ctx;
            auto [oe, oo] = mdta_layer(t, eeg, eog, layer, ctx);
            auto cat = concat_rows(t, {oe.series, oe.global, oo.series, oo.global});
            return sum_all(t, mul(t, slice_rows(t, cat, 0, 4), w));
        };
        std::vector<VarPtr<double>> vars{s_eeg, g_eeg, s_eog, g_eog,
                                         layer.dsa_eeg.Wq, layer.dsa_eeg.lq1,
                                         layer.dca.Wv, layer.mlp_w2};
        report("mdta_layer reduced config", grad_check_vars(fn, vars, 1e-4));
    }

    return os.str();
}

// ----------------------------------------------------------------- pools

std::vector<DomainPool> load_domain_pools(const std::vector<std::string>& paths, int n_seq,
                                          std::vector<std::string>* log) {
    std::map<int, DomainPool> by_domain;
    for (const auto& path : paths) {
        Recording rec = read_container(path);
        auto& pool = by_domain[rec.domain_id];
        pool.domain_id = rec.domain_id;
        auto seqs = assemble_sequences<float>(rec, n_seq, log);
        for (auto& s : seqs) pool.sequences.push_back(std::move(s));
    }
    std::vector<DomainPool> out;
    for (auto& [id, pool] : by_domain) out.push_back(std::move(pool));
    return out;
}

}  // namespace sleepdiff
