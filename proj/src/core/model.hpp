#pragma once

#include <array>

#include "embedding.hpp"
#include "losses.hpp"
#include "mdta.hpp"
#include "sequence.hpp"

namespace sleepdiff {

// Ablation switches mirror the five toggles: DA (differential attention in
// MDTA), SE (conv signal embedding vs patching), CA (cross-modal DCA),
// FA (alignment losses, gated in the harness), ID (standard MHSA vs DA at
// the sequence level). All-on is the full model.
struct ModelConfig {
    int d = 128;
    int n_tok = 20;
    int n_seq = 20;
    int layers = 4;
    int mdta_heads = 4;
    int seq_heads = 8;
    int n_classes = 5;
    double dropout = 0.1;
    bool da = true;
    bool se = true;
    bool ca = true;
    bool fa = true;
    bool id = true;
    uint64_t seed = 0;

    int d_seq() const { return 2 * d; }
};

template <typename T>
struct SequenceSample {
    int domain_id = 0;
    std::vector<Tensor<T>> eeg;  // n_seq tensors of shape (1, 3000)
    std::vector<Tensor<T>> eog;
    std::vector<int> labels;     // n_seq entries in 0..4
};

template <typename T>
struct SequenceOutput {
    VarPtr<T> logits;   // (n_seq, n_classes)
    VarPtr<T> recon;    // (n_seq * 2, 3000) epoch-major, channel-major
    VarPtr<T> target;   // same shape, the input signals (leaf)
    VarPtr<T> enc_g;    // (n_seq, D) classifier-side features
    VarPtr<T> enc_s;    // (n_seq, D) reconstruction/alignment-side features
};

template <typename T>
struct ForwardOpts {
    bool training = false;
    Rng* dropout_rng = nullptr;
    AttnSink* sink = nullptr;
};

template <typename T>
class Model {
  public:
    ModelConfig cfg;
    ParamStore<T> store;

    static Model build(const ModelConfig& cfg) {
        Model m;
        m.cfg = cfg;
        Rng root(cfg.seed);
        Rng r_eeg = root.split(1), r_eog = root.split(2);
        m.emb_eeg_ = make_embedder(m.store, "embed.eeg", cfg.d, !cfg.se, r_eeg);
        m.emb_eog_ = make_embedder(m.store, "embed.eog", cfg.d, !cfg.se, r_eog);
        for (int l = 1; l <= cfg.layers; ++l) {
            Rng rl = root.split(16 + l);
            m.mdta_.push_back(make_mdta_layer(m.store, "mdta" + std::to_string(l), cfg.d,
                                              cfg.mdta_heads, l, cfg.da, cfg.ca, rl));
        }
        Rng rg = root.split(64), rs = root.split(65), rh = root.split(66), rd = root.split(67);
        m.enc_g_ = make_inter_epoch(m.store, "seq.g", cfg.d_seq(), cfg.seq_heads, !cfg.id, rg);
        m.enc_s_ = make_inter_epoch(m.store, "seq.s", cfg.d_seq(), cfg.seq_heads, !cfg.id, rs);
        m.cls_ = make_classifier(m.store, cfg.d_seq(), cfg.n_classes, rh);
        m.dec_ = make_decoder(m.store, cfg.d_seq(), rd);
        return m;
    }

    SequenceOutput<T> forward_sequence(Tape<T>* tape, const SequenceSample<T>& sample,
                                       const ForwardOpts<T>& opts = {}) const {
        if (static_cast<int>(sample.eeg.size()) != cfg.n_seq ||
            static_cast<int>(sample.eog.size()) != cfg.n_seq)
            throw DimensionError("forward_sequence: expected " + std::to_string(cfg.n_seq) +
                                 " epochs");
        MdtaRunCtx run;
        run.sink = opts.sink;
        run.training = opts.training;
        run.dropout = cfg.dropout;
        run.rng = opts.dropout_rng;

        std::vector<VarPtr<T>> g_rows, s_rows, target_rows;
        g_rows.reserve(cfg.n_seq);
        for (int e = 0; e < cfg.n_seq; ++e) {
            run.epoch = e;
            auto x_eeg = make_var(sample.eeg[e]);
            auto x_eog = make_var(sample.eog[e]);
            target_rows.push_back(x_eeg);
            target_rows.push_back(x_eog);
            auto tok = [&](const VarPtr<T>& x, const EmbedderParams<T>& emb) {
                auto t = embed_epoch(tape, x, emb);
                if (opts.training && cfg.dropout > 0.0 && opts.dropout_rng)
                    t = dropout(tape, t, cfg.dropout, *opts.dropout_rng);
                return t;
            };
            ModalityState<T> eeg{tok(x_eeg, emb_eeg_), init_global_token(emb_eeg_)};
            ModalityState<T> eog{tok(x_eog, emb_eog_), init_global_token(emb_eog_)};
            auto [me, mo] = mdta_stack(tape, eeg, eog, mdta_, run);
            auto [g, s] = fuse_epoch(tape, me.global, mo.global, me.series, mo.series);
            g_rows.push_back(g);
            s_rows.push_back(s);
        }
        auto g_seq = concat_rows(tape, g_rows);
        auto s_seq = concat_rows(tape, s_rows);

        RecordCtx seq_ctx{opts.sink, 0, 0, "fused", AttnKind::sequence};
        SequenceOutput<T> out;
        out.enc_g = inter_epoch_encode(tape, g_seq, enc_g_, seq_ctx);
        out.enc_s = inter_epoch_encode(tape, s_seq, enc_s_);
        out.logits = classify(tape, out.enc_g, cls_);

        std::vector<VarPtr<T>> recon_rows;
        recon_rows.reserve(cfg.n_seq);
        for (int e = 0; e < cfg.n_seq; ++e)
            recon_rows.push_back(
                reconstruct_epoch(tape, slice_rows(tape, out.enc_s, e, e + 1), dec_));
        out.recon = concat_rows(tape, recon_rows);
        out.target = concat_rows(tape, target_rows);
        return out;
    }

    const std::vector<MdtaLayerParams<T>>& mdta_layers() const { return mdta_; }
    const EmbedderParams<T>& embedder_eeg() const { return emb_eeg_; }
    const EmbedderParams<T>& embedder_eog() const { return emb_eog_; }
    const InterEpochParams<T>& encoder_g() const { return enc_g_; }
    const InterEpochParams<T>& encoder_s() const { return enc_s_; }
    const ClassifierParams<T>& classifier() const { return cls_; }
    const DecoderParams<T>& decoder() const { return dec_; }

  private:
    EmbedderParams<T> emb_eeg_, emb_eog_;
    std::vector<MdtaLayerParams<T>> mdta_;
    InterEpochParams<T> enc_g_, enc_s_;
    ClassifierParams<T> cls_;
    DecoderParams<T> dec_;
};

}  // namespace sleepdiff
