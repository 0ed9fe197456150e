#pragma once

#include "attention.hpp"

namespace sleepdiff {

// One MDTA layer: per-modality DSA, cross-modal DCA on the global tokens,
// token-wise MLP (hidden 4d, GELU) with residual + layer norm. The lambda
// vectors are created once per layer and shared by the DSA and DCA modules.
template <typename T>
struct MdtaLayerParams {
    int layer_index = 1;
    int d = 128;
    bool use_ca = true;   // CA ablation: false removes DCA entirely

    DiffAttnParams<T> dsa_eeg, dsa_eog, dca;
    NormParams<T> ln_dsa_eeg, ln_dsa_eog, ln_dca;
    VarPtr<T> mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    NormParams<T> ln_mlp;
};

template <typename T>
MdtaLayerParams<T> make_mdta_layer(ParamStore<T>& store, const std::string& prefix, int d,
                                   int heads, int layer_index, bool use_diff, bool use_ca,
                                   Rng& rng) {
    MdtaLayerParams<T> p;
    p.layer_index = layer_index;
    p.d = d;
    p.use_ca = use_ca;
    p.dsa_eeg = make_diff_attn(store, prefix + ".dsa_eeg", d, heads, layer_index, use_diff, rng);
    p.dsa_eog =
        make_diff_attn(store, prefix + ".dsa_eog", d, heads, layer_index, use_diff, rng, false);
    p.dca = make_diff_attn(store, prefix + ".dca", d, heads, layer_index, use_diff, rng, false);
    if (use_diff) {
        // layer lambda is one parameter set shared by DSA and DCA
        p.dsa_eog.lq1 = p.dsa_eeg.lq1;
        p.dsa_eog.lk1 = p.dsa_eeg.lk1;
        p.dsa_eog.lq2 = p.dsa_eeg.lq2;
        p.dsa_eog.lk2 = p.dsa_eeg.lk2;
        p.dca.lq1 = p.dsa_eeg.lq1;
        p.dca.lk1 = p.dsa_eeg.lk1;
        p.dca.lq2 = p.dsa_eeg.lq2;
        p.dca.lk2 = p.dsa_eeg.lk2;
    }
    p.ln_dsa_eeg = make_norm(store, prefix + ".ln_dsa_eeg", d);
    p.ln_dsa_eog = make_norm(store, prefix + ".ln_dsa_eog", d);
    p.ln_dca = make_norm(store, prefix + ".ln_dca", d);
    p.mlp_w1 = store.add_linear_weight(prefix + ".mlp.w1", d, 4 * d, rng);
    p.mlp_b1 = store.add_zeros(prefix + ".mlp.b1", {1, 4 * d});
    p.mlp_w2 = store.add_linear_weight(prefix + ".mlp.w2", 4 * d, d, rng);
    p.mlp_b2 = store.add_zeros(prefix + ".mlp.b2", {1, d});
    p.ln_mlp = make_norm(store, prefix + ".ln_mlp", d);
    return p;
}

template <typename T>
struct ModalityState {
    VarPtr<T> series;  // (n_tok, d)
    VarPtr<T> global;  // (1, d)
};

struct MdtaRunCtx {
    AttnSink* sink = nullptr;
    int epoch = 0;
    bool training = false;
    double dropout = 0.0;
    Rng* rng = nullptr;
};

template <typename T>
std::pair<ModalityState<T>, ModalityState<T>> mdta_layer(Tape<T>* tape,
                                                         const ModalityState<T>& eeg,
                                                         const ModalityState<T>& eog,
                                                         const MdtaLayerParams<T>& p,
                                                         const MdtaRunCtx& run = {}) {
    int n_tok = eeg.series->val.rows();
    auto stream = [&](const ModalityState<T>& m, const DiffAttnParams<T>& ap,
                      const NormParams<T>& ln, const char* name) {
        RecordCtx ctx{run.sink, p.layer_index, run.epoch, name, AttnKind::dsa};
        auto x = concat_rows(tape, std::vector<VarPtr<T>>{m.series, m.global});
        return dsa(tape, x, ap, ln, ctx);
    };
    auto x_eeg = stream(eeg, p.dsa_eeg, p.ln_dsa_eeg, "eeg");
    auto x_eog = stream(eog, p.dsa_eog, p.ln_dsa_eog, "eog");

    auto s2_eeg = slice_rows(tape, x_eeg, 0, n_tok);
    auto g2_eeg = slice_rows(tape, x_eeg, n_tok, n_tok + 1);
    auto s2_eog = slice_rows(tape, x_eog, 0, n_tok);
    auto g2_eog = slice_rows(tape, x_eog, n_tok, n_tok + 1);

    VarPtr<T> g3_eeg = g2_eeg, g3_eog = g2_eog;
    if (p.use_ca) {
        RecordCtx ce{run.sink, p.layer_index, run.epoch, "eeg", AttnKind::dca};
        RecordCtx co{run.sink, p.layer_index, run.epoch, "eog", AttnKind::dca};
        g3_eeg = dca(tape, g2_eeg, g2_eog, p.dca, p.ln_dca, ce);
        g3_eog = dca(tape, g2_eog, g2_eeg, p.dca, p.ln_dca, co);
    }

    auto project = [&](const VarPtr<T>& s2, const VarPtr<T>& g3) {
        auto y = concat_rows(tape, std::vector<VarPtr<T>>{s2, g3});
        auto h = linear(tape, gelu(tape, linear(tape, y, p.mlp_w1, p.mlp_b1)), p.mlp_w2, p.mlp_b2);
        if (run.training && run.dropout > 0.0 && run.rng)
            h = dropout(tape, h, run.dropout, *run.rng);
        auto out = layer_norm(tape, add(tape, y, h), p.ln_mlp.gamma, p.ln_mlp.beta);
        return ModalityState<T>{slice_rows(tape, out, 0, n_tok),
                                slice_rows(tape, out, n_tok, n_tok + 1)};
    };
    return {project(s2_eeg, g3_eeg), project(s2_eog, g3_eog)};
}

template <typename T>
std::pair<ModalityState<T>, ModalityState<T>> mdta_stack(Tape<T>* tape, ModalityState<T> eeg,
                                                         ModalityState<T> eog,
                                                         const std::vector<MdtaLayerParams<T>>& layers,
                                                         const MdtaRunCtx& run = {}) {
    for (const auto& layer : layers) {
        auto [e, o] = mdta_layer(tape, eeg, eog, layer, run);
        eeg = e;
        eog = o;
    }
    return {eeg, eog};
}

}  // namespace sleepdiff
