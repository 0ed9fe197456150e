#pragma once

#include "attention.hpp"

namespace sleepdiff {

// Per-epoch fusion of the two modality streams. g concatenates the global
// tokens feature-wise; s concatenates series tokens feature-wise and averages
// over the token axis.
template <typename T>
std::pair<VarPtr<T>, VarPtr<T>> fuse_epoch(Tape<T>* tape, const VarPtr<T>& g_eeg,
                                           const VarPtr<T>& g_eog, const VarPtr<T>& s_eeg,
                                           const VarPtr<T>& s_eog) {
    auto g = concat_cols(tape, g_eeg, g_eog);
    auto s = mean_rows(tape, concat_cols(tape, s_eeg, s_eog));
    return {g, s};
}

// One attention layer over the epoch axis (no positional encoding, so the
// encoder is permutation-equivariant). Standard MHSA by default; the ID
// ablation swaps in differential attention at layer index 1.
template <typename T>
struct InterEpochParams {
    DiffAttnParams<T> attn;
    NormParams<T> ln;
};

template <typename T>
InterEpochParams<T> make_inter_epoch(ParamStore<T>& store, const std::string& prefix, int d_seq,
                                     int heads, bool use_diff, Rng& rng) {
    InterEpochParams<T> p;
    p.attn = make_diff_attn(store, prefix + ".attn", d_seq, heads, 1, use_diff, rng);
    p.ln = make_norm(store, prefix + ".ln", d_seq);
    return p;
}

template <typename T>
VarPtr<T> inter_epoch_encode(Tape<T>* tape, const VarPtr<T>& seq, const InterEpochParams<T>& p,
                             const RecordCtx& ctx = {}) {
    auto attn = multi_head_diff_attn(tape, seq, seq, p.attn, ctx);
    return layer_norm(tape, add(tape, seq, attn), p.ln.gamma, p.ln.beta);
}

template <typename T>
struct ClassifierParams {
    VarPtr<T> W, b;
};

template <typename T>
ClassifierParams<T> make_classifier(ParamStore<T>& store, int d_seq, int n_classes, Rng& rng) {
    return {store.add_linear_weight("classifier.w", d_seq, n_classes, rng),
            store.add_zeros("classifier.b", {1, n_classes})};
}

template <typename T>
VarPtr<T> classify(Tape<T>* tape, const VarPtr<T>& encoded, const ClassifierParams<T>& p) {
    return linear(tape, encoded, p.W, p.b);
}

// Reconstruction decoder: a D-wide epoch feature reshaped to (D/4, 4) then
// five transposed-conv blocks with kernel == stride (5,5,5,3,2), positions
// 4 -> 20 -> 100 -> 500 -> 1500 -> 3000, final channels 2 (EEG, EOG).
template <typename T>
struct DecoderParams {
    int d_seq = 256;
    std::vector<VarPtr<T>> W, b;
    std::vector<int> strides{5, 5, 5, 3, 2};
    std::vector<int> channels;  // per-stage input/output plan, size 6
};

template <typename T>
DecoderParams<T> make_decoder(ParamStore<T>& store, int d_seq, Rng& rng) {
    if (d_seq % 4 != 0) throw DimensionError("decoder: d_seq must be divisible by 4");
    DecoderParams<T> p;
    p.d_seq = d_seq;
    int c0 = d_seq / 4;
    p.channels = {c0, std::max(c0 / 2, 8), std::max(c0 / 4, 8), 8, 4, 2};
    for (int i = 0; i < 5; ++i) {
        int cin = p.channels[i], cout = p.channels[i + 1], k = p.strides[i];
        p.W.push_back(store.add_matrix("decoder.w" + std::to_string(i), cout, cin * k, cin * k, rng));
        p.b.push_back(store.add_zeros("decoder.b" + std::to_string(i), {1, cout}));
    }
    return p;
}

// encoded: (1, D) for one epoch -> (2, 3000) reconstructed signals.
template <typename T>
VarPtr<T> reconstruct_epoch(Tape<T>* tape, const VarPtr<T>& encoded, const DecoderParams<T>& p) {
    auto h = reshape(tape, encoded, {p.d_seq / 4, 4});
    for (int i = 0; i < 5; ++i) {
        h = tconv1d(tape, h, p.W[i], p.b[i], p.strides[i]);
        if (i + 1 < 5) h = gelu(tape, h);
    }
    return h;
}

}  // namespace sleepdiff
