#pragma once

#include "nn_ops.hpp"
#include "params.hpp"

namespace sleepdiff {

// Tokenizer for one modality: 3 x (conv k=7 s=1 pad=3 -> GELU -> max pool),
// pools 5,5,6, channels 1 -> d/4 -> d/2 -> d; 3000 samples -> 20 tokens.
// The SE ablation replaces the stack with non-overlapping 150-sample patches
// projected linearly to d.
template <typename T>
struct EmbedderParams {
    int d = 128;
    int n_tok = 20;
    bool use_patching = false;

    VarPtr<T> W1, b1, W2, b2, W3, b3;     // conv stack
    VarPtr<T> Wpatch, bpatch;             // patching ablation
    VarPtr<T> pos;                        // (n_tok, d)
    VarPtr<T> global_seed;                // (1, d)
};

constexpr int kEmbedKernel = 7;
constexpr int kEmbedStride = 150;  // total temporal stride of the stack

template <typename T>
EmbedderParams<T> make_embedder(ParamStore<T>& store, const std::string& prefix, int d,
                                bool use_patching, Rng& rng) {
    if (d % 4 != 0) throw DimensionError("embedder: d must be divisible by 4");
    EmbedderParams<T> p;
    p.d = d;
    p.use_patching = use_patching;
    int c1 = d / 4, c2 = d / 2;
    p.W1 = store.add_matrix(prefix + ".conv1.w", c1, 1 * kEmbedKernel, kEmbedKernel, rng);
    p.b1 = store.add_zeros(prefix + ".conv1.b", {1, c1});
    p.W2 = store.add_matrix(prefix + ".conv2.w", c2, c1 * kEmbedKernel, c1 * kEmbedKernel, rng);
    p.b2 = store.add_zeros(prefix + ".conv2.b", {1, c2});
    p.W3 = store.add_matrix(prefix + ".conv3.w", d, c2 * kEmbedKernel, c2 * kEmbedKernel, rng);
    p.b3 = store.add_zeros(prefix + ".conv3.b", {1, d});
    p.Wpatch = store.add_linear_weight(prefix + ".patch.w", kEmbedStride, d, rng);
    p.bpatch = store.add_zeros(prefix + ".patch.b", {1, d});
    p.pos = store.add(prefix + ".pos",
                      Tensor<T>::uniform({p.n_tok, d}, rng, -0.02, 0.02));
    p.global_seed = store.add(prefix + ".gseed", Tensor<T>::uniform({1, d}, rng, -0.02, 0.02));
    return p;
}

// x: (1, 3000) one channel of one epoch -> (n_tok, d) tokens with PE added.
template <typename T>
VarPtr<T> embed_epoch(Tape<T>* tape, const VarPtr<T>& x, const EmbedderParams<T>& p) {
    if (x->val.rows() != 1 || x->val.cols() != p.n_tok * kEmbedStride)
        throw DimensionError("embed_epoch: expected (1, 3000) input, got " + x->val.shape_str());
    VarPtr<T> tokens;
    if (p.use_patching) {
        std::vector<VarPtr<T>> patches;
        patches.reserve(p.n_tok);
        for (int i = 0; i < p.n_tok; ++i)
            patches.push_back(slice_cols(tape, x, i * kEmbedStride, (i + 1) * kEmbedStride));
        tokens = linear(tape, concat_rows(tape, patches), p.Wpatch, p.bpatch);
    } else {
        auto h1 = max_pool1d(tape, gelu(tape, conv1d(tape, x, p.W1, p.b1, kEmbedKernel, 1, 3)), 5);
        auto h2 = max_pool1d(tape, gelu(tape, conv1d(tape, h1, p.W2, p.b2, kEmbedKernel, 1, 3)), 5);
        auto h3 = max_pool1d(tape, gelu(tape, conv1d(tape, h2, p.W3, p.b3, kEmbedKernel, 1, 3)), 6);
        tokens = transpose2d(tape, h3);  // (d, 20) -> (20, d)
    }
    return add(tape, tokens, p.pos);
}

template <typename T>
VarPtr<T> init_global_token(const EmbedderParams<T>& p) {
    return p.global_seed;
}
}  // namespace sleepdiff
