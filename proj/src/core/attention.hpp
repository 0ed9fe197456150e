#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nn_ops.hpp"
#include "params.hpp"

namespace sleepdiff {

// Per-layer lambda baseline; layer_index is 1-based.
inline double lambda_init_schedule(int layer_index) {
    return 0.8 - 0.6 * std::exp(-0.3 * (layer_index - 1));
}

enum class AttnKind { dsa, dca, sequence };

inline const char* attn_kind_name(AttnKind k) {
    switch (k) {
        case AttnKind::dsa: return "dsa";
        case AttnKind::dca: return "dca";
        default: return "sequence";
    }
}

// One exported attention map (values only, detached from the graph).
struct AttentionRecord {
    int layer = 0;
    int head = 0;
    int epoch = 0;
    std::string modality;
    AttnKind kind = AttnKind::dsa;
    double lambda = 0.0;
    int n_q = 0, n_k = 0;
    std::vector<double> map;  // row-major n_q x n_k

    double row_sum(int r) const {
        double s = 0;
        for (int c = 0; c < n_k; ++c) s += map[static_cast<size_t>(r) * n_k + c];
        return s;
    }
};

struct AttnSink {
    std::vector<AttentionRecord> records;
};

struct RecordCtx {
    AttnSink* sink = nullptr;
    int layer = 0;
    int epoch = 0;
    std::string modality;
    AttnKind kind = AttnKind::dsa;
};

// Projections + lambda parameterization for one attention module. When
// use_diff is false the module degrades to standard multi-head attention
// (the DA ablation and the sequence-level MHSA). Lambda vector VarPtrs may
// be shared between modules (DSA/DCA within an MDTA layer share them).
template <typename T>
struct DiffAttnParams {
    int d_model = 0;
    int heads = 0;
    int layer_index = 1;           // drives lambda_init
    bool use_diff = true;
    bool headwise_norm = true;     // RMS norm scaled by (1 - lambda_init)

    VarPtr<T> Wq, Wk, Wv, Wo;
    VarPtr<T> bq, bk, bv, bo;
    // (heads, d_head) each; only used when use_diff.
    VarPtr<T> lq1, lk1, lq2, lk2;

    int d_head() const { return use_diff ? d_model / (2 * heads) : d_model / heads; }
    double lam_init() const { return lambda_init_schedule(layer_index); }
};

// make_lambda=false skips lambda creation so a caller can share another
// module's lambda vectors (MDTA shares one set per layer).
template <typename T>
DiffAttnParams<T> make_diff_attn(ParamStore<T>& store, const std::string& prefix, int d, int heads,
                                 int layer_index, bool use_diff, Rng& rng,
                                 bool make_lambda = true) {
    if (use_diff && d % (2 * heads) != 0)
        throw DimensionError("diff attention requires d divisible by 2*heads");
    if (!use_diff && d % heads != 0)
        throw DimensionError("attention requires d divisible by heads");
    DiffAttnParams<T> p;
    p.d_model = d;
    p.heads = heads;
    p.layer_index = layer_index;
    p.use_diff = use_diff;
    p.Wq = store.add_linear_weight(prefix + ".wq", d, d, rng);
    p.Wk = store.add_linear_weight(prefix + ".wk", d, d, rng);
    p.Wv = store.add_linear_weight(prefix + ".wv", d, d, rng);
    p.Wo = store.add_linear_weight(prefix + ".wo", d, d, rng);
    p.bq = store.add_zeros(prefix + ".bq", {1, d});
    p.bk = store.add_zeros(prefix + ".bk", {1, d});
    p.bv = store.add_zeros(prefix + ".bv", {1, d});
    p.bo = store.add_zeros(prefix + ".bo", {1, d});
    if (use_diff && make_lambda) {
        int dh = d / (2 * heads);
        p.lq1 = store.add_zeros(prefix + ".lq1", {heads, dh});
        p.lk1 = store.add_zeros(prefix + ".lk1", {heads, dh});
        p.lq2 = store.add_zeros(prefix + ".lq2", {heads, dh});
        p.lk2 = store.add_zeros(prefix + ".lk2", {heads, dh});
    }
    return p;
}

// lambda = exp(lq1 . lk1) - exp(lq2 . lk2) + lambda_init(layer), per head.
// At zero-initialized vectors this is exactly lambda_init(layer).
template <typename T>
VarPtr<T> lambda_value(Tape<T>* tape, const DiffAttnParams<T>& p, int head) {
    auto q1 = slice_rows(tape, p.lq1, head, head + 1);
    auto k1 = slice_rows(tape, p.lk1, head, head + 1);
    auto q2 = slice_rows(tape, p.lq2, head, head + 1);
    auto k2 = slice_rows(tape, p.lk2, head, head + 1);
    auto e1 = exp_elem(tape, matmul(tape, q1, k1, false, true));
    auto e2 = exp_elem(tape, matmul(tape, q2, k2, false, true));
    auto base = make_var(Tensor<T>({1, 1}, {static_cast<T>(p.lam_init())}));
    return add(tape, sub(tape, e1, e2), base);
}

// map = softmax(Q1 K1^T / sqrt(d')) - lambda * softmax(Q2 K2^T / sqrt(d'))
template <typename T>
std::pair<VarPtr<T>, VarPtr<T>> diff_attn_head(Tape<T>* tape, const VarPtr<T>& Q1,
                                               const VarPtr<T>& Q2, const VarPtr<T>& K1,
                                               const VarPtr<T>& K2, const VarPtr<T>& V,
                                               const VarPtr<T>& lambda) {
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(Q1->val.cols()));
    auto a1 = softmax_rows(tape, scale(tape, matmul(tape, Q1, K1, false, true), inv_sqrt));
    auto a2 = softmax_rows(tape, scale(tape, matmul(tape, Q2, K2, false, true), inv_sqrt));
    auto map = sub(tape, a1, mul_scalar(tape, a2, lambda));
    return {matmul(tape, map, V), map};
}

namespace detail {
template <typename T>
void emit_record(const RecordCtx& ctx, int head, double lambda, const Tensor<T>& map) {
    if (!ctx.sink) return;
    AttentionRecord rec;
    rec.layer = ctx.layer;
    rec.head = head;
    rec.epoch = ctx.epoch;
    rec.modality = ctx.modality;
    rec.kind = ctx.kind;
    rec.lambda = lambda;
    rec.n_q = map.rows();
    rec.n_k = map.cols();
    rec.map.assign(map.data.begin(), map.data.end());
    ctx.sink->records.push_back(std::move(rec));
}
}  // namespace detail

// Full multi-head attention, differential or standard per params.use_diff.
template <typename T>
VarPtr<T> multi_head_diff_attn(Tape<T>* tape, const VarPtr<T>& x_q, const VarPtr<T>& x_kv,
                               const DiffAttnParams<T>& p, const RecordCtx& ctx = {}) {
    if (x_q->val.cols() != p.d_model || x_kv->val.cols() != p.d_model)
        throw DimensionError("multi_head_diff_attn: feature width mismatch");
    auto Q = linear(tape, x_q, p.Wq, p.bq);
    auto K = linear(tape, x_kv, p.Wk, p.bk);
    auto V = linear(tape, x_kv, p.Wv, p.bv);
    std::vector<VarPtr<T>> head_outs;
    head_outs.reserve(p.heads);
    if (p.use_diff) {
        int dh = p.d_head();
        for (int h = 0; h < p.heads; ++h) {
            int base = h * 2 * dh;
            auto Q1 = slice_cols(tape, Q, base, base + dh);
            auto Q2 = slice_cols(tape, Q, base + dh, base + 2 * dh);
            auto K1 = slice_cols(tape, K, base, base + dh);
            auto K2 = slice_cols(tape, K, base + dh, base + 2 * dh);
            auto Vh = slice_cols(tape, V, base, base + 2 * dh);
            auto lam = lambda_value(tape, p, h);
            auto [out, map] = diff_attn_head(tape, Q1, Q2, K1, K2, Vh, lam);
            detail::emit_record(ctx, h, static_cast<double>(lam->val[0]), map->val);
            if (p.headwise_norm) out = rms_norm_rows(tape, out, 1.0 - p.lam_init());
            head_outs.push_back(out);
        }
    } else {
        int dh = p.d_head();
        double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
        for (int h = 0; h < p.heads; ++h) {
            auto Qh = slice_cols(tape, Q, h * dh, (h + 1) * dh);
            auto Kh = slice_cols(tape, K, h * dh, (h + 1) * dh);
            auto Vh = slice_cols(tape, V, h * dh, (h + 1) * dh);
            auto map =
                softmax_rows(tape, scale(tape, matmul(tape, Qh, Kh, false, true), inv_sqrt));
            detail::emit_record(ctx, h, 0.0, map->val);
            head_outs.push_back(matmul(tape, map, Vh));
        }
    }
    VarPtr<T> cat = head_outs[0];
    for (size_t h = 1; h < head_outs.size(); ++h) cat = concat_cols(tape, cat, head_outs[h]);
    return linear(tape, cat, p.Wo, p.bo);
}

// Layer-norm parameter pair.
template <typename T>
struct NormParams {
    VarPtr<T> gamma, beta;
};

template <typename T>
NormParams<T> make_norm(ParamStore<T>& store, const std::string& prefix, int d) {
    return {store.add_ones(prefix + ".gamma", {1, d}), store.add_zeros(prefix + ".beta", {1, d})};
}

// DSA: shared-input differential self-attention + residual + layer norm.
template <typename T>
VarPtr<T> dsa(Tape<T>* tape, const VarPtr<T>& series_and_global, const DiffAttnParams<T>& p,
              const NormParams<T>& ln, const RecordCtx& ctx = {}) {
    auto attn = multi_head_diff_attn(tape, series_and_global, series_and_global, p, ctx);
    return layer_norm(tape, add(tape, series_and_global, attn), ln.gamma, ln.beta);
}

// DCA: the modality's own global token queries the other modality's global
// token, then residual + layer norm.
template <typename T>
VarPtr<T> dca(Tape<T>* tape, const VarPtr<T>& g_self, const VarPtr<T>& g_other,
              const DiffAttnParams<T>& p, const NormParams<T>& ln, const RecordCtx& ctx = {}) {
    auto attn = multi_head_diff_attn(tape, g_self, g_other, p, ctx);
    return layer_norm(tape, add(tape, g_self, attn), ln.gamma, ln.beta);
}

}  // namespace sleepdiff
