#pragma once

#include <cstring>

#include "autodiff.hpp"
#include "rng.hpp"

namespace sleepdiff {

// Conv / pool layout convention: activations are (channels, time).
// Weights are stored flattened as (c_out, c_in * k), index ci * k + j.

namespace detail {
// Columns layout is (c_in * k, t_out) so each (ci, j) row is a contiguous
// slice of the input when stride == 1, reachable with a single memcpy.
template <typename T>
Tensor<T> im2col(const Tensor<T>& x, int k, int stride, int pad, int t_out) {
    int c_in = x.rows(), t = x.cols();
    Tensor<T> col({c_in * k, t_out});
    for (int ci = 0; ci < c_in; ++ci)
        for (int j = 0; j < k; ++j) {
            T* dst = &col.at(ci * k + j, 0);
            if (stride == 1) {
                int lo = std::max(0, pad - j);
                int hi = std::min(t_out, t + pad - j);
                for (int o = 0; o < lo; ++o) dst[o] = T(0);
                if (hi > lo)
                    std::memcpy(dst + lo, &x.at(ci, lo + j - pad),
                                sizeof(T) * static_cast<size_t>(hi - lo));
                for (int o = std::max(lo, hi); o < t_out; ++o) dst[o] = T(0);
            } else {
                for (int o = 0; o < t_out; ++o) {
                    int src = o * stride + j - pad;
                    dst[o] = (src >= 0 && src < t) ? x.at(ci, src) : T(0);
                }
            }
        }
    return col;
}
}  // namespace detail

// Cross-correlation (no kernel flip), matching the usual deep-learning conv1d.
template <typename T>
VarPtr<T> conv1d(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& W, const VarPtr<T>& b, int k,
                 int stride, int pad) {
    int c_in = x->val.rows(), t = x->val.cols();
    int c_out = W->val.rows();
    if (W->val.cols() != c_in * k) throw DimensionError("conv1d: weight shape mismatch");
    if (static_cast<int>(b->val.numel()) != c_out) throw DimensionError("conv1d: bias mismatch");
    int t_out = (t + 2 * pad - k) / stride + 1;
    if (k > t + 2 * pad || t_out < 1) throw DimensionError("conv1d: kernel exceeds padded input");
    Tensor<T> col = detail::im2col(x->val, k, stride, pad, t_out);
    Tensor<T> out({c_out, t_out});
    out.mat().noalias() = W->val.mat() * col.mat();
    for (int co = 0; co < c_out; ++co)
        for (int o = 0; o < t_out; ++o) out.at(co, o) += b->val[co];
    auto ov = make_var(std::move(out), detail::want_grad(tape, {&x, &W, &b}));
    if (ov->requires_grad)
        // im2col is recomputed in backward to keep the tape light.
        tape->record([x, W, b, ov, k, stride, pad, t_out, c_in, t, c_out] {
            if (W->requires_grad) {
                Tensor<T> col = detail::im2col(x->val, k, stride, pad, t_out);
                W->grad.mat().noalias() += ov->grad.mat() * col.mat().transpose();
            }
            if (b->requires_grad)
                for (int co = 0; co < c_out; ++co)
                    for (int o = 0; o < t_out; ++o) b->grad[co] += ov->grad.at(co, o);
            if (x->requires_grad) {
                Tensor<T> dcol({c_in * k, t_out});
                dcol.mat().noalias() = W->val.mat().transpose() * ov->grad.mat();
                for (int ci = 0; ci < c_in; ++ci)
                    for (int j = 0; j < k; ++j) {
                        const T* src = &dcol.at(ci * k + j, 0);
                        if (stride == 1) {
                            int lo = std::max(0, pad - j);
                            int hi = std::min(t_out, t + pad - j);
                            T* xg = &x->grad.at(ci, 0);
                            for (int o = lo; o < hi; ++o) xg[o + j - pad] += src[o];
                        } else {
                            for (int o = 0; o < t_out; ++o) {
                                int s = o * stride + j - pad;
                                if (s >= 0 && s < t) x->grad.at(ci, s) += src[o];
                            }
                        }
                    }
            }
        });
    return ov;
}

// Non-overlapping max pool, stride == window; trailing remainder dropped.
template <typename T>
VarPtr<T> max_pool1d(Tape<T>* tape, const VarPtr<T>& x, int k) {
    int c = x->val.rows(), t = x->val.cols();
    int t_out = t / k;
    if (t_out < 1) throw DimensionError("max_pool1d: window exceeds input");
    Tensor<T> out({c, t_out});
    auto arg = std::make_shared<std::vector<int>>(static_cast<size_t>(c) * t_out);
    for (int ci = 0; ci < c; ++ci)
        for (int o = 0; o < t_out; ++o) {
            int best = o * k;
            T bv = x->val.at(ci, best);
            for (int j = 1; j < k; ++j) {
                T v = x->val.at(ci, o * k + j);
                if (v > bv) {
                    bv = v;
                    best = o * k + j;
                }
            }
            out.at(ci, o) = bv;
            (*arg)[static_cast<size_t>(ci) * t_out + o] = best;
        }
    auto ov = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (ov->requires_grad)
        tape->record([x, ov, arg, c, t_out] {
            for (int ci = 0; ci < c; ++ci)
                for (int o = 0; o < t_out; ++o)
                    x->grad.at(ci, (*arg)[static_cast<size_t>(ci) * t_out + o]) +=
                        ov->grad.at(ci, o);
        });
    return ov;
}

// Transposed conv with kernel == stride: every input step expands to k
// non-overlapping output steps, so the output length is exactly t * k.
template <typename T>
VarPtr<T> tconv1d(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& W, const VarPtr<T>& b,
                  int k) {
    int c_in = x->val.rows(), t = x->val.cols();
    int c_out = W->val.rows();
    if (W->val.cols() != c_in * k) throw DimensionError("tconv1d: weight shape mismatch");
    // For a fixed kernel offset j, out[:, j::k] = W[:, j::k] * x + b, so the
    // whole op is k matmuls over strided views of the weight and output.
    using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using StrideD = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
    using CMapS = Eigen::Map<const RowMat, 0, StrideD>;
    using MapS = Eigen::Map<RowMat, 0, StrideD>;
    Tensor<T> out({c_out, t * k});
    for (int co = 0; co < c_out; ++co) out.mat().row(co).setConstant(b->val[co]);
    for (int j = 0; j < k; ++j) {
        CMapS Wj(W->val.data.data() + j, c_out, c_in, StrideD(c_in * k, k));
        MapS Oj(out.data.data() + j, c_out, t, StrideD(t * k, k));
        Oj.noalias() += Wj * x->val.mat();
    }
    auto ov = make_var(std::move(out), detail::want_grad(tape, {&x, &W, &b}));
    if (ov->requires_grad)
        tape->record([x, W, b, ov, k, t, c_in, c_out] {
            if (b->requires_grad)
                for (int co = 0; co < c_out; ++co) b->grad[co] += ov->grad.mat().row(co).sum();
            for (int j = 0; j < k; ++j) {
                CMapS Gj(ov->grad.data.data() + j, c_out, t, StrideD(t * k, k));
                if (W->requires_grad) {
                    MapS Wgj(W->grad.data.data() + j, c_out, c_in, StrideD(c_in * k, k));
                    Wgj.noalias() += Gj * x->val.mat().transpose();
                }
                if (x->requires_grad) {
                    CMapS Wj(W->val.data.data() + j, c_out, c_in, StrideD(c_in * k, k));
                    x->grad.mat().noalias() += Wj.transpose() * Gj;
                }
            }
        });
    return ov;
}

// Inverted dropout; callers must not use this in eval paths or grad checks.
template <typename T>
VarPtr<T> dropout(Tape<T>* tape, const VarPtr<T>& x, double rate, Rng& rng) {
    if (rate <= 0.0) return x;
    T keep_inv = static_cast<T>(1.0 / (1.0 - rate));
    auto mask = std::make_shared<Tensor<T>>(x->val.shape);
    Tensor<T> out = x->val;
    for (size_t i = 0; i < out.numel(); ++i) {
        T m = rng.uniform() >= rate ? keep_inv : T(0);
        (*mask)[i] = m;
        out[i] *= m;
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, mask] {
            for (size_t i = 0; i < o->grad.numel(); ++i) x->grad[i] += o->grad[i] * (*mask)[i];
        });
    return o;
}

// Summed cross-entropy with integer labels; log-sum-exp stabilized.
// Gradient is softmax(logits) - onehot(label), the usual fused form.
template <typename T>
VarPtr<T> cross_entropy_sum(Tape<T>* tape, const VarPtr<T>& logits, const std::vector<int>& labels) {
    int n = logits->val.rows(), C = logits->val.cols();
    if (static_cast<int>(labels.size()) != n) throw DimensionError("cross_entropy: label count");
    Tensor<T> out({1, 1});
    Tensor<T> probs({n, C});
    for (int r = 0; r < n; ++r) {
        if (labels[r] < 0 || labels[r] >= C)
            throw std::out_of_range("cross_entropy: label out of range");
        T mx = logits->val.at(r, 0);
        for (int c = 1; c < C; ++c) mx = std::max(mx, logits->val.at(r, c));
        T sum = 0;
        for (int c = 0; c < C; ++c) {
            T e = std::exp(logits->val.at(r, c) - mx);
            probs.at(r, c) = e;
            sum += e;
        }
        T lse = mx + std::log(sum);
        for (int c = 0; c < C; ++c) probs.at(r, c) /= sum;
        out[0] += lse - logits->val.at(r, labels[r]);
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&logits}));
    if (o->requires_grad) {
        auto p = std::make_shared<Tensor<T>>(std::move(probs));
        auto lb = std::make_shared<std::vector<int>>(labels);
        tape->record([logits, o, p, lb, n, C] {
            T g = o->grad[0];
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < C; ++c)
                    logits->grad.at(r, c) +=
                        g * (p->at(r, c) - (c == (*lb)[r] ? T(1) : T(0)));
        });
    }
    return o;
}

}  // namespace sleepdiff
