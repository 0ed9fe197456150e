#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "tensor.hpp"

namespace sleepdiff {

// Reverse-mode engine. Each op returns a Var and, when a tape is supplied and
// some input wants gradients, appends one backward closure to the tape. The
// tape replays closures in reverse record order; forward order is a valid
// topological order, so a single reverse sweep is exact.

template <typename T>
struct Var {
    Tensor<T> val;
    Tensor<T> grad;
    bool requires_grad = false;

    explicit Var(Tensor<T> v, bool rg = false)
        : val(std::move(v)), grad(Tensor<T>::zeros(val.shape)), requires_grad(rg) {}

    void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
using VarPtr = std::shared_ptr<Var<T>>;

template <typename T>
VarPtr<T> make_var(Tensor<T> v, bool requires_grad = false) {
    return std::make_shared<Var<T>>(std::move(v), requires_grad);
}

template <typename T>
class Tape {
  public:
    void record(std::function<void()> back) { ops_.push_back(std::move(back)); }

    size_t size() const { return ops_.size(); }

    // Seeds the scalar output with grad 1 and replays the tape backwards.
    void backward(const VarPtr<T>& out) {
        if (out->val.numel() != 1) throw DimensionError("backward: output must be scalar");
        out->grad.fill(T(1));
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    void clear() { ops_.clear(); }

  private:
    std::vector<std::function<void()>> ops_;
};

namespace detail {
template <typename T>
inline bool want_grad(Tape<T>* tape, std::initializer_list<const VarPtr<T>*> ins) {
    if (!tape) return false;
    for (auto* p : ins)
        if ((*p)->requires_grad) return true;
    return false;
}
}  // namespace detail

// ---- elementwise ----

template <typename T>
VarPtr<T> add(Tape<T>* tape, const VarPtr<T>& a, const VarPtr<T>& b) {
    require_same_shape(a->val, b->val, "add");
    Tensor<T> out = a->val;
    out.mat() += b->val.mat();
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a, &b}));
    if (o->requires_grad)
        tape->record([a, b, o] {
            if (a->requires_grad) a->grad.mat() += o->grad.mat();
            if (b->requires_grad) b->grad.mat() += o->grad.mat();
        });
    return o;
}

template <typename T>
VarPtr<T> sub(Tape<T>* tape, const VarPtr<T>& a, const VarPtr<T>& b) {
    require_same_shape(a->val, b->val, "sub");
    Tensor<T> out = a->val;
    out.mat() -= b->val.mat();
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a, &b}));
    if (o->requires_grad)
        tape->record([a, b, o] {
            if (a->requires_grad) a->grad.mat() += o->grad.mat();
            if (b->requires_grad) b->grad.mat() -= o->grad.mat();
        });
    return o;
}

template <typename T>
VarPtr<T> mul(Tape<T>* tape, const VarPtr<T>& a, const VarPtr<T>& b) {
    require_same_shape(a->val, b->val, "mul");
    Tensor<T> out = a->val;
    for (size_t i = 0; i < out.numel(); ++i) out[i] *= b->val[i];
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a, &b}));
    if (o->requires_grad)
        tape->record([a, b, o] {
            for (size_t i = 0; i < o->grad.numel(); ++i) {
                if (a->requires_grad) a->grad[i] += o->grad[i] * b->val[i];
                if (b->requires_grad) b->grad[i] += o->grad[i] * a->val[i];
            }
        });
    return o;
}

template <typename T>
VarPtr<T> scale(Tape<T>* tape, const VarPtr<T>& a, double c) {
    Tensor<T> out = a->val;
    out.mat() *= static_cast<T>(c);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a}));
    if (o->requires_grad)
        tape->record([a, o, c] { a->grad.mat() += static_cast<T>(c) * o->grad.mat(); });
    return o;
}

template <typename T>
VarPtr<T> exp_elem(Tape<T>* tape, const VarPtr<T>& a) {
    Tensor<T> out = a->val;
    for (auto& v : out.data) v = std::exp(v);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a}));
    if (o->requires_grad)
        tape->record([a, o] {
            for (size_t i = 0; i < o->grad.numel(); ++i) a->grad[i] += o->grad[i] * o->val[i];
        });
    return o;
}

// sqrt with zero-gradient at x <= 0 (inputs are variances / squared norms).
template <typename T>
VarPtr<T> sqrt_elem(Tape<T>* tape, const VarPtr<T>& a) {
    Tensor<T> out = a->val;
    for (auto& v : out.data) v = v > T(0) ? std::sqrt(v) : T(0);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a}));
    if (o->requires_grad)
        tape->record([a, o] {
            for (size_t i = 0; i < o->grad.numel(); ++i)
                if (a->val[i] > T(0)) a->grad[i] += o->grad[i] * T(0.5) / o->val[i];
        });
    return o;
}

// 1/x where x > 0, exactly 0 otherwise. Guards degenerate PCC denominators.
template <typename T>
VarPtr<T> safe_recip(Tape<T>* tape, const VarPtr<T>& a) {
    Tensor<T> out = a->val;
    for (auto& v : out.data) v = v > T(0) ? T(1) / v : T(0);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a}));
    if (o->requires_grad)
        tape->record([a, o] {
            for (size_t i = 0; i < o->grad.numel(); ++i)
                if (a->val[i] > T(0)) a->grad[i] -= o->grad[i] * o->val[i] * o->val[i];
        });
    return o;
}

template <typename T>
VarPtr<T> gelu(Tape<T>* tape, const VarPtr<T>& a) {
    bool wants = detail::want_grad(tape, {&a});
    Tensor<T> out = a->val;
    // The derivative reuses the per-element cdf/pdf already in registers, so
    // it is cached here instead of recomputing erf during the backward pass.
    std::shared_ptr<Tensor<T>> deriv;
    if (wants) deriv = std::make_shared<Tensor<T>>(a->val.shape);
    const T inv_sqrt2 = static_cast<T>(M_SQRT1_2);
    const T inv_sqrt2pi = static_cast<T>(1.0 / std::sqrt(2.0 * M_PI));
    for (size_t i = 0; i < out.numel(); ++i) {
        T x = out[i];
        T cdf = T(0.5) * (T(1) + std::erf(x * inv_sqrt2));
        out[i] = x * cdf;
        if (wants) (*deriv)[i] = cdf + x * std::exp(T(-0.5) * x * x) * inv_sqrt2pi;
    }
    auto o = make_var(std::move(out), wants);
    if (o->requires_grad)
        tape->record([a, o, deriv] {
            for (size_t i = 0; i < o->grad.numel(); ++i) a->grad[i] += o->grad[i] * (*deriv)[i];
        });
    return o;
}

// Multiply a tensor by a (1,1) scalar variable; feeds lambda into the maps.
template <typename T>
VarPtr<T> mul_scalar(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& s) {
    if (s->val.numel() != 1) throw DimensionError("mul_scalar: s must be scalar");
    Tensor<T> out = x->val;
    out.mat() *= s->val[0];
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x, &s}));
    if (o->requires_grad)
        tape->record([x, s, o] {
            if (x->requires_grad) x->grad.mat() += s->val[0] * o->grad.mat();
            if (s->requires_grad) {
                T acc = 0;
                for (size_t i = 0; i < o->grad.numel(); ++i) acc += o->grad[i] * x->val[i];
                s->grad[0] += acc;
            }
        });
    return o;
}

// ---- linear algebra ----

template <typename T>
VarPtr<T> matmul(Tape<T>* tape, const VarPtr<T>& a, const VarPtr<T>& b, bool ta = false,
                 bool tb = false) {
    int am = ta ? a->val.cols() : a->val.rows();
    int ak = ta ? a->val.rows() : a->val.cols();
    int bk = tb ? b->val.cols() : b->val.rows();
    int bn = tb ? b->val.rows() : b->val.cols();
    if (ak != bk)
        throw DimensionError("matmul: inner dims " + a->val.shape_str() + " x " +
                             b->val.shape_str());
    Tensor<T> out({am, bn});
    auto A = a->val.mat(), B = b->val.mat();
    if (!ta && !tb)
        out.mat().noalias() = A * B;
    else if (ta && !tb)
        out.mat().noalias() = A.transpose() * B;
    else if (!ta && tb)
        out.mat().noalias() = A * B.transpose();
    else
        out.mat().noalias() = A.transpose() * B.transpose();
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a, &b}));
    if (o->requires_grad)
        tape->record([a, b, o, ta, tb] {
            auto G = o->grad.mat();
            auto A = a->val.mat(), B = b->val.mat();
            if (a->requires_grad) {
                auto dA = a->grad.mat();
                if (!ta)
                    dA.noalias() += tb ? (G * B).eval() : (G * B.transpose()).eval();
                else
                    dA.noalias() += tb ? (B.transpose() * G.transpose()).eval()
                                       : (B * G.transpose()).eval();
            }
            if (b->requires_grad) {
                auto dB = b->grad.mat();
                if (!tb)
                    dB.noalias() += ta ? (A * G).eval() : (A.transpose() * G).eval();
                else
                    dB.noalias() += ta ? (G.transpose() * A.transpose()).eval()
                                       : (G.transpose() * A).eval();
            }
        });
    return o;
}

// Broadcast-add a row vector b (shape (d) or (1,d)) to every row of x.
template <typename T>
VarPtr<T> add_rowvec(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& b) {
    int d = x->val.cols();
    if (static_cast<int>(b->val.numel()) != d) throw DimensionError("add_rowvec: width mismatch");
    Tensor<T> out = x->val;
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < d; ++c) out.at(r, c) += b->val[c];
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x, &b}));
    if (o->requires_grad)
        tape->record([x, b, o] {
            if (x->requires_grad) x->grad.mat() += o->grad.mat();
            if (b->requires_grad)
                for (int r = 0; r < o->grad.rows(); ++r)
                    for (int c = 0; c < o->grad.cols(); ++c) b->grad[c] += o->grad.at(r, c);
        });
    return o;
}

template <typename T>
VarPtr<T> sub_rowvec(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& b) {
    return add_rowvec(tape, x, scale(tape, b, -1.0));
}

// Broadcast-subtract a column vector m (n,1) from every column of x.
template <typename T>
VarPtr<T> sub_colvec(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& m) {
    if (m->val.rows() != x->val.rows() || m->val.cols() != 1)
        throw DimensionError("sub_colvec: shape mismatch");
    Tensor<T> out = x->val;
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) out.at(r, c) -= m->val[r];
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x, &m}));
    if (o->requires_grad)
        tape->record([x, m, o] {
            if (x->requires_grad) x->grad.mat() += o->grad.mat();
            if (m->requires_grad)
                for (int r = 0; r < o->grad.rows(); ++r)
                    for (int c = 0; c < o->grad.cols(); ++c) m->grad[r] -= o->grad.at(r, c);
        });
    return o;
}

template <typename T>
VarPtr<T> linear(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& W, const VarPtr<T>& b) {
    return add_rowvec(tape, matmul(tape, x, W), b);
}

// ---- reductions ----

template <typename T>
VarPtr<T> mean_rows(Tape<T>* tape, const VarPtr<T>& x) {
    int n = x->val.rows(), d = x->val.cols();
    Tensor<T> out({1, d});
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) out[c] += x->val.at(r, c);
    out.mat() /= static_cast<T>(n);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, n] {
            T inv = T(1) / static_cast<T>(n);
            for (int r = 0; r < x->grad.rows(); ++r)
                for (int c = 0; c < x->grad.cols(); ++c) x->grad.at(r, c) += inv * o->grad[c];
        });
    return o;
}

template <typename T>
VarPtr<T> mean_cols(Tape<T>* tape, const VarPtr<T>& x) {
    int n = x->val.rows(), d = x->val.cols();
    Tensor<T> out({n, 1});
    for (int r = 0; r < n; ++r) {
        T acc = 0;
        for (int c = 0; c < d; ++c) acc += x->val.at(r, c);
        out[r] = acc / static_cast<T>(d);
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, d] {
            T inv = T(1) / static_cast<T>(d);
            for (int r = 0; r < x->grad.rows(); ++r)
                for (int c = 0; c < x->grad.cols(); ++c) x->grad.at(r, c) += inv * o->grad[r];
        });
    return o;
}

template <typename T>
VarPtr<T> sum_all(Tape<T>* tape, const VarPtr<T>& x) {
    Tensor<T> out({1, 1});
    out[0] = x->val.mat().sum();
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o] { x->grad.mat().array() += o->grad[0]; });
    return o;
}

template <typename T>
VarPtr<T> diagonal(Tape<T>* tape, const VarPtr<T>& x) {
    int n = x->val.rows();
    if (x->val.cols() != n) throw DimensionError("diagonal: square input required");
    Tensor<T> out({n, 1});
    for (int i = 0; i < n; ++i) out[i] = x->val.at(i, i);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, n] {
            for (int i = 0; i < n; ++i) x->grad.at(i, i) += o->grad[i];
        });
    return o;
}

// ---- normalizations / softmax ----

template <typename T>
VarPtr<T> softmax_rows(Tape<T>* tape, const VarPtr<T>& x) {
    int n = x->val.rows(), d = x->val.cols();
    Tensor<T> out({n, d});
    for (int r = 0; r < n; ++r) {
        T mx = x->val.at(r, 0);
        for (int c = 1; c < d; ++c) mx = std::max(mx, x->val.at(r, c));
        T sum = 0;
        for (int c = 0; c < d; ++c) {
            T e = std::exp(x->val.at(r, c) - mx);
            out.at(r, c) = e;
            sum += e;
        }
        for (int c = 0; c < d; ++c) out.at(r, c) /= sum;
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, n, d] {
            for (int r = 0; r < n; ++r) {
                T dot = 0;
                for (int c = 0; c < d; ++c) dot += o->grad.at(r, c) * o->val.at(r, c);
                for (int c = 0; c < d; ++c)
                    x->grad.at(r, c) += o->val.at(r, c) * (o->grad.at(r, c) - dot);
            }
        });
    return o;
}

template <typename T>
VarPtr<T> layer_norm(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& gamma,
                     const VarPtr<T>& beta, double eps = 1e-5) {
    int n = x->val.rows(), d = x->val.cols();
    if (static_cast<int>(gamma->val.numel()) != d || static_cast<int>(beta->val.numel()) != d)
        throw DimensionError("layer_norm: affine width mismatch");
    Tensor<T> out({n, d});
    Tensor<T> xhat({n, d});
    std::vector<T> inv_std(n);
    for (int r = 0; r < n; ++r) {
        T mu = 0;
        for (int c = 0; c < d; ++c) mu += x->val.at(r, c);
        mu /= static_cast<T>(d);
        T var = 0;
        for (int c = 0; c < d; ++c) {
            T dv = x->val.at(r, c) - mu;
            var += dv * dv;
        }
        var /= static_cast<T>(d);
        T is = T(1) / std::sqrt(var + static_cast<T>(eps));
        inv_std[r] = is;
        for (int c = 0; c < d; ++c) {
            T xh = (x->val.at(r, c) - mu) * is;
            xhat.at(r, c) = xh;
            out.at(r, c) = gamma->val[c] * xh + beta->val[c];
        }
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x, &gamma, &beta}));
    if (o->requires_grad) {
        auto xh = std::make_shared<Tensor<T>>(std::move(xhat));
        auto is = std::make_shared<std::vector<T>>(std::move(inv_std));
        tape->record([x, gamma, beta, o, xh, is, n, d] {
            for (int r = 0; r < n; ++r) {
                T sum_g = 0, sum_gx = 0;
                for (int c = 0; c < d; ++c) {
                    T g = o->grad.at(r, c) * gamma->val[c];
                    sum_g += g;
                    sum_gx += g * xh->at(r, c);
                }
                if (x->requires_grad) {
                    T inv_d = T(1) / static_cast<T>(d);
                    for (int c = 0; c < d; ++c) {
                        T g = o->grad.at(r, c) * gamma->val[c];
                        x->grad.at(r, c) +=
                            (*is)[r] * (g - inv_d * sum_g - xh->at(r, c) * inv_d * sum_gx);
                    }
                }
                for (int c = 0; c < d; ++c) {
                    if (gamma->requires_grad) gamma->grad[c] += o->grad.at(r, c) * xh->at(r, c);
                    if (beta->requires_grad) beta->grad[c] += o->grad.at(r, c);
                }
            }
        });
    }
    return o;
}

// RMS normalization per row with a fixed scalar gain, no affine parameters.
template <typename T>
VarPtr<T> rms_norm_rows(Tape<T>* tape, const VarPtr<T>& x, double gain, double eps = 1e-6) {
    int n = x->val.rows(), d = x->val.cols();
    Tensor<T> out({n, d});
    std::vector<T> inv_rms(n);
    for (int r = 0; r < n; ++r) {
        T m = 0;
        for (int c = 0; c < d; ++c) m += x->val.at(r, c) * x->val.at(r, c);
        m = m / static_cast<T>(d) + static_cast<T>(eps);
        T ir = T(1) / std::sqrt(m);
        inv_rms[r] = ir;
        for (int c = 0; c < d; ++c) out.at(r, c) = static_cast<T>(gain) * x->val.at(r, c) * ir;
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad) {
        auto ir = std::make_shared<std::vector<T>>(std::move(inv_rms));
        tape->record([x, o, ir, gain, n, d] {
            for (int r = 0; r < n; ++r) {
                T dot = 0;
                for (int c = 0; c < d; ++c) dot += o->grad.at(r, c) * x->val.at(r, c);
                T k = (*ir)[r] * (*ir)[r] * dot / static_cast<T>(d);
                for (int c = 0; c < d; ++c)
                    x->grad.at(r, c) += static_cast<T>(gain) * (*ir)[r] *
                                        (o->grad.at(r, c) - x->val.at(r, c) * k);
            }
        });
    }
    return o;
}

// ---- structure ops ----

template <typename T>
VarPtr<T> slice_rows(Tape<T>* tape, const VarPtr<T>& x, int r0, int r1) {
    int n = x->val.rows(), d = x->val.cols();
    if (r0 < 0 || r1 > n || r0 >= r1) throw DimensionError("slice_rows: bad range");
    Tensor<T> out({r1 - r0, d});
    for (int r = r0; r < r1; ++r)
        for (int c = 0; c < d; ++c) out.at(r - r0, c) = x->val.at(r, c);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, r0, d] {
            for (int r = 0; r < o->grad.rows(); ++r)
                for (int c = 0; c < d; ++c) x->grad.at(r0 + r, c) += o->grad.at(r, c);
        });
    return o;
}

template <typename T>
VarPtr<T> slice_cols(Tape<T>* tape, const VarPtr<T>& x, int c0, int c1) {
    int n = x->val.rows(), d = x->val.cols();
    if (c0 < 0 || c1 > d || c0 >= c1) throw DimensionError("slice_cols: bad range");
    Tensor<T> out({n, c1 - c0});
    for (int r = 0; r < n; ++r)
        for (int c = c0; c < c1; ++c) out.at(r, c - c0) = x->val.at(r, c);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o, c0, n] {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < o->grad.cols(); ++c) x->grad.at(r, c0 + c) += o->grad.at(r, c);
        });
    return o;
}

template <typename T>
VarPtr<T> concat_rows(Tape<T>* tape, const std::vector<VarPtr<T>>& parts) {
    if (parts.empty()) throw DimensionError("concat_rows: empty");
    int d = parts[0]->val.cols(), n = 0;
    for (auto& p : parts) {
        if (p->val.cols() != d) throw DimensionError("concat_rows: width mismatch");
        n += p->val.rows();
    }
    Tensor<T> out({n, d});
    int r = 0;
    bool rg = false;
    for (auto& p : parts) {
        for (int i = 0; i < p->val.rows(); ++i)
            for (int c = 0; c < d; ++c) out.at(r + i, c) = p->val.at(i, c);
        r += p->val.rows();
        rg = rg || p->requires_grad;
    }
    auto o = make_var(std::move(out), tape && rg);
    if (o->requires_grad)
        tape->record([parts, o, d] {
            int r = 0;
            for (auto& p : parts) {
                if (p->requires_grad)
                    for (int i = 0; i < p->val.rows(); ++i)
                        for (int c = 0; c < d; ++c) p->grad.at(i, c) += o->grad.at(r + i, c);
                r += p->val.rows();
            }
        });
    return o;
}

// Row-major data reinterpretation; numel must match.
template <typename T>
VarPtr<T> reshape(Tape<T>* tape, const VarPtr<T>& x, std::vector<int> shape) {
    if (Tensor<T>::numel_of(shape) != x->val.numel()) throw DimensionError("reshape: numel mismatch");
    Tensor<T> out(shape, x->val.data);
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o] {
            for (size_t i = 0; i < o->grad.numel(); ++i) x->grad[i] += o->grad[i];
        });
    return o;
}

template <typename T>
VarPtr<T> transpose2d(Tape<T>* tape, const VarPtr<T>& x) {
    int n = x->val.rows(), d = x->val.cols();
    Tensor<T> out({d, n});
    out.mat() = x->val.mat().transpose();
    auto o = make_var(std::move(out), detail::want_grad(tape, {&x}));
    if (o->requires_grad)
        tape->record([x, o] { x->grad.mat() += o->grad.mat().transpose(); });
    return o;
}

template <typename T>
VarPtr<T> concat_cols(Tape<T>* tape, const VarPtr<T>& a, const VarPtr<T>& b) {
    if (a->val.rows() != b->val.rows()) throw DimensionError("concat_cols: row mismatch");
    int n = a->val.rows(), da = a->val.cols(), db = b->val.cols();
    Tensor<T> out({n, da + db});
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < da; ++c) out.at(r, c) = a->val.at(r, c);
        for (int c = 0; c < db; ++c) out.at(r, da + c) = b->val.at(r, c);
    }
    auto o = make_var(std::move(out), detail::want_grad(tape, {&a, &b}));
    if (o->requires_grad)
        tape->record([a, b, o, n, da, db] {
            for (int r = 0; r < n; ++r) {
                if (a->requires_grad)
                    for (int c = 0; c < da; ++c) a->grad.at(r, c) += o->grad.at(r, c);
                if (b->requires_grad)
                    for (int c = 0; c < db; ++c) b->grad.at(r, c) += o->grad.at(r, da + c);
            }
        });
    return o;
}

}  // namespace sleepdiff
