#pragma once

#include <cmath>

#include "tensor.hpp"

namespace sleepdiff {

template <typename T>
struct AdamState {
    Tensor<T> m;
    Tensor<T> v;

    explicit AdamState(const std::vector<int>& shape)
        : m(Tensor<T>::zeros(shape)), v(Tensor<T>::zeros(shape)) {}
};

// Bias-corrected Adam update, in place. t is 1-based.
template <typename T>
void adam_step(Tensor<T>& params, const Tensor<T>& grads, AdamState<T>& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, long t = 1) {
    require_same_shape(params, grads, "adam_step");
    require_same_shape(params, state.m, "adam_step");
    if (t < 1) throw DimensionError("adam_step: t must be >= 1");
    T b1 = static_cast<T>(beta1), b2 = static_cast<T>(beta2);
    T bc1 = static_cast<T>(1.0 - std::pow(beta1, static_cast<double>(t)));
    T bc2 = static_cast<T>(1.0 - std::pow(beta2, static_cast<double>(t)));
    for (size_t i = 0; i < params.numel(); ++i) {
        T g = grads[i];
        state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
        state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
        T mhat = state.m[i] / bc1;
        T vhat = state.v[i] / bc2;
        params[i] -= static_cast<T>(lr) * mhat / (std::sqrt(vhat) + static_cast<T>(eps));
    }
}

}  // namespace sleepdiff
