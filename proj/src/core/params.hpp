#pragma once

#include <map>
#include <string>
#include <vector>

#include "adam.hpp"
#include "autodiff.hpp"
#include "rng.hpp"

namespace sleepdiff {

// Flat registry of named learnable tensors. Names are stable across runs and
// are the keys used by the checkpoint format and the optimizer.
template <typename T>
class ParamStore {
  public:
    VarPtr<T> add(const std::string& name, Tensor<T> init) {
        if (index_.count(name)) throw std::runtime_error("duplicate parameter: " + name);
        auto v = make_var(std::move(init), true);
        index_[name] = entries_.size();
        entries_.push_back({name, v});
        return v;
    }

    // uniform(-1/sqrt(d_in), 1/sqrt(d_in))
    VarPtr<T> add_linear_weight(const std::string& name, int d_in, int d_out, Rng& rng) {
        double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
        return add(name, Tensor<T>::uniform({d_in, d_out}, rng, -bound, bound));
    }

    VarPtr<T> add_matrix(const std::string& name, int rows, int cols, int fan_in, Rng& rng) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        return add(name, Tensor<T>::uniform({rows, cols}, rng, -bound, bound));
    }

    VarPtr<T> add_zeros(const std::string& name, std::vector<int> shape) {
        return add(name, Tensor<T>::zeros(std::move(shape)));
    }

    VarPtr<T> add_ones(const std::string& name, std::vector<int> shape) {
        return add(name, Tensor<T>::full(std::move(shape), T(1)));
    }

    VarPtr<T> get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
        return entries_[it->second].var;
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    struct Entry {
        std::string name;
        VarPtr<T> var;
    };

    const std::vector<Entry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }

    void zero_grad() {
        for (auto& e : entries_) e.var->zero_grad();
    }

  private:
    std::vector<Entry> entries_;
    std::map<std::string, size_t> index_;
};

// Adam over a whole store, one state slot per parameter.
template <typename T>
class AdamOptimizer {
  public:
    AdamOptimizer(ParamStore<T>& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto& e : store.entries()) states_.emplace_back(e.var->val.shape);
    }

    void step() {
        ++t_;
        auto& es = store_.entries();
        for (size_t i = 0; i < es.size(); ++i)
            adam_step(es[i].var->val, es[i].var->grad, states_[i], lr_, beta1_, beta2_, eps_, t_);
    }

    long step_count() const { return t_; }
    std::vector<AdamState<T>>& states() { return states_; }
    void set_step_count(long t) { t_ = t; }

  private:
    ParamStore<T>& store_;
    std::vector<AdamState<T>> states_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace sleepdiff
