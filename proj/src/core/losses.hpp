#pragma once

#include <string>
#include <vector>

#include "nn_ops.hpp"

namespace sleepdiff {

// The five loss terms plus the weighted total, as plain numbers for
// reporting. The graph-side scalars live in LossGraph during training.
struct LossBundle {
    double cls = 0, rec = 0, exp = 0, cov = 0, epo = 0, seq = 0, total = 0;
    double cls_per_epoch = 0;  // cls / number of scored epochs, for readability
    double lambda_rec = 0.5, lambda_align = 0.5;
};

template <typename T>
VarPtr<T> zero_scalar() {
    return make_var(Tensor<T>::zeros({1, 1}));
}

// Summed cross-entropy over all epochs of all sequences in the batch.
template <typename T>
VarPtr<T> cls_loss(Tape<T>* tape, const VarPtr<T>& logits, const std::vector<int>& labels) {
    return cross_entropy_sum(tape, logits, labels);
}

// Mean squared error over every sample of every channel/epoch/sequence.
template <typename T>
VarPtr<T> rec_loss(Tape<T>* tape, const VarPtr<T>& x, const VarPtr<T>& xhat) {
    require_same_shape(x->val, xhat->val, "rec_loss");
    auto d = sub(tape, x, xhat);
    return scale(tape, sum_all(tape, mul(tape, d, d)), 1.0 / static_cast<double>(x->val.numel()));
}

// Sum over ordered domain pairs of squared mean-feature distance.
template <typename T>
VarPtr<T> exp_loss(Tape<T>* tape, const std::vector<VarPtr<T>>& domain_features,
                   std::vector<std::string>* warnings = nullptr) {
    if (domain_features.size() < 2) {
        if (warnings) warnings->push_back("exp_loss: fewer than 2 domains, defined as 0");
        return zero_scalar<T>();
    }
    std::vector<VarPtr<T>> means;
    for (auto& f : domain_features) means.push_back(mean_rows(tape, f));
    VarPtr<T> acc = zero_scalar<T>();
    for (size_t i = 0; i < means.size(); ++i)
        for (size_t j = i + 1; j < means.size(); ++j) {
            auto d = sub(tape, means[i], means[j]);
            acc = add(tape, acc, sum_all(tape, mul(tape, d, d)));
        }
    return scale(tape, acc, 2.0);  // ordered pairs count each unordered pair twice
}

// Covariance with 1/(n-1) normalization; degenerate (n < 2) domains
// contribute a zero matrix.
template <typename T>
VarPtr<T> covariance(Tape<T>* tape, const VarPtr<T>& features,
                     std::vector<std::string>* warnings = nullptr) {
    int n = features->val.rows(), d = features->val.cols();
    if (n < 2) {
        if (warnings) warnings->push_back("cov: single-row domain, zero covariance used");
        return make_var(Tensor<T>::zeros({d, d}));
    }
    auto centered = sub_rowvec(tape, features, mean_rows(tape, features));
    return scale(tape, matmul(tape, centered, centered, true, false), 1.0 / (n - 1));
}

template <typename T>
VarPtr<T> cov_loss(Tape<T>* tape, const std::vector<VarPtr<T>>& domain_features,
                   std::vector<std::string>* warnings = nullptr) {
    if (domain_features.size() < 2) {
        if (warnings) warnings->push_back("cov_loss: fewer than 2 domains, defined as 0");
        return zero_scalar<T>();
    }
    std::vector<VarPtr<T>> covs;
    for (auto& f : domain_features) covs.push_back(covariance(tape, f, warnings));
    VarPtr<T> acc = zero_scalar<T>();
    for (size_t i = 0; i < covs.size(); ++i)
        for (size_t j = i + 1; j < covs.size(); ++j) {
            auto d = sub(tape, covs[i], covs[j]);
            acc = add(tape, acc, sum_all(tape, mul(tape, d, d)));
        }
    return scale(tape, acc, 2.0);
}

// Pearson correlation matrix between the rows of X (epochs), computed across
// feature coordinates. Zero-variance rows yield zero entries (guarded).
template <typename T>
VarPtr<T> pcc_matrix(Tape<T>* tape, const VarPtr<T>& x) {
    auto centered = sub_colvec(tape, x, mean_cols(tape, x));
    auto gram = matmul(tape, centered, centered, false, true);
    auto sigma = sqrt_elem(tape, diagonal(tape, gram));
    auto inv = safe_recip(tape, sigma);
    return mul(tape, gram, matmul(tape, inv, inv, false, true));
}

// Sum over ordered domain pairs of squared Frobenius distance between the
// domains' mean correlation matrices. Input: per domain, the per-sequence
// epoch-feature matrices (n_seq_epochs x D each).
template <typename T>
VarPtr<T> seq_align_loss(Tape<T>* tape,
                         const std::vector<std::vector<VarPtr<T>>>& domain_sequences,
                         std::vector<std::string>* warnings = nullptr) {
    std::vector<VarPtr<T>> mean_r;
    for (auto& seqs : domain_sequences) {
        if (seqs.empty()) continue;
        VarPtr<T> acc;
        for (auto& s : seqs) {
            auto r = pcc_matrix(tape, s);
            acc = acc ? add(tape, acc, r) : r;
        }
        mean_r.push_back(scale(tape, acc, 1.0 / static_cast<double>(seqs.size())));
    }
    if (mean_r.size() < 2) {
        if (warnings) warnings->push_back("seq_align_loss: fewer than 2 domains, defined as 0");
        return zero_scalar<T>();
    }
    VarPtr<T> acc = zero_scalar<T>();
    for (size_t i = 0; i < mean_r.size(); ++i)
        for (size_t j = i + 1; j < mean_r.size(); ++j) {
            auto d = sub(tape, mean_r[i], mean_r[j]);
            acc = add(tape, acc, sum_all(tape, mul(tape, d, d)));
        }
    return scale(tape, acc, 2.0);
}

// L_total = L_cls + lambda_rec * L_rec + lambda_align * (L_epo + L_seq)
template <typename T>
VarPtr<T> total_loss(Tape<T>* tape, const VarPtr<T>& cls, const VarPtr<T>& rec,
                     const VarPtr<T>& exp_l, const VarPtr<T>& cov_l, const VarPtr<T>& seq_l,
                     double lambda_rec = 0.5, double lambda_align = 0.5) {
    auto align = add(tape, add(tape, exp_l, cov_l), seq_l);
    return add(tape, add(tape, cls, scale(tape, rec, lambda_rec)),
               scale(tape, align, lambda_align));
}

}  // namespace sleepdiff
