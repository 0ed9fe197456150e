#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/attention.hpp"
#include "core/gradcheck.hpp"

using namespace sleepdiff;

namespace {

Tensor<double> rand_t(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    return Tensor<double>::uniform(std::move(shape), rng, lo, hi);
}

// Loop-based standard softmax attention, the independent reference.
Tensor<double> naive_attention(const Tensor<double>& Q, const Tensor<double>& K,
                               const Tensor<double>& V) {
    int nq = Q.rows(), nk = K.rows(), dk = Q.cols(), dv = V.cols();
    Tensor<double> out({nq, dv});
    for (int i = 0; i < nq; ++i) {
        std::vector<double> score(nk);
        double mx = -1e300;
        for (int j = 0; j < nk; ++j) {
            double s = 0;
            for (int k = 0; k < dk; ++k) s += Q.at(i, k) * K.at(j, k);
            score[j] = s / std::sqrt(static_cast<double>(dk));
            mx = std::max(mx, score[j]);
        }
        double z = 0;
        for (int j = 0; j < nk; ++j) {
            score[j] = std::exp(score[j] - mx);
            z += score[j];
        }
        for (int j = 0; j < nk; ++j)
            for (int v = 0; v < dv; ++v) out.at(i, v) += (score[j] / z) * V.at(j, v);
    }
    return out;
}

DiffAttnParams<double> random_params(ParamStore<double>& store, int d, int heads, int layer,
                                     uint64_t seed, bool use_diff = true) {
    Rng rng(seed);
    auto p = make_diff_attn(store, "attn", d, heads, layer, use_diff, rng);
    return p;
}

}  // namespace

TEST_CASE("lambda_init schedule") {
    CHECK(lambda_init_schedule(1) == doctest::Approx(0.2));
    CHECK(lambda_init_schedule(4) == doctest::Approx(0.8 - 0.6 * std::exp(-0.9)));
    CHECK(lambda_init_schedule(4) == doctest::Approx(0.5561).epsilon(1e-3));
    // monotone increasing toward 0.8
    for (int l = 1; l < 8; ++l) CHECK(lambda_init_schedule(l) < lambda_init_schedule(l + 1));
}

TEST_CASE("lambda_value at zero-initialized vectors equals lambda_init") {
    ParamStore<double> store;
    auto p = random_params(store, 8, 2, 1, 3);
    auto lam = lambda_value<double>(nullptr, p, 0);
    CHECK(lam->val[0] == doctest::Approx(lambda_init_schedule(1)));
    ParamStore<double> store4;
    Rng rng(3);
    auto p4 = make_diff_attn(store4, "attn", 8, 2, 4, true, rng);
    CHECK(lambda_value<double>(nullptr, p4, 1)->val[0] == doctest::Approx(lambda_init_schedule(4)));
}

TEST_CASE("diff_attn_head degenerate cases") {
    Rng rng(1);
    auto lam = make_var(Tensor<double>({1, 1}, {0.3}));
    auto V = make_var(rand_t({1, 4}, rng));
    auto Q1 = make_var(rand_t({1, 2}, rng)), Q2 = make_var(rand_t({1, 2}, rng));
    auto K1 = make_var(rand_t({1, 2}, rng)), K2 = make_var(rand_t({1, 2}, rng));

    // single key: map = [[1 - lambda]], out = (1 - lambda) V
    auto [out, map] = diff_attn_head<double>(nullptr, Q1, Q2, K1, K2, V, lam);
    CHECK(map->val[0] == doctest::Approx(0.7));
    for (int c = 0; c < 4; ++c) CHECK(out->val[c] == doctest::Approx(0.7 * V->val[c]));

    // lambda = 0 reduces to standard attention on (Q1, K1, V)
    auto Q1b = make_var(rand_t({3, 2}, rng)), Q2b = make_var(rand_t({3, 2}, rng));
    auto K1b = make_var(rand_t({5, 2}, rng)), K2b = make_var(rand_t({5, 2}, rng));
    auto Vb = make_var(rand_t({5, 4}, rng));
    auto zero = make_var(Tensor<double>({1, 1}, {0.0}));
    auto [out0, map0] = diff_attn_head<double>(nullptr, Q1b, Q2b, K1b, K2b, Vb, zero);
    auto ref = naive_attention(Q1b->val, K1b->val, Vb->val);
    for (size_t i = 0; i < ref.numel(); ++i) CHECK(std::abs(out0->val[i] - ref[i]) <= 1e-6);

    // lambda = 1 with tied halves cancels exactly
    auto one = make_var(Tensor<double>({1, 1}, {1.0}));
    auto [out1, map1] = diff_attn_head<double>(nullptr, Q1b, Q1b, K1b, K1b, Vb, one);
    for (size_t i = 0; i < map1->val.numel(); ++i) CHECK(map1->val[i] == 0.0);
    for (size_t i = 0; i < out1->val.numel(); ++i) CHECK(out1->val[i] == 0.0);
}

TEST_CASE("diff attention map rows sum to 1 - lambda") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        double lam_v = rng.uniform(0.0, 1.0);
        auto lam = make_var(Tensor<double>({1, 1}, {lam_v}));
        auto Q1 = make_var(rand_t({4, 3}, rng, -3, 3)), Q2 = make_var(rand_t({4, 3}, rng, -3, 3));
        auto K1 = make_var(rand_t({6, 3}, rng, -3, 3)), K2 = make_var(rand_t({6, 3}, rng, -3, 3));
        auto V = make_var(rand_t({6, 6}, rng));
        auto [out, map] = diff_attn_head<double>(nullptr, Q1, Q2, K1, K2, V, lam);
        for (int r = 0; r < 4; ++r) {
            double s = 0;
            for (int c = 0; c < 6; ++c) s += map->val.at(r, c);
            CHECK(std::abs(s - (1.0 - lam_v)) <= 1e-5);
        }
    }
}

TEST_CASE("multi_head_diff_attn single token map and determinism") {
    ParamStore<double> store;
    auto p = random_params(store, 8, 2, 1, 13);
    Rng rng(2);
    auto x = make_var(rand_t({1, 8}, rng));
    AttnSink sink;
    RecordCtx ctx{&sink, 1, 0, "eeg", AttnKind::dsa};
    auto out = multi_head_diff_attn<double>(nullptr, x, x, p, ctx);
    REQUIRE(sink.records.size() == 2);
    for (auto& rec : sink.records) {
        REQUIRE(rec.n_q == 1);
        REQUIRE(rec.n_k == 1);
        CHECK(rec.map[0] == doctest::Approx(1.0 - rec.lambda));
    }
    auto out2 = multi_head_diff_attn<double>(nullptr, x, x, p);
    for (size_t i = 0; i < out->val.numel(); ++i) CHECK(out->val[i] == out2->val[i]);
}

TEST_CASE("key/value permutation invariance, query permutation equivariance") {
    ParamStore<double> store;
    auto p = random_params(store, 8, 2, 2, 23);
    Rng rng(4);
    auto xq = make_var(rand_t({3, 8}, rng));
    auto xkv = make_var(rand_t({5, 8}, rng));
    auto base = multi_head_diff_attn<double>(nullptr, xq, xkv, p);

    // permute the key/value rows
    std::vector<int> perm{4, 2, 0, 3, 1};
    Tensor<double> kv2({5, 8});
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 8; ++c) kv2.at(r, c) = xkv->val.at(perm[r], c);
    auto out2 = multi_head_diff_attn<double>(nullptr, xq, make_var(kv2), p);
    for (size_t i = 0; i < base->val.numel(); ++i)
        CHECK(std::abs(base->val[i] - out2->val[i]) <= 1e-12);

    // permute the query rows: output rows permute identically
    std::vector<int> qperm{2, 0, 1};
    Tensor<double> q2({3, 8});
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 8; ++c) q2.at(r, c) = xq->val.at(qperm[r], c);
    auto out3 = multi_head_diff_attn<double>(nullptr, make_var(q2), xkv, p);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 8; ++c)
            CHECK(std::abs(out3->val.at(r, c) - base->val.at(qperm[r], c)) <= 1e-12);
}

TEST_CASE("multi_head_diff_attn matches loop-based reference (n=5 d=8 h=2 seed 13)") {
    ParamStore<double> store;
    auto p = random_params(store, 8, 2, 1, 13);
    Rng rng(13);
    auto x = make_var(rand_t({5, 8}, rng));
    auto got = multi_head_diff_attn<double>(nullptr, x, x, p);

    // independent reference: explicit projections, per-head differential maps,
    // RMS head norm scaled by (1 - lambda_init), concat, output projection
    int d = 8, h = 2, dh = d / (2 * h), n = 5;
    auto proj = [&](const Tensor<double>& W, const Tensor<double>& b) {
        Tensor<double> r({n, d});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) {
                double acc = b[j];
                for (int k = 0; k < d; ++k) acc += x->val.at(i, k) * W.at(k, j);
                r.at(i, j) = acc;
            }
        return r;
    };
    Tensor<double> Q = proj(p.Wq->val, p.bq->val);
    Tensor<double> K = proj(p.Wk->val, p.bk->val);
    Tensor<double> V = proj(p.Wv->val, p.bv->val);
    double lam_init = lambda_init_schedule(1);
    Tensor<double> cat({n, d});
    for (int head = 0; head < h; ++head) {
        int base = head * 2 * dh;
        // zero-initialized lambda vectors -> lambda = lam_init
        double lam = lam_init;
        for (int i = 0; i < n; ++i) {
            std::vector<double> m(n);
            auto smax = [&](int off) {
                std::vector<double> sc(n);
                double mx = -1e300;
                for (int j = 0; j < n; ++j) {
                    double s = 0;
                    for (int k = 0; k < dh; ++k) s += Q.at(i, base + off + k) * K.at(j, base + off + k);
                    sc[j] = s / std::sqrt(static_cast<double>(dh));
                    mx = std::max(mx, sc[j]);
                }
                double z = 0;
                for (auto& v : sc) {
                    v = std::exp(v - mx);
                    z += v;
                }
                for (auto& v : sc) v /= z;
                return sc;
            };
            auto a1 = smax(0), a2 = smax(dh);
            std::vector<double> row(2 * dh, 0.0);
            for (int j = 0; j < n; ++j) {
                double w = a1[j] - lam * a2[j];
                for (int v = 0; v < 2 * dh; ++v) row[v] += w * V.at(j, base + v);
            }
            double ms = 0;
            for (double v : row) ms += v * v;
            double inv = 1.0 / std::sqrt(ms / (2 * dh) + 1e-6);
            for (int v = 0; v < 2 * dh; ++v) cat.at(i, base + v) = (1.0 - lam_init) * row[v] * inv;
        }
    }
    Tensor<double> ref({n, d});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = p.bo->val[j];
            for (int k = 0; k < d; ++k) acc += cat.at(i, k) * p.Wo->val.at(k, j);
            ref.at(i, j) = acc;
        }
    for (size_t i = 0; i < ref.numel(); ++i) CHECK(std::abs(got->val[i] - ref[i]) <= 1e-10);
}

TEST_CASE("dsa shape preservation and global row sum") {
    ParamStore<double> store;
    Rng rng(31);
    auto p = make_diff_attn(store, "dsa", 16, 2, 1, true, rng);
    auto ln = make_norm(store, "ln", 16);
    auto x = make_var(rand_t({21, 16}, rng));
    AttnSink sink;
    RecordCtx ctx{&sink, 1, 0, "eeg", AttnKind::dsa};
    auto y = dsa<double>(nullptr, x, p, ln, ctx);
    CHECK(y->val.rows() == 21);
    CHECK(y->val.cols() == 16);
    // global-token row attends over all 21 keys, summing to 1 - lambda
    for (auto& rec : sink.records) {
        REQUIRE(rec.n_k == 21);
        CHECK(std::abs(rec.row_sum(20) - (1.0 - rec.lambda)) <= 1e-5);
    }
}

TEST_CASE("dca asymmetry and structural equivalence with single-token dsa") {
    ParamStore<double> store;
    Rng rng(37);
    auto p = make_diff_attn(store, "dca", 8, 2, 1, true, rng);
    auto ln = make_norm(store, "ln", 8);
    auto g1 = make_var(rand_t({1, 8}, rng));
    auto g2 = make_var(rand_t({1, 8}, rng));

    auto a = dca<double>(nullptr, g1, g2, p, ln);
    auto b = dca<double>(nullptr, g2, g1, p, ln);
    bool all_equal = true;
    for (size_t i = 0; i < a->val.numel(); ++i)
        if (a->val[i] != b->val[i]) all_equal = false;
    CHECK_FALSE(all_equal);

    // with G_other = G_self, dca equals dsa on the single global row
    auto c = dca<double>(nullptr, g1, g1, p, ln);
    auto d = dsa<double>(nullptr, g1, p, ln);
    for (size_t i = 0; i < c->val.numel(); ++i) CHECK(std::abs(c->val[i] - d->val[i]) <= 1e-10);
}

TEST_CASE("gradients through diff_attn_head including lambda vectors") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        ParamStore<double> store;
        Rng rng(seed);
        auto p = make_diff_attn(store, "attn", 8, 2, 2, true, rng);
        // move lambda vectors off zero so their gradients are generic
        for (auto v : {p.lq1, p.lk1, p.lq2, p.lk2})
            for (auto& e : v->val.data) e = rng.uniform(-0.5, 0.5);
        auto x = make_var(rand_t({4, 8}, rng), true);
        auto w = rand_t({4, 8}, rng);  // fixed projection to a scalar

        std::vector<VarPtr<double>> checked{x,    p.Wq,  p.Wk,  p.Wv,  p.Wo,  p.bq, p.bk,
                                            p.bv, p.bo,  p.lq1, p.lk1, p.lq2, p.lk2};
        auto fn = [&](Tape<double>* t) {
            return sum_all(t, mul(t, multi_head_diff_attn(t, x, x, p), make_var(w)));
        };
        auto rep = grad_check_vars(fn, checked, 1e-5);
        CHECK_MESSAGE(rep.passed, "seed " << seed << ": " << rep.describe());
    }
}
