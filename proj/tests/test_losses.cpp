#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/gradcheck.hpp"
#include "core/losses.hpp"

using namespace sleepdiff;

namespace {

Tensor<double> rand_t(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    return Tensor<double>::uniform(std::move(shape), rng, lo, hi);
}

}  // namespace

TEST_CASE("cls_loss: uniform, near-perfect, and log-sum-exp oracle") {
    // all-zero logits -> per-epoch loss ln 5
    auto z = make_var(Tensor<double>::zeros({4, 5}));
    auto l = cls_loss<double>(nullptr, z, {0, 1, 2, 3});
    CHECK(l->val[0] == doctest::Approx(4.0 * std::log(5.0)));

    // huge-margin one-hot logits -> loss ~ 0
    Tensor<double> sharp({2, 5});
    sharp.fill(-50.0);
    sharp.at(0, 3) = 50.0;
    sharp.at(1, 0) = 50.0;
    auto l2 = cls_loss<double>(nullptr, make_var(sharp), {3, 0});
    CHECK(l2->val[0] <= 1e-9);

    // random case, seed 9, vs direct formula
    Rng rng(9);
    auto x = rand_t({3, 5}, rng, -2, 2);
    std::vector<int> labels{2, 0, 4};
    auto got = cls_loss<double>(nullptr, make_var(x), labels);
    double want = 0;
    for (int r = 0; r < 3; ++r) {
        double mx = -1e300;
        for (int c = 0; c < 5; ++c) mx = std::max(mx, x.at(r, c));
        double s = 0;
        for (int c = 0; c < 5; ++c) s += std::exp(x.at(r, c) - mx);
        want += mx + std::log(s) - x.at(r, labels[r]);
    }
    CHECK(std::abs(got->val[0] - want) <= 1e-10);

    CHECK_THROWS_AS(cls_loss<double>(nullptr, z, {0, 1, 2, 9}), std::out_of_range);
}

TEST_CASE("rec_loss: zero, unit offset, loop oracle") {
    Rng rng(4);
    auto x = make_var(rand_t({6, 100}, rng));
    CHECK(rec_loss<double>(nullptr, x, x)->val[0] == 0.0);

    auto xp1 = make_var(x->val);
    for (auto& v : xp1->val.data) v += 1.0;
    CHECK(rec_loss<double>(nullptr, x, xp1)->val[0] == doctest::Approx(1.0));

    auto y = make_var(rand_t({6, 100}, rng));
    double want = 0;
    for (size_t i = 0; i < x->val.numel(); ++i) {
        double d = x->val[i] - y->val[i];
        want += d * d;
    }
    want /= x->val.numel();
    CHECK(std::abs(rec_loss<double>(nullptr, x, y)->val[0] - want) <= 1e-12);

    CHECK_THROWS_AS(rec_loss<double>(nullptr, x, make_var(Tensor<double>({5, 100}))), DimensionError);
}

TEST_CASE("exp_loss: identical domains, closed form, pairwise loop oracle") {
    Rng rng(6);
    auto f = rand_t({5, 8}, rng);
    std::vector<VarPtr<double>> same{make_var(f), make_var(f), make_var(f)};
    CHECK(exp_loss<double>(nullptr, same)->val[0] <= 1e-24);

    // two domains offset by constant vector c -> 2 ||c||^2 over ordered pairs
    Tensor<double> c = rand_t({1, 8}, rng);
    Tensor<double> f2 = f;
    for (int r = 0; r < 5; ++r)
        for (int k = 0; k < 8; ++k) f2.at(r, k) += c[k];
    double c2 = 0;
    for (int k = 0; k < 8; ++k) c2 += c[k] * c[k];
    auto two = exp_loss<double>(nullptr, {make_var(f), make_var(f2)});
    CHECK(two->val[0] == doctest::Approx(2.0 * c2));

    // four random domains vs loop oracle
    std::vector<VarPtr<double>> doms;
    for (int i = 0; i < 4; ++i) doms.push_back(make_var(rand_t({3 + i, 8}, rng)));
    auto got = exp_loss<double>(nullptr, doms);
    double want = 0;
    std::vector<std::vector<double>> means;
    for (auto& d : doms) {
        std::vector<double> m(8, 0.0);
        for (int r = 0; r < d->val.rows(); ++r)
            for (int k = 0; k < 8; ++k) m[k] += d->val.at(r, k);
        for (auto& v : m) v /= d->val.rows();
        means.push_back(m);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            for (int k = 0; k < 8; ++k) {
                double dv = means[i][k] - means[j][k];
                want += dv * dv;
            }
        }
    CHECK(std::abs(got->val[0] - want) <= 1e-10);

    // fewer than 2 domains -> 0 with warning
    std::vector<std::string> warnings;
    CHECK(exp_loss<double>(nullptr, {make_var(f)}, &warnings)->val[0] == 0.0);
    CHECK(warnings.size() == 1);
}

TEST_CASE("exp_loss invariant to a shared constant shift") {
    Rng rng(16);
    std::vector<VarPtr<double>> doms{make_var(rand_t({4, 6}, rng)), make_var(rand_t({5, 6}, rng))};
    double base = exp_loss<double>(nullptr, doms)->val[0];
    auto shift = rand_t({1, 6}, rng);
    std::vector<VarPtr<double>> shifted;
    for (auto& d : doms) {
        Tensor<double> t = d->val;
        for (int r = 0; r < t.rows(); ++r)
            for (int k = 0; k < 6; ++k) t.at(r, k) += shift[k];
        shifted.push_back(make_var(t));
    }
    CHECK(exp_loss<double>(nullptr, shifted)->val[0] == doctest::Approx(base));
}

TEST_CASE("cov_loss: identical, scaling identity, label-swap symmetry, mean-shift invariance") {
    Rng rng(6);
    auto f = rand_t({6, 5}, rng);
    CHECK(cov_loss<double>(nullptr, {make_var(f), make_var(f)})->val[0] <= 1e-20);

    // domain j = 2 x centered(domain i) -> COV_j = 4 COV_i, loss = 2 * 9 * ||COV_i||_F^2
    Tensor<double> centered = f;
    for (int k = 0; k < 5; ++k) {
        double m = 0;
        for (int r = 0; r < 6; ++r) m += f.at(r, k);
        m /= 6;
        for (int r = 0; r < 6; ++r) centered.at(r, k) -= m;
    }
    Tensor<double> doubled = centered;
    for (auto& v : doubled.data) v *= 2.0;
    auto loss = cov_loss<double>(nullptr, {make_var(centered), make_var(doubled)});
    // loop-oracle covariance of the centered set
    double fro2 = 0;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) {
            double cab = 0;
            for (int r = 0; r < 6; ++r) cab += centered.at(r, a) * centered.at(r, b);
            cab /= 5.0;
            fro2 += cab * cab;
        }
    CHECK(loss->val[0] == doctest::Approx(2.0 * 9.0 * fro2));

    // swapping domain labels leaves the value unchanged
    auto g = rand_t({7, 5}, rng);
    auto ab = cov_loss<double>(nullptr, {make_var(f), make_var(g)});
    auto ba = cov_loss<double>(nullptr, {make_var(g), make_var(f)});
    CHECK(ab->val[0] == doctest::Approx(ba->val[0]));

    // per-domain mean shifts do not change covariances
    Tensor<double> g_shift = g;
    for (int r = 0; r < 7; ++r)
        for (int k = 0; k < 5; ++k) g_shift.at(r, k) += 3.7;
    CHECK(cov_loss<double>(nullptr, {make_var(f), make_var(g_shift)})->val[0] ==
          doctest::Approx(ab->val[0]));

    // single-row domain contributes a zero covariance, with a warning
    std::vector<std::string> warnings;
    auto one_row = cov_loss<double>(nullptr, {make_var(rand_t({1, 5}, rng)), make_var(g)}, &warnings);
    CHECK(one_row->val[0] > 0.0);
    CHECK(!warnings.empty());
}

TEST_CASE("pcc_matrix: symmetric, unit diagonal, entries bounded, zero-variance guarded") {
    Rng rng(8);
    auto x = make_var(rand_t({6, 12}, rng));
    auto r = pcc_matrix<double>(nullptr, x);
    for (int i = 0; i < 6; ++i) {
        CHECK(r->val.at(i, i) == doctest::Approx(1.0));
        for (int j = 0; j < 6; ++j) {
            CHECK(r->val.at(i, j) == doctest::Approx(r->val.at(j, i)));
            CHECK(std::abs(r->val.at(i, j)) <= 1.0 + 1e-9);
        }
    }
    // constant row -> zero PCC entries including its own diagonal
    Tensor<double> with_const = x->val;
    for (int k = 0; k < 12; ++k) with_const.at(2, k) = 0.75;
    auto r2 = pcc_matrix<double>(nullptr, make_var(with_const));
    for (int j = 0; j < 6; ++j) {
        CHECK(r2->val.at(2, j) == 0.0);
        CHECK(r2->val.at(j, 2) == 0.0);
    }
}

TEST_CASE("seq_align_loss: identical domains zero, loop PCC oracle (seed 8)") {
    Rng rng(8);
    std::vector<VarPtr<double>> seqs{make_var(rand_t({5, 9}, rng)), make_var(rand_t({5, 9}, rng))};
    CHECK(seq_align_loss<double>(nullptr, {seqs, seqs})->val[0] <= 1e-20);

    std::vector<VarPtr<double>> d2{make_var(rand_t({5, 9}, rng))};
    auto got = seq_align_loss<double>(nullptr, {seqs, d2});

    // oracle: loop PCC per sequence, mean per domain, ordered-pair Frobenius
    auto pcc = [](const Tensor<double>& m) {
        int n = m.rows(), d = m.cols();
        Tensor<double> r({n, n});
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double ma = 0, mb = 0;
                for (int k = 0; k < d; ++k) {
                    ma += m.at(a, k);
                    mb += m.at(b, k);
                }
                ma /= d;
                mb /= d;
                double num = 0, va = 0, vb = 0;
                for (int k = 0; k < d; ++k) {
                    num += (m.at(a, k) - ma) * (m.at(b, k) - mb);
                    va += (m.at(a, k) - ma) * (m.at(a, k) - ma);
                    vb += (m.at(b, k) - mb) * (m.at(b, k) - mb);
                }
                r.at(a, b) = (va > 0 && vb > 0) ? num / std::sqrt(va * vb) : 0.0;
            }
        return r;
    };
    Tensor<double> r0 = pcc(seqs[0]->val), r1 = pcc(seqs[1]->val);
    Tensor<double> mean0({5, 5});
    for (size_t i = 0; i < mean0.numel(); ++i) mean0[i] = 0.5 * (r0[i] + r1[i]);
    Tensor<double> mean1 = pcc(d2[0]->val);
    double want = 0;
    for (size_t i = 0; i < mean0.numel(); ++i) {
        double dv = mean0[i] - mean1[i];
        want += 2.0 * dv * dv;
    }
    CHECK(std::abs(got->val[0] - want) <= 1e-10);
}

TEST_CASE("total_loss arithmetic") {
    auto z = zero_scalar<double>();
    CHECK(total_loss<double>(nullptr, z, z, z, z, z)->val[0] == 0.0);

    auto one = make_var(Tensor<double>({1, 1}, {1.0}));
    CHECK(total_loss<double>(nullptr, one, z, z, z, z)->val[0] == doctest::Approx(1.0));

    Rng rng(3);
    double c = rng.uniform(0, 2), r = rng.uniform(0, 2), e = rng.uniform(0, 2),
           v = rng.uniform(0, 2), s = rng.uniform(0, 2);
    auto mk = [](double x) { return make_var(Tensor<double>({1, 1}, {x})); };
    auto tot = total_loss<double>(nullptr, mk(c), mk(r), mk(e), mk(v), mk(s), 0.5, 0.5);
    CHECK(std::abs(tot->val[0] - (c + 0.5 * r + 0.5 * (e + v + s))) <= 1e-12);
}

TEST_CASE("loss gradients pass grad_check including the PCC path, 10 seeds") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);

        auto f0 = make_var(rand_t({4, 6}, rng), true);
        auto f1 = make_var(rand_t({5, 6}, rng), true);
        auto f2 = make_var(rand_t({3, 6}, rng), true);
        std::vector<VarPtr<double>> doms{f0, f1, f2};

        auto fn_exp = [&](Tape<double>* t) { return exp_loss(t, doms); };
        auto rep = grad_check_vars(fn_exp, doms, 1e-5);
        CHECK_MESSAGE(rep.passed, "exp_loss seed " << seed << ": " << rep.describe());

        auto fn_cov = [&](Tape<double>* t) { return cov_loss(t, doms); };
        rep = grad_check_vars(fn_cov, doms, 1e-5);
        CHECK_MESSAGE(rep.passed, "cov_loss seed " << seed << ": " << rep.describe());

        auto s0 = make_var(rand_t({4, 7}, rng), true);
        auto s1 = make_var(rand_t({4, 7}, rng), true);
        std::vector<std::vector<VarPtr<double>>> domseq{{s0}, {s1}};
        auto fn_seq = [&](Tape<double>* t) { return seq_align_loss(t, domseq); };
        rep = grad_check_vars(fn_seq, {s0, s1}, 1e-5);
        CHECK_MESSAGE(rep.passed, "seq_align seed " << seed << ": " << rep.describe());

        auto logits = make_var(rand_t({4, 5}, rng), true);
        auto fn_cls = [&](Tape<double>* t) { return cls_loss(t, logits, {0, 1, 2, 3}); };
        rep = grad_check_vars(fn_cls, {logits}, 1e-5);
        CHECK_MESSAGE(rep.passed, "cls seed " << seed << ": " << rep.describe());

        auto xa = make_var(rand_t({3, 8}, rng), true);
        auto xb = make_var(rand_t({3, 8}, rng), true);
        auto fn_rec = [&](Tape<double>* t) { return rec_loss(t, xa, xb); };
        rep = grad_check_vars(fn_rec, {xa, xb}, 1e-5);
        CHECK_MESSAGE(rep.passed, "rec seed " << seed << ": " << rep.describe());
    }
}
