#pragma once

#include <functional>
#include <string>
#include <vector>

#include "autodiff.hpp"

namespace sleepdiff {

struct GradCheckReport {
    bool passed = true;
    double worst_rel_err = 0.0;
    int worst_input = -1;
    size_t worst_coord = 0;
    double analytic = 0.0;
    double numeric = 0.0;

    std::string describe() const {
        return "worst rel err " + std::to_string(worst_rel_err) + " at input " +
               std::to_string(worst_input) + " coord " + std::to_string(worst_coord) +
               " (analytic " + std::to_string(analytic) + ", numeric " + std::to_string(numeric) +
               ")";
    }
};

// Central-difference check of a scalar-valued graph against its tape gradient.
// f must be a pure function of the given inputs. 64-bit only.
using ScalarFn =
    std::function<VarPtr<double>(Tape<double>*, const std::vector<VarPtr<double>>&)>;

inline GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor<double>> inputs,
                                  double tol = 1e-5, double h = 1e-5) {
    std::vector<VarPtr<double>> vars;
    for (auto& t : inputs) vars.push_back(make_var(t, true));
    Tape<double> tape;
    auto out = f(&tape, vars);
    tape.backward(out);

    GradCheckReport rep;
    for (size_t vi = 0; vi < vars.size(); ++vi) {
        for (size_t ci = 0; ci < inputs[vi].numel(); ++ci) {
            double saved = inputs[vi][ci];
            auto eval_at = [&](double v) {
                inputs[vi][ci] = v;
                std::vector<VarPtr<double>> fresh;
                for (auto& t : inputs) fresh.push_back(make_var(t, false));
                auto o = f(nullptr, fresh);
                return o->val[0];
            };
            double fd = (eval_at(saved + h) - eval_at(saved - h)) / (2.0 * h);
            inputs[vi][ci] = saved;
            double an = vars[vi]->grad[ci];
            double rel = std::abs(an - fd) / std::max(1.0, std::abs(fd));
            if (rel > rep.worst_rel_err) {
                rep.worst_rel_err = rel;
                rep.worst_input = static_cast<int>(vi);
                rep.worst_coord = ci;
                rep.analytic = an;
                rep.numeric = fd;
            }
            if (rel > tol) rep.passed = false;
        }
    }
    return rep;
}

// Same check, but against pre-built variables the closure captures (model
// parameters and inputs). The closure must be a pure function of vars' values.
inline GradCheckReport grad_check_vars(const std::function<VarPtr<double>(Tape<double>*)>& f,
                                       const std::vector<VarPtr<double>>& vars, double tol = 1e-5,
                                       double h = 1e-5) {
    for (auto& v : vars) v->zero_grad();
    Tape<double> tape;
    auto out = f(&tape);
    tape.backward(out);

    GradCheckReport rep;
    for (size_t vi = 0; vi < vars.size(); ++vi) {
        for (size_t ci = 0; ci < vars[vi]->val.numel(); ++ci) {
            double saved = vars[vi]->val[ci];
            vars[vi]->val[ci] = saved + h;
            double fp = f(nullptr)->val[0];
            vars[vi]->val[ci] = saved - h;
            double fm = f(nullptr)->val[0];
            vars[vi]->val[ci] = saved;
            double fd = (fp - fm) / (2.0 * h);
            double an = vars[vi]->grad[ci];
            double rel = std::abs(an - fd) / std::max(1.0, std::abs(fd));
            if (rel > rep.worst_rel_err) {
                rep.worst_rel_err = rel;
                rep.worst_input = static_cast<int>(vi);
                rep.worst_coord = ci;
                rep.analytic = an;
                rep.numeric = fd;
            }
            if (rel > tol) rep.passed = false;
        }
    }
    return rep;
}

}  // namespace sleepdiff
