#ifndef NETSIMP_TESTS_NN_TESTING_HPP
#define NETSIMP_TESTS_NN_TESTING_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "netsimp/nn/layers.hpp"
#include "netsimp/nn/tape.hpp"
#include "netsimp/rng.hpp"

namespace netsimp::testing {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

/// Central finite-difference check of d(loss)/d(params).
///
/// `build` constructs the scalar loss on a fresh context from the current
/// parameter values; it is re-invoked after each perturbation. Returns the
/// max relative error between analytic and numeric gradients.
inline double fd_check_params(const std::vector<nn::Param*>& params,
                              const std::function<int(nn::Ctx&)>& build, double step = 1e-4) {
    std::vector<Eigen::VectorXd> analytic;
    {
        nn::Tape tape;
        nn::Ctx ctx{tape, true};
        const int loss = build(ctx);
        const auto gradof = tape.backward(loss);
        for (auto* p : params) {
            p->grad.setZero();
            analytic.push_back(Eigen::VectorXd::Zero(p->size()));
        }
        for (auto& [param, node] : ctx.staked) {
            const int g = gradof[static_cast<size_t>(node)];
            if (g < 0) continue;
            for (size_t k = 0; k < params.size(); ++k)
                if (params[k] == param) analytic[k] = tape.val(g);
        }
    }
    auto eval = [&]() {
        nn::Tape tape;
        nn::Ctx ctx{tape, false};
        return tape.scalar_val(build(ctx));
    };
    double worst = 0.0;
    for (size_t k = 0; k < params.size(); ++k) {
        nn::Param& p = *params[k];
        for (int i = 0; i < p.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + step;
            const double up = eval();
            p.value[i] = saved - step;
            const double down = eval();
            p.value[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_err(analytic[k][i], numeric));
        }
    }
    return worst;
}

/// Central finite-difference check of d(loss)/d(input) for a V x T input.
/// `build` maps the input node to a scalar loss.
inline double fd_check_input(Eigen::MatrixXd input,
                             const std::function<int(nn::Ctx&, int)>& build, double step = 1e-4) {
    Eigen::VectorXd analytic;
    {
        nn::Tape tape;
        nn::Ctx ctx{tape, true};
        const int x = tape.leaf_matrix(input);
        const auto gradof = tape.backward(build(ctx, x));
        analytic = gradof[static_cast<size_t>(x)] >= 0
                       ? tape.val(gradof[static_cast<size_t>(x)])
                       : Eigen::VectorXd::Zero(input.size());
    }
    auto eval = [&](const Eigen::MatrixXd& m) {
        nn::Tape tape;
        nn::Ctx ctx{tape, false};
        const int x = tape.constant_matrix(m);
        return tape.scalar_val(build(ctx, x));
    };
    double worst = 0.0;
    int flat = 0;
    for (Eigen::Index r = 0; r < input.rows(); ++r)
        for (Eigen::Index c = 0; c < input.cols(); ++c, ++flat) {
            const double saved = input(r, c);
            input(r, c) = saved + step;
            const double up = eval(input);
            input(r, c) = saved - step;
            const double down = eval(input);
            input(r, c) = saved;
            worst = std::max(worst, rel_err(analytic[flat], (up - down) / (2.0 * step)));
        }
    return worst;
}

/// Random matrix with entries in [-1, 1].
inline Eigen::MatrixXd random_matrix(int r, int c, Rng& rng) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = 2.0 * rng.next_double() - 1.0;
    return m;
}

}  // namespace netsimp::testing

#endif  // NETSIMP_TESTS_NN_TESTING_HPP
