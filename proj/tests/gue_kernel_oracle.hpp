#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>

// Exact Var N_(-inf, x](W_n) for GUE from the Hermite kernel: with
// G_jk = int_{-inf}^{x'} phi_j phi_k, the count variance is sum lambda (1 - lambda)
// over the eigenvalues of G. x is at W-scale; x' = x sqrt(n / 2) in the
// coordinates of the orthonormal Hermite functions phi_k.
inline double exactGueCountVariance(std::size_t n, double x) {
    const double upper = x * std::sqrt(static_cast<double>(n) / 2.0);
    const double lower = -std::sqrt(2.0 * static_cast<double>(n)) - 12.0;
    if (upper <= lower) return 0.0;
    constexpr int kPanelPoints = 20;
    const int panels = 40 + static_cast<int>(8.0 * (upper - lower));
    const auto& abscissa = boost::math::quadrature::gauss<double, kPanelPoints>::abscissa();
    const auto& weights = boost::math::quadrature::gauss<double, kPanelPoints>::weights();

    std::vector<double> nodes, w;
    const double width = (upper - lower) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = lower + (p + 0.5) * width;
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                if (abscissa[i] == 0.0 && sign > 0.0) continue;
                nodes.push_back(mid + sign * abscissa[i] * width / 2.0);
                w.push_back(weights[i] * width / 2.0);
            }
        }
    }

    const auto N = static_cast<Eigen::Index>(n);
    const auto M = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd phi(N, M);
    for (Eigen::Index m = 0; m < M; ++m) {
        const double t = nodes[static_cast<std::size_t>(m)];
        const double sw = std::sqrt(w[static_cast<std::size_t>(m)]);
        double prev = std::pow(std::numbers::pi, -0.25) * std::exp(-t * t / 2.0);
        double cur = std::sqrt(2.0) * t * prev;
        phi(0, m) = prev * sw;
        if (N > 1) phi(1, m) = cur * sw;
        for (Eigen::Index k = 2; k < N; ++k) {
            const double kk = static_cast<double>(k);
            const double next = std::sqrt(2.0 / kk) * t * cur - std::sqrt((kk - 1.0) / kk) * prev;
            prev = cur;
            cur = next;
            phi(k, m) = cur * sw;
        }
    }
    const Eigen::MatrixXd G = phi * phi.transpose();
    const Eigen::VectorXd lambda = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues();
    return (lambda.array() * (1.0 - lambda.array())).sum();
}
