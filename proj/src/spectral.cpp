#include "rotornav/spectral.hpp"

#include <cmath>

#include "rotornav/errors.hpp"
#include "rotornav/rng.hpp"

namespace rotornav {

namespace {

Eigen::VectorXd seed_vector(Eigen::Index n) {
    // Deterministic non-degenerate start vector.
    Rng rng(0x5EEDu + static_cast<std::uint64_t>(n));
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    const double norm = v.norm();
    if (norm == 0.0) v.setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    else v /= norm;
    return v;
}

}  // namespace

double spectral_norm_warm(const Eigen::MatrixXd& m, Eigen::VectorXd& v,
                          const SpectralNormOptions& opts) {
    if (!m.allFinite()) throw NumericalError("spectral_norm: matrix has non-finite entries");
    if (m.size() == 0) return 0.0;

    if (v.size() != m.cols() || !v.allFinite() || v.norm() < 0.5) v = seed_vector(m.cols());

    double sigma = 0.0;
    double prev = -1.0;
    Eigen::VectorXd u(m.rows());
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        u.noalias() = m * v;
        sigma = u.norm();
        if (sigma < kDeadWeightThreshold) {
            // Either a (near-)zero matrix or v landed in the null space;
            // reseed once, then report zero.
            if (iter == 0) {
                v = seed_vector(m.cols());
                u.noalias() = m * v;
                sigma = u.norm();
                if (sigma < kDeadWeightThreshold) return 0.0;
            } else {
                return 0.0;
            }
        }
        v.noalias() = m.transpose() * u;
        const double vn = v.norm();
        if (vn == 0.0) return 0.0;
        v /= vn;
        if (prev >= 0.0 && std::abs(sigma - prev) <= opts.tol * sigma) break;
        prev = sigma;
    }
    return sigma;
}

double spectral_norm(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v;
    return spectral_norm_warm(m, v);
}

void normalize_spectral(MnnNetwork& net) {
    const double per_layer = std::pow(net.gamma(), 1.0 / static_cast<double>(net.layer_count()));
    for (MnnLayer& layer : net.layers()) {
        const double rho_w = spectral_norm(layer.W);
        if (rho_w >= kDeadWeightThreshold) layer.W *= per_layer / rho_w;
        const double rho_q = spectral_norm(layer.Q);
        if (rho_q >= kDeadWeightThreshold) layer.Q *= per_layer / rho_q;
    }
}

}  // namespace rotornav
