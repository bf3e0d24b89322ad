#pragma once

#include <Eigen/Dense>

#include "rotornav/mnn.hpp"

namespace rotornav {

// Layers whose spectral norm is below this are left unscaled so that
// zero-initialized or collapsed weights never divide to NaN.
inline constexpr double kDeadWeightThreshold = 1e-12;

struct SpectralNormOptions {
    double tol = 1e-9;  // relative change of successive estimates
    int max_iter = 100;
};

// Largest singular value of M by power iteration on M^T M. Throws
// NumericalError on non-finite entries. `v` carries the current right
// singular vector estimate between calls; pass an empty vector to cold-start.
double spectral_norm_warm(const Eigen::MatrixXd& m, Eigen::VectorXd& v,
                          const SpectralNormOptions& opts = {});

double spectral_norm(const Eigen::MatrixXd& m);

// Rescales every non-dead layer so that spectral_norm(W) and
// spectral_norm(Q) both equal gamma^(1/L), giving the whole stack a
// Lipschitz constant of gamma for tanh/linear activations.
void normalize_spectral(MnnNetwork& net);

}  // namespace rotornav
