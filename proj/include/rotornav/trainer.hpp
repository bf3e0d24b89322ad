#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "rotornav/flightlog.hpp"
#include "rotornav/mnn.hpp"

namespace rotornav {

enum class AlphaMode { Fixed, Learned };
enum class RenormEvery { Sample, Epoch };

struct TrainConfig {
    double eta = 1e-3;     // learning rate
    double gamma = 1.0;    // Lipschitz budget
    int epochs = 50;
    AlphaMode alpha_mode = AlphaMode::Fixed;
    double alpha_value = 0.5;   // Fixed mode
    double eta_alpha = 1e-3;    // Learned mode
    std::uint64_t seed = 0;     // weight-init seed (recorded; init happens in init_weights)
    RenormEvery renorm_every = RenormEvery::Sample;
    bool spectral_norm_enabled = true;

    void validate() const;
};

struct TrainReport {
    std::vector<double> per_epoch_loss;  // mean ||e||^2 per epoch, m^2
    double final_rmse_train = 0.0;       // m
    double wall_time_s = 0.0;
    bool unconstrained = false;          // spectral normalization was disabled
};

// Called after every per-sample weight update; used for constraint audits.
struct TrainHooks {
    std::function<void(const MnnNetwork& net, int epoch, std::size_t sample)> after_update;
};

// Per-layer gradients of the single-step loss 0.5*||f(p) - y||^2 with the
// memory recurrence truncated at the current step.
struct LayerGrads {
    Eigen::MatrixXd dW;
    Eigen::MatrixXd dQ;
    Eigen::VectorXd dAlpha;
};

struct GradResult {
    double loss = 0.0;  // 0.5*||e||^2
    Eigen::Vector3d error = Eigen::Vector3d::Zero();
    std::vector<LayerGrads> layers;
};

// Gradients for one sample starting from the network's current memory state.
// The caller's network is not modified.
GradResult loss_gradients(const MnnNetwork& net, const Eigen::VectorXd& input,
                          const Eigen::VectorXd& target);

// Online training in temporal order: one forward/backward/update per sample,
// memory reset at every epoch start and segment boundary. With spectral
// normalization enabled, each update ends by projecting W and Q back inside
// the per-layer spectral-norm budget gamma^(1/L).
TrainReport train(MnnNetwork& net, const std::vector<Sequence>& data, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

// RMSE (m) of one-step predictions over all samples; no weight mutation.
double evaluate(const MnnNetwork& net, const std::vector<Sequence>& data);

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], alpha = 0.5, followed
// by exact spectral normalization. dims = {input, hidden..., output}.
MnnNetwork init_weights(const std::vector<int>& dims, double gamma, std::uint64_t seed);

}  // namespace rotornav
