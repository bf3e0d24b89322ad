#include "rotornav/trainer.hpp"

#include <chrono>
#include <cmath>

#include "rotornav/errors.hpp"
#include "rotornav/rng.hpp"
#include "rotornav/spectral.hpp"

namespace rotornav {

namespace {

struct ForwardCache {
    std::vector<Eigen::VectorXd> inputs;  // x fed to each layer
    std::vector<Eigen::VectorXd> n_prev;  // pre-step memory, for the alpha gradient
    std::vector<Eigen::VectorXd> r_prev;
    Eigen::VectorXd output;
};

// Forward pass that advances memory state and records everything the
// truncated backward pass needs.
void forward_cached(MnnNetwork& net, const Eigen::VectorXd& input, ForwardCache& cache) {
    const std::size_t count = net.layers().size();
    cache.inputs.resize(count);
    cache.n_prev.resize(count);
    cache.r_prev.resize(count);
    Eigen::VectorXd x = input;
    for (std::size_t l = 0; l < count; ++l) {
        MnnLayer& layer = net.layers()[l];
        cache.inputs[l] = x;
        cache.n_prev[l] = layer.n_state;
        cache.r_prev[l] = layer.r_state;
        layer.step_memory();
        x = layer.activate(x);
    }
    cache.output = x;
}

// Backpropagation through the layer stack for the loss 0.5*||e||^2. The
// memory states r_k act as per-step biases: gradients do not flow into
// their dependence on earlier steps.
void backprop(const MnnNetwork& net, const ForwardCache& cache, const Eigen::VectorXd& error,
              std::vector<LayerGrads>& grads) {
    const std::size_t count = net.layers().size();
    grads.resize(count);
    Eigen::VectorXd delta = error;  // d(loss)/d(z) for the linear output layer
    for (std::size_t li = count; li-- > 0;) {
        const MnnLayer& layer = net.layers()[li];
        if (layer.activation != Activation::Linear) {
            delta = delta.cwiseProduct(
                activation_deriv_from_output(layer.n_state, layer.activation));
        }
        grads[li].dW.noalias() = delta * cache.inputs[li].transpose();
        grads[li].dQ.noalias() = delta * layer.r_state.transpose();
        grads[li].dAlpha = (layer.Q.transpose() * delta)
                               .cwiseProduct(cache.n_prev[li] - cache.r_prev[li]);
        if (li > 0) delta = Eigen::VectorXd(layer.W.transpose() * delta);
    }
}

// Per-layer warm-started power-iteration vectors reused across updates.
struct RenormState {
    std::vector<Eigen::VectorXd> vw, vq;
    SpectralNormOptions opts{1e-12, 200};
};

// Projects W and Q back inside the constraint set: scales down by
// gamma^(1/L)/rho only when rho exceeds the budget.
void project_spectral(MnnNetwork& net, double per_layer_budget, RenormState& state) {
    std::vector<MnnLayer>& layers = net.layers();
    state.vw.resize(layers.size());
    state.vq.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const double rho_w = spectral_norm_warm(layers[l].W, state.vw[l], state.opts);
        if (rho_w > per_layer_budget && rho_w >= kDeadWeightThreshold) {
            layers[l].W *= per_layer_budget / rho_w;
        }
        const double rho_q = spectral_norm_warm(layers[l].Q, state.vq[l], state.opts);
        if (rho_q > per_layer_budget && rho_q >= kDeadWeightThreshold) {
            layers[l].Q *= per_layer_budget / rho_q;
        }
    }
}

bool weights_finite(const MnnNetwork& net) {
    for (const MnnLayer& layer : net.layers()) {
        if (!layer.W.allFinite() || !layer.Q.allFinite() || !layer.alpha.allFinite()) {
            return false;
        }
    }
    return true;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    if (epochs < 1) throw DomainError("epochs must be at least 1");
    if (alpha_mode == AlphaMode::Fixed && (alpha_value < 0.0 || alpha_value > 1.0)) {
        throw DomainError("fixed alpha must lie in [0, 1]");
    }
    if (alpha_mode == AlphaMode::Learned && !(eta_alpha > 0.0)) {
        throw DomainError("eta_alpha must be positive");
    }
}

GradResult loss_gradients(const MnnNetwork& net, const Eigen::VectorXd& input,
                          const Eigen::VectorXd& target) {
    MnnNetwork scratch = net;
    ForwardCache cache;
    forward_cached(scratch, input, cache);
    GradResult result;
    const Eigen::VectorXd e = cache.output - target;
    result.loss = 0.5 * e.squaredNorm();
    if (e.size() == 3) result.error = e;
    backprop(scratch, cache, e, result.layers);
    return result;
}

TrainReport train(MnnNetwork& net, const std::vector<Sequence>& data, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
    cfg.validate();
    net.validate();
    if (data.empty()) throw DomainError("train: dataset is empty");

    const auto t_start = std::chrono::steady_clock::now();
    const double per_layer_budget =
        std::pow(cfg.gamma, 1.0 / static_cast<double>(net.layer_count()));

    if (cfg.alpha_mode == AlphaMode::Fixed) {
        for (MnnLayer& layer : net.layers()) layer.alpha.setConstant(cfg.alpha_value);
    }

    RenormState renorm;
    ForwardCache cache;
    std::vector<LayerGrads> grads;

    TrainReport report;
    report.unconstrained = !cfg.spectral_norm_enabled;
    report.per_epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t sample_count = 0;
        for (const Sequence& seq : data) {
            net.reset_memory();
            for (const Sample& sample : seq.samples) {
                forward_cached(net, sample.input.to_vector(), cache);
                const Eigen::VectorXd e = cache.output - sample.target;
                const double sq = e.squaredNorm();
                if (!std::isfinite(sq)) throw TrainDivergedError(epoch + 1, sample_count);
                loss_sum += sq;

                backprop(net, cache, e, grads);
                for (std::size_t l = 0; l < net.layers().size(); ++l) {
                    MnnLayer& layer = net.layers()[l];
                    layer.W.noalias() -= cfg.eta * grads[l].dW;
                    layer.Q.noalias() -= cfg.eta * grads[l].dQ;
                    if (cfg.alpha_mode == AlphaMode::Learned) {
                        layer.alpha -= cfg.eta_alpha * grads[l].dAlpha;
                        layer.alpha = layer.alpha.cwiseMax(0.0).cwiseMin(1.0);
                    }
                }
                if (cfg.spectral_norm_enabled && cfg.renorm_every == RenormEvery::Sample) {
                    project_spectral(net, per_layer_budget, renorm);
                }
                if (!weights_finite(net)) throw TrainDivergedError(epoch + 1, sample_count);
                if (hooks.after_update) hooks.after_update(net, epoch + 1, sample_count);
                ++sample_count;
            }
        }
        if (cfg.spectral_norm_enabled && cfg.renorm_every == RenormEvery::Epoch) {
            project_spectral(net, per_layer_budget, renorm);
        }
        if (sample_count == 0) throw DomainError("train: dataset has no samples");
        report.per_epoch_loss.push_back(loss_sum / static_cast<double>(sample_count));
    }

    report.final_rmse_train = evaluate(net, data);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

double evaluate(const MnnNetwork& net, const std::vector<Sequence>& data) {
    if (data.empty()) throw DomainError("evaluate: dataset is empty");
    MnnNetwork scratch = net;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const Sequence& seq : data) {
        scratch.reset_memory();
        for (const Sample& sample : seq.samples) {
            const Eigen::Vector3d out = scratch.forward(sample.input);
            sum_sq += (out - sample.target).squaredNorm();
            ++count;
        }
    }
    if (count == 0) throw DomainError("evaluate: dataset has no samples");
    return std::sqrt(sum_sq / static_cast<double>(count));
}

MnnNetwork init_weights(const std::vector<int>& dims, double gamma, std::uint64_t seed) {
    if (dims.size() < 2) throw DomainError("init_weights: need input and output dims");
    Rng rng(seed);
    std::vector<MnnLayer> layers;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const int in = dims[i], out = dims[i + 1];
        if (in < 1 || out < 1) throw DomainError("init_weights: dims must be positive");
        const bool last = (i + 2 == dims.size());
        MnnLayer layer = MnnLayer::zeros(out, in, last ? Activation::Linear : Activation::Tanh);
        const double bw = 1.0 / std::sqrt(static_cast<double>(in));
        for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
                layer.W(r, c) = rng.uniform(-bw, bw);
            }
        }
        const double bq = 1.0 / std::sqrt(static_cast<double>(out));
        for (Eigen::Index r = 0; r < layer.Q.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.Q.cols(); ++c) {
                layer.Q(r, c) = rng.uniform(-bq, bq);
            }
        }
        layers.push_back(std::move(layer));
    }
    MnnNetwork net(std::move(layers), gamma);
    normalize_spectral(net);
    return net;
}

}  // namespace rotornav
