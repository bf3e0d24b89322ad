#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rotornav {

enum class Activation { Tanh, Linear };

Eigen::VectorXd apply_activation(const Eigen::VectorXd& z, Activation a);

// Derivative of the activation expressed through its output n (tanh' = 1 - n^2).
Eigen::VectorXd activation_deriv_from_output(const Eigen::VectorXd& n, Activation a);

// One fully connected layer of network neurons, each paired with a memory
// neuron. W acts on the layer input, Q on the memory-neuron outputs r; alpha
// is the per-neuron feedback weight of the memory recurrence
//   r_k = alpha .* n_{k-1} + (1 - alpha) .* r_{k-1}
// which makes the feedforward map stateful.
struct MnnLayer {
    Eigen::MatrixXd W;        // out x in
    Eigen::MatrixXd Q;        // out x out
    Eigen::VectorXd alpha;    // out, each in [0, 1]
    Eigen::VectorXd n_state;  // out, last activation output
    Eigen::VectorXd r_state;  // out, memory-neuron output
    Activation activation = Activation::Tanh;

    Eigen::Index in_dim() const { return W.cols(); }
    Eigen::Index out_dim() const { return W.rows(); }

    static MnnLayer zeros(Eigen::Index out, Eigen::Index in, Activation act);

    // Advance the memory neurons one step from the stored (n, r).
    void step_memory();

    // Affine map of the current step: W x + Q r. Does not touch state.
    Eigen::VectorXd preactivate(const Eigen::VectorXd& x) const;

    // Applies the activation to preactivate(x) and stores it as n_state.
    Eigen::VectorXd activate(const Eigen::VectorXd& x);

    void reset_memory();
    void validate() const;
};

// Network input: previous position (m), normalized rotor speeds in [0,1],
// and unit orientation quaternion (w, x, y, z). Concatenates to 11 values.
struct InputVector {
    Eigen::Vector3d prev_position = Eigen::Vector3d::Zero();
    Eigen::Vector4d rpm_normalized = Eigen::Vector4d::Zero();
    Eigen::Vector4d orientation = Eigen::Vector4d(1, 0, 0, 0);

    static constexpr int kDim = 11;

    Eigen::Matrix<double, 11, 1> to_vector() const;
    void validate() const;
};

// Memory neuron network with a global Lipschitz budget gamma. Forward passes
// mutate the memory state, so one instance must not be shared by concurrent
// callers; copies are independent.
class MnnNetwork {
public:
    MnnNetwork() = default;
    MnnNetwork(std::vector<MnnLayer> layers, double gamma);

    const std::vector<MnnLayer>& layers() const { return layers_; }
    std::vector<MnnLayer>& layers() { return layers_; }
    double gamma() const { return gamma_; }

    Eigen::Index input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
    Eigen::Index output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
    Eigen::Index layer_count() const { return static_cast<Eigen::Index>(layers_.size()); }

    // One time step: advances every layer's memory state, then evaluates the
    // layer stack. Throws DimensionError if p does not match input_dim().
    Eigen::VectorXd forward(const Eigen::VectorXd& p);
    Eigen::Vector3d forward(const InputVector& p);

    void reset_memory();
    void validate() const;

private:
    std::vector<MnnLayer> layers_;
    double gamma_ = 1.0;
};

}  // namespace rotornav
