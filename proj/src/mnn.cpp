#include "rotornav/mnn.hpp"

#include <cmath>

#include "rotornav/errors.hpp"

namespace rotornav {

Eigen::VectorXd apply_activation(const Eigen::VectorXd& z, Activation a) {
    switch (a) {
        case Activation::Tanh:
            return z.array().tanh();
        case Activation::Linear:
            return z;
    }
    throw Error("unknown activation");
}

Eigen::VectorXd activation_deriv_from_output(const Eigen::VectorXd& n, Activation a) {
    switch (a) {
        case Activation::Tanh:
            return (1.0 - n.array().square()).matrix();
        case Activation::Linear:
            return Eigen::VectorXd::Ones(n.size());
    }
    throw Error("unknown activation");
}

MnnLayer MnnLayer::zeros(Eigen::Index out, Eigen::Index in, Activation act) {
    MnnLayer l;
    l.W = Eigen::MatrixXd::Zero(out, in);
    l.Q = Eigen::MatrixXd::Zero(out, out);
    l.alpha = Eigen::VectorXd::Constant(out, 0.5);
    l.n_state = Eigen::VectorXd::Zero(out);
    l.r_state = Eigen::VectorXd::Zero(out);
    l.activation = act;
    return l;
}

void MnnLayer::step_memory() {
    r_state = alpha.cwiseProduct(n_state) +
              (Eigen::VectorXd::Ones(alpha.size()) - alpha).cwiseProduct(r_state);
}

Eigen::VectorXd MnnLayer::preactivate(const Eigen::VectorXd& x) const {
    return W * x + Q * r_state;
}

Eigen::VectorXd MnnLayer::activate(const Eigen::VectorXd& x) {
    n_state = apply_activation(preactivate(x), activation);
    return n_state;
}

void MnnLayer::reset_memory() {
    n_state.setZero();
    r_state.setZero();
}

void MnnLayer::validate() const {
    const Eigen::Index out = out_dim();
    if (Q.rows() != out || Q.cols() != out) {
        throw DimensionError(out, Q.rows(), "layer Q must be out_dim x out_dim");
    }
    if (alpha.size() != out) throw DimensionError(out, alpha.size(), "layer alpha length");
    if (n_state.size() != out) throw DimensionError(out, n_state.size(), "layer n_state length");
    if (r_state.size() != out) throw DimensionError(out, r_state.size(), "layer r_state length");
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0)) {
            throw DomainError("layer alpha component outside [0, 1]");
        }
    }
}

Eigen::Matrix<double, 11, 1> InputVector::to_vector() const {
    Eigen::Matrix<double, 11, 1> v;
    v << prev_position, rpm_normalized, orientation;
    return v;
}

void InputVector::validate() const {
    if (!to_vector().allFinite()) throw DomainError("input vector has non-finite component");
    for (int i = 0; i < 4; ++i) {
        if (rpm_normalized[i] < 0.0 || rpm_normalized[i] > 1.0) {
            throw DomainError("normalized rotor speed outside [0, 1]");
        }
    }
    if (std::abs(orientation.norm() - 1.0) > 1e-6) {
        throw DomainError("orientation quaternion not unit norm");
    }
}

MnnNetwork::MnnNetwork(std::vector<MnnLayer> layers, double gamma)
    : layers_(std::move(layers)), gamma_(gamma) {
    validate();
}

Eigen::VectorXd MnnNetwork::forward(const Eigen::VectorXd& p) {
    if (p.size() != input_dim()) {
        throw DimensionError(input_dim(), p.size(), "network input");
    }
    Eigen::VectorXd x = p;
    for (MnnLayer& layer : layers_) {
        layer.step_memory();
        x = layer.activate(x);
    }
    return x;
}

Eigen::Vector3d MnnNetwork::forward(const InputVector& p) {
    if (output_dim() != 3) {
        throw DimensionError(3, output_dim(), "network output for position prediction");
    }
    return forward(Eigen::VectorXd(p.to_vector()));
}

void MnnNetwork::reset_memory() {
    for (MnnLayer& layer : layers_) layer.reset_memory();
}

void MnnNetwork::validate() const {
    if (!(gamma_ > 0.0)) throw DomainError("gamma must be positive");
    if (layers_.empty()) throw DomainError("network must have at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].validate();
        if (i + 1 < layers_.size() && layers_[i + 1].in_dim() != layers_[i].out_dim()) {
            throw DimensionError(layers_[i].out_dim(), layers_[i + 1].in_dim(),
                                 "layer dimension chain");
        }
        const bool last = (i + 1 == layers_.size());
        if (last && layers_[i].activation != Activation::Linear) {
            throw DomainError("final layer activation must be linear");
        }
        if (!last && layers_[i].activation != Activation::Tanh) {
            throw DomainError("hidden layer activation must be tanh");
        }
    }
}

}  // namespace rotornav
