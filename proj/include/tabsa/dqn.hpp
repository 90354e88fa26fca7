#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabsa/rng.hpp"

namespace tabsa {

class NonFiniteLoss : public std::runtime_error {
public:
    explicit NonFiniteLoss(const std::string& what) : std::runtime_error(what) {}
};

/// Fully connected network: rectifier on hidden layers, identity output.
/// Weights are stored row-major per layer, weights[l][out * fan_in + in].
struct Mlp {
    std::vector<int> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static Mlp randomized(std::vector<int> layer_sizes, RandomStream& stream);

    int input_size() const { return sizes.front(); }
    int output_size() const { return sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    std::vector<double> forward(const std::vector<double>& x) const;

    /// Forward pass keeping post-activation values per layer for backprop.
    std::vector<std::vector<double>> forward_trace(const std::vector<double>& x) const;

    bool finite() const;
};

std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

/// Fixed-capacity ring with FIFO eviction; uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

    std::vector<const Transition*> sample(std::size_t n, RandomStream& stream) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

struct DqnHyper {
    double learning_rate = 1e-3;
    double gamma = 0.99;
    int batch_size = 64;
    int target_sync_period = 1000; // learning steps between target refreshes
    double eps_start = 1.0;
    double eps_end = 0.05;
    long eps_decay_steps = 50000;
    std::size_t replay_capacity = 10000;
    double grad_clip_norm = 10.0;

    void validate() const;
    double epsilon(long step) const;
};

/// Gradients in the same shapes as the network parameters.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Mean squared TD error of the batch under the current parameters:
/// target = r + gamma * max_a' Q_target(s') * (1 - terminal), loss averaged
/// over the batch against Q(s)[a].
double td_loss(const Mlp& net, const Mlp& target_net,
               const std::vector<const Transition*>& batch, double gamma);

/// Analytic gradient of td_loss with respect to every parameter of `net`.
MlpGradients td_gradients(const Mlp& net, const Mlp& target_net,
                          const std::vector<const Transition*>& batch, double gamma);

/// One SGD step on the TD loss (with global-norm gradient clipping).
/// Returns the pre-update loss; throws NonFiniteLoss if the loss or any
/// parameter stops being finite.
double td_update(Mlp& net, const Mlp& target_net,
                 const std::vector<const Transition*>& batch, const DqnHyper& hyper);

} // namespace tabsa
