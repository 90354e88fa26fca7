#include "tabsa/dqn.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace tabsa {

Mlp Mlp::randomized(std::vector<int> layer_sizes, RandomStream& stream) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
    Mlp net;
    net.sizes = std::move(layer_sizes);
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        int fan_in = net.sizes[l];
        int fan_out = net.sizes[l + 1];
        double scale = std::sqrt(2.0 / fan_in);
        std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& v : w) v = stream.gaussian() * scale;
        net.weights.push_back(std::move(w));
        // Small random biases keep pre-activations off the rectifier kink,
        // which would otherwise sit exactly at zero for dead inputs.
        std::vector<double> b(static_cast<std::size_t>(fan_out));
        for (double& v : b) v = stream.gaussian() * 0.01;
        net.biases.push_back(std::move(b));
    }
    return net;
}

std::vector<double> Mlp::forward(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != input_size()) {
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    }
    std::vector<double> cur = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        int fan_in = sizes[l];
        int fan_out = sizes[l + 1];
        std::vector<double> next(static_cast<std::size_t>(fan_out));
        for (int o = 0; o < fan_out; ++o) {
            double sum = biases[l][static_cast<std::size_t>(o)];
            const double* row = &weights[l][static_cast<std::size_t>(o) * fan_in];
            for (int i = 0; i < fan_in; ++i) sum += row[i] * cur[static_cast<std::size_t>(i)];
            bool hidden = l + 1 < weights.size();
            next[static_cast<std::size_t>(o)] = hidden ? std::max(0.0, sum) : sum;
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<std::vector<double>> Mlp::forward_trace(const std::vector<double>& x) const {
    std::vector<std::vector<double>> acts;
    acts.push_back(x);
    for (std::size_t l = 0; l < weights.size(); ++l) {
        int fan_in = sizes[l];
        int fan_out = sizes[l + 1];
        std::vector<double> next(static_cast<std::size_t>(fan_out));
        const std::vector<double>& cur = acts.back();
        for (int o = 0; o < fan_out; ++o) {
            double sum = biases[l][static_cast<std::size_t>(o)];
            const double* row = &weights[l][static_cast<std::size_t>(o) * fan_in];
            for (int i = 0; i < fan_in; ++i) sum += row[i] * cur[static_cast<std::size_t>(i)];
            bool hidden = l + 1 < weights.size();
            next[static_cast<std::size_t>(o)] = hidden ? std::max(0.0, sum) : sum;
        }
        acts.push_back(std::move(next));
    }
    return acts;
}

bool Mlp::finite() const {
    for (const auto& layer : weights) {
        for (double v : layer) {
            if (!std::isfinite(v)) return false;
        }
    }
    for (const auto& layer : biases) {
        for (double v : layer) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

std::string mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["format"] = "tabsa-mlp-v1";
    j["sizes"] = net.sizes;
    j["weights"] = net.weights;
    j["biases"] = net.biases;
    return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "tabsa-mlp-v1") {
        throw std::invalid_argument("unknown network file format");
    }
    Mlp net;
    net.sizes = j.at("sizes").get<std::vector<int>>();
    net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    return net;
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % std::max<std::size_t>(capacity_, 1);
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, RandomStream& stream) const {
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(&items_[stream.uniform_index(items_.size())]);
    }
    return out;
}

void DqnHyper::validate() const {
    if (learning_rate <= 0 || batch_size <= 0 || target_sync_period <= 0 ||
        eps_decay_steps <= 0 || replay_capacity == 0) {
        throw std::invalid_argument("DqnHyper: all hyperparameters must be positive");
    }
    if (gamma < 0 || gamma > 1) throw std::invalid_argument("DqnHyper: gamma must be in [0,1]");
}

double DqnHyper::epsilon(long step) const {
    double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(eps_decay_steps));
    return eps_start + (eps_end - eps_start) * frac;
}

namespace {

double target_value(const Mlp& target_net, const Transition& t, double gamma) {
    if (t.terminal) return t.reward;
    std::vector<double> q = target_net.forward(t.next_state);
    double best = q[0];
    for (double v : q) best = std::max(best, v);
    return t.reward + gamma * best;
}

} // namespace

double td_loss(const Mlp& net, const Mlp& target_net,
               const std::vector<const Transition*>& batch, double gamma) {
    if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
    double loss = 0.0;
    for (const Transition* t : batch) {
        double y = target_value(target_net, *t, gamma);
        double q = net.forward(t->state)[static_cast<std::size_t>(t->action)];
        double err = q - y;
        loss += err * err;
    }
    return loss / static_cast<double>(batch.size());
}

MlpGradients td_gradients(const Mlp& net, const Mlp& target_net,
                          const std::vector<const Transition*>& batch, double gamma) {
    if (batch.empty()) throw std::invalid_argument("td_gradients: empty batch");
    MlpGradients g;
    g.weights.resize(net.weights.size());
    g.biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights[l].assign(net.weights[l].size(), 0.0);
        g.biases[l].assign(net.biases[l].size(), 0.0);
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const Transition* t : batch) {
        double y = target_value(target_net, *t, gamma);
        auto acts = net.forward_trace(t->state);
        const std::vector<double>& out = acts.back();
        double err = out[static_cast<std::size_t>(t->action)] - y;

        // delta of the output layer: d(loss)/d(pre-activation), identity output
        std::vector<double> delta(out.size(), 0.0);
        delta[static_cast<std::size_t>(t->action)] = 2.0 * err * inv_n;

        for (std::size_t li = net.weights.size(); li-- > 0;) {
            int fan_in = net.sizes[li];
            int fan_out = net.sizes[li + 1];
            const std::vector<double>& input = acts[li];
            for (int o = 0; o < fan_out; ++o) {
                double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                g.biases[li][static_cast<std::size_t>(o)] += d;
                double* grow = &g.weights[li][static_cast<std::size_t>(o) * fan_in];
                for (int i = 0; i < fan_in; ++i) {
                    grow[i] += d * input[static_cast<std::size_t>(i)];
                }
            }
            if (li == 0) break;
            std::vector<double> prev_delta(static_cast<std::size_t>(fan_in), 0.0);
            for (int i = 0; i < fan_in; ++i) {
                // rectifier derivative via the stored post-activation
                if (acts[li][static_cast<std::size_t>(i)] <= 0.0) continue;
                double sum = 0.0;
                for (int o = 0; o < fan_out; ++o) {
                    sum += net.weights[li][static_cast<std::size_t>(o) * fan_in + i] *
                           delta[static_cast<std::size_t>(o)];
                }
                prev_delta[static_cast<std::size_t>(i)] = sum;
            }
            delta = std::move(prev_delta);
        }
    }
    return g;
}

double td_update(Mlp& net, const Mlp& target_net,
                 const std::vector<const Transition*>& batch, const DqnHyper& hyper) {
    double loss = td_loss(net, target_net, batch, hyper.gamma);
    if (!std::isfinite(loss)) {
        throw NonFiniteLoss("TD loss is not finite (batch of " +
                            std::to_string(batch.size()) + ")");
    }
    MlpGradients g = td_gradients(net, target_net, batch, hyper.gamma);

    double sq = 0.0;
    for (const auto& layer : g.weights) {
        for (double v : layer) sq += v * v;
    }
    for (const auto& layer : g.biases) {
        for (double v : layer) sq += v * v;
    }
    double norm = std::sqrt(sq);
    double scale = (hyper.grad_clip_norm > 0 && norm > hyper.grad_clip_norm)
                       ? hyper.grad_clip_norm / norm
                       : 1.0;

    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
            net.weights[l][i] -= hyper.learning_rate * scale * g.weights[l][i];
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            net.biases[l][i] -= hyper.learning_rate * scale * g.biases[l][i];
        }
    }
    if (!net.finite()) throw NonFiniteLoss("network parameters diverged");
    return loss;
}

} // namespace tabsa
