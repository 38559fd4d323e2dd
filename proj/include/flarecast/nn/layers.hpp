#pragma once

#include "flarecast/nn/activation.hpp"
#include "flarecast/nn/tensor.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace flarecast::nn {

/// y = act(x W + b). Applied to a (batch x in) matrix, or time-distributed
/// over a Sequence with shared weights.
class DenseLayer {
public:
    DenseLayer() = default;
    DenseLayer(std::string name, int in, int out, Activation act);

    int input_size() const { return in_; }
    int output_size() const { return out_; }
    Activation activation() const { return act_; }

    /// Uniform in +-1/sqrt(in) for weights; zero bias.
    void initialize(std::mt19937_64& rng);

    Matrix forward(const Matrix& x);
    Matrix infer(const Matrix& x) const;
    /// Accumulates parameter gradients and returns d loss / d x. Throws
    /// StateError if no forward pass is cached.
    Matrix backward(const Matrix& dy);

    Sequence forward(const Sequence& x);
    Sequence infer(const Sequence& x) const;
    Sequence backward(const Sequence& dy);

    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }
    std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

private:
    Matrix pre_activation(const Matrix& x) const;

    int in_ = 0;
    int out_ = 0;
    Activation act_ = Activation::identity;
    Parameter weight_; // in x out
    Parameter bias_;   // 1 x out

    struct Cache {
        Matrix x;
        Matrix z;
        Matrix y;
        std::size_t steps = 0; // > 0 when the cache holds a stacked sequence
    };
    std::optional<Cache> cache_;
};

/// Elementwise activation over every step of a sequence.
class SequenceActivation {
public:
    explicit SequenceActivation(Activation act = Activation::identity) : act_(act) {}

    Activation activation() const { return act_; }
    Sequence forward(const Sequence& x);
    Sequence infer(const Sequence& x) const;
    Sequence backward(const Sequence& dy);

private:
    Activation act_;
    std::optional<std::pair<Sequence, Sequence>> cache_;
};

/// Standard LSTM layer: gates i, f, o (sigmoid) and candidate g (tanh);
/// c_t = f*c_{t-1} + i*g, h_t = o*tanh(c_t), zero initial state.
/// Gate columns are laid out [i | f | g | o].
class LstmLayer {
public:
    LstmLayer() = default;
    LstmLayer(std::string name, int input_size, int hidden_size);

    int input_size() const { return in_; }
    int hidden_size() const { return hidden_; }

    /// Weights uniform in +-1/sqrt(fan-in); bias zero except the forget gate (1).
    void initialize(std::mt19937_64& rng);

    /// Hidden state for every step. Throws DomainError on feature-width mismatch.
    Sequence forward(const Sequence& x);
    Sequence infer(const Sequence& x) const;
    /// dh holds d loss / d h_t for each step; returns d loss / d x_t.
    Sequence backward(const Sequence& dh);

    /// Single sequence (w x d tensor) to hidden states (w x h).
    Tensor forward_single(const Tensor& sequence) const;

    Parameter& input_weight() { return w_; }
    Parameter& recurrent_weight() { return u_; }
    Parameter& bias() { return b_; }
    std::vector<Parameter*> parameters() { return {&w_, &u_, &b_}; }

private:
    struct Cache {
        Matrix x_stacked;            // (T*B) x in
        std::vector<Matrix> gates;   // per step, B x 4h, post-activation
        std::vector<Matrix> cells;   // T + 1 entries, cells[0] = 0
        std::vector<Matrix> hiddens; // T + 1 entries, hiddens[0] = 0
        std::vector<Matrix> cell_tanh;
        std::size_t batch = 0;
    };
    Sequence run(const Sequence& x, Cache* cache) const;

    int in_ = 0;
    int hidden_ = 0;
    Parameter w_; // in x 4h
    Parameter u_; // h x 4h
    Parameter b_; // 1 x 4h
    std::optional<Cache> cache_;
};

/// Stacks a sequence vertically into a (T*B) x cols matrix.
Matrix stack(const Sequence& seq);
Sequence unstack(const Matrix& stacked, std::size_t steps);

} // namespace flarecast::nn
