#include "flarecast/nn/layers.hpp"

#include "flarecast/errors.hpp"

#include <cmath>

namespace flarecast::nn {

Matrix stack(const Sequence& seq) {
    if (seq.empty()) {
        return Matrix();
    }
    const auto b = seq.front().rows();
    Matrix out(b * static_cast<Eigen::Index>(seq.size()), seq.front().cols());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        out.middleRows(static_cast<Eigen::Index>(t) * b, b) = seq[t];
    }
    return out;
}

Sequence unstack(const Matrix& stacked, std::size_t steps) {
    Sequence out(steps);
    if (steps == 0) {
        return out;
    }
    const auto b = stacked.rows() / static_cast<Eigen::Index>(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        out[t] = stacked.middleRows(static_cast<Eigen::Index>(t) * b, b);
    }
    return out;
}

namespace {

void fill_uniform(Tensor& t, double limit, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : t.values()) {
        v = dist(rng);
    }
}

} // namespace

// ---------------------------------------------------------------- DenseLayer

DenseLayer::DenseLayer(std::string name, int in, int out, Activation act)
    : in_(in), out_(out), act_(act),
      weight_(name + ".W", {static_cast<std::size_t>(in), static_cast<std::size_t>(out)}),
      bias_(name + ".b", {static_cast<std::size_t>(out)}) {
    if (in < 1 || out < 1) {
        throw ConfigError("dense layer sizes must be positive");
    }
}

void DenseLayer::initialize(std::mt19937_64& rng) {
    fill_uniform(weight_.value, 1.0 / std::sqrt(static_cast<double>(in_)), rng);
    bias_.value.fill(0.0);
}

Matrix DenseLayer::pre_activation(const Matrix& x) const {
    if (x.cols() != in_) {
        throw DomainError("dense layer " + weight_.name + " expects " + std::to_string(in_) + " inputs, got " +
                          std::to_string(x.cols()));
    }
    Matrix z = x * weight_.value.matrix();
    z.rowwise() += bias_.value.matrix().row(0);
    return z;
}

Matrix DenseLayer::forward(const Matrix& x) {
    Cache c;
    c.x = x;
    c.z = pre_activation(x);
    c.y = activate(act_, c.z);
    Matrix y = c.y;
    cache_ = std::move(c);
    return y;
}

Matrix DenseLayer::infer(const Matrix& x) const {
    return activate(act_, pre_activation(x));
}

Matrix DenseLayer::backward(const Matrix& dy) {
    if (!cache_) {
        throw StateError("backward called on dense layer " + weight_.name + " without a cached forward pass");
    }
    const Matrix dz = (dy.array() * activate_derivative(act_, cache_->z, cache_->y).array()).matrix();
    weight_.grad.matrix().noalias() += cache_->x.transpose() * dz;
    bias_.grad.matrix().row(0) += dz.colwise().sum();
    return dz * weight_.value.matrix().transpose();
}

Sequence DenseLayer::forward(const Sequence& x) {
    const Matrix y = forward(stack(x));
    cache_->steps = x.size();
    return unstack(y, x.size());
}

Sequence DenseLayer::infer(const Sequence& x) const {
    return unstack(infer(stack(x)), x.size());
}

Sequence DenseLayer::backward(const Sequence& dy) {
    if (!cache_ || cache_->steps != dy.size()) {
        throw StateError("backward called on dense layer " + weight_.name + " without a cached sequence pass");
    }
    return unstack(backward(stack(dy)), dy.size());
}

// -------------------------------------------------------- SequenceActivation

Sequence SequenceActivation::forward(const Sequence& x) {
    Sequence y = infer(x);
    cache_ = std::make_pair(x, y);
    return y;
}

Sequence SequenceActivation::infer(const Sequence& x) const {
    Sequence y;
    y.reserve(x.size());
    for (const auto& m : x) {
        y.push_back(activate(act_, m));
    }
    return y;
}

Sequence SequenceActivation::backward(const Sequence& dy) {
    if (!cache_ || cache_->first.size() != dy.size()) {
        throw StateError("backward called on activation without a cached forward pass");
    }
    Sequence dx;
    dx.reserve(dy.size());
    for (std::size_t t = 0; t < dy.size(); ++t) {
        dx.push_back((dy[t].array() *
                      activate_derivative(act_, cache_->first[t], cache_->second[t]).array())
                         .matrix());
    }
    return dx;
}

// ----------------------------------------------------------------- LstmLayer

LstmLayer::LstmLayer(std::string name, int input_size, int hidden_size)
    : in_(input_size), hidden_(hidden_size),
      w_(name + ".W", {static_cast<std::size_t>(input_size), static_cast<std::size_t>(4 * hidden_size)}),
      u_(name + ".U", {static_cast<std::size_t>(hidden_size), static_cast<std::size_t>(4 * hidden_size)}),
      b_(name + ".b", {static_cast<std::size_t>(4 * hidden_size)}) {
    if (input_size < 1 || hidden_size < 1) {
        throw ConfigError("LSTM layer sizes must be positive");
    }
}

void LstmLayer::initialize(std::mt19937_64& rng) {
    fill_uniform(w_.value, 1.0 / std::sqrt(static_cast<double>(in_)), rng);
    fill_uniform(u_.value, 1.0 / std::sqrt(static_cast<double>(hidden_)), rng);
    b_.value.fill(0.0);
    for (int j = hidden_; j < 2 * hidden_; ++j) {
        b_.value[static_cast<std::size_t>(j)] = 1.0;
    }
}

Sequence LstmLayer::run(const Sequence& x, Cache* cache) const {
    const std::size_t steps = x.size();
    if (steps == 0) {
        return {};
    }
    const Eigen::Index batch = x.front().rows();
    const Eigen::Index h = hidden_;
    for (const auto& m : x) {
        if (m.cols() != in_ || m.rows() != batch) {
            throw DomainError("LSTM layer " + w_.name + " expects " + std::to_string(in_) +
                              " features per step, got " + std::to_string(m.cols()));
        }
    }

    Matrix x_stacked = stack(x);
    Matrix xw = x_stacked * w_.value.matrix();
    xw.rowwise() += b_.value.matrix().row(0);

    const auto u = u_.value.matrix();
    Matrix h_prev = Matrix::Zero(batch, h);
    Matrix c_prev = Matrix::Zero(batch, h);
    if (cache) {
        cache->batch = static_cast<std::size_t>(batch);
        cache->gates.clear();
        cache->cells.assign(1, c_prev);
        cache->hiddens.assign(1, h_prev);
        cache->cell_tanh.clear();
    }

    Sequence out;
    out.reserve(steps);
    Matrix z(batch, 4 * h);
    for (std::size_t t = 0; t < steps; ++t) {
        z.noalias() = xw.middleRows(static_cast<Eigen::Index>(t) * batch, batch);
        z.noalias() += h_prev * u;
        auto zi = z.leftCols(h);
        auto zf = z.middleCols(h, h);
        auto zg = z.middleCols(2 * h, h);
        auto zo = z.rightCols(h);
        zi = zi.unaryExpr([](double v) { return sigmoid(v); });
        zf = zf.unaryExpr([](double v) { return sigmoid(v); });
        zg = zg.array().tanh().matrix();
        zo = zo.unaryExpr([](double v) { return sigmoid(v); });

        Matrix c = (zf.array() * c_prev.array() + zi.array() * zg.array()).matrix();
        Matrix tc = c.array().tanh().matrix();
        Matrix hs = (zo.array() * tc.array()).matrix();

        if (cache) {
            cache->gates.push_back(z);
            cache->cells.push_back(c);
            cache->hiddens.push_back(hs);
            cache->cell_tanh.push_back(std::move(tc));
        }
        out.push_back(hs);
        h_prev = std::move(hs);
        c_prev = std::move(c);
    }
    if (cache) {
        cache->x_stacked = std::move(x_stacked);
    }
    return out;
}

Sequence LstmLayer::forward(const Sequence& x) {
    Cache c;
    Sequence out = run(x, &c);
    cache_ = std::move(c);
    return out;
}

Sequence LstmLayer::infer(const Sequence& x) const {
    return run(x, nullptr);
}

Sequence LstmLayer::backward(const Sequence& dh) {
    if (!cache_ || cache_->gates.size() != dh.size()) {
        throw StateError("backward called on LSTM layer " + w_.name + " without a cached forward pass");
    }
    const std::size_t steps = dh.size();
    const auto batch = static_cast<Eigen::Index>(cache_->batch);
    const Eigen::Index h = hidden_;
    const auto u = u_.value.matrix();

    Matrix dz_all(batch * static_cast<Eigen::Index>(steps), 4 * h);
    Matrix dh_next = Matrix::Zero(batch, h);
    Matrix dc_next = Matrix::Zero(batch, h);
    auto du = u_.grad.matrix();

    for (std::size_t s = steps; s-- > 0;) {
        const Matrix& gates = cache_->gates[s];
        const auto i = gates.leftCols(h).array();
        const auto f = gates.middleCols(h, h).array();
        const auto g = gates.middleCols(2 * h, h).array();
        const auto o = gates.rightCols(h).array();
        const auto tc = cache_->cell_tanh[s].array();
        const auto c_prev = cache_->cells[s].array();

        const Matrix dhs = dh[s] + dh_next;
        const auto dha = dhs.array();
        const Matrix dc = (dha * o * (1.0 - tc.square()) + dc_next.array()).matrix();
        const auto dca = dc.array();

        auto dz = dz_all.middleRows(static_cast<Eigen::Index>(s) * batch, batch);
        dz.leftCols(h) = (dca * g * i * (1.0 - i)).matrix();
        dz.middleCols(h, h) = (dca * c_prev * f * (1.0 - f)).matrix();
        dz.middleCols(2 * h, h) = (dca * i * (1.0 - g.square())).matrix();
        dz.rightCols(h) = (dha * tc * o * (1.0 - o)).matrix();

        dc_next = (dca * f).matrix();
        du.noalias() += cache_->hiddens[s].transpose() * dz;
        dh_next.noalias() = dz * u.transpose();
    }

    w_.grad.matrix().noalias() += cache_->x_stacked.transpose() * dz_all;
    b_.grad.matrix().row(0) += dz_all.colwise().sum();
    return unstack(dz_all * w_.value.matrix().transpose(), steps);
}

Tensor LstmLayer::forward_single(const Tensor& sequence) const {
    if (sequence.shape().size() != 2) {
        throw DomainError("LSTM forward_single expects a 2-D (w x d) tensor");
    }
    const auto steps = sequence.rows();
    Sequence x(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        x[t] = sequence.matrix().row(static_cast<Eigen::Index>(t));
    }
    const Sequence hs = infer(x);
    Tensor out({steps, static_cast<std::size_t>(hidden_)});
    for (std::size_t t = 0; t < steps; ++t) {
        out.matrix().row(static_cast<Eigen::Index>(t)) = hs[t].row(0);
    }
    return out;
}

} // namespace flarecast::nn
