#include "flarecast/models.hpp"

#include "flarecast/decomposition.hpp"
#include "flarecast/errors.hpp"
#include "flarecast/nn/loss.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

namespace flarecast::models {

const char* to_string(Architecture a) {
    return a == Architecture::lstm ? "lstm" : "dlstm";
}

void LstmModelConfig::validate() const {
    if (hidden_sizes.empty()) {
        throw ConfigError("LSTM stack needs at least one layer");
    }
    if (hidden_sizes.size() != activations.size()) {
        throw ConfigError("LSTM stack has " + std::to_string(hidden_sizes.size()) + " layers but " +
                          std::to_string(activations.size()) + " activations");
    }
    for (int h : hidden_sizes) {
        if (h < 1) {
            throw ConfigError("LSTM hidden sizes must be positive");
        }
    }
}

void DlstmModelConfig::validate() const {
    if (kernel < 1 || kernel % 2 == 0) {
        throw ConfigError("decomposition kernel must be odd and positive, got " + std::to_string(kernel));
    }
    if (kernel2 < 0 || (kernel2 > 0 && kernel2 % 2 == 0)) {
        throw ConfigError("second decomposition kernel must be 0 or odd, got " + std::to_string(kernel2));
    }
    if (front_width < 1 || hidden < 1 || dense_width < 1) {
        throw ConfigError("DLSTM widths must be positive");
    }
}

void ModelSpec::validate() const {
    if (input_size < 1) {
        throw ConfigError("model input size must be positive");
    }
    if (architecture == Architecture::lstm) {
        lstm.validate();
    } else {
        dlstm.validate();
    }
}

std::string ModelSpec::describe() const {
    std::ostringstream s;
    s << to_string(architecture) << " d=" << input_size;
    if (architecture == Architecture::lstm) {
        s << " hidden=";
        for (std::size_t i = 0; i < lstm.hidden_sizes.size(); ++i) {
            s << (i ? "," : "") << lstm.hidden_sizes[i] << ':' << nn::to_string(lstm.activations[i]);
        }
    } else {
        s << " kernel=" << dlstm.kernel << " kernel2=" << dlstm.kernel2 << " front=" << dlstm.front_width << ':'
          << nn::to_string(dlstm.front_activation) << " hidden=" << dlstm.hidden << " dense=" << dlstm.dense_width
          << ':' << nn::to_string(dlstm.dense_activation);
    }
    return s.str();
}

namespace {

nn::Sequence last_step_gradient(const nn::Matrix& dlast, std::size_t steps) {
    nn::Sequence d(steps, nn::Matrix::Zero(dlast.rows(), dlast.cols()));
    d.back() = dlast;
    return d;
}

void check_batch(const nn::Sequence& batch, int input_size) {
    if (batch.empty()) {
        throw DomainError("model input has no time steps");
    }
    if (batch.front().cols() != input_size) {
        throw DomainError("model expects " + std::to_string(input_size) + " features, got " +
                          std::to_string(batch.front().cols()));
    }
}

} // namespace

// ------------------------------------------------------------ LstmClassifier

LstmClassifier::LstmClassifier(int input_size, const LstmModelConfig& cfg) : input_size_(input_size) {
    cfg.validate();
    int in = input_size;
    for (std::size_t l = 0; l < cfg.hidden_sizes.size(); ++l) {
        layers_.emplace_back("lstm" + std::to_string(l), in, cfg.hidden_sizes[l]);
        activations_.emplace_back(cfg.activations[l]);
        in = cfg.hidden_sizes[l];
    }
    head_ = nn::DenseLayer("head", in, 1, nn::Activation::identity);
}

void LstmClassifier::initialize(std::mt19937_64& rng) {
    for (auto& layer : layers_) {
        layer.initialize(rng);
    }
    head_.initialize(rng);
}

Eigen::VectorXd LstmClassifier::forward(const nn::Sequence& batch) {
    check_batch(batch, input_size_);
    nn::Sequence x = batch;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        x = activations_[l].forward(layers_[l].forward(x));
    }
    steps_ = x.size();
    batch_ = x.back().rows();
    return head_.forward(x.back()).col(0);
}

Eigen::VectorXd LstmClassifier::infer(const nn::Sequence& batch) const {
    check_batch(batch, input_size_);
    nn::Sequence x = batch;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        x = activations_[l].infer(layers_[l].infer(x));
    }
    return head_.infer(x.back()).col(0);
}

void LstmClassifier::backward(const Eigen::VectorXd& dlogits) {
    if (steps_ == 0 || dlogits.size() != batch_) {
        throw StateError("LSTM classifier backward needs a matching forward pass");
    }
    nn::Sequence d = last_step_gradient(head_.backward(dlogits), steps_);
    for (std::size_t l = layers_.size(); l-- > 0;) {
        d = layers_[l].backward(activations_[l].backward(d));
    }
}

std::vector<nn::Parameter*> LstmClassifier::parameters() {
    std::vector<nn::Parameter*> out;
    for (auto& layer : layers_) {
        for (auto* p : layer.parameters()) {
            out.push_back(p);
        }
    }
    for (auto* p : head_.parameters()) {
        out.push_back(p);
    }
    return out;
}

std::unique_ptr<nn::Model> LstmClassifier::clone() const {
    return std::make_unique<LstmClassifier>(*this);
}

// ----------------------------------------------------------- DlstmClassifier

DlstmClassifier::DlstmClassifier(int input_size, const DlstmModelConfig& cfg)
    : input_size_(input_size), cfg_(cfg) {
    cfg.validate();
    front_ = nn::DenseLayer("front", 2 * input_size, cfg.front_width, cfg.front_activation);
    lstm_ = nn::LstmLayer("lstm", cfg.front_width, cfg.hidden);
    dense_ = nn::DenseLayer("dense", cfg.hidden, cfg.dense_width, cfg.dense_activation);
    head_ = nn::DenseLayer("head", cfg.dense_width, 1, nn::Activation::identity);
}

void DlstmClassifier::initialize(std::mt19937_64& rng) {
    front_.initialize(rng);
    lstm_.initialize(rng);
    dense_.initialize(rng);
    head_.initialize(rng);
}

nn::Sequence DlstmClassifier::front_block(const nn::Sequence& batch) const {
    check_batch(batch, input_size_);
    const std::size_t steps = batch.size();
    const Eigen::Index rows = batch.front().rows();
    nn::Sequence out(steps, nn::Matrix(rows, 2 * input_size_));
    std::vector<double> series(steps);
    for (Eigen::Index b = 0; b < rows; ++b) {
        for (int f = 0; f < input_size_; ++f) {
            for (std::size_t t = 0; t < steps; ++t) {
                series[t] = batch[t](b, f);
            }
            auto parts = decomposition::decompose(series, cfg_.kernel);
            if (cfg_.kernel2 > 0) {
                parts = decomposition::second_pass_noise(parts, cfg_.kernel2);
            }
            const auto& seasonal = cfg_.kernel2 > 0 ? parts.smoothed_seasonal : parts.seasonal;
            for (std::size_t t = 0; t < steps; ++t) {
                out[t](b, 2 * f) = parts.trend[t];
                out[t](b, 2 * f + 1) = seasonal[t];
            }
        }
    }
    return out;
}

Eigen::VectorXd DlstmClassifier::forward(const nn::Sequence& batch) {
    const nn::Sequence h = lstm_.forward(front_.forward(front_block(batch)));
    steps_ = h.size();
    batch_ = h.back().rows();
    return head_.forward(dense_.forward(h.back())).col(0);
}

Eigen::VectorXd DlstmClassifier::infer(const nn::Sequence& batch) const {
    const nn::Sequence h = lstm_.infer(front_.infer(front_block(batch)));
    return head_.infer(dense_.infer(h.back())).col(0);
}

void DlstmClassifier::backward(const Eigen::VectorXd& dlogits) {
    if (steps_ == 0 || dlogits.size() != batch_) {
        throw StateError("DLSTM classifier backward needs a matching forward pass");
    }
    const nn::Matrix dh = dense_.backward(head_.backward(dlogits));
    front_.backward(lstm_.backward(last_step_gradient(dh, steps_)));
}

std::vector<nn::Parameter*> DlstmClassifier::parameters() {
    std::vector<nn::Parameter*> out;
    for (auto* p : front_.parameters()) {
        out.push_back(p);
    }
    for (auto* p : lstm_.parameters()) {
        out.push_back(p);
    }
    for (auto* p : dense_.parameters()) {
        out.push_back(p);
    }
    for (auto* p : head_.parameters()) {
        out.push_back(p);
    }
    return out;
}

std::unique_ptr<nn::Model> DlstmClassifier::clone() const {
    return std::make_unique<DlstmClassifier>(*this);
}

std::unique_ptr<nn::Model> make_model(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 1u};
    std::mt19937_64 rng(seq);
    if (spec.architecture == Architecture::lstm) {
        auto m = std::make_unique<LstmClassifier>(spec.input_size, spec.lstm);
        m->initialize(rng);
        return m;
    }
    auto m = std::make_unique<DlstmClassifier>(spec.input_size, spec.dlstm);
    m->initialize(rng);
    return m;
}

// ------------------------------------------------------------------ training

Batch make_batch(const windows::WindowSet& ws, std::span<const std::size_t> indices) {
    const auto rows = static_cast<Eigen::Index>(indices.size());
    Batch batch;
    batch.x.assign(static_cast<std::size_t>(ws.w), nn::Matrix(rows, ws.d));
    batch.y.resize(indices.size());
    for (Eigen::Index b = 0; b < rows; ++b) {
        const std::size_t i = indices[static_cast<std::size_t>(b)];
        if (i >= ws.size()) {
            throw DomainError("batch index " + std::to_string(i) + " out of range");
        }
        const auto& win = ws.windows[i];
        for (int t = 0; t < ws.w; ++t) {
            for (int f = 0; f < ws.d; ++f) {
                batch.x[static_cast<std::size_t>(t)](b, f) = win.features[static_cast<std::size_t>(t) * ws.d + f];
            }
        }
        batch.y[static_cast<std::size_t>(b)] = win.large ? 1.0 : 0.0;
    }
    return batch;
}

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (batch_size < 1) {
        throw ConfigError("batch size must be at least 1");
    }
    if (!(optimizer.learning_rate > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
}

std::string TrainConfig::describe() const {
    std::ostringstream s;
    s << "epochs=" << epochs << " batch=" << batch_size << " optimizer=" << nn::to_string(optimizer.kind)
      << " lr=" << format_double(optimizer.learning_rate) << " b1=" << format_double(optimizer.beta1)
      << " b2=" << format_double(optimizer.beta2) << " eps=" << format_double(optimizer.epsilon)
      << " seed=" << seed;
    return s.str();
}

TrainedModel train(const ModelSpec& spec, const windows::WindowSet& train_set, const TrainConfig& tc) {
    tc.validate();
    if (train_set.empty()) {
        throw DomainError("cannot train on an empty window set");
    }
    if (train_set.d != spec.input_size) {
        throw DomainError("windows carry " + std::to_string(train_set.d) + " features, model expects " +
                          std::to_string(spec.input_size));
    }

    TrainedModel out;
    out.spec = spec;
    out.seed = tc.seed;
    out.config_hash = nn::fnv1a64(spec.describe() + " | " + tc.describe());
    out.model = make_model(spec, tc.seed);

    std::seed_seq seq{static_cast<std::uint32_t>(tc.seed), static_cast<std::uint32_t>(tc.seed >> 32), 2u};
    std::mt19937_64 shuffle_rng(seq);
    nn::Optimizer optimizer(tc.optimizer);
    auto params = out.model->parameters();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch_size = static_cast<std::size_t>(tc.batch_size);
    Eigen::VectorXd dlogits;

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        int batch_no = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_no) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            const Batch batch = make_batch(train_set, std::span<const std::size_t>(order).subspan(start, end - start));
            out.model->zero_grad();
            const double loss = nn::bce_with_logits(out.model->forward(batch.x), batch.y, &dlogits);
            out.model->backward(dlogits);
            const double max_grad = nn::max_abs_gradient(params);
            if (!std::isfinite(loss) || !std::isfinite(max_grad)) {
                throw TrainingAborted("non-finite loss or gradient at epoch " + std::to_string(epoch) + ", batch " +
                                          std::to_string(batch_no) + " (max |grad| " + format_double(max_grad) + ")",
                                      epoch, batch_no, max_grad);
            }
            optimizer.step(params);
            loss_sum += loss * static_cast<double>(end - start);
        }
        out.loss_history.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return out;
}

std::vector<double> predict_proba(const nn::Model& model, const windows::WindowSet& ws, std::size_t batch) {
    if (ws.d != model.input_size()) {
        throw DomainError("windows carry " + std::to_string(ws.d) + " features, model expects " +
                          std::to_string(model.input_size()));
    }
    batch = std::max<std::size_t>(batch, 1);
    std::vector<double> out;
    out.reserve(ws.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < ws.size(); start += batch) {
        const std::size_t end = std::min(ws.size(), start + batch);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Eigen::VectorXd logits = model.infer(make_batch(ws, idx).x);
        for (Eigen::Index i = 0; i < logits.size(); ++i) {
            out.push_back(nn::sigmoid(logits[i]));
        }
    }
    return out;
}

double predict_proba(const nn::Model& model, const windows::Window& window, int w, int d) {
    if (d != model.input_size() || window.features.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(d)) {
        throw DomainError("window shape does not match the model input");
    }
    nn::Sequence x(static_cast<std::size_t>(w), nn::Matrix(1, d));
    for (int t = 0; t < w; ++t) {
        for (int f = 0; f < d; ++f) {
            x[static_cast<std::size_t>(t)](0, f) = window.features[static_cast<std::size_t>(t) * d + f];
        }
    }
    return nn::sigmoid(model.infer(x)[0]);
}

// ------------------------------------------------------------------ bagging

void EnsembleConfig::validate() const {
    if (members < 1) {
        throw ConfigError("an ensemble needs at least one member");
    }
    if (!(bootstrap_fraction > 0.0)) {
        throw ConfigError("bootstrap fraction must be positive");
    }
    if (jobs < 1) {
        throw ConfigError("jobs must be at least 1");
    }
}

std::vector<std::size_t> bootstrap_draw(std::size_t n, const EnsembleConfig& ec, int member) {
    if (n == 0) {
        throw DomainError("cannot bootstrap an empty set");
    }
    std::seed_seq seq{static_cast<std::uint32_t>(ec.seed), static_cast<std::uint32_t>(ec.seed >> 32),
                      static_cast<std::uint32_t>(member), 3u};
    std::mt19937_64 rng(seq);
    const auto size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(ec.bootstrap_fraction * static_cast<double>(n))));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> draw(size);
    for (auto& i : draw) {
        i = pick(rng);
    }
    return draw;
}

TrainConfig member_train_config(const TrainConfig& tc, int member) {
    TrainConfig out = tc;
    out.seed = tc.seed + static_cast<std::uint64_t>(member);
    return out;
}

TrainedEnsemble train_bagged(const ModelSpec& spec, const windows::WindowSet& train_set, const TrainConfig& tc,
                             const EnsembleConfig& ec) {
    ec.validate();
    tc.validate();
    const auto n = static_cast<std::size_t>(ec.members);
    TrainedEnsemble out;
    out.draws.resize(n);
    out.members.resize(n);

    auto train_member = [&](std::size_t m) {
        try {
            out.draws[m] = bootstrap_draw(train_set.size(), ec, static_cast<int>(m));
            out.members[m] = train(spec, windows::select(train_set, out.draws[m]),
                                   member_train_config(tc, static_cast<int>(m)));
        } catch (const TrainingAborted& e) {
            throw TrainingAborted("ensemble member " + std::to_string(m) + ": " + e.what(), e.epoch(), e.batch(),
                                  e.max_abs_grad());
        }
    };

    const auto jobs = static_cast<std::size_t>(ec.jobs);
    for (std::size_t start = 0; start < n; start += jobs) {
        const std::size_t end = std::min(n, start + jobs);
        if (end - start == 1) {
            train_member(start);
            continue;
        }
        std::vector<std::future<void>> pending;
        for (std::size_t m = start; m < end; ++m) {
            pending.push_back(std::async(std::launch::async, train_member, m));
        }
        // join every member before surfacing the first failure
        std::exception_ptr first;
        for (auto& f : pending) {
            try {
                f.get();
            } catch (...) {
                if (!first) {
                    first = std::current_exception();
                }
            }
        }
        if (first) {
            std::rethrow_exception(first);
        }
    }
    return out;
}

std::vector<double> predict_proba(const TrainedEnsemble& ensemble, const windows::WindowSet& ws) {
    if (ensemble.members.empty()) {
        throw StateError("ensemble has no members");
    }
    std::vector<double> sum(ws.size(), 0.0);
    for (const auto& member : ensemble.members) {
        const auto p = predict_proba(*member.model, ws);
        for (std::size_t i = 0; i < p.size(); ++i) {
            sum[i] += p[i];
        }
    }
    for (auto& v : sum) {
        v /= static_cast<double>(ensemble.members.size());
    }
    return sum;
}

// --------------------------------------------------------------- experiments

namespace {

constexpr ExperimentMode kModes[] = {
    ExperimentMode::lstm_irregular,        ExperimentMode::dlstm_irregular,
    ExperimentMode::lstm_regular,          ExperimentMode::dlstm_regular,
    ExperimentMode::lstm_ensemble_regular, ExperimentMode::dlstm_ensemble_regular,
};

} // namespace

const char* to_string(ExperimentMode m) {
    switch (m) {
    case ExperimentMode::lstm_irregular: return "lstm-irregular";
    case ExperimentMode::dlstm_irregular: return "dlstm-irregular";
    case ExperimentMode::lstm_regular: return "lstm-regular";
    case ExperimentMode::dlstm_regular: return "dlstm-regular";
    case ExperimentMode::lstm_ensemble_regular: return "lstm-ensemble-regular";
    case ExperimentMode::dlstm_ensemble_regular: return "dlstm-ensemble-regular";
    }
    return "?";
}

ExperimentMode experiment_mode_from_string(std::string_view s) {
    for (auto m : kModes) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw ConfigError("unknown experiment mode '" + std::string(s) + "'");
}

Architecture architecture_of(ExperimentMode m) {
    switch (m) {
    case ExperimentMode::lstm_irregular:
    case ExperimentMode::lstm_regular:
    case ExperimentMode::lstm_ensemble_regular: return Architecture::lstm;
    default: return Architecture::dlstm;
    }
}

windows::SeriesMode series_of(ExperimentMode m) {
    return m == ExperimentMode::lstm_irregular || m == ExperimentMode::dlstm_irregular ? windows::SeriesMode::irregular
                                                                                        : windows::SeriesMode::regular;
}

bool is_ensemble(ExperimentMode m) {
    return m == ExperimentMode::lstm_ensemble_regular || m == ExperimentMode::dlstm_ensemble_regular;
}

void ExperimentConfig::validate() const {
    if (R < 0) {
        throw ConfigError("R must be nonnegative");
    }
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    }
    if (architecture_of(mode) == Architecture::lstm) {
        lstm.validate();
    } else {
        dlstm.validate();
    }
    train.validate();
    if (is_ensemble(mode)) {
        ensemble.validate();
    }
}

std::string ExperimentConfig::describe() const {
    ModelSpec spec;
    spec.architecture = architecture_of(mode);
    spec.lstm = lstm;
    spec.dlstm = dlstm;
    std::ostringstream s;
    s << to_string(mode) << " R=" << R << " seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        s << (i ? "," : "") << seeds[i];
    }
    s << " split=" << format_double(train_fraction) << " purge=" << purge << " threshold=" << format_double(threshold)
      << " | " << spec.describe() << " | " << train.describe();
    if (is_ensemble(mode)) {
        s << " | members=" << ensemble.members << " fraction=" << format_double(ensemble.bootstrap_fraction);
    }
    return s.str();
}

ModelSpec model_spec(const ExperimentConfig& cfg, int input_size) {
    ModelSpec spec;
    spec.architecture = architecture_of(cfg.mode);
    spec.input_size = input_size;
    spec.lstm = cfg.lstm;
    spec.dlstm = cfg.dlstm;
    return spec;
}

PreparedData prepare_data(const ExperimentConfig& cfg, windows::WindowSet train_set, windows::WindowSet test_set,
                          std::uint64_t seed) {
    if (train_set.empty() || test_set.empty()) {
        throw InsufficientDataError("split leaves " + std::to_string(train_set.size()) + " train and " +
                                    std::to_string(test_set.size()) + " test windows");
    }
    PreparedData out;
    if (train_set.normalized()) {
        out.normalization = train_set.normalization;
    } else {
        out.normalization = windows::fit_normalization(train_set);
        train_set = windows::apply_normalization(train_set, out.normalization);
        test_set = windows::apply_normalization(test_set, out.normalization);
    }
    out.train = windows::oversample_minority(train_set, {cfg.R}, seed);
    out.test = std::move(test_set);
    return out;
}

void score_predictions(SeedRun& run, const windows::WindowSet& test_set, std::vector<double> probabilities,
                       double threshold) {
    if (probabilities.size() != test_set.size()) {
        throw DomainError("one probability per test window is required");
    }
    run.test_counts = windows::partition_binary(test_set);
    run.labels.clear();
    run.labels.reserve(test_set.size());
    for (const auto& w : test_set.windows) {
        run.labels.push_back(w.large ? 1 : 0);
    }
    run.probabilities = std::move(probabilities);
    run.confusion = evaluation::confusion(run.labels, run.probabilities, threshold);
    run.metrics = evaluation::skill_scores(run.confusion);
    run.roc.reset();
    if (run.test_counts.small > 0 && run.test_counts.large > 0) {
        run.roc = evaluation::roc_auc(run.labels, run.probabilities);
        run.metrics[evaluation::MetricId::auc] = run.roc->auc;
    }
}

namespace {

SeedRun run_once(const ExperimentConfig& cfg, windows::WindowSet train_set, windows::WindowSet test_set,
                 std::uint64_t seed) {
    auto data = prepare_data(cfg, std::move(train_set), std::move(test_set), seed);
    const ModelSpec spec = model_spec(cfg, data.train.d);
    TrainConfig tc = cfg.train;
    tc.seed = seed;

    SeedRun run;
    run.seed = seed;
    run.train_counts = windows::partition_binary(data.train);
    std::vector<double> probabilities;
    if (is_ensemble(cfg.mode)) {
        EnsembleConfig ec = cfg.ensemble;
        ec.seed = seed;
        auto ensemble = train_bagged(spec, data.train, tc, ec);
        probabilities = predict_proba(ensemble, data.test);
        run.models = std::move(ensemble.members);
    } else {
        auto trained = train(spec, data.train, tc);
        probabilities = predict_proba(*trained.model, data.test);
        run.models.push_back(std::move(trained));
    }
    score_predictions(run, data.test, std::move(probabilities), cfg.threshold);
    return run;
}

void check_mode(const ExperimentConfig& cfg, const windows::WindowSet& data) {
    cfg.validate();
    if (data.mode != series_of(cfg.mode)) {
        throw DomainError(std::string("mode ") + to_string(cfg.mode) + " needs " +
                          windows::to_string(series_of(cfg.mode)) + " windows, got " + windows::to_string(data.mode));
    }
}

ExperimentResult finish(const ExperimentConfig& cfg, std::vector<SeedRun> runs) {
    ExperimentResult result;
    result.config = cfg;
    result.config_hash = nn::fnv1a64(cfg.describe());
    std::vector<evaluation::MetricBundle> bundles;
    for (const auto& r : runs) {
        bundles.push_back(r.metrics);
    }
    result.report = evaluation::aggregate_runs(bundles);
    result.runs = std::move(runs);
    return result;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const windows::WindowSet& data) {
    check_mode(cfg, data);
    std::vector<SeedRun> runs;
    for (std::uint64_t seed : cfg.seeds) {
        auto [train_set, test_set] = windows::chronological_split(data, cfg.train_fraction, cfg.purge);
        runs.push_back(run_once(cfg, std::move(train_set), std::move(test_set), seed));
    }
    return finish(cfg, std::move(runs));
}

ExperimentResult run_cross_validation(const ExperimentConfig& cfg, const windows::WindowSet& data, int k) {
    check_mode(cfg, data);
    const auto plan = windows::walk_forward_folds(data.size(), k);
    std::vector<SeedRun> runs;
    for (const auto& fold : plan.folds) {
        runs.push_back(run_once(cfg, windows::slice(data, fold.train_begin, fold.train_end),
                                windows::slice(data, fold.test_begin, fold.test_end), cfg.seeds.front()));
    }
    return finish(cfg, std::move(runs));
}

nlohmann::json to_json(const ExperimentResult& result) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(result.config_hash));
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : result.runs) {
        nlohmann::json hashes = nlohmann::json::array();
        for (const auto& m : r.models) {
            char h[32];
            std::snprintf(h, sizeof(h), "%016llx", static_cast<unsigned long long>(m.config_hash));
            hashes.push_back(h);
        }
        runs.push_back({{"seed", r.seed},
                        {"train_small", r.train_counts.small},
                        {"train_large", r.train_counts.large},
                        {"test_small", r.test_counts.small},
                        {"test_large", r.test_counts.large},
                        {"confusion", evaluation::to_json(r.confusion)},
                        {"metrics", evaluation::to_json(r.metrics)},
                        {"model_hashes", hashes}});
    }
    nlohmann::json j = evaluation::to_json(result.report);
    j["mode"] = to_string(result.config.mode);
    j["R"] = result.config.R;
    j["seeds"] = result.config.seeds;
    j["config_hash"] = hash;
    j["per_run"] = runs;
    return j;
}

} // namespace flarecast::models
