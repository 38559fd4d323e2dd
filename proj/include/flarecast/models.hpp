#pragma once

#include "flarecast/evaluation.hpp"
#include "flarecast/nn/activation.hpp"
#include "flarecast/nn/layers.hpp"
#include "flarecast/nn/model.hpp"
#include "flarecast/nn/optimizer.hpp"
#include "flarecast/windows.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace flarecast::models {

enum class Architecture { lstm, dlstm };

const char* to_string(Architecture a);

/// Stacked LSTM layers, each followed by an elementwise activation, then a
/// one-unit dense head on the last step. The head emits a logit; sigmoid is
/// applied by predict_proba.
struct LstmModelConfig {
    std::vector<int> hidden_sizes{64, 64, 32, 32};
    std::vector<nn::Activation> activations{nn::Activation::relu, nn::Activation::tanh, nn::Activation::relu,
                                            nn::Activation::tanh};

    /// Throws ConfigError on an empty stack, nonpositive width or a size mismatch.
    void validate() const;
};

/// Decomposition front block (per input feature: trend and smoothed seasonal
/// channels), a time-distributed dense layer, one LSTM layer, then two dense
/// layers ending in a single logit.
struct DlstmModelConfig {
    int kernel = 5;
    int kernel2 = 3; // second smoothing of the seasonal channel; 0 feeds the raw seasonal part
    int front_width = 16;
    nn::Activation front_activation = nn::Activation::tanh;
    int hidden = 64;
    int dense_width = 32;
    nn::Activation dense_activation = nn::Activation::relu;

    /// Throws ConfigError on even or nonpositive kernels or nonpositive widths.
    void validate() const;
};

struct ModelSpec {
    Architecture architecture = Architecture::lstm;
    int input_size = 1;
    LstmModelConfig lstm;
    DlstmModelConfig dlstm;

    void validate() const;
    /// Canonical one-line description; feeds the config hash.
    std::string describe() const;
};

class LstmClassifier final : public nn::Model {
public:
    LstmClassifier(int input_size, const LstmModelConfig& cfg);

    void initialize(std::mt19937_64& rng);

    int input_size() const override { return input_size_; }
    Eigen::VectorXd forward(const nn::Sequence& batch) override;
    Eigen::VectorXd infer(const nn::Sequence& batch) const override;
    void backward(const Eigen::VectorXd& dlogits) override;
    std::vector<nn::Parameter*> parameters() override;
    std::unique_ptr<nn::Model> clone() const override;
    using nn::Model::parameters;

    nn::DenseLayer& head() { return head_; }

private:
    int input_size_;
    std::vector<nn::LstmLayer> layers_;
    std::vector<nn::SequenceActivation> activations_;
    nn::DenseLayer head_;
    std::size_t steps_ = 0;
    Eigen::Index batch_ = 0;
};

class DlstmClassifier final : public nn::Model {
public:
    DlstmClassifier(int input_size, const DlstmModelConfig& cfg);

    void initialize(std::mt19937_64& rng);

    /// Parameter-free decomposition: for each feature f the output carries
    /// trend_f at column 2f and the (smoothed) seasonal part at 2f + 1.
    nn::Sequence front_block(const nn::Sequence& batch) const;

    int input_size() const override { return input_size_; }
    Eigen::VectorXd forward(const nn::Sequence& batch) override;
    Eigen::VectorXd infer(const nn::Sequence& batch) const override;
    void backward(const Eigen::VectorXd& dlogits) override;
    std::vector<nn::Parameter*> parameters() override;
    std::unique_ptr<nn::Model> clone() const override;
    using nn::Model::parameters;

    nn::DenseLayer& head() { return head_; }

private:
    int input_size_;
    DlstmModelConfig cfg_;
    nn::DenseLayer front_;
    nn::LstmLayer lstm_;
    nn::DenseLayer dense_;
    nn::DenseLayer head_;
    std::size_t steps_ = 0;
    Eigen::Index batch_ = 0;
};

/// Builds and initializes a model; weights depend only on (spec, seed).
std::unique_ptr<nn::Model> make_model(const ModelSpec& spec, std::uint64_t seed);

struct Batch {
    nn::Sequence x; // w steps of (batch x d)
    std::vector<double> y; // 1 for large
};

/// Throws DomainError on an out-of-range index.
Batch make_batch(const windows::WindowSet& ws, std::span<const std::size_t> indices);

struct TrainConfig {
    int epochs = 30;
    int batch_size = 128;
    nn::OptimizerConfig optimizer;
    std::uint64_t seed = 0;

    void validate() const;
    std::string describe() const;
};

struct TrainedModel {
    std::unique_ptr<nn::Model> model;
    ModelSpec spec;
    std::vector<double> loss_history; // mean training loss per epoch
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

/// Mini-batch training over a seeded shuffle each epoch. Throws DomainError
/// if the feature width differs from spec.input_size or the set is empty,
/// and TrainingAborted (epoch, batch, max |grad|) on a non-finite loss or gradient.
TrainedModel train(const ModelSpec& spec, const windows::WindowSet& train_set, const TrainConfig& tc);

/// Sigmoid outputs for every window, evaluated in batches.
std::vector<double> predict_proba(const nn::Model& model, const windows::WindowSet& ws, std::size_t batch = 512);
double predict_proba(const nn::Model& model, const windows::Window& window, int w, int d);

struct EnsembleConfig {
    int members = 10;
    double bootstrap_fraction = 1.0; // draw size relative to the training set, with replacement
    std::uint64_t seed = 0;
    int jobs = 1; // members trained concurrently

    void validate() const;
};

struct TrainedEnsemble {
    std::vector<TrainedModel> members;
    std::vector<std::vector<std::size_t>> draws; // bootstrap indices per member
};

/// Bootstrap draw of member m; depends only on (n, ec.seed, ec.bootstrap_fraction, m).
std::vector<std::size_t> bootstrap_draw(std::size_t n, const EnsembleConfig& ec, int member);
/// Train config of member m: tc with seed tc.seed + m.
TrainConfig member_train_config(const TrainConfig& tc, int member);

/// Member failures are rethrown as TrainingAborted naming the member index.
TrainedEnsemble train_bagged(const ModelSpec& spec, const windows::WindowSet& train_set, const TrainConfig& tc,
                             const EnsembleConfig& ec);

/// Arithmetic mean of member probabilities.
std::vector<double> predict_proba(const TrainedEnsemble& ensemble, const windows::WindowSet& ws);

enum class ExperimentMode {
    lstm_irregular,
    dlstm_irregular,
    lstm_regular,
    dlstm_regular,
    lstm_ensemble_regular,
    dlstm_ensemble_regular,
};

const char* to_string(ExperimentMode m);
/// Accepts the hyphenated names, e.g. "dlstm-ensemble-regular".
ExperimentMode experiment_mode_from_string(std::string_view s);
Architecture architecture_of(ExperimentMode m);
windows::SeriesMode series_of(ExperimentMode m);
bool is_ensemble(ExperimentMode m);

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::lstm_irregular;
    int R = 0;
    std::vector<std::uint64_t> seeds{0};
    double train_fraction = 0.8;
    std::size_t purge = 0;
    double threshold = 0.5;
    LstmModelConfig lstm;
    DlstmModelConfig dlstm;
    TrainConfig train;       // its seed is replaced by each run's seed
    EnsembleConfig ensemble; // likewise

    void validate() const;
    std::string describe() const;
};

/// Spec of the model a mode trains on windows of width input_size.
ModelSpec model_spec(const ExperimentConfig& cfg, int input_size);

struct PreparedData {
    windows::WindowSet train; // normalized and oversampled
    windows::WindowSet test;  // normalized with the train-fitted parameters
    std::vector<preprocess::MinMaxParams> normalization;
};

/// Min-max fitted on the train part only (input that is already normalized is
/// kept as is), then oversampling of the train part with (cfg.R, seed).
/// Throws InsufficientDataError when either part is empty.
PreparedData prepare_data(const ExperimentConfig& cfg, windows::WindowSet train_set, windows::WindowSet test_set,
                          std::uint64_t seed);

struct SeedRun {
    std::uint64_t seed = 0;
    windows::BinaryCounts train_counts; // after oversampling
    windows::BinaryCounts test_counts;
    evaluation::ConfusionMatrix confusion;
    evaluation::MetricBundle metrics;
    std::optional<evaluation::RocCurve> roc; // absent when the test set has one class
    std::vector<int> labels;
    std::vector<double> probabilities;
    std::vector<TrainedModel> models; // one, or every ensemble member
};

/// Fills labels, probabilities, test counts, confusion, metrics and, when
/// both classes are present, the ROC curve and AUC.
void score_predictions(SeedRun& run, const windows::WindowSet& test_set, std::vector<double> probabilities,
                       double threshold);

struct ExperimentResult {
    ExperimentConfig config;
    std::uint64_t config_hash = 0;
    std::vector<SeedRun> runs;
    evaluation::SkillReport report;
};

/// Per seed: chronological split, min-max fitted on the train part (skipped
/// for already normalized input), oversampling of the train part only,
/// training, and scoring of the test part. Throws DomainError when the
/// window mode does not match the experiment mode and InsufficientDataError
/// when either partition is empty.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const windows::WindowSet& data);

/// Same protocol over expanding walk-forward folds, using the first seed.
ExperimentResult run_cross_validation(const ExperimentConfig& cfg, const windows::WindowSet& data, int k = 4);

nlohmann::json to_json(const ExperimentResult& result);

} // namespace flarecast::models
