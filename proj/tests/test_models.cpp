#include "flarecast/decomposition.hpp"
#include "flarecast/errors.hpp"
#include "flarecast/models.hpp"
#include "support/synthetic.hpp"
#include "support/toy_models.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

using namespace flarecast;
using namespace flarecast::models;

namespace {

ModelSpec small_lstm(int d = 1) {
    ModelSpec spec;
    spec.input_size = d;
    spec.lstm.hidden_sizes = {8, 8, 4, 4};
    return spec;
}

ModelSpec small_dlstm(int d = 1) {
    ModelSpec spec;
    spec.architecture = Architecture::dlstm;
    spec.input_size = d;
    spec.dlstm.front_width = 8;
    spec.dlstm.hidden = 16;
    spec.dlstm.dense_width = 8;
    return spec;
}

std::string checkpoint_text(const nn::Model& m) {
    std::ostringstream out;
    nn::save_checkpoint(out, m, 0);
    return out.str();
}

double accuracy(const std::vector<double>& p, const windows::WindowSet& ws) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ok += (p[i] >= 0.5) == ws.windows[i].large ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(p.size());
}

} // namespace

TEST_CASE("config validation") {
    LstmModelConfig lc;
    lc.hidden_sizes = {4, 4};
    CHECK_THROWS_AS(lc.validate(), ConfigError);
    lc.hidden_sizes = {};
    lc.activations = {};
    CHECK_THROWS_AS(lc.validate(), ConfigError);
    DlstmModelConfig dc;
    dc.kernel = 4;
    CHECK_THROWS_AS(dc.validate(), ConfigError);
    dc.kernel = 5;
    dc.kernel2 = 2;
    CHECK_THROWS_AS(dc.validate(), ConfigError);
    TrainConfig tc;
    tc.epochs = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = {};
    tc.optimizer.learning_rate = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    EnsembleConfig ec;
    ec.members = 0;
    CHECK_THROWS_AS(ec.validate(), ConfigError);
    ExperimentConfig xc;
    xc.mode = ExperimentMode::dlstm_regular;
    xc.dlstm.kernel = 6;
    CHECK_THROWS_AS(xc.validate(), ConfigError);
}

TEST_CASE("defaults match the documented setup") {
    const TrainConfig tc;
    CHECK(tc.epochs == 30);
    CHECK(tc.batch_size == 128);
    const LstmModelConfig lc;
    CHECK(lc.hidden_sizes == std::vector<int>{64, 64, 32, 32});
    const EnsembleConfig ec;
    CHECK(ec.members == 10);
    CHECK(ec.bootstrap_fraction == 1.0);
    const DlstmModelConfig dc;
    CHECK(dc.kernel == 5);
    CHECK(dc.hidden == 64);
    CHECK(dc.dense_width == 32);
}

TEST_CASE("mode names round trip") {
    for (const char* name : {"lstm-irregular", "dlstm-irregular", "lstm-regular", "dlstm-regular",
                             "lstm-ensemble-regular", "dlstm-ensemble-regular"}) {
        CHECK(std::string(to_string(experiment_mode_from_string(name))) == name);
    }
    CHECK_THROWS_AS(experiment_mode_from_string("gru"), ConfigError);
    CHECK(series_of(ExperimentMode::dlstm_irregular) == windows::SeriesMode::irregular);
    CHECK(is_ensemble(ExperimentMode::dlstm_ensemble_regular));
    CHECK(architecture_of(ExperimentMode::lstm_ensemble_regular) == Architecture::lstm);
}

TEST_CASE("DLSTM front block reconstructs its input") {
    DlstmModelConfig cfg;
    cfg.kernel = 5;
    cfg.kernel2 = 3;
    DlstmClassifier model(2, cfg);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = flarecast::testing::random_batch(rng, 24, 6, 2);
        const auto front = model.front_block(x);
        REQUIRE(front.size() == 24);
        REQUIRE(front[0].cols() == 4);
        for (Eigen::Index b = 0; b < 6; ++b) {
            for (int f = 0; f < 2; ++f) {
                std::vector<double> series(24);
                for (std::size_t t = 0; t < 24; ++t) {
                    series[t] = x[t](b, f);
                }
                const auto d = decomposition::second_pass_noise(decomposition::decompose(series, 5), 3);
                for (std::size_t t = 0; t < 24; ++t) {
                    CHECK(front[t](b, 2 * f) == d.trend[t]);
                    CHECK(front[t](b, 2 * f + 1) == d.smoothed_seasonal[t]);
                    const double rebuilt = front[t](b, 2 * f) + front[t](b, 2 * f + 1) + d.residual[t];
                    CHECK(std::abs(rebuilt - series[t]) <= 1e-15);
                }
            }
        }
    }
}

TEST_CASE("toy LSTM and DLSTM graphs pass the gradient check") {
    std::mt19937_64 rng(2);
    ModelSpec lstm;
    lstm.lstm.hidden_sizes = {4, 4};
    lstm.lstm.activations = {nn::Activation::relu, nn::Activation::tanh};
    ModelSpec dlstm;
    dlstm.architecture = Architecture::dlstm;
    dlstm.dlstm.kernel = 3;
    dlstm.dlstm.front_width = 4;
    dlstm.dlstm.hidden = 4;
    dlstm.dlstm.dense_width = 4;
    for (const auto& spec : {lstm, dlstm}) {
        auto model = make_model(spec, 3);
        const auto x = flarecast::testing::random_batch(rng, 24, 20, 1);
        const auto y = flarecast::testing::random_labels(rng, 20);
        const auto r = nn::grad_check(*model, x, y);
        INFO(spec.describe() << " worst " << r.worst_parameter << " " << r.max_relative_error);
        CHECK(r.max_relative_error <= 1e-4);
    }
    CHECK(make_model(dlstm, 0)->parameter_count() <= 200);
}

TEST_CASE("predictions are probabilities and pure") {
    const auto ws = flarecast::testing::planted_rule_windows(64, 0.2, 3);
    for (const auto& spec : {small_lstm(), small_dlstm()}) {
        auto model = make_model(spec, 4);
        const auto p = predict_proba(*model, ws);
        REQUIRE(p.size() == 64);
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(predict_proba(*model, ws.windows[5], ws.w, ws.d) == doctest::Approx(p[5]).epsilon(1e-14));
        CHECK(predict_proba(*model, ws.windows[5], ws.w, ws.d) == predict_proba(*model, ws.windows[5], ws.w, ws.d));
        CHECK_THROWS_AS(predict_proba(*model, ws.windows[5], ws.w, 2), DomainError);
    }
}

TEST_CASE("a zeroed head predicts exactly one half") {
    const auto ws = flarecast::testing::planted_rule_windows(16, 0.2, 5);
    auto lstm = make_model(small_lstm(), 6);
    auto& head = dynamic_cast<LstmClassifier&>(*lstm).head();
    head.weight().value.fill(0.0);
    head.bias().value.fill(0.0);
    auto dlstm = make_model(small_dlstm(), 6);
    auto& head2 = dynamic_cast<DlstmClassifier&>(*dlstm).head();
    head2.weight().value.fill(0.0);
    head2.bias().value.fill(0.0);
    for (double p : predict_proba(*lstm, ws)) {
        CHECK(p == 0.5);
    }
    for (double p : predict_proba(*dlstm, ws)) {
        CHECK(p == 0.5);
    }
}

TEST_CASE("training is deterministic per seed") {
    const auto ws = flarecast::testing::planted_rule_windows(300, 0.2, 7);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 64;
    tc.seed = 11;
    for (const auto& spec : {small_lstm(), small_dlstm()}) {
        const auto a = train(spec, ws, tc);
        const auto b = train(spec, ws, tc);
        CHECK(checkpoint_text(*a.model) == checkpoint_text(*b.model));
        CHECK(a.loss_history == b.loss_history);
        CHECK(a.loss_history.size() == 3);
        CHECK(a.config_hash == b.config_hash);
        TrainConfig other = tc;
        other.seed = 12;
        const auto c = train(spec, ws, other);
        CHECK(checkpoint_text(*a.model) != checkpoint_text(*c.model));
        CHECK(a.config_hash != c.config_hash);
    }
}

TEST_CASE("training rejects mismatched or empty input") {
    const auto ws = flarecast::testing::planted_rule_windows(10, 0.2, 8);
    CHECK_THROWS_AS(train(small_lstm(2), ws, {}), DomainError);
    CHECK_THROWS_AS(train(small_lstm(), windows::WindowSet{}, {}), DomainError);
}

TEST_CASE("non-finite input aborts training with diagnostics") {
    auto ws = flarecast::testing::planted_rule_windows(40, 0.2, 9);
    ws.windows[3].features[2] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 8;
    try {
        train(small_lstm(), ws, tc);
        FAIL("expected TrainingAborted");
    } catch (const TrainingAborted& e) {
        CHECK(e.epoch() == 0);
        CHECK(e.batch() >= 0);
        CHECK(e.batch() < 5);
    }
    EnsembleConfig ec;
    ec.members = 3;
    ec.bootstrap_fraction = 1.0;
    try {
        train_bagged(small_lstm(), ws, tc, ec);
        FAIL("expected TrainingAborted");
    } catch (const TrainingAborted& e) {
        CHECK(std::string(e.what()).find("ensemble member") != std::string::npos);
    }
}

TEST_CASE("planted rule is learned to high training accuracy") {
    const auto ws = flarecast::testing::planted_rule_windows(2000, 0.5, 10);
    TrainConfig tc;
    tc.seed = 1;
    tc.batch_size = 16;
    tc.optimizer.learning_rate = 3e-3;
    for (const auto& spec : {small_lstm(), small_dlstm()}) {
        const auto trained = train(spec, ws, tc);
        const auto p = predict_proba(*trained.model, ws);
        INFO(spec.describe());
        CHECK(accuracy(p, ws) >= 0.99);
        CHECK(trained.loss_history.back() < trained.loss_history.front());
        double large = 0, small = 0;
        std::size_t nl = 0, ns = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            (ws.windows[i].large ? large : small) += p[i];
            (ws.windows[i].large ? nl : ns)++;
        }
        CHECK(large / nl > small / ns);
    }
}

TEST_CASE("bootstrap draws and member seeds") {
    EnsembleConfig ec;
    ec.seed = 5;
    const auto a = bootstrap_draw(100, ec, 0);
    CHECK(a.size() == 100);
    CHECK(a == bootstrap_draw(100, ec, 0));
    CHECK(a != bootstrap_draw(100, ec, 1));
    CHECK(*std::max_element(a.begin(), a.end()) < 100);
    ec.bootstrap_fraction = 0.5;
    CHECK(bootstrap_draw(100, ec, 0).size() == 50);
    TrainConfig tc;
    tc.seed = 40;
    CHECK(member_train_config(tc, 3).seed == 43);
}

TEST_CASE("a one-member ensemble equals a single model on its draw") {
    const auto ws = flarecast::testing::planted_rule_windows(200, 0.2, 11);
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 3;
    EnsembleConfig ec;
    ec.members = 1;
    ec.seed = 17;
    const auto ens = train_bagged(small_dlstm(), ws, tc, ec);
    const auto single = train(small_dlstm(), windows::select(ws, bootstrap_draw(ws.size(), ec, 0)),
                              member_train_config(tc, 0));
    CHECK(checkpoint_text(*ens.members[0].model) == checkpoint_text(*single.model));
    CHECK(predict_proba(ens, ws) == predict_proba(*single.model, ws));
}

TEST_CASE("ensemble output is the member mean and independent of jobs") {
    const auto ws = flarecast::testing::planted_rule_windows(200, 0.2, 12);
    TrainConfig tc;
    tc.epochs = 2;
    EnsembleConfig ec;
    ec.members = 3;
    ec.seed = 8;
    const auto serial = train_bagged(small_dlstm(), ws, tc, ec);
    ec.jobs = 3;
    const auto parallel = train_bagged(small_dlstm(), ws, tc, ec);
    const auto p = predict_proba(serial, ws);
    CHECK(p == predict_proba(parallel, ws));
    CHECK(serial.draws == parallel.draws);
    std::vector<std::vector<double>> members;
    for (const auto& m : serial.members) {
        members.push_back(predict_proba(*m.model, ws));
    }
    for (std::size_t i = 0; i < ws.size(); ++i) {
        CHECK(p[i] == doctest::Approx((members[0][i] + members[1][i] + members[2][i]) / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("bagging is not worse than its best member on the planted rule") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto train_set = flarecast::testing::planted_rule_windows(400, 0.3, 100 + seed);
        const auto test_set = flarecast::testing::planted_rule_windows(400, 0.3, 200 + seed);
        TrainConfig tc;
        tc.epochs = 8;
        tc.batch_size = 32;
        tc.optimizer.learning_rate = 3e-3;
        tc.seed = seed;
        EnsembleConfig ec;
        ec.members = 3;
        ec.seed = seed;
        const auto ens = train_bagged(small_dlstm(), train_set, tc, ec);
        double best = 0.0;
        for (const auto& m : ens.members) {
            best = std::max(best, accuracy(predict_proba(*m.model, test_set), test_set));
        }
        CHECK(accuracy(predict_proba(ens, test_set), test_set) >= best - 0.02);
    }
}

TEST_CASE("run_experiment protocol") {
    const auto ws = flarecast::testing::planted_rule_windows(500, 0.1, 13);
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::dlstm_regular;
    cfg.R = 3;
    cfg.seeds = {7};
    cfg.dlstm = small_dlstm().dlstm;
    cfg.train.epochs = 2;
    const auto r = run_experiment(cfg, ws);
    REQUIRE(r.runs.size() == 1);
    const auto test_counts = windows::partition_binary(windows::slice(ws, 400, 500));
    const auto train_counts = windows::partition_binary(windows::slice(ws, 0, 400));
    CHECK(r.runs[0].test_counts.large == test_counts.large);
    CHECK(r.runs[0].train_counts.large == 4 * train_counts.large);
    CHECK(r.runs[0].train_counts.small == train_counts.small);
    CHECK(r.runs[0].labels.size() == 100);
    CHECK(*r.report[evaluation::MetricId::tss].std == 0.0);
    CHECK(r.runs[0].roc.has_value());
    const auto j = to_json(r);
    CHECK(j["mode"] == "dlstm-regular");
    CHECK(j["R"] == 3);
    CHECK(j["runs"] == 1);
    CHECK(j["metrics"].contains("auc"));
    CHECK(j["config_hash"].get<std::string>().size() == 16);

    const auto again = run_experiment(cfg, ws);
    CHECK(to_json(again).dump() == j.dump());

    cfg.mode = ExperimentMode::lstm_irregular;
    CHECK_THROWS_AS(run_experiment(cfg, ws), DomainError);
    cfg.mode = ExperimentMode::dlstm_regular;
    CHECK_THROWS_AS(run_experiment(cfg, windows::slice(ws, 0, 1)), InsufficientDataError);
}

TEST_CASE("ensemble experiment and cross validation") {
    const auto ws = flarecast::testing::planted_rule_windows(300, 0.1, 14);
    ExperimentConfig cfg;
    cfg.mode = ExperimentMode::dlstm_ensemble_regular;
    cfg.seeds = {1, 2};
    cfg.dlstm = small_dlstm().dlstm;
    cfg.train.epochs = 1;
    cfg.ensemble.members = 2;
    const auto r = run_experiment(cfg, ws);
    CHECK(r.runs.size() == 2);
    CHECK(r.runs[0].models.size() == 2);
    CHECK(r.report.runs == 2);

    cfg.mode = ExperimentMode::lstm_regular;
    cfg.lstm = small_lstm().lstm;
    const auto cv = run_cross_validation(cfg, ws, 4);
    REQUIRE(cv.runs.size() == 4);
    CHECK(cv.runs[0].labels.size() == 60);
    CHECK(cv.runs[3].labels.size() == 60);
}
