#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "gwkae/adam.hpp"
#include "gwkae/errors.hpp"
#include "gwkae/model_io.hpp"
#include "gwkae/train.hpp"

using namespace gwkae;

namespace {

// Hand-rolled reference of the same update rule for a single scalar.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    int t = 0;
    double step(double p, double g, double lr, double wd) {
        ++t;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        return p * (1.0 - lr * wd) - lr * mh / (std::sqrt(vh) + 1e-8);
    }
};

std::vector<GWSignal> toy_signals(int count, int width, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise);
    std::vector<GWSignal> out;
    for (int r = 0; r < count; ++r) {
        GWSignal s;
        s.path = {1, 2};
        s.repetition = r;
        s.samples.resize(width);
        for (int i = 0; i < width; ++i) {
            const double v = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * 3.0 * i / width) + (noise > 0 ? n(rng) : 0.0);
            s.samples[i] = std::clamp(v, 0.0, 1.0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> p{1.0, -2.0, 0.5};
    const std::vector<double> g{0.3, -4.0, 1e-3};
    std::vector<ParamBlock> blocks{{"p", p, g}};
    AdamState st;
    adam_step(blocks, st, 0.01, 0.0);
    // bias-corrected first step is lr * sign(g) up to eps
    EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-9);
    EXPECT_NEAR(p[1], -2.0 + 0.01, 1e-9);
    EXPECT_NEAR(p[2], 0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-12);
    EXPECT_EQ(st.step, 1);
}

TEST(Adam, MatchesScalarReferenceOverSteps) {
    std::vector<double> p{0.7};
    std::vector<double> g(1);
    std::vector<ParamBlock> blocks{{"p", p, g}};
    AdamState st;
    ScalarAdam ref;
    double q = 0.7;
    for (int t = 0; t < 25; ++t) {
        g[0] = std::sin(0.3 * t) + 0.2;
        const double lr = 0.01 * std::pow(0.95, t / 5);
        q = ref.step(q, g[0], lr, 0.1);
        adam_step(blocks, st, lr, 0.1);
        EXPECT_NEAR(p[0], q, 1e-14);
    }
}

TEST(Adam, WeightDecayAloneShrinks) {
    std::vector<double> p{2.0};
    const std::vector<double> g{0.0};
    std::vector<ParamBlock> blocks{{"p", p, g}};
    AdamState st;
    adam_step(blocks, st, 0.1, 0.5);
    EXPECT_DOUBLE_EQ(p[0], 2.0 * (1.0 - 0.05));
}

TEST(Adam, NonFiniteGradientLeavesParametersUntouched) {
    std::vector<double> a{1.0}, b{2.0};
    const std::vector<double> ga{0.5}, gb{std::numeric_limits<double>::quiet_NaN()};
    std::vector<ParamBlock> blocks{{"first", a, ga}, {"second", b, gb}};
    AdamState st;
    try {
        adam_step(blocks, st, 0.01, 0.0);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        EXPECT_NE(std::string(e.what()).find("second"), std::string::npos);
    }
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(b[0], 2.0);
}

TEST(TrainConfig, DefaultsAndSchedule) {
    TrainConfig c;
    EXPECT_EQ(c.learning_rate, 0.001);
    EXPECT_EQ(c.batch_size, 16);
    EXPECT_EQ(c.epochs, 100);
    EXPECT_EQ(c.weight_decay, 1e-6);
    EXPECT_EQ(c.gamma, 0.95);
    EXPECT_DOUBLE_EQ(c.learning_rate_at(0), 0.001);
    EXPECT_NEAR(c.learning_rate_at(10), 0.001 * std::pow(0.95, 10), 1e-18);
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.gamma = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.split_fraction = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, SplitByRepetition) {
    auto sig = toy_signals(10, 8, 0.0, 1);
    const auto s = split_dataset(sig, 0.8);
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.validation.size(), 2u);
    for (auto i : s.train) EXPECT_LT(sig[i].repetition, 8);
    for (auto i : s.validation) EXPECT_GE(sig[i].repetition, 8);
}

TEST(Train, ZeroEpochsLeavesModelUnchanged) {
    auto model = KAEModel::random({16, 6, 2}, BSplineGrid{}, 3);
    const auto before = model;
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto hist = train(model, toy_signals(10, 16, 0.01, 2), cfg);
    EXPECT_TRUE(hist.train_loss.empty());
    EXPECT_TRUE(hist.val_loss.empty());
    const auto la = model.layers();
    const auto lb = before.layers();
    for (std::size_t k = 0; k < la.size(); ++k) {
        EXPECT_TRUE(std::equal(la[k]->coeffs().begin(), la[k]->coeffs().end(), lb[k]->coeffs().begin()));
    }
}

TEST(Train, RejectsUnnormalizedOrRaggedInput) {
    auto model = KAEModel::random({16, 6, 2}, BSplineGrid{}, 3);
    auto sig = toy_signals(10, 16, 0.0, 2);
    TrainConfig cfg;
    cfg.epochs = 1;
    auto bad = sig;
    bad[3].samples[2] = 1.5;
    EXPECT_THROW(train(model, bad, cfg), DataError);
    bad = sig;
    bad[0].samples.pop_back();
    EXPECT_THROW(train(model, bad, cfg), DataError);
}

TEST(Train, ReducesLossOnIdenticalSignals) {
    auto model = KAEModel::random({64, 16, 4}, BSplineGrid{}, 9);
    const auto sig = toy_signals(40, 64, 0.0, 4);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.learning_rate = 0.01;
    const auto hist = train(model, sig, cfg);
    ASSERT_EQ(hist.val_loss.size(), 30u);
    EXPECT_LT(hist.val_loss.back(), 0.2 * hist.val_loss.front());
    EXPECT_LT(hist.train_loss.back(), hist.train_loss.front());
}

TEST(Train, SameSeedSameModel) {
    const auto sig = toy_signals(12, 24, 0.02, 5);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 42;
    auto a = KAEModel::random({24, 8, 2}, BSplineGrid{}, 1);
    auto b = KAEModel::random({24, 8, 2}, BSplineGrid{}, 1);
    const auto ha = train(a, sig, cfg);
    const auto hb = train(b, sig, cfg);
    EXPECT_EQ(ha.train_loss, hb.train_loss);
    EXPECT_EQ(ha.val_loss, hb.val_loss);
    const auto la = a.layers();
    const auto lb = b.layers();
    for (std::size_t k = 0; k < la.size(); ++k) {
        EXPECT_TRUE(std::equal(la[k]->w_base().begin(), la[k]->w_base().end(), lb[k]->w_base().begin()));
    }
}

TEST(ModelIO, RoundTripIsBitExact) {
    const auto dir = std::filesystem::temp_directory_path() / "gwkae_model_io";
    std::filesystem::create_directories(dir);
    const auto model = KAEModel::random({20, 7, 3}, BSplineGrid{2, 4, -0.5, 1.5}, 17, Reduction::Sum);
    save_model(model, dir / "m.json");
    const auto back = load_model(dir / "m.json");
    EXPECT_EQ(back.encoder_widths(), model.encoder_widths());
    EXPECT_EQ(back.grid(), model.grid());
    EXPECT_EQ(back.reduction(), Reduction::Sum);
    const auto la = model.layers();
    const auto lb = back.layers();
    ASSERT_EQ(la.size(), lb.size());
    for (std::size_t k = 0; k < la.size(); ++k) {
        EXPECT_TRUE(std::equal(la[k]->coeffs().begin(), la[k]->coeffs().end(), lb[k]->coeffs().begin()));
        EXPECT_TRUE(std::equal(la[k]->w_base().begin(), la[k]->w_base().end(), lb[k]->w_base().begin()));
        EXPECT_TRUE(std::equal(la[k]->w_spline().begin(), la[k]->w_spline().end(), lb[k]->w_spline().begin()));
    }
    save_model(back, dir / "m2.json");
    std::ifstream f1(dir / "m.json"), f2(dir / "m2.json");
    const std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
    EXPECT_EQ(s1, s2);
}

TEST(ModelIO, RejectsOtherVersionsAndGarbage) {
    const auto dir = std::filesystem::temp_directory_path() / "gwkae_model_io";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "v2.json") << R"({"format_version": 2})";
        std::ofstream(dir / "bad.json") << "{ not json";
    }
    EXPECT_THROW(load_model(dir / "v2.json"), PersistenceError);
    EXPECT_THROW(load_model(dir / "bad.json"), PersistenceError);
    EXPECT_THROW(load_model(dir / "missing.json"), PersistenceError);
}
