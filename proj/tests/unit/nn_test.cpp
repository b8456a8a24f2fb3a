#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../support/gradcheck.hpp"
#include "pathloss/errors.hpp"
#include "pathloss/nn/adam.hpp"
#include "pathloss/nn/checkpoint.hpp"
#include "pathloss/nn/layers.hpp"
#include "pathloss/nn/model.hpp"
#include "pathloss/nn/train.hpp"
#include "pathloss/rng.hpp"

using namespace pathloss;
using namespace pathloss::nn;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Distinct values a fixed gap apart, none at zero, so finite steps never cross a kink.
Tensor<double> spread_tensor(Shape shape, std::uint64_t seed) {
  Tensor<double> t(std::move(shape));
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    t[i] = 0.05 * (static_cast<double>(order[i]) - static_cast<double>(order.size()) / 3.0 + 0.5);
  }
  return t;
}

Topology single(Shape input, LayerSpec layer) { return Topology{"test", std::move(input), {layer}}; }

Topology two_block() {
  return Topology{"test",
                  {1, 8, 1},
                  {LayerSpec::conv(1, 2, {3, 1}, {2, 1}, {1, 0}), LayerSpec::relu(),
                   LayerSpec::maxpool_same({3, 1}), LayerSpec::conv(2, 3, {3, 1}, {2, 1}, {1, 0}),
                   LayerSpec::relu(), LayerSpec::maxpool_same({3, 1}), LayerSpec::flatten(),
                   LayerSpec::dropout(0.25), LayerSpec::dense(6, 4), LayerSpec::relu(),
                   LayerSpec::dense(4, 1)}};
}

Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.sample_shape = {1, 8, 1};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (int k = 0; k < 8; ++k) {
      const double v = rng.uniform();
      s += v * (k % 3);
      d.inputs.push_back(static_cast<float>(v));
    }
    d.labels.push_back(80.0 + 5.0 * s);
    d.ids.push_back(i);
  }
  return d;
}

}  // namespace

TEST_CASE("conv output sizes") {
  CHECK(conv_output_size(256, 3, 2, 1) == 128);
  std::size_t w = 61;
  std::vector<std::size_t> cascade;
  for (int k = 0; k < 6; ++k) cascade.push_back(w = conv_output_size(w, 3, 2, 1));
  CHECK(cascade == std::vector<std::size_t>{31, 16, 8, 4, 2, 1});
}

TEST_CASE("delta kernel conv is the identity") {
  Sequential<float> m(single({1, 9, 1}, LayerSpec::conv(1, 1, {3, 1}, {1, 1}, {1, 0})));
  auto params = m.parameters();
  params[0]->value.fill(0.0f);
  params[0]->value[1] = 1.0f;
  params[1]->value.fill(0.0f);
  const auto x = random_tensor<float>({2, 1, 9, 1}, 3);
  const auto y = m.forward(x, Mode::kEval);
  CHECK(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("conv channel mismatch") {
  Conv<float> conv(LayerSpec::conv(2, 4, {3, 1}, {2, 1}, {1, 0}), "c");
  Rng rng(1);
  CHECK_THROWS_AS(conv.forward(Tensor<float>({1, 3, 8, 1}), Mode::kEval, rng), ShapeError);
  CHECK_THROWS_AS(Sequential<float>(Topology{"bad", {3, 8, 1}, {LayerSpec::conv(2, 4, {3, 1}, {2, 1}, {1, 0})}}),
                  ShapeError);
}

TEST_CASE("same max pooling") {
  MaxPoolSame<float> pool(LayerSpec::maxpool_same({3, 3}));
  Rng rng(0);
  SUBCASE("constant") {
    Tensor<float> x({1, 2, 5, 4}, 2.5f);
    const auto y = pool.forward(x, Mode::kEval, rng);
    for (float v : y.values()) CHECK(v == 2.5f);
  }
  SUBCASE("spike dilates to its neighbourhood") {
    Tensor<float> x({1, 1, 7, 7}, 0.0f);
    x[3 * 7 + 4] = 9.0f;
    const auto y = pool.forward(x, Mode::kEval, rng);
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 7; ++c) {
        const bool near = std::abs(r - 3) <= 1 && std::abs(c - 4) <= 1;
        CHECK(y[static_cast<std::size_t>(r * 7 + c)] == (near ? 9.0f : 0.0f));
      }
    }
  }
  SUBCASE("negative input saturates at the padded edges") {
    Tensor<float> x({1, 1, 4, 4}, -3.0f);
    const auto y = pool.forward(x, Mode::kEval, rng);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        const bool edge = r == 0 || r == 3 || c == 0 || c == 3;
        CHECK(y[static_cast<std::size_t>(r * 4 + c)] == (edge ? 0.0f : -3.0f));
      }
    }
  }
  SUBCASE("matches brute-force window max") {
    const auto x = random_tensor<float>({2, 3, 9, 6}, 8);
    const auto y = pool.forward(x, Mode::kEval, rng);
    for (std::size_t p = 0; p < 6; ++p) {
      for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 6; ++c) {
          float best = -1e30f;
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              const int rr = r + dr, cc = c + dc;
              const float v = (rr < 0 || rr >= 9 || cc < 0 || cc >= 6)
                                  ? 0.0f
                                  : x[p * 54 + static_cast<std::size_t>(rr * 6 + cc)];
              best = std::max(best, v);
            }
          }
          CHECK(y[p * 54 + static_cast<std::size_t>(r * 6 + c)] == best);
        }
      }
    }
  }
}

TEST_CASE("dense layer") {
  Sequential<float> m(single({3}, LayerSpec::dense(3, 3)));
  auto params = m.parameters();
  params[0]->value.fill(0.0f);
  for (int i = 0; i < 3; ++i) params[0]->value[static_cast<std::size_t>(i * 3 + i)] = 1.0f;
  params[1]->value.fill(0.0f);
  Tensor<float> x({1, 3}, std::vector<float>{0.5f, -2.0f, 7.0f});
  const auto y = m.forward(x, Mode::kEval);
  for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == x[i]);

  CHECK(parameter_count(LayerSpec::dense(4096, 256)) == 1'048'832);
  CHECK(parameter_count(LayerSpec::dense(256, 1)) == 257);
  Rng rng(0);
  Dense<float> d(LayerSpec::dense(4, 2), "d");
  CHECK_THROWS_AS(d.forward(Tensor<float>({1, 5}), Mode::kEval, rng), ShapeError);
}

TEST_CASE("dropout") {
  Rng rng(31);
  Dropout<double> drop(LayerSpec::dropout(0.25));
  Tensor<double> ones({1, 1'000'000}, 1.0);
  const auto eval = drop.forward(ones, Mode::kEval, rng);
  CHECK(eval.storage() == ones.storage());

  const auto train = drop.forward(ones, Mode::kTrain, rng);
  double sum = 0;
  std::size_t zeros = 0;
  for (double v : train.values()) {
    sum += v;
    zeros += v == 0.0 ? 1 : 0;
  }
  CHECK(std::abs(sum / 1e6 - 1.0) < 0.01);
  CHECK(std::abs(static_cast<double>(zeros) / 1e6 - 0.25) < 0.01);

  Dropout<double> none(LayerSpec::dropout(0.0));
  const auto x = random_tensor<double>({4, 10}, 2);
  CHECK(none.forward(x, Mode::kTrain, rng).storage() == x.storage());
  CHECK(none.forward(x, Mode::kEval, rng).storage() == x.storage());
}

TEST_CASE("finite-difference gradients per layer kind") {
  struct Case {
    const char* name;
    Topology topology;
    Tensor<double> input;
    Mode mode;
  };
  std::vector<Case> cases;
  cases.push_back({"conv1d", single({3, 10, 1}, LayerSpec::conv(3, 4, {3, 1}, {2, 1}, {1, 0})),
                   random_tensor<double>({2, 3, 10, 1}, 1), Mode::kTrain});
  cases.push_back({"conv2d", single({2, 7, 5}, LayerSpec::conv(2, 3, {3, 3}, {2, 2}, {1, 1})),
                   random_tensor<double>({2, 2, 7, 5}, 2), Mode::kTrain});
  cases.push_back({"maxpool", single({2, 6, 5}, LayerSpec::maxpool_same({3, 3})),
                   spread_tensor({2, 2, 6, 5}, 3), Mode::kTrain});
  cases.push_back({"relu", single({12}, LayerSpec::relu()), spread_tensor({3, 12}, 4), Mode::kTrain});
  cases.push_back({"dropout", single({12}, LayerSpec::dropout(0.25)), random_tensor<double>({3, 12}, 5),
                   Mode::kTrain});
  cases.push_back({"flatten", single({2, 3, 2}, LayerSpec::flatten()), random_tensor<double>({2, 2, 3, 2}, 6),
                   Mode::kTrain});
  cases.push_back({"dense", single({7}, LayerSpec::dense(7, 5)), random_tensor<double>({3, 7}, 7), Mode::kTrain});
  for (auto& c : cases) {
    const std::string name = c.name;
    CAPTURE(name);
    Sequential<double> m(c.topology);
    m.initialize(11);
    for (auto* p : m.parameters()) {
      Rng rng(13);
      if (p->name.find("bias") != std::string::npos) {
        for (auto& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
      }
    }
    const auto r = testing::check_gradients(m, c.input, c.mode, 21);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_error < 1e-3);
  }
}

TEST_CASE("finite-difference gradients end to end") {
  Sequential<double> m(two_block());
  m.initialize(5);
  // Zero biases would park a unit fed only by zeros exactly on the ReLU kink.
  Rng rng(6);
  for (auto* p : m.parameters()) {
    if (p->name.find("bias") != std::string::npos) {
      for (auto& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
    }
  }
  const auto r = testing::check_gradients(m, random_tensor<double>({3, 1, 8, 1}, 9, 0.0, 1.0), Mode::kTrain, 4);
  CHECK(r.max_rel_error < 1e-3);
}

TEST_CASE("zero residual gives zero gradient and the loss scale is linear") {
  Sequential<float> m(two_block());
  m.initialize(3);
  const auto x = random_tensor<float>({4, 1, 8, 1}, 2, 0.0, 1.0);
  m.forward(x, Mode::kEval);
  m.zero_grad();
  m.backward(Tensor<float>({4, 1}, 0.0f));
  for (auto* p : m.parameters()) {
    for (float g : p->grad.values()) CHECK(g == 0.0f);
  }

  const auto g1 = random_tensor<float>({4, 1}, 5);
  auto g2 = g1;
  for (auto& v : g2.values()) v *= 2.0f;
  m.forward(x, Mode::kEval);
  m.zero_grad();
  m.backward(g1);
  std::vector<std::vector<float>> first;
  for (auto* p : m.parameters()) first.push_back(p->grad.storage());
  m.forward(x, Mode::kEval);
  m.zero_grad();
  m.backward(g2);
  auto params = m.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < first[k].size(); ++i) CHECK(params[k]->grad[i] == 2.0f * first[k][i]);
  }
}

TEST_CASE("non-finite activations raise") {
  Sequential<float> m(single({2}, LayerSpec::dense(2, 1)));
  m.initialize(1);
  Tensor<float> x({1, 2}, std::vector<float>{std::nanf(""), 1.0f});
  CHECK_THROWS_AS(m.forward(x, Mode::kEval), NumericError);
}

TEST_CASE("adam") {
  SUBCASE("first step moves by lr against the gradient sign") {
    Parameter<float> p{"w", Tensor<float>({4}, 1.0f), Tensor<float>({4})};
    const float g[] = {3.0f, -0.5f, 100.0f, -2e-3f};
    for (std::size_t i = 0; i < 4; ++i) p.grad[i] = g[i];
    Adam<float> adam({&p}, {1e-4});
    adam.step();
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(p.value[i] == doctest::Approx(1.0 - 1e-4 * (g[i] > 0 ? 1 : -1)).epsilon(1e-6));
    }
  }
  SUBCASE("zero gradient leaves parameters") {
    Parameter<float> p{"w", Tensor<float>({3}, 0.7f), Tensor<float>({3}, 0.0f)};
    Adam<float> adam({&p});
    for (int k = 0; k < 5; ++k) adam.step();
    for (float v : p.value.values()) CHECK(v == 0.7f);
  }
  SUBCASE("shape mismatch") {
    Parameter<float> p{"w", Tensor<float>({3}), Tensor<float>({2})};
    CHECK_THROWS_AS(Adam<float>({&p}), ShapeError);
  }
}

TEST_CASE("same seed gives the same training trajectory") {
  const auto data = toy_dataset(48, 1);
  auto run = [&] {
    Sequential<float> m(two_block());
    m.initialize(9);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.epochs = 3;
    cfg.learning_rate = 1e-3;
    cfg.seed = 77;
    return train_model(m, data.subset(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14,
                                                                15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26,
                                                                27, 28, 29, 30, 31}),
                       data.subset(std::vector<std::size_t>{32, 33, 34, 35, 36, 37, 38, 39, 40, 41, 42, 43, 44,
                                                            45, 46, 47}),
                       cfg);
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.history.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.history[k].train_rmse == b.history[k].train_rmse);
    CHECK(a.history[k].validation_rmse == b.history[k].validation_rmse);
  }
  CHECK(bit_identical(a.best, b.best));
  CHECK(a.best.metadata.at("epoch").get<std::size_t>() == a.best_epoch);
}

TEST_CASE("best epoch selection") {
  const std::vector<double> seq = {5, 4, 6, 4};
  CHECK(select_best_epoch(seq) == 2);
  CHECK(select_best_epoch(std::vector<double>{3}) == 1);
  CHECK_THROWS_AS(select_best_epoch(std::vector<double>{}), EmptyInputError);
}

TEST_CASE("train config checks") {
  const auto data = toy_dataset(10, 2);
  Sequential<float> m(two_block());
  m.initialize(1);
  TrainConfig cfg;
  cfg.batch_size = 11;
  CHECK_THROWS_AS(train_model(m, data, data, cfg), ContractError);
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const auto back = train_config_from_json(to_json(TrainConfig{}));
  CHECK(back.batch_size == 256);
  CHECK(back.learning_rate == 1e-4);
}

TEST_CASE("output affine calibration") {
  Sequential<float> m(two_block());
  calibrate_output(m, std::vector<double>{10, 20, 30});
  CHECK(m.output_offset == 20.0);
  CHECK(m.output_scale == doctest::Approx(std::sqrt(200.0 / 3.0)));
  calibrate_output(m, std::vector<double>{4, 4});
  CHECK(m.output_scale == 1.0);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Sequential<float> m(two_block());
  m.initialize(4);
  m.output_offset = 101.5;
  m.output_scale = 12.25;
  const auto ck = snapshot(m, {{"seed", 4}, {"epoch", 2}});
  std::stringstream buf;
  write_checkpoint(buf, ck);
  const auto back = read_checkpoint(buf);
  CHECK(bit_identical(ck, back));
  CHECK(back.topology == two_block());
  auto restored = restore(back);
  const auto x = random_tensor<float>({5, 1, 8, 1}, 1, 0.0, 1.0);
  CHECK(restored.predict(x) == m.predict(x));
  CHECK(back.manifest().at("metadata").at("epoch") == 2);

  std::stringstream bad("PLCKPT99");
  CHECK_THROWS_AS(read_checkpoint(bad), FormatError);
}
