#include <cmath>
#include <filesystem>
#include <cstring>
#include <limits>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "xdrive/nn/adam.hpp"
#include "xdrive/nn/checkpoint.hpp"

using namespace xdrive;
using namespace xdrive::nn;
using testing::random_matrix;

TEST_CASE("finite differences agree with backward for every layer") {
  for (const auto& c : testing::layer_checks()) {
    CAPTURE(c.name);
    CHECK(testing::run_trials(c, 100, 11) < 1e-4);
  }
}

TEST_CASE("dense: zero weights under tanh give zeros") {
  Dense<double> d(4, 3, Activation::tanh);
  Rng rng(1);
  CHECK(forward(d, random_matrix(4, 5, rng, 5.0)).isZero(0.0));
}

TEST_CASE("dense: parameter gradient is the outer-product sum for a ones upstream") {
  Rng rng(2);
  Dense<double> d(3, 2, Activation::identity);
  d.weight = random_matrix(2, 3, rng);
  const MatrixD x = random_matrix(3, 4, rng);
  const MatrixD ones = MatrixD::Ones(2, 4);
  auto g = zeros_like(d);
  backward(d, x, forward(d, x), ones, g);
  for (Index o = 0; o < 2; ++o)
    for (Index i = 0; i < 3; ++i) CHECK(g.weight(o, i) == doctest::Approx(x.row(i).sum()).epsilon(1e-12));
  CHECK(g.bias(0) == 4.0);
}

TEST_CASE("zero upstream gradient leaves every gradient zero") {
  Rng rng(3);
  auto net = make_mlp<double>({4, 5, 2}, Activation::relu, Activation::tanh);
  initialize(net, rng);
  MlpTrace<double> tr;
  forward(net, random_matrix(4, 3, rng), &tr);
  auto g = zeros_like(net);
  CHECK(backward(net, tr, MatrixD(MatrixD::Zero(2, 3)), g).isZero(0.0));
  for (const auto& p : g.parameters()) CHECK(p.map().isZero(0.0));
}

TEST_CASE("conv2d: centred unit kernel copies the input interior") {
  Conv2d<double> c(1, 5, 6, 1, 3, 1, Padding::valid, Activation::identity);
  c.weight.setZero();
  c.weight(0, 4) = 1.0;
  Rng rng(4);
  const MatrixD x = random_matrix(30, 1, rng);
  const MatrixD y = forward(c, x);
  REQUIRE(y.rows() == 3 * 4);
  for (Index r = 0; r < 3; ++r)
    for (Index col = 0; col < 4; ++col) CHECK(y(r * 4 + col, 0) == x((r + 1) * 6 + col + 1, 0));
}

TEST_CASE("conv2d: output size for same padding and stride 2") {
  Conv2d<float> c(1, 64, 64, 8, 3, 2, Padding::same, Activation::relu);
  CHECK(c.out_height() == 32);
  CHECK(c.out_width() == 32);
  CHECK_THROWS_AS(forward(c, MatrixF(MatrixF::Zero(10, 1))), ShapeMismatch);
}

TEST_CASE("lstm: gates forced shut give a near-zero hidden state") {
  LstmCell<double> cell(3, 4);
  cell.bias.setConstant(-50.0);
  Rng rng(5);
  cell.w_input = random_matrix(16, 3, rng, 0.1);
  const auto next = forward(cell, random_matrix(3, 2, rng), LstmState<double>::zeros(4, 2));
  CHECK(next.hidden.cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("softmax") {
  SUBCASE("uniform logits") {
    const MatrixD p = softmax(MatrixD::Constant(4, 1, 0.7));
    for (Index i = 0; i < 4; ++i) CHECK(p(i, 0) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("shift invariance") {
    Rng rng(6);
    const MatrixD z = random_matrix(6, 3, rng);
    CHECK((softmax(z) - softmax((z.array() + 123.0).matrix())).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("reference values") {
    MatrixD z(3, 1);
    z << 2.0, 1.0, 0.1;
    const MatrixD p = softmax(z);
    // exp(2), exp(1), exp(0.1) over their sum, evaluated independently
    const double e0 = std::exp(2.0), e1 = std::exp(1.0), e2 = std::exp(0.1), s = e0 + e1 + e2;
    CHECK(p(0, 0) == doctest::Approx(e0 / s).epsilon(1e-12));
    CHECK(p(1, 0) == doctest::Approx(e1 / s).epsilon(1e-12));
    CHECK(p(2, 0) == doctest::Approx(e2 / s).epsilon(1e-12));
    CHECK(std::abs(p(0, 0) - 0.6590) < 5e-5);
    CHECK(std::abs(p(1, 0) - 0.2424) < 5e-5);
    CHECK(std::abs(p(2, 0) - 0.0986) < 5e-5);
  }
  SUBCASE("extreme logits stay finite and sum to one") {
    MatrixD z(3, 1);
    z << 1000.0, -1000.0, 0.0;
    const MatrixD p = softmax(z);
    CHECK(p.allFinite());
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("cross entropy is -log p[target]") {
    MatrixD p(2, 1);
    p << 0.25, 0.75;
    const Index t[] = {1};
    CHECK(cross_entropy(p, std::span<const Index>(t)) == doctest::Approx(-std::log(0.75)));
  }
}

TEST_CASE("dropout") {
  Rng rng(7);
  const MatrixD x = random_matrix(8, 3, rng);
  CHECK(dropout(x, 0.0, Mode::train, rng) == x);
  CHECK(dropout(x, 0.5, Mode::eval, rng) == x);
  CHECK_THROWS_AS(dropout(x, 1.0, Mode::train, rng), InvalidP);
  CHECK_THROWS_AS(dropout(x, -0.1, Mode::train, rng), InvalidP);

  const MatrixD big = MatrixD::Ones(100000, 1);
  const MatrixD y = dropout(big, 0.5, Mode::train, rng);
  const double zeros = static_cast<double>((y.array() == 0.0).count()) / 1e5;
  CHECK(std::abs(zeros - 0.5) < 0.01);
  CHECK(((y.array() == 0.0) || (y.array() == 2.0)).all());
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    MatrixD p = MatrixD::Constant(2, 2, 0.3);
    AdamSlot<double> slot(2, 2);
    for (int i = 0; i < 5; ++i) adam_step(p, MatrixD::Zero(2, 2), slot, AdamConfig{});
    CHECK(p == MatrixD::Constant(2, 2, 0.3));
  }
  SUBCASE("first step with g = 1 moves by lr / (1 + eps)") {
    MatrixD p = MatrixD::Zero(1, 1);
    AdamSlot<double> slot(1, 1);
    AdamConfig cfg;
    cfg.lr = 0.01;
    adam_step(p, MatrixD::Ones(1, 1), slot, cfg);
    CHECK(p(0, 0) == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("constant gradient steps approach lr * sign(g)") {
    MatrixD p = MatrixD::Zero(1, 2);
    AdamSlot<double> slot(1, 2);
    AdamConfig cfg;
    cfg.lr = 1e-3;
    MatrixD g(1, 2);
    g << 3.0, -0.2;
    MatrixD before;
    for (int i = 0; i < 2000; ++i) {
      before = p;
      adam_step(p, g, slot, cfg);
    }
    CHECK((p - before)(0, 0) == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK((p - before)(0, 1) == doctest::Approx(1e-3).epsilon(1e-6));
  }
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42), c(43), d(42, 1);
  bool differs_seed = false, differs_stream = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_seed = differs_seed || x != c.next_u64();
    differs_stream = differs_stream || x != d.next_u64();
  }
  CHECK(differs_seed);
  CHECK(differs_stream);
  Rng pinned(2024);
  const auto first = pinned.next_u64();
  Rng again(2024);
  CHECK(first == again.next_u64());
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += pinned.uniform();
  CHECK(std::abs(sum / 1e5 - 0.5) < 0.005);
}

TEST_CASE("composed parameter count is the sum of layer counts") {
  auto net = make_mlp<float>({33, 64, 64, 2}, Activation::relu, Activation::tanh);
  CHECK(parameter_count(net.parameters()) == (33 * 64 + 64) + (64 * 64 + 64) + (64 * 2 + 2));
}

TEST_CASE("bounded inputs never produce NaN or Inf") {
  Rng rng(8);
  auto net = make_mlp<float>({6, 16, 16, 3}, Activation::relu, Activation::tanh);
  initialize(net, rng);
  MatrixF x(6, 50);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.uniform(-10.0, 10.0));
  MlpTrace<float> tr;
  CHECK(forward(net, x, &tr).allFinite());
  auto g = zeros_like(net);
  CHECK(backward(net, tr, MatrixF(MatrixF::Ones(3, 50)), g).allFinite());
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  Rng rng(9);
  auto net = make_mlp<float>({5, 7, 3}, Activation::relu, Activation::identity);
  initialize(net, rng);
  net.layers[0].weight(0, 0) = std::numeric_limits<float>::denorm_min();
  net.layers[0].weight(1, 0) = -0.0f;
  const auto path = std::filesystem::temp_directory_path() / "xdrive_nn_test.ckpt";
  save_parameters(path, net.parameters());
  auto other = make_mlp<float>({5, 7, 3}, Activation::relu, Activation::identity);
  load_parameters(path, other.parameters());
  const auto a = net.parameters(), b = other.parameters();
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::memcmp(a[i].data, b[i].data, sizeof(float) * static_cast<std::size_t>(a[i].size())) == 0);
  const auto bytes = encode_checkpoint(to_checkpoint(a));
  CHECK(std::string(bytes.data(), 4) == "XDCK");

  auto wrong = make_mlp<float>({5, 8, 3}, Activation::relu, Activation::identity);
  CHECK_THROWS_AS(load_parameters(path, wrong.parameters()), ShapeMismatch);
  auto truncated = bytes;
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(decode_checkpoint(truncated), FormatError);
  std::filesystem::remove(path);
}
