#include <doctest.h>

#include <random>

#include "oracles.hpp"

using namespace imagestar;

namespace {

ImageStar random_input(std::mt19937_64& rng, Shape s, std::size_t m, double scale = 0.5) {
  Image anchor(s);
  for (auto& v : anchor.data()) v = oracle::uniform(rng, -1, 1);
  std::vector<Image> gens;
  for (std::size_t g = 0; g < m; ++g) {
    Image v(s);
    for (auto& x : v.data()) x = scale * oracle::uniform(rng, -1, 1);
    gens.push_back(v);
  }
  const auto n = static_cast<Eigen::Index>(m);
  return ImageStar::box(anchor, gens, Eigen::VectorXd::Constant(n, -1), Eigen::VectorXd::Constant(n, 1));
}

// Checks that the closed-form image of every sampled alpha equals the
// concrete layer output at the corresponding input.
void check_affine_layer(const Layer& layer, const ImageStar& in, std::mt19937_64& rng) {
  const auto out = reach_layer(layer, in, Scheme::Exact);
  REQUIRE(out.size() == 1);
  CHECK(out[0].predicate() == in.predicate());
  CHECK(out[0].shape() == output_shape(layer, in.shape()));
  for (const auto& a : in.predicate()->sample(10, rng)) {
    const Image expect = eval_layer(layer, in.image_at(a));
    CHECK((out[0].image_at(a).flatten() - expect.flatten()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

ImageStar one_pixel(double c, double v, double lo, double hi) {
  return ImageStar::box(Image(Shape{1, 1, 1}, c), {Image(Shape{1, 1, 1}, v)}, Eigen::VectorXd::Constant(1, lo),
                        Eigen::VectorXd::Constant(1, hi));
}

}  // namespace

TEST_CASE("conv2d matches a direct loop implementation") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 25; ++t) {
    const Shape s{oracle::pick(rng, 3, 6), oracle::pick(rng, 3, 6), oracle::pick(rng, 1, 3)};
    Conv2dLayer l;
    const std::size_t k = oracle::pick(rng, 1, 3);
    l.weights = FilterBank(k, k, s.channels, oracle::pick(rng, 1, 3));
    for (auto& w : l.weights.data) w = oracle::uniform(rng, -1, 1);
    l.bias.assign(l.weights.filters, 0.25);
    l.padding = {oracle::pick(rng, 0, 1), oracle::pick(rng, 0, 1), oracle::pick(rng, 0, 1), oracle::pick(rng, 0, 1)};
    l.stride = {oracle::pick(rng, 1, 2), oracle::pick(rng, 1, 2)};
    if (k == 2 && s.height >= 4 && s.width >= 4) l.dilation = {2, 1};
    Image x(s);
    for (auto& v : x.data()) v = oracle::uniform(rng, -1, 1);
    const Image got = eval_layer(l, x);
    const Image expect = oracle::naive_conv(l, x);
    REQUIRE(got.shape() == expect.shape());
    CHECK((got.flatten() - expect.flatten()).cwiseAbs().maxCoeff() < 1e-12);
    check_affine_layer(l, random_input(rng, s, 2), rng);
  }
}

TEST_CASE("conv2d hand example") {
  // 3x3 input 1..9, 2x2 filter [[1, 0], [0, -1]], no padding: x(i,j) - x(i+1,j+1) = -4
  Conv2dLayer l;
  l.weights = FilterBank(2, 2, 1, 1);
  l.weights.at(0, 0, 0, 0) = 1;
  l.weights.at(1, 1, 0, 0) = -1;
  l.bias = {0.5};
  Image x(Shape{3, 3, 1}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Image y = eval_layer(l, x);
  CHECK(y.shape() == Shape{2, 2, 1});
  for (double v : y.data()) CHECK(v == -3.5);
}

TEST_CASE("pooling, fully connected and batch normalization reach") {
  std::mt19937_64 rng(22);
  const Shape s{4, 4, 2};
  AvgPoolLayer avg;
  check_affine_layer(avg, random_input(rng, s, 2), rng);
  AvgPoolLayer padded;
  padded.pool_size = {3, 3};
  padded.stride = {1, 1};
  padded.padding = {1, 1, 1, 1};
  check_affine_layer(padded, random_input(rng, s, 1), rng);
  check_affine_layer(oracle::random_fc(rng, s.size(), 5), random_input(rng, s, 3), rng);
  check_affine_layer(oracle::random_batchnorm(rng, 2), random_input(rng, s, 2), rng);
}

TEST_CASE("avgpool and batchnorm concrete values") {
  Image x(Shape{2, 2, 1}, std::vector<double>{1, 2, 3, 6});
  CHECK(eval_layer(AvgPoolLayer{}, x).data()[0] == 3.0);
  BatchNormLayer bn{{1.0}, {3.0}, 1.0, {2.0}, {0.5}};
  // (6 - 1) / sqrt(4) * 2 + 0.5
  CHECK(eval_layer(bn, x).at(1, 1, 0) == doctest::Approx(5.5));
}

TEST_CASE("output shapes and geometry errors") {
  CHECK(output_shape(MaxPoolLayer{}, Shape{4, 6, 3}) == Shape{2, 3, 3});
  CHECK_THROWS_AS(output_shape(MaxPoolLayer{}, Shape{1, 1, 1}), ShapeError);
  FCLayer fc{Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(2)};
  CHECK(output_shape(fc, Shape{1, 3, 1}) == Shape{1, 1, 2});
  CHECK_THROWS_AS(output_shape(fc, Shape{2, 2, 1}), ShapeError);
  Conv2dLayer conv;
  conv.weights = FilterBank(3, 3, 2, 1);
  conv.bias = {0};
  CHECK_THROWS_AS(output_shape(conv, Shape{4, 4, 1}), ShapeError);
  CHECK_THROWS_AS(output_shape(conv, Shape{2, 2, 2}), ShapeError);
  conv.stride = {0, 1};
  CHECK_THROWS_AS(output_shape(conv, Shape{4, 4, 2}), ShapeError);
  BatchNormLayer bn{{0, 0}, {1, 1}, 1e-5, {1, 1}, {0, 0}};
  CHECK_THROWS_AS(output_shape(bn, Shape{2, 2, 1}), ShapeError);
}

TEST_CASE("golden max pooling split") {
  Image anchor(Shape{2, 2, 1}, std::vector<double>{0, 4, 2, 3});
  Image gen(Shape{2, 2, 1});
  gen.at(0, 1, 0) = 1.0;
  const auto in = ImageStar::box(anchor, {gen}, Eigen::VectorXd::Constant(1, -2), Eigen::VectorXd::Constant(1, 2));
  const auto exact = reach_maxpool_exact(MaxPoolLayer{}, in);
  REQUIRE(exact.size() == 2);
  int high = 0, low = 0;
  for (const auto& s : exact) {
    // the first branch keeps 4 + a (a >= -1), the other keeps 3 (a <= -1)
    if (s.generator(0).data()[0] == 1.0) {
      CHECK(oracle::has_row(s.constraints(), Eigen::RowVectorXd::Constant(1, -1), 1.0));
      CHECK(s.anchor().data()[0] == 4.0);
      ++high;
    } else {
      CHECK(oracle::has_row(s.constraints(), Eigen::RowVectorXd::Constant(1, 1), -1.0));
      CHECK(s.anchor().data()[0] == 3.0);
      ++low;
    }
  }
  CHECK(high == 1);
  CHECK(low == 1);

  const auto approx = reach_maxpool_approx(MaxPoolLayer{}, in);
  REQUIRE(approx.num_vars() == 2);
  const auto& cons = approx.constraints();
  CHECK(oracle::has_row(cons, Eigen::RowVector2d(1, -1), -4.0));  // b >= 4 + a
  CHECK(oracle::has_row(cons, Eigen::RowVector2d(0, -1), -3.0));  // b >= 3
  CHECK(oracle::has_row(cons, Eigen::RowVector2d(0, 1), 6.0));    // b <= 6
  CHECK(approx.generator(1).data()[0] == 1.0);
  CHECK(approx.anchor().data()[0] == 0.0);
}

TEST_CASE("max pooling soundness against sampling") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 15; ++t) {
    const Shape s{4, 4, oracle::pick(rng, 1, 2)};
    const auto in = random_input(rng, s, oracle::pick(rng, 1, 2), 0.8);
    MaxPoolLayer mp;
    if (t % 3 == 0) mp.stride = {1, 1};
    const auto exact = reach_maxpool_exact(mp, in);
    const auto approx = reach_maxpool_approx(mp, in);
    for (const auto& a : in.predicate()->sample(40, rng)) {
      const Eigen::VectorXd y = eval_layer(mp, in.image_at(a)).flatten();
      CHECK(oracle::union_contains(exact, y, 1e-7));
      CHECK(approx.to_star().contains(y, 1e-7));
    }
    // every exact piece evaluates concretely: the piece is the true output on its own predicate
    for (const auto& piece : exact)
      for (const auto& a : piece.predicate()->sample(5, rng)) {
        const Eigen::VectorXd y = eval_layer(mp, in.image_at(a)).flatten();
        CHECK((piece.to_star().point(a) - y).cwiseAbs().maxCoeff() < 1e-9);
      }
  }
}

TEST_CASE("constant input gives one max pooling star") {
  const auto in = ImageStar::singleton(Image(Shape{4, 4, 1}, 1.0));
  CHECK(reach_maxpool_exact(MaxPoolLayer{}, in).size() == 1);
  CHECK(reach_maxpool_approx(MaxPoolLayer{}, in).num_vars() == 0);
}

TEST_CASE("step ReLU cases") {
  CHECK(step_relu(one_pixel(2, 1, -1, 1), 0).size() == 1);
  const auto neg = step_relu(one_pixel(-2, 1, -1, 1), 0);
  REQUIRE(neg.size() == 1);
  CHECK(neg[0].anchor().data()[0] == 0.0);
  CHECK(neg[0].generator(0).data()[0] == 0.0);
  const auto split = step_relu(one_pixel(-1, 1, -2, 2), 0);
  REQUIRE(split.size() == 2);
  // keep branch: -1 + a >= 0, zero branch: -1 + a <= 0
  CHECK(oracle::has_row(split[0].constraints(), Eigen::RowVectorXd::Constant(1, -1), -1.0));
  CHECK(split[0].anchor().data()[0] == -1.0);
  CHECK(oracle::has_row(split[1].constraints(), Eigen::RowVectorXd::Constant(1, 1), 1.0));
  CHECK(split[1].anchor().data()[0] == 0.0);
}

TEST_CASE("golden approximate ReLU") {
  const auto out = reach_relu_approx(one_pixel(-1, 1, -2, 2));
  REQUIRE(out.num_vars() == 2);
  const auto& cons = out.constraints();
  CHECK(cons.num_rows() == 2 + 3);
  CHECK(oracle::has_row(cons, Eigen::RowVector2d(0, -1), 0.0));      // b >= 0
  CHECK(oracle::has_row(cons, Eigen::RowVector2d(1, -1), 1.0));      // b >= -1 + a
  CHECK(oracle::has_row(cons, Eigen::RowVector2d(-0.25, 1), 0.5));   // b <= 0.5 + 0.25 a
  CHECK(out.anchor().data()[0] == 0.0);
  CHECK(out.generator(1).data()[0] == 1.0);
}

TEST_CASE("ReLU soundness, exactness and complexity bounds") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 20; ++t) {
    const Shape s{oracle::pick(rng, 1, 3), oracle::pick(rng, 1, 3), 1};
    const auto in = random_input(rng, s, oracle::pick(rng, 1, 2));
    std::size_t splitting = 0;
    for (Eigen::Index i = 0; i < in.num_pixels(); ++i) {
      const Interval r = in.to_star().exact_range(i);
      if (r.lo < 0 && r.hi > 0) ++splitting;
    }
    const auto exact = reach_relu_exact(in);
    const auto approx = reach_relu_approx(in);
    CHECK(exact.size() <= (std::size_t{1} << splitting));
    CHECK(approx.num_vars() == in.num_vars() + static_cast<Eigen::Index>(splitting));
    CHECK(approx.constraints().num_rows() ==
          in.constraints().num_rows() + 3 * static_cast<Eigen::Index>(splitting));
    for (const auto& a : in.predicate()->sample(40, rng)) {
      const Eigen::VectorXd y = eval_layer(ReLULayer{}, in.image_at(a)).flatten();
      CHECK(oracle::union_contains(exact, y, 1e-7));
      CHECK(approx.to_star().contains(y, 1e-7));
    }
    for (const auto& piece : exact)
      for (const auto& a : piece.predicate()->sample(5, rng)) {
        const Eigen::VectorXd y = eval_layer(ReLULayer{}, in.image_at(a)).flatten();
        CHECK((piece.to_star().point(a) - y).cwiseAbs().maxCoeff() < 1e-7);
      }
  }
}

TEST_CASE("empty inputs produce no stars") {
  auto p = Predicate::make(LinearConstraints(Eigen::Vector2d(1, -1), Eigen::Vector2d(-1, -3)));
  const ImageStar empty(Image(Shape{1, 1, 1}), {Image(Shape{1, 1, 1}, 1.0)}, p);
  CHECK(reach_relu_exact(empty).empty());
  CHECK(reach_layer(ReLULayer{}, empty, Scheme::Exact).empty());
}

TEST_CASE("zero padding") {
  const auto in = ImageStar::singleton(Image(Shape{1, 1, 1}, 3.0));
  const auto out = zero_pad(in, {1, 0, 0, 2});
  CHECK(out.shape() == Shape{2, 3, 1});
  CHECK(out.anchor().at(1, 0, 0) == 3.0);
  CHECK(out.anchor().at(0, 0, 0) == 0.0);
}
