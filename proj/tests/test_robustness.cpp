#include <doctest.h>

#include <random>

#include "oracles.hpp"

using namespace imagestar;

namespace {

Network identity2() {
  return Network(Shape{1, 2, 1}, {FCLayer{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}});
}

// Two copies of x through a ReLU, then y0 = 0.25 and y1 = relu(x) - relu(x).
// The exact scheme sees y1 = 0; the triangle relaxation loses the correlation.
Network relu_gap() {
  FCLayer split{Eigen::MatrixXd::Ones(2, 1), Eigen::VectorXd::Zero(2)};
  Eigen::MatrixXd w(2, 2);
  w << 0, 0, 1, -1;
  FCLayer head{w, Eigen::Vector2d(0.25, 0)};
  return Network(Shape{1, 1, 1}, {split, ReLULayer{}, head});
}

Image row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Image(Shape{1, n, 1}, std::move(v));
}

}  // namespace

TEST_CASE("brightening set") {
  Image x(Shape{1, 3, 1}, std::vector<double>{250, 100, 255});
  const auto s = brightening_set(x, 150, 0.01);
  CHECK(s.num_vars() == 2);
  CHECK(count_attacked_pixels(x, 150) == 2);
  const Interval a = s.pixel_exact_range({0, 0, 0});
  CHECK(a.lo == doctest::Approx(0.0));
  CHECK(a.hi == doctest::Approx(2.5));
  const Interval b = s.pixel_exact_range({0, 2, 0});
  CHECK(b.hi == doctest::Approx(2.55));
  CHECK(s.pixel_exact_range({0, 1, 0}).lo == 100.0);
  // threshold is inclusive
  CHECK(brightening_set(x, 255, 0.5).num_vars() == 1);
  CHECK_THROWS_AS(brightening_set(x, 300, 0.01), NoAttackedPixels);
  CHECK(brightening_set(x, 300, 0.01, true).num_vars() == 0);
  CHECK_THROWS(brightening_set(x, 150, 1.5));
}

TEST_CASE("interpolation and zonotope sets") {
  const auto s = interpolation_set(row({1, 0}), row({1, 2}), 0.25, 0.5);
  CHECK(s.pixel_exact_range({0, 1, 0}).lo == doctest::Approx(0.5));
  CHECK(s.pixel_exact_range({0, 1, 0}).hi == doctest::Approx(1.5));
  CHECK_THROWS_AS(interpolation_set(row({1, 0}), row({1}), 0, 1), DimensionMismatch);
  CHECK_THROWS(interpolation_set(row({1, 0}), row({1, 2}), -0.1, 1));

  const auto z = zonotope_brightening_set(row({0.95, 0.5, 1.0}), 0.1);
  CHECK(z.num_vars() == 1);
  CHECK(z.pixel_exact_range({0, 0, 0}).hi == doctest::Approx(1.0));
  CHECK(z.pixel_exact_range({0, 0, 0}).lo == doctest::Approx(0.95));
  CHECK(zonotope_brightening_set(row({0.2}), 0.1).num_vars() == 0);
}

TEST_CASE("misclassification uses the tie tolerance") {
  CHECK_FALSE(misclassifies(Eigen::Vector2d(1, 0.5), 0));
  CHECK(misclassifies(Eigen::Vector2d(1, 1), 0));
  CHECK(misclassifies(Eigen::Vector2d(1, 1 - 1e-10), 0));
  CHECK(predicted_label(Eigen::Vector2d(1, 1), 0) == 1);
  CHECK(predicted_label(Eigen::Vector3d(0, 2, 1), 0) == 1);
}

TEST_CASE("identity network fixture") {
  const Network net = identity2();
  const auto wide = interpolation_set(row({1, 0}), row({1, 2}), 0, 1);
  const auto narrow = interpolation_set(row({1, 0}), row({1, 2}), 0, 0.2);

  CHECK(verify_robustness(net, narrow, 0).verdict == Verdict::Robust);

  const auto r = verify_robustness(net, wide, 0);
  CHECK(r.verdict == Verdict::NotRobust);
  REQUIRE(r.violating_label);
  CHECK(*r.violating_label == 1);
  CHECK(r.counterexamples.size() >= 1);
  CHECK(oracle::counterexamples_valid(net, wide, 0, r));
  // the LP witness is the most violating point of the segment
  CHECK(r.counterexamples.front().logits(1) == doctest::Approx(2.0));

  VerifyOptions approx;
  approx.reach.scheme = Scheme::Approx;
  CHECK(verify_robustness(net, wide, 0, approx).verdict == Verdict::Unknown);
  approx.falsify_samples = 200;
  const auto f = verify_robustness(net, wide, 0, approx);
  CHECK(f.verdict == Verdict::NotRobust);
  CHECK(f.falsified);
  CHECK(oracle::counterexamples_valid(net, wide, 0, f));
}

TEST_CASE("ReLU gap fixture separates the schemes") {
  const Network net = relu_gap();
  const auto in = interpolation_set(Image(Shape{1, 1, 1}, -1.0), Image(Shape{1, 1, 1}, 1.0), 0, 1);
  const auto exact = verify_robustness(net, in, 0);
  CHECK(exact.verdict == Verdict::Robust);
  CHECK(exact.output_sets.size() == 2);
  VerifyOptions approx;
  approx.reach.scheme = Scheme::Approx;
  approx.falsify_samples = 100;
  const auto r = verify_robustness(net, in, 0, approx);
  CHECK(r.verdict == Verdict::Unknown);
  CHECK_FALSE(r.falsified);
}

TEST_CASE("counterexample extraction needs shared predicate variables") {
  const Network net = relu_gap();
  const auto in = interpolation_set(Image(Shape{1, 1, 1}, -1.0), Image(Shape{1, 1, 1}, 1.0), 0, 1);
  ReachOptions o;
  o.scheme = Scheme::Approx;
  const auto out = reach(net, in, o).output_sets.front();
  const Star bad = violation_set(out.to_star(), 0, 1);
  CHECK_THROWS_AS(extract_counterexamples(net, in, bad, 0, 1, 3, 0), WitnessMappingFailed);
}

TEST_CASE("verification argument checks") {
  const Network net = identity2();
  const auto s = interpolation_set(row({1, 0}), row({1, 2}), 0, 1);
  CHECK_THROWS_AS(verify_robustness(net, s, 2), DimensionMismatch);
  const Network single(Shape{1, 1, 1}, {ReLULayer{}});
  CHECK_THROWS_AS(verify_robustness(single, ImageStar::singleton(Image(Shape{1, 1, 1})), 0), ShapeError);
}

TEST_CASE("random robustness queries: counterexamples are valid and schemes are ordered") {
  std::mt19937_64 rng(41);
  int not_robust = 0, robust = 0;
  for (int t = 0; t < 25; ++t) {
    const auto c = oracle::random_case(rng, t % 2 ? 0.05 : 0.6);
    const std::size_t target = oracle::anchor_label(c.net, c.input);
    const auto exact = verify_robustness(c.net, c.input, target);
    VerifyOptions ao;
    ao.reach.scheme = Scheme::Approx;
    const auto approx = verify_robustness(c.net, c.input, target, ao);
    CHECK(oracle::counterexamples_valid(c.net, c.input, target, exact));
    if (approx.verdict == Verdict::Robust) CHECK(exact.verdict == Verdict::Robust);
    CHECK(approx.verdict != Verdict::NotRobust);
    not_robust += exact.verdict == Verdict::NotRobust;
    robust += exact.verdict == Verdict::Robust;
  }
  CHECK(not_robust > 0);
  CHECK(robust > 0);
}
