#include "imagestar/robustness.hpp"

#include <cmath>
#include <random>

namespace imagestar {

namespace {

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
}

Image unit_image(const Shape& s, std::size_t flat, double value) {
  Image g(s);
  g.data()[flat] = value;
  return g;
}

}  // namespace

std::size_t count_attacked_pixels(const Image& image, double threshold) {
  std::size_t n = 0;
  for (double x : image.data())
    if (x >= threshold) ++n;
  return n;
}

ImageStar brightening_set(const Image& image, double threshold, double delta, bool allow_singleton) {
  check_fraction(delta, "delta");
  if (!std::isfinite(threshold)) throw Error("threshold must be finite");
  Image anchor = image;
  std::vector<Image> generators;
  std::vector<double> ub;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double x = image.data()[i];
    if (x < threshold) continue;
    anchor.data()[i] = 0.0;
    generators.push_back(unit_image(image.shape(), i, 1.0));
    ub.push_back(delta * x);
  }
  if (generators.empty()) {
    if (!allow_singleton)
      throw NoAttackedPixels("no pixel reaches the brightening threshold " + std::to_string(threshold));
    return ImageStar::singleton(image);
  }
  const auto m = static_cast<Eigen::Index>(ub.size());
  return ImageStar::box(anchor, generators, Eigen::VectorXd::Zero(m), Eigen::Map<const Eigen::VectorXd>(ub.data(), m));
}

ImageStar interpolation_set(const Image& ori, const Image& adv, double l, double delta_max) {
  if (ori.shape() != adv.shape())
    throw DimensionMismatch("adversarial image " + adv.shape().str() + " does not match " + ori.shape().str());
  check_fraction(l, "l");
  check_fraction(delta_max, "delta_max");
  const Eigen::VectorXd diff = adv.flatten() - ori.flatten();
  const Image anchor(ori.shape(), Eigen::VectorXd(ori.flatten() + l * diff));
  const Image generator(ori.shape(), diff);
  return ImageStar::box(anchor, {generator}, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, delta_max));
}

ImageStar zonotope_brightening_set(const Image& image, double delta) {
  check_fraction(delta, "delta");
  std::vector<Image> generators;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double x = image.data()[i];
    if (x >= 1.0 - delta && x < 1.0) generators.push_back(unit_image(image.shape(), i, 1.0 - x));
  }
  if (generators.empty()) return ImageStar::singleton(image);
  const auto m = static_cast<Eigen::Index>(generators.size());
  return ImageStar::box(image, generators, Eigen::VectorXd::Zero(m), Eigen::VectorXd::Ones(m));
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Robust:
      return "Robust";
    case Verdict::NotRobust:
      return "NotRobust";
    case Verdict::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

bool misclassifies(const Eigen::VectorXd& logits, std::size_t target, double tie_tol) {
  const auto t = static_cast<Eigen::Index>(target);
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    if (j != t && logits(j) >= logits(t) - tie_tol) return true;
  return false;
}

std::size_t predicted_label(const Eigen::VectorXd& logits, std::size_t target) {
  Eigen::Index best = -1;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    if (best < 0 || logits(j) > logits(best) ||
        (logits(j) == logits(best) && best == static_cast<Eigen::Index>(target)))
      best = j;
  }
  return static_cast<std::size_t>(best);
}

Star violation_set(const Star& output, std::size_t target, std::size_t label) {
  if (target >= static_cast<std::size_t>(output.dim()) || label >= static_cast<std::size_t>(output.dim()))
    throw DimensionMismatch("label index out of range");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, output.dim());
  h(0, static_cast<Eigen::Index>(target)) = 1.0;
  h(0, static_cast<Eigen::Index>(label)) -= 1.0;
  return output.intersect_halfspace(h, Eigen::VectorXd::Zero(1));
}

ExtractionResult extract_counterexamples(const Network& net, const ImageStar& input_set, const Star& violating,
                                         std::size_t target, std::size_t label, std::size_t k, std::uint64_t seed) {
  if (violating.num_vars() != input_set.num_vars())
    throw WitnessMappingFailed("violating set has " + std::to_string(violating.num_vars()) +
                               " predicate variables, input set has " + std::to_string(input_set.num_vars()) +
                               "; counterexamples need an exact-scheme output");
  ExtractionResult out;
  if (k == 0 || violating.is_empty()) return out;

  std::vector<Eigen::VectorXd> alphas;
  const Eigen::VectorXd objective =
      (violating.basis().row(static_cast<Eigen::Index>(label)) - violating.basis().row(static_cast<Eigen::Index>(target)))
          .transpose();
  if (violating.num_vars() == 0) {
    alphas.emplace_back();
  } else {
    const LPOutcome best = maximize(objective, violating.constraints());
    if (best.optimal()) alphas.push_back(best.witness);
    std::mt19937_64 rng(seed);
    for (auto& a : violating.predicate()->sample(2 * k, rng)) alphas.push_back(std::move(a));
  }

  for (const auto& alpha : alphas) {
    if (out.valid.size() >= k) break;
    Image x = input_set.image_at(alpha);
    Eigen::VectorXd logits = eval(net, x);
    if (input_set.contains_image(x) && misclassifies(logits, target)) {
      const std::size_t pred = predicted_label(logits, target);
      out.valid.push_back({std::move(x), pred, std::move(logits)});
    } else {
      ++out.discarded;
    }
  }
  return out;
}

std::optional<Counterexample> falsify(const Network& net, const ImageStar& input_set, std::size_t target,
                                      std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0 || input_set.is_empty()) return std::nullopt;
  for (auto& x : input_set.sample(n_samples, seed)) {
    Eigen::VectorXd logits = eval(net, x);
    if (misclassifies(logits, target)) {
      const std::size_t pred = predicted_label(logits, target);
      return Counterexample{std::move(x), pred, std::move(logits)};
    }
  }
  return std::nullopt;
}

RobustnessResult verify_robustness(const Network& net, const ImageStar& input_set, std::size_t target_label,
                                   const VerifyOptions& options) {
  const std::size_t outputs = net.num_outputs();
  if (outputs < 2) throw ShapeError("robustness needs at least two network outputs");
  if (target_label >= outputs)
    throw DimensionMismatch("target label " + std::to_string(target_label) + " out of range for " +
                            std::to_string(outputs) + " outputs");

  const std::uint64_t lp_before = lp_call_count();
  ReachResult rr = reach(net, input_set, options.reach);
  RobustnessResult result;
  result.stats = rr.stats;
  result.verdict = Verdict::Robust;

  bool violated = false;
  for (std::size_t s = 0; s < rr.output_sets.size(); ++s) {
    const Star& out = rr.output_sets[s].to_star();
    for (std::size_t j = 0; j < outputs; ++j) {
      if (j == target_label) continue;
      const Star bad = violation_set(out, target_label, j);
      if (bad.is_empty()) continue;
      violated = true;
      if (options.reach.scheme == Scheme::Approx) break;
      auto ex = extract_counterexamples(net, input_set, bad, target_label, j, options.counterexample_count,
                                        options.seed + s * outputs + j);
      result.discarded_candidates += ex.discarded;
      if (!ex.valid.empty()) {
        if (!result.violating_label) result.violating_label = j;
        for (auto& c : ex.valid) result.counterexamples.push_back(std::move(c));
        break;
      }
    }
    if (violated && (options.reach.scheme == Scheme::Approx || !result.counterexamples.empty())) break;
  }

  if (violated) {
    if (!result.counterexamples.empty()) {
      result.verdict = Verdict::NotRobust;
    } else {
      // Approx scheme, or an exact violation that no concrete input could confirm.
      result.verdict = Verdict::Unknown;
      if (options.falsify_samples > 0) {
        if (auto cex = falsify(net, input_set, target_label, options.falsify_samples, options.seed)) {
          result.verdict = Verdict::NotRobust;
          result.falsified = true;
          result.violating_label = cex->predicted_label;
          result.counterexamples.push_back(std::move(*cex));
        }
      }
    }
  }
  result.stats.lp_calls = lp_call_count() - lp_before;
  result.output_sets = std::move(rr.output_sets);
  return result;
}

}  // namespace imagestar
