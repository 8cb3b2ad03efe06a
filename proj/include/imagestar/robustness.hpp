#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imagestar/network.hpp"

namespace imagestar {

// ---------------------------------------------------------------------------
// Attack input sets

/// Darkening attack: every pixel with value >= threshold may drop anywhere in
/// [0, delta * x]. The anchor holds the image with attacked pixels set to 0
/// and each attacked pixel gets one unit generator with 0 <= alpha <= delta*x.
///
/// Throws NoAttackedPixels when no pixel reaches the threshold, unless
/// allow_singleton is set, in which case the singleton {image} is returned.
ImageStar brightening_set(const Image& image, double threshold, double delta, bool allow_singleton = false);

/// Pixels on the segment ori + (l + t) (adv - ori), 0 <= t <= delta_max.
ImageStar interpolation_set(const Image& ori, const Image& adv, double l, double delta_max);

/// Each pixel x >= 1 - delta may move anywhere in [x, 1]; the others are fixed.
ImageStar zonotope_brightening_set(const Image& image, double delta);

/// Number of pixels a brightening attack with this threshold touches.
std::size_t count_attacked_pixels(const Image& image, double threshold);

// ---------------------------------------------------------------------------
// Verification

enum class Verdict { Robust, NotRobust, Unknown };

const char* verdict_name(Verdict v);

struct Counterexample {
  Image input;
  std::size_t predicted_label = 0;
  Eigen::VectorXd logits;
};

struct RobustnessResult {
  Verdict verdict = Verdict::Unknown;
  std::vector<Counterexample> counterexamples;
  std::optional<std::size_t> violating_label;
  /// Extraction candidates rejected by concrete re-evaluation.
  std::size_t discarded_candidates = 0;
  /// True when the verdict came from the random-simulation falsifier.
  bool falsified = false;
  /// Reach statistics; lp_calls also counts the violation checks.
  ReachStats stats;
  std::vector<ImageStar> output_sets;
};

struct VerifyOptions {
  ReachOptions reach;
  /// Counterexamples to extract per violation.
  std::size_t counterexample_count = 5;
  std::uint64_t seed = 0;
  /// Under the approx scheme, an inconclusive answer triggers this many
  /// falsification samples (0 disables).
  std::size_t falsify_samples = 0;
};

/// True when some label j != target scores y_j >= y_target - tie_tol.
bool misclassifies(const Eigen::VectorXd& logits, std::size_t target, double tie_tol = NumericConfig::tie_tol);

/// Highest-scoring label, breaking ties away from `target`.
std::size_t predicted_label(const Eigen::VectorXd& logits, std::size_t target);

/// Output set ∩ {y_label >= y_target}.
Star violation_set(const Star& output, std::size_t target, std::size_t label);

RobustnessResult verify_robustness(const Network& net, const ImageStar& input_set, std::size_t target_label,
                                   const VerifyOptions& options = {});

struct ExtractionResult {
  std::vector<Counterexample> valid;
  std::size_t discarded = 0;
};

/// Turns feasible points of a violating output set (output ∩ {y_label >= y_target})
/// into concrete input images: the LP witness maximizing y_label - y_target plus
/// random feasible samples, mapped through the input set on the shared
/// predicate variables and validated by concrete evaluation.
///
/// Throws WitnessMappingFailed when the violating set has predicate variables
/// the input set does not (approx-scheme output).
ExtractionResult extract_counterexamples(const Network& net, const ImageStar& input_set, const Star& violating,
                                         std::size_t target, std::size_t label, std::size_t k, std::uint64_t seed);

/// Random simulation. Returns the first sampled input that misclassifies;
/// an empty result proves nothing.
std::optional<Counterexample> falsify(const Network& net, const ImageStar& input_set, std::size_t target,
                                      std::size_t n_samples, std::uint64_t seed);

}  // namespace imagestar
