#include "imagestar/network.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace imagestar {

namespace {

// Maps fn over items with a small worker pool; output order matches input order.
template <typename Fn>
std::vector<std::vector<ImageStar>> parallel_map(const std::vector<ImageStar>& items, unsigned threads, Fn fn) {
  std::vector<std::vector<ImageStar>> results(items.size());
  const unsigned workers = std::min<std::size_t>(threads, items.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) results[i] = fn(items[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < items.size(); i = next++) {
        try {
          results[i] = fn(items[i]);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = items.size();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace

Network::Network(Shape input_shape, std::vector<Layer> layers, std::vector<std::string> labels)
    : input_shape_(input_shape), layers_(std::move(layers)), labels_(std::move(labels)) {
  if (input_shape_.size() == 0) throw ShapeError("network input shape must be non-empty");
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      shapes_.push_back(imagestar::output_shape(layers_[i], shapes_.back()));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " (" + layer_kind(layers_[i]) + "): " + e.what());
    }
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < shapes_.back().size(); ++i) labels_.push_back(std::to_string(i));
  } else if (labels_.size() != shapes_.back().size()) {
    throw ShapeError("network has " + std::to_string(shapes_.back().size()) + " outputs but " +
                     std::to_string(labels_.size()) + " labels");
  }
}

ReachResult reach(const Network& net, const ImageStar& input, const ReachOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t lp_before = lp_call_count();
  if (input.shape() != net.input_shape())
    throw ShapeError("input set " + input.shape().str() + " does not match network input " + net.input_shape().str());
  if (input.is_empty()) throw EmptyInput("input set is empty");

  unsigned threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  ReachResult result;
  std::vector<ImageStar> current{input};
  for (const auto& layer : net.layers()) {
    const auto parts = parallel_map(current, options.scheme == Scheme::Exact ? threads : 1u,
                                    [&](const ImageStar& s) { return reach_layer(layer, s, options.scheme, options.star_budget); });
    std::vector<ImageStar> next;
    for (const auto& p : parts) next.insert(next.end(), p.begin(), p.end());
    if (options.scheme == Scheme::Exact && next.size() > options.star_budget)
      throw BudgetExceeded("exact reachability produced " + std::to_string(next.size()) + " stars, budget is " +
                           std::to_string(options.star_budget));
    result.stats.stars_per_layer.push_back(next.size());
    current = std::move(next);
  }
  result.output_sets = std::move(current);
  result.stats.lp_calls = lp_call_count() - lp_before;
  result.stats.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Image eval_image(const Network& net, const Image& x) {
  if (x.shape() != net.input_shape())
    throw ShapeError("image " + x.shape().str() + " does not match network input " + net.input_shape().str());
  Image y = x;
  for (const auto& layer : net.layers()) y = eval_layer(layer, y);
  return y;
}

Eigen::VectorXd eval(const Network& net, const Image& x) { return eval_image(net, x).flatten(); }

}  // namespace imagestar
