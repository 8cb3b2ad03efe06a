#include "imagestar/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace imagestar {

namespace {

std::size_t pooled_extent(std::size_t in, std::size_t pad_a, std::size_t pad_b, std::size_t window, std::size_t stride,
                          const char* what) {
  if (stride == 0) throw ShapeError(std::string(what) + ": stride must be >= 1");
  if (window == 0) throw ShapeError(std::string(what) + ": window must be >= 1");
  const std::size_t padded = in + pad_a + pad_b;
  if (padded < window)
    throw ShapeError(std::string(what) + ": window " + std::to_string(window) + " exceeds padded extent " +
                     std::to_string(padded));
  return (padded - window) / stride + 1;
}

Shape padded_shape(const Shape& s, const Padding& p) {
  return {s.height + p.top + p.bottom, s.width + p.left + p.right, s.channels};
}

Shape conv_shape(const Conv2dLayer& l, const Shape& in) {
  const auto& w = l.weights;
  if (w.channels != in.channels)
    throw ShapeError("conv2d: filters have " + std::to_string(w.channels) + " channels, input has " +
                     std::to_string(in.channels));
  if (l.bias.size() != w.filters)
    throw ShapeError("conv2d: " + std::to_string(l.bias.size()) + " biases for " + std::to_string(w.filters) +
                     " filters");
  if (w.data.size() != w.height * w.width * w.channels * w.filters)
    throw ShapeError("conv2d: weight count does not match filter geometry");
  if (l.dilation[0] == 0 || l.dilation[1] == 0) throw ShapeError("conv2d: dilation must be >= 1");
  const std::size_t eff_h = (w.height - 1) * l.dilation[0] + 1;
  const std::size_t eff_w = (w.width - 1) * l.dilation[1] + 1;
  return {pooled_extent(in.height, l.padding.top, l.padding.bottom, eff_h, l.stride[0], "conv2d"),
          pooled_extent(in.width, l.padding.left, l.padding.right, eff_w, l.stride[1], "conv2d"), w.filters};
}

Shape pool_shape(const Pair& pool, const Padding& pad, const Pair& stride, const Shape& in, const char* what) {
  return {pooled_extent(in.height, pad.top, pad.bottom, pool[0], stride[0], what),
          pooled_extent(in.width, pad.left, pad.right, pool[1], stride[1], what), in.channels};
}

void check_batchnorm(const BatchNormLayer& l, const Shape& in) {
  const std::size_t nc = in.channels;
  if (l.mean.size() != nc || l.variance.size() != nc || l.scale.size() != nc || l.offset.size() != nc)
    throw ShapeError("batchnorm: parameters need one entry per channel (" + std::to_string(nc) + ")");
  if (!(l.epsilon > 0.0)) throw ShapeError("batchnorm: epsilon must be positive");
  for (double v : l.variance)
    if (v < 0.0) throw ShapeError("batchnorm: negative variance");
}

// Reads a pixel of the zero-padded input; coordinates are in padded space.
double padded_at(const double* x, const Shape& s, const Padding& p, std::size_t r, std::size_t c, std::size_t k) {
  if (r < p.top || c < p.left) return 0.0;
  const std::size_t rr = r - p.top;
  const std::size_t cc = c - p.left;
  if (rr >= s.height || cc >= s.width) return 0.0;
  return x[flat_index(s, rr, cc, k)];
}

void conv_apply(const Conv2dLayer& l, const Shape& in, const Shape& out, const double* x, double* y,
                bool with_bias) {
  const auto& w = l.weights;
  for (std::size_t i = 0; i < out.height; ++i) {
    for (std::size_t j = 0; j < out.width; ++j) {
      for (std::size_t f = 0; f < w.filters; ++f) {
        double acc = with_bias ? l.bias[f] : 0.0;
        for (std::size_t a = 0; a < w.height; ++a) {
          const std::size_t r = i * l.stride[0] + a * l.dilation[0];
          for (std::size_t b = 0; b < w.width; ++b) {
            const std::size_t c = j * l.stride[1] + b * l.dilation[1];
            for (std::size_t k = 0; k < w.channels; ++k) acc += w.at(a, b, k, f) * padded_at(x, in, l.padding, r, c, k);
          }
        }
        y[flat_index(out, i, j, f)] = acc;
      }
    }
  }
}

void avgpool_apply(const AvgPoolLayer& l, const Shape& in, const Shape& out, const double* x, double* y) {
  const double inv = 1.0 / static_cast<double>(l.pool_size[0] * l.pool_size[1]);
  for (std::size_t k = 0; k < out.channels; ++k)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < l.pool_size[0]; ++a)
          for (std::size_t b = 0; b < l.pool_size[1]; ++b)
            acc += padded_at(x, in, l.padding, i * l.stride[0] + a, j * l.stride[1] + b, k);
        y[flat_index(out, i, j, k)] = acc * inv;
      }
}

// Applies a linear operator column-wise: the anchor with offset, generators without.
template <typename Apply>
ImageStar map_linear(const ImageStar& in, const Shape& out_shape, Apply apply) {
  const auto n_out = static_cast<Eigen::Index>(out_shape.size());
  Eigen::VectorXd c(n_out);
  apply(in.center().data(), c.data(), true);
  Eigen::MatrixXd v(n_out, in.num_vars());
  for (Eigen::Index g = 0; g < in.num_vars(); ++g) apply(in.basis().col(g).data(), v.col(g).data(), false);
  return {out_shape, Star(std::move(c), std::move(v), in.predicate())};
}

struct PixelSplit {
  Eigen::Index flat;
  Interval range;
};

// Sorts pixels into never-negative, never-positive and sign-changing ones:
// estimated ranges first, LP ranges only where the estimate straddles zero.
void classify_relu_pixels(const ImageStar& in, std::vector<Eigen::Index>& zeroed, std::vector<PixelSplit>& splits) {
  const auto& bounds = in.predicate()->bounds();
  for (Eigen::Index i = 0; i < in.num_pixels(); ++i) {
    const Interval est = interval_bound(in.center()(i), in.basis().row(i), bounds);
    if (est.lo >= 0.0) continue;
    if (est.hi <= 0.0) {
      zeroed.push_back(i);
      continue;
    }
    const Interval exact = in.to_star().exact_range(i);
    if (exact.lo >= 0.0) continue;
    if (exact.hi <= 0.0) {
      zeroed.push_back(i);
      continue;
    }
    splits.push_back({i, exact});
  }
}

Star with_zeroed_rows(const Star& s, const std::vector<Eigen::Index>& rows) {
  if (rows.empty()) return s;
  Eigen::VectorXd c = s.center();
  Eigen::MatrixXd v = s.basis();
  for (Eigen::Index r : rows) {
    c(r) = 0.0;
    v.row(r).setZero();
  }
  return {std::move(c), std::move(v), s.predicate()};
}

void check_budget(std::size_t count, std::size_t budget) {
  if (count > budget)
    throw BudgetExceeded("exact reachability produced " + std::to_string(count) + " stars, budget is " +
                         std::to_string(budget));
}

}  // namespace

const char* layer_kind(const Layer& layer) {
  struct Visitor {
    const char* operator()(const Conv2dLayer&) const { return "conv2d"; }
    const char* operator()(const AvgPoolLayer&) const { return "avgpool"; }
    const char* operator()(const FCLayer&) const { return "fc"; }
    const char* operator()(const BatchNormLayer&) const { return "batchnorm"; }
    const char* operator()(const MaxPoolLayer&) const { return "maxpool"; }
    const char* operator()(const ReLULayer&) const { return "relu"; }
  };
  return std::visit(Visitor{}, layer);
}

Shape output_shape(const Layer& layer, const Shape& in) {
  if (in.size() == 0) throw ShapeError("empty input shape");
  struct Visitor {
    const Shape& in;
    Shape operator()(const Conv2dLayer& l) const { return conv_shape(l, in); }
    Shape operator()(const AvgPoolLayer& l) const { return pool_shape(l.pool_size, l.padding, l.stride, in, "avgpool"); }
    Shape operator()(const MaxPoolLayer& l) const { return pool_shape(l.pool_size, l.padding, l.stride, in, "maxpool"); }
    Shape operator()(const FCLayer& l) const {
      if (static_cast<std::size_t>(l.weights.cols()) != in.size())
        throw ShapeError("fc: weights have " + std::to_string(l.weights.cols()) + " columns but input " + in.str() +
                         " has " + std::to_string(in.size()) + " values");
      if (l.bias.size() != l.weights.rows()) throw ShapeError("fc: bias length does not match weight rows");
      if (l.weights.rows() == 0) throw ShapeError("fc: no outputs");
      return {1, 1, static_cast<std::size_t>(l.weights.rows())};
    }
    Shape operator()(const BatchNormLayer& l) const {
      check_batchnorm(l, in);
      return in;
    }
    Shape operator()(const ReLULayer&) const { return in; }
  };
  return std::visit(Visitor{in}, layer);
}

Image eval_layer(const Layer& layer, const Image& x) {
  const Shape in = x.shape();
  const Shape out = output_shape(layer, in);
  Image y(out);
  struct Visitor {
    const Image& x;
    Image& y;
    const Shape& in;
    const Shape& out;
    void operator()(const Conv2dLayer& l) const { conv_apply(l, in, out, x.data().data(), y.data().data(), true); }
    void operator()(const AvgPoolLayer& l) const { avgpool_apply(l, in, out, x.data().data(), y.data().data()); }
    void operator()(const FCLayer& l) const {
      const Eigen::VectorXd r = l.weights * x.flatten() + l.bias;
      std::copy(r.data(), r.data() + r.size(), y.data().begin());
    }
    void operator()(const BatchNormLayer& l) const {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t k = i % in.channels;
        const double s = l.scale[k] / std::sqrt(l.variance[k] + l.epsilon);
        y.data()[i] = s * (x.data()[i] - l.mean[k]) + l.offset[k];
      }
    }
    void operator()(const MaxPoolLayer& l) const {
      for (std::size_t k = 0; k < out.channels; ++k)
        for (std::size_t i = 0; i < out.height; ++i)
          for (std::size_t j = 0; j < out.width; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < l.pool_size[0]; ++a)
              for (std::size_t b = 0; b < l.pool_size[1]; ++b)
                best = std::max(best, padded_at(x.data().data(), in, l.padding, i * l.stride[0] + a,
                                                j * l.stride[1] + b, k));
            y.at(i, j, k) = best;
          }
    }
    void operator()(const ReLULayer&) const {
      for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::max(0.0, x.data()[i]);
    }
  };
  std::visit(Visitor{x, y, in, out}, layer);
  return y;
}

ImageStar reach_conv2d(const Conv2dLayer& layer, const ImageStar& in) {
  const Shape out = conv_shape(layer, in.shape());
  return map_linear(in, out, [&](const double* x, double* y, bool bias) {
    conv_apply(layer, in.shape(), out, x, y, bias);
  });
}

ImageStar reach_avgpool(const AvgPoolLayer& layer, const ImageStar& in) {
  const Shape out = pool_shape(layer.pool_size, layer.padding, layer.stride, in.shape(), "avgpool");
  return map_linear(in, out, [&](const double* x, double* y, bool) { avgpool_apply(layer, in.shape(), out, x, y); });
}

ImageStar reach_fc(const FCLayer& layer, const ImageStar& in) {
  const Shape out = output_shape(layer, in.shape());
  return {out, Star(layer.weights * in.center() + layer.bias, layer.weights * in.basis(), in.predicate())};
}

ImageStar reach_batchnorm(const BatchNormLayer& layer, const ImageStar& in) {
  check_batchnorm(layer, in.shape());
  const std::size_t nc = in.shape().channels;
  std::vector<double> ones(nc, 1.0);
  std::vector<double> neg_mean(nc);
  std::vector<double> gain(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    neg_mean[k] = -layer.mean[k];
    gain[k] = layer.scale[k] / std::sqrt(layer.variance[k] + layer.epsilon);
  }
  return in.affine_scale(ones, neg_mean).affine_scale(gain, layer.offset);
}

ImageStar zero_pad(const ImageStar& in, const Padding& padding) {
  if (padding == Padding{}) return in;
  const Shape& s = in.shape();
  const Shape out = padded_shape(s, padding);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.size()));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(c.size(), in.num_vars());
  for (std::size_t r = 0; r < s.height; ++r)
    for (std::size_t col = 0; col < s.width; ++col)
      for (std::size_t k = 0; k < s.channels; ++k) {
        const auto src = static_cast<Eigen::Index>(flat_index(s, r, col, k));
        const auto dst = static_cast<Eigen::Index>(flat_index(out, r + padding.top, col + padding.left, k));
        c(dst) = in.center()(src);
        v.row(dst) = in.basis().row(src);
      }
  return {out, Star(std::move(c), std::move(v), in.predicate())};
}

std::vector<ImageStar> reach_maxpool_exact(const MaxPoolLayer& layer, const ImageStar& in, std::size_t budget) {
  if (in.is_empty()) throw EmptySet("max pooling of an empty set");
  const Shape out = pool_shape(layer.pool_size, layer.padding, layer.stride, in.shape(), "maxpool");
  const ImageStar padded = zero_pad(in, layer.padding);
  const Eigen::Index m = in.num_vars();

  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.size()));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(c.size(), m);
  struct SplitPoint {
    Eigen::Index out_flat;
    std::vector<Eigen::Index> candidates;  // flat indices into the padded set
  };
  std::vector<SplitPoint> split_points;

  for (std::size_t k = 0; k < out.channels; ++k)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j) {
        const auto o = static_cast<Eigen::Index>(flat_index(out, i, j, k));
        const auto cands = padded.get_local_max_index(i * layer.stride[0], j * layer.stride[1], layer.pool_size[0],
                                                      layer.pool_size[1], k);
        if (cands.size() == 1) {
          const auto src = static_cast<Eigen::Index>(flat_index(padded.shape(), cands.front()));
          c(o) = padded.center()(src);
          v.row(o) = padded.basis().row(src);
        } else {
          SplitPoint sp{o, {}};
          for (const auto& p : cands) sp.candidates.push_back(static_cast<Eigen::Index>(flat_index(padded.shape(), p)));
          split_points.push_back(std::move(sp));
        }
      }

  std::vector<Star> current{Star(std::move(c), std::move(v), in.predicate())};
  const auto& pc = padded.center();
  const auto& pv = padded.basis();
  for (const auto& sp : split_points) {
    std::vector<Star> next;
    for (const auto& s : current) {
      for (Eigen::Index q : sp.candidates) {
        // value(q) >= value(r) for every other candidate r.
        LinearConstraints extra;
        extra.C.resize(static_cast<Eigen::Index>(sp.candidates.size()) - 1, m);
        extra.d.resize(extra.C.rows());
        Eigen::Index row = 0;
        for (Eigen::Index r : sp.candidates) {
          if (r == q) continue;
          extra.C.row(row) = pv.row(r) - pv.row(q);
          extra.d(row) = pc(q) - pc(r);
          ++row;
        }
        LinearConstraints cons = s.constraints();
        cons.append(extra);
        if (!is_feasible(cons)) continue;
        Eigen::VectorXd nc = s.center();
        Eigen::MatrixXd nv = s.basis();
        nc(sp.out_flat) = pc(q);
        nv.row(sp.out_flat) = pv.row(q);
        next.emplace_back(std::move(nc), std::move(nv), Predicate::make(std::move(cons)));
      }
    }
    check_budget(next.size(), budget);
    current = std::move(next);
  }

  std::vector<ImageStar> result;
  result.reserve(current.size());
  for (auto& s : current) result.emplace_back(out, std::move(s));
  return result;
}

ImageStar reach_maxpool_approx(const MaxPoolLayer& layer, const ImageStar& in) {
  if (in.is_empty()) throw EmptySet("max pooling of an empty set");
  const Shape out = pool_shape(layer.pool_size, layer.padding, layer.stride, in.shape(), "maxpool");
  const ImageStar padded = zero_pad(in, layer.padding);
  const Eigen::Index m0 = in.num_vars();
  const auto& pc = padded.center();
  const auto& pv = padded.basis();
  const auto& bounds = in.predicate()->bounds();

  struct NewVar {
    Eigen::Index out_flat;
    std::vector<Eigen::Index> candidates;
  };
  std::vector<NewVar> new_vars;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> copies;  // (out, padded source)

  for (std::size_t k = 0; k < out.channels; ++k)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j) {
        const auto o = static_cast<Eigen::Index>(flat_index(out, i, j, k));
        const auto cands = padded.get_local_max_index(i * layer.stride[0], j * layer.stride[1], layer.pool_size[0],
                                                      layer.pool_size[1], k);
        if (cands.size() == 1) {
          copies.emplace_back(o, static_cast<Eigen::Index>(flat_index(padded.shape(), cands.front())));
        } else {
          NewVar nv{o, {}};
          for (const auto& p : cands) nv.candidates.push_back(static_cast<Eigen::Index>(flat_index(padded.shape(), p)));
          new_vars.push_back(std::move(nv));
        }
      }

  const auto extra = static_cast<Eigen::Index>(new_vars.size());
  const Eigen::Index m = m0 + extra;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.size()));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(c.size(), m);
  for (const auto& [o, src] : copies) {
    c(o) = pc(src);
    v.row(o).head(m0) = pv.row(src);
  }

  Eigen::Index rows = 0;
  for (const auto& nv : new_vars) rows += 1 + static_cast<Eigen::Index>(nv.candidates.size());
  const LinearConstraints& old = in.constraints();
  LinearConstraints cons;
  cons.C = Eigen::MatrixXd::Zero(old.num_rows() + rows, m);
  cons.d = Eigen::VectorXd::Zero(old.num_rows() + rows);
  cons.C.topLeftCorner(old.num_rows(), m0) = old.C;
  cons.d.head(old.num_rows()) = old.d;

  std::vector<Interval> new_bounds = bounds;
  Eigen::Index row = old.num_rows();
  for (Eigen::Index t = 0; t < extra; ++t) {
    const auto& nv = new_vars[static_cast<std::size_t>(t)];
    const Eigen::Index beta = m0 + t;
    v(nv.out_flat, beta) = 1.0;

    // beta <= regional upper bound (exact, by LP over each candidate).
    double ub = -std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    for (Eigen::Index q : nv.candidates) {
      ub = std::max(ub, padded.to_star().exact_range(q).hi);
      lb = std::max(lb, interval_bound(pc(q), pv.row(q), bounds).lo);
    }
    cons.C(row, beta) = 1.0;
    cons.d(row) = ub;
    ++row;
    // beta >= value(q) for each candidate q.
    for (Eigen::Index q : nv.candidates) {
      cons.C.row(row).head(m0) = pv.row(q);
      cons.C(row, beta) = -1.0;
      cons.d(row) = -pc(q);
      ++row;
    }
    new_bounds.push_back({lb, ub});
  }

  return {out, Star(std::move(c), std::move(v), std::make_shared<const Predicate>(std::move(cons), std::move(new_bounds)))};
}

std::vector<ImageStar> step_relu(const ImageStar& in, std::size_t pixel) {
  const auto i = static_cast<Eigen::Index>(pixel);
  if (i >= in.num_pixels()) throw DimensionMismatch("pixel index out of range");
  if (in.is_empty()) return {};
  const Star& s = in.to_star();
  const Interval r = s.exact_range(i);
  if (r.lo >= 0.0) return {in};
  if (r.hi <= 0.0) return {ImageStar(in.shape(), with_zeroed_rows(s, {i}))};

  const Eigen::RowVectorXd row = s.basis().row(i);
  const double ci = s.center()(i);

  LinearConstraints pos = s.constraints();
  pos.append_row(-row, ci);  // value >= 0
  LinearConstraints neg = s.constraints();
  neg.append_row(row, -ci);  // value <= 0

  std::vector<ImageStar> out;
  out.emplace_back(in.shape(), Star(s.center(), s.basis(), Predicate::make(std::move(pos))));
  out.emplace_back(in.shape(), with_zeroed_rows(Star(s.center(), s.basis(), Predicate::make(std::move(neg))), {i}));
  return out;
}

std::vector<ImageStar> reach_relu_exact(const ImageStar& in, std::size_t budget) {
  if (in.is_empty()) return {};
  std::vector<Eigen::Index> zeroed;
  std::vector<PixelSplit> splits;
  classify_relu_pixels(in, zeroed, splits);

  std::vector<ImageStar> current{ImageStar(in.shape(), with_zeroed_rows(in.to_star(), zeroed))};
  for (const auto& sp : splits) {
    std::vector<ImageStar> next;
    for (const auto& s : current) {
      auto parts = step_relu(s, static_cast<std::size_t>(sp.flat));
      for (auto& p : parts) next.push_back(std::move(p));
    }
    check_budget(next.size(), budget);
    current = std::move(next);
  }
  return current;
}

ImageStar reach_relu_approx(const ImageStar& in) {
  if (in.is_empty()) throw EmptySet("ReLU of an empty set");
  std::vector<Eigen::Index> zeroed;
  std::vector<PixelSplit> splits;
  classify_relu_pixels(in, zeroed, splits);
  if (splits.empty()) return {in.shape(), with_zeroed_rows(in.to_star(), zeroed)};

  const Star base = with_zeroed_rows(in.to_star(), zeroed);
  const Eigen::Index m0 = in.num_vars();
  const auto extra = static_cast<Eigen::Index>(splits.size());
  const Eigen::Index m = m0 + extra;

  Eigen::VectorXd c = base.center();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(c.size(), m);
  v.leftCols(m0) = base.basis();

  const LinearConstraints& old = in.constraints();
  LinearConstraints cons;
  cons.C = Eigen::MatrixXd::Zero(old.num_rows() + 3 * extra, m);
  cons.d = Eigen::VectorXd::Zero(old.num_rows() + 3 * extra);
  cons.C.topLeftCorner(old.num_rows(), m0) = old.C;
  cons.d.head(old.num_rows()) = old.d;

  std::vector<Interval> bounds = in.predicate()->bounds();
  Eigen::Index row = old.num_rows();
  for (Eigen::Index t = 0; t < extra; ++t) {
    const auto& sp = splits[static_cast<std::size_t>(t)];
    const Eigen::Index beta = m0 + t;
    const Eigen::RowVectorXd vi = in.basis().row(sp.flat);
    const double ci = in.center()(sp.flat);
    const double l = sp.range.lo;
    const double u = sp.range.hi;
    const double slope = u / (u - l);

    // beta >= 0
    cons.C(row, beta) = -1.0;
    cons.d(row) = 0.0;
    ++row;
    // beta >= x
    cons.C.row(row).head(m0) = vi;
    cons.C(row, beta) = -1.0;
    cons.d(row) = -ci;
    ++row;
    // beta <= u (x - l) / (u - l)
    cons.C.row(row).head(m0) = -slope * vi;
    cons.C(row, beta) = 1.0;
    cons.d(row) = slope * (ci - l);
    ++row;

    c(sp.flat) = 0.0;
    v.row(sp.flat).setZero();
    v(sp.flat, beta) = 1.0;
    bounds.push_back({0.0, u});
  }

  return {in.shape(), Star(std::move(c), std::move(v), std::make_shared<const Predicate>(std::move(cons), std::move(bounds)))};
}

std::vector<ImageStar> reach_layer(const Layer& layer, const ImageStar& in, Scheme scheme, std::size_t budget) {
  struct Visitor {
    const ImageStar& in;
    Scheme scheme;
    std::size_t budget;
    std::vector<ImageStar> operator()(const Conv2dLayer& l) const { return {reach_conv2d(l, in)}; }
    std::vector<ImageStar> operator()(const AvgPoolLayer& l) const { return {reach_avgpool(l, in)}; }
    std::vector<ImageStar> operator()(const FCLayer& l) const { return {reach_fc(l, in)}; }
    std::vector<ImageStar> operator()(const BatchNormLayer& l) const { return {reach_batchnorm(l, in)}; }
    std::vector<ImageStar> operator()(const MaxPoolLayer& l) const {
      if (scheme == Scheme::Exact) return reach_maxpool_exact(l, in, budget);
      return {reach_maxpool_approx(l, in)};
    }
    std::vector<ImageStar> operator()(const ReLULayer&) const {
      if (scheme == Scheme::Exact) return reach_relu_exact(in, budget);
      return {reach_relu_approx(in)};
    }
  };
  return std::visit(Visitor{in, scheme, budget}, layer);
}

}  // namespace imagestar
