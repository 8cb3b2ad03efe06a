#include "imagestar/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace imagestar::io {

namespace {

struct Field {
  const Json& value;
  std::string path;
  const std::string& source;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source + ": " + (path.empty() ? "/" : path) + ": " + what);
  }

  [[nodiscard]] Field at(const std::string& key) const {
    if (!value.is_object()) fail("expected an object");
    auto it = value.find(key);
    if (it == value.end()) throw ParseError(source + ": " + path + "/" + key + ": missing field");
    return {*it, path + "/" + key, source};
  }
  [[nodiscard]] bool has(const std::string& key) const { return value.is_object() && value.contains(key); }
  [[nodiscard]] Field at(std::size_t i) const { return {value.at(i), path + "/" + std::to_string(i), source}; }

  [[nodiscard]] std::size_t size() const {
    if (!value.is_array()) fail("expected an array");
    return value.size();
  }
  [[nodiscard]] double number() const {
    if (!value.is_number()) fail("expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) fail("value is not finite");
    return v;
  }
  [[nodiscard]] std::size_t count() const {
    if (value.is_number_unsigned()) return value.get<std::size_t>();
    if (value.is_number_integer() && value.get<long long>() >= 0) return value.get<std::size_t>();
    fail("expected a non-negative integer");
  }
  [[nodiscard]] std::string string() const {
    if (!value.is_string()) fail("expected a string");
    return value.get<std::string>();
  }
  [[nodiscard]] std::vector<double> numbers(std::optional<std::size_t> expected = {}) const {
    const std::size_t n = size();
    if (expected && n != *expected)
      fail("expected " + std::to_string(*expected) + " entries, got " + std::to_string(n));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(i).number();
    return out;
  }
  [[nodiscard]] Pair pair() const {
    if (size() != 2) fail("expected two entries");
    const Pair p{at(0).count(), at(1).count()};
    return p;
  }
  [[nodiscard]] Padding padding() const {
    const std::size_t n = size();
    if (n == 2) {
      // symmetric [vertical, horizontal]
      const auto v = at(0).count();
      const auto h = at(1).count();
      return {v, v, h, h};
    }
    if (n != 4) fail("expected [top, bottom, left, right]");
    return {at(0).count(), at(1).count(), at(2).count(), at(3).count()};
  }
};

std::string line_column(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(source + ": " + line_column(text, at) + ": malformed JSON");
  } catch (const nlohmann::json::out_of_range&) {
    throw ParseError(source + ": number out of range for a double");
  }
}

Layer parse_conv(const Field& f) {
  Conv2dLayer layer;
  const Field w = f.at("weights");
  const std::size_t h = w.size();
  if (h == 0) w.fail("empty filter");
  const std::size_t wd = w.at(0).size();
  if (wd == 0) w.fail("empty filter");
  const std::size_t nc = w.at(0).at(0).size();
  if (nc == 0) w.fail("empty filter");
  const std::size_t nf = w.at(0).at(0).at(0).size();
  if (nf == 0) w.fail("no filters");
  layer.weights = FilterBank(h, wd, nc, nf);
  for (std::size_t r = 0; r < h; ++r) {
    const Field row = w.at(r);
    if (row.size() != wd) row.fail("ragged filter: expected " + std::to_string(wd) + " columns");
    for (std::size_t c = 0; c < wd; ++c) {
      const Field col = row.at(c);
      if (col.size() != nc) col.fail("ragged filter: expected " + std::to_string(nc) + " channels");
      for (std::size_t k = 0; k < nc; ++k) {
        const auto v = col.at(k).numbers(nf);
        for (std::size_t n = 0; n < nf; ++n) layer.weights.at(r, c, k, n) = v[n];
      }
    }
  }
  layer.bias = f.has("bias") ? f.at("bias").numbers(nf) : std::vector<double>(nf, 0.0);
  if (f.has("padding")) layer.padding = f.at("padding").padding();
  if (f.has("stride")) layer.stride = f.at("stride").pair();
  if (f.has("dilation")) layer.dilation = f.at("dilation").pair();
  return layer;
}

template <typename Pool>
Layer parse_pool(const Field& f) {
  Pool layer;
  layer.pool_size = f.at("pool_size").pair();
  layer.stride = f.has("stride") ? f.at("stride").pair() : layer.pool_size;
  if (f.has("padding")) layer.padding = f.at("padding").padding();
  return layer;
}

Layer parse_fc(const Field& f) {
  FCLayer layer;
  const Field w = f.at("weights");
  const std::size_t rows = w.size();
  if (rows == 0) w.fail("empty weight matrix");
  const std::size_t cols = w.at(0).size();
  layer.weights.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto v = w.at(r).numbers(cols);
    for (std::size_t c = 0; c < cols; ++c)
      layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
  }
  const auto b = f.has("bias") ? f.at("bias").numbers(rows) : std::vector<double>(rows, 0.0);
  layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(rows));
  return layer;
}

Layer parse_batchnorm(const Field& f) {
  BatchNormLayer layer;
  layer.mean = f.at("mean").numbers();
  const std::size_t nc = layer.mean.size();
  layer.variance = f.at("variance").numbers(nc);
  layer.scale = f.at("scale").numbers(nc);
  layer.offset = f.at("offset").numbers(nc);
  if (f.has("epsilon")) layer.epsilon = f.at("epsilon").number();
  for (std::size_t k = 0; k < nc; ++k)
    if (!(layer.variance[k] + layer.epsilon > 0.0))
      f.at("variance").at(k).fail("variance + epsilon must be positive");
  return layer;
}

Layer parse_layer(const Field& f) {
  const std::string type = f.at("type").string();
  if (type == "conv2d") return parse_conv(f);
  if (type == "avgpool") return parse_pool<AvgPoolLayer>(f);
  if (type == "maxpool") return parse_pool<MaxPoolLayer>(f);
  if (type == "fc") return parse_fc(f);
  if (type == "batchnorm") return parse_batchnorm(f);
  if (type == "relu") return ReLULayer{};
  f.at("type").fail("unknown layer type '" + type + "'");
}

Json pair_json(const Pair& p) { return Json::array({p[0], p[1]}); }
Json padding_json(const Padding& p) { return Json::array({p.top, p.bottom, p.left, p.right}); }

Json layer_json(const Layer& layer) {
  Json j;
  j["type"] = layer_kind(layer);
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Conv2dLayer>) {
          Json w = Json::array();
          for (std::size_t r = 0; r < l.weights.height; ++r) {
            Json row = Json::array();
            for (std::size_t c = 0; c < l.weights.width; ++c) {
              Json col = Json::array();
              for (std::size_t k = 0; k < l.weights.channels; ++k) {
                Json f = Json::array();
                for (std::size_t n = 0; n < l.weights.filters; ++n) f.push_back(l.weights.at(r, c, k, n));
                col.push_back(std::move(f));
              }
              row.push_back(std::move(col));
            }
            w.push_back(std::move(row));
          }
          j["weights"] = std::move(w);
          j["bias"] = l.bias;
          j["padding"] = padding_json(l.padding);
          j["stride"] = pair_json(l.stride);
          j["dilation"] = pair_json(l.dilation);
        } else if constexpr (std::is_same_v<T, AvgPoolLayer> || std::is_same_v<T, MaxPoolLayer>) {
          j["pool_size"] = pair_json(l.pool_size);
          j["padding"] = padding_json(l.padding);
          j["stride"] = pair_json(l.stride);
        } else if constexpr (std::is_same_v<T, FCLayer>) {
          Json w = Json::array();
          for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
            w.push_back(std::move(row));
          }
          j["weights"] = std::move(w);
          j["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
        } else if constexpr (std::is_same_v<T, BatchNormLayer>) {
          j["mean"] = l.mean;
          j["variance"] = l.variance;
          j["epsilon"] = l.epsilon;
          j["scale"] = l.scale;
          j["offset"] = l.offset;
        }
      },
      layer);
  return j;
}

Json interval_json(const Interval& r) {
  auto num = [](double v) -> Json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return Json::array({num(r.lo), num(r.hi)});
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot replace " + path.string());
  }
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Network parse_network(std::string_view text, const std::string& source) {
  const Json doc = parse_json(text, source);
  const Field root{doc, "", source};
  const Field shape = root.at("input_shape");
  if (shape.size() != 3) shape.fail("expected [height, width, channels]");
  const Shape input{shape.at(0).count(), shape.at(1).count(), shape.at(2).count()};

  std::vector<Layer> layers;
  const Field list = root.at("layers");
  for (std::size_t i = 0; i < list.size(); ++i) layers.push_back(parse_layer(list.at(i)));

  std::vector<std::string> labels;
  if (root.has("labels")) {
    const Field l = root.at("labels");
    for (std::size_t i = 0; i < l.size(); ++i) labels.push_back(l.at(i).string());
  }
  try {
    return Network(input, std::move(layers), std::move(labels));
  } catch (const ShapeError& e) {
    throw ShapeError(source + ": " + e.what());
  }
}

Network load_network(const std::filesystem::path& path) { return parse_network(read_file(path), path.string()); }

std::string dump_network(const Network& net) {
  Json j;
  const Shape& s = net.input_shape();
  j["input_shape"] = Json::array({s.height, s.width, s.channels});
  j["labels"] = net.labels();
  Json layers = Json::array();
  for (const auto& l : net.layers()) layers.push_back(layer_json(l));
  j["layers"] = std::move(layers);
  return j.dump(2) + "\n";
}

void save_network(const Network& net, const std::filesystem::path& path) { write_file_atomic(path, dump_network(net)); }

Image parse_image(std::string_view text, const std::string& source) {
  std::vector<double> values;
  std::size_t line = 1;
  std::size_t header_fields = 0;
  std::size_t h = 0, w = 0, nc = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] != ',' && text[j] != '\n' && text[j] != '\r' && text[j] != ' ' &&
           text[j] != '\t')
      ++j;
    const std::string token(text.substr(i, j - i));
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v))
      throw ParseError(source + ": line " + std::to_string(line) + ": not a number: '" + token + "'");
    if (header_fields < 3) {
      if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ParseError(source + ": line " + std::to_string(line) + ": header must be positive integers h,w,nc");
      const auto n = static_cast<std::size_t>(v);
      (header_fields == 0 ? h : header_fields == 1 ? w : nc) = n;
      ++header_fields;
    } else {
      values.push_back(v);
    }
    i = j;
  }
  if (header_fields < 3) throw ParseError(source + ": missing header h,w,nc");
  const Shape shape{h, w, nc};
  if (values.size() != shape.size())
    throw ParseError(source + ": header " + shape.str() + " needs " + std::to_string(shape.size()) + " values, found " +
                     std::to_string(values.size()));
  return Image(shape, std::move(values));
}

Image load_image(const std::filesystem::path& path) { return parse_image(read_file(path), path.string()); }

std::string dump_image(const Image& image) {
  const Shape& s = image.shape();
  std::string out = std::to_string(s.height) + "," + std::to_string(s.width) + "," + std::to_string(s.channels) + "\n";
  const std::size_t per_row = s.width * s.channels;
  for (std::size_t r = 0; r < s.height; ++r) {
    for (std::size_t k = 0; k < per_row; ++k) {
      if (k) out += ',';
      out += format_double(image.data()[r * per_row + k]);
    }
    out += '\n';
  }
  return out;
}

void save_image(const Image& image, const std::filesystem::path& path) { write_file_atomic(path, dump_image(image)); }

std::vector<LabelRange> output_ranges(const std::vector<ImageStar>& sets, const std::vector<std::string>& labels) {
  std::vector<LabelRange> out;
  if (sets.empty()) return out;
  const std::size_t n = sets.front().num_pixels();
  for (std::size_t i = 0; i < n; ++i) {
    LabelRange r;
    r.index = i;
    r.label = i < labels.size() ? labels[i] : std::to_string(i);
    bool first = true;
    for (const auto& s : sets) {
      const Interval iv = s.to_star().exact_range(static_cast<Eigen::Index>(i));
      r.range = first ? iv : r.range.hull(iv);
      first = false;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string dump_ranges_csv(const std::vector<LabelRange>& ranges) {
  std::string out = "index,label,lo,hi\n";
  for (const auto& r : ranges)
    out += std::to_string(r.index) + "," + r.label + "," + format_double(r.range.lo) + "," + format_double(r.range.hi) +
           "\n";
  return out;
}

void save_ranges_csv(const std::vector<LabelRange>& ranges, const std::filesystem::path& path) {
  write_file_atomic(path, dump_ranges_csv(ranges));
}

Json report_to_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  if (r.verdict) j["verdict"] = verdict_name(*r.verdict);
  j["scheme"] = r.scheme == Scheme::Exact ? "exact" : "approx";
  if (r.target) j["target"] = {{"index", *r.target}, {"label", r.target_name}};
  j["attack"] = r.attack;
  j["input_set"] = {{"predicate_variables", r.predicate_variables}, {"constraints", r.input_constraints}};
  j["reach"] = {{"stars_per_layer", r.stars_per_layer},
                {"output_sets", r.output_sets},
                {"lp_calls", r.lp_calls},
                {"elapsed_seconds", r.elapsed_seconds}};
  Json ranges = Json::array();
  for (const auto& lr : r.output_ranges)
    ranges.push_back({{"index", lr.index}, {"label", lr.label}, {"range", interval_json(lr.range)}});
  j["output_ranges"] = std::move(ranges);
  if (r.command == "verify") {
    j["violating_label"] = r.violating_label ? Json(*r.violating_label) : Json(nullptr);
    j["falsified"] = r.falsified;
    j["discarded_candidates"] = r.discarded_candidates;
    Json cex = Json::array();
    for (const auto& c : r.counterexamples)
      cex.push_back({{"file", c.file}, {"predicted_label", c.predicted_label}, {"logits", c.logits}});
    j["counterexamples"] = std::move(cex);
  }
  j["warnings"] = r.warnings;
  return j;
}

void save_report(const Report& report, const std::filesystem::path& path) {
  write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

}  // namespace imagestar::io
