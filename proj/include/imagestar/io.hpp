#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "imagestar/robustness.hpp"

namespace imagestar::io {

using Json = nlohmann::ordered_json;

// Network files -------------------------------------------------------------
//
// {"input_shape": [h, w, nc], "labels": [...], "layers": [
//    {"type": "conv2d", "weights": [hf][wf][nc][nf], "bias": [nf],
//     "padding": [t, b, l, r], "stride": [s1, s2], "dilation": [d1, d2]},
//    {"type": "avgpool" | "maxpool", "pool_size": [p1, p2], "padding": [...], "stride": [...]},
//    {"type": "fc", "weights": [n_fc][m_fc], "bias": [n_fc]},
//    {"type": "batchnorm", "mean": [...], "variance": [...], "epsilon": e, "scale": [...], "offset": [...]},
//    {"type": "relu"}]}

/// Throws ParseError (with line/column or JSON-pointer context) or ShapeError.
Network parse_network(std::string_view text, const std::string& source = "<memory>");
Network load_network(const std::filesystem::path& path);
std::string dump_network(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

// Image files ---------------------------------------------------------------
//
// CSV; the first record is "h,w,nc", followed by h*w*nc values in canonical
// flattening order. Values may be split across lines freely.

Image parse_image(std::string_view text, const std::string& source = "<memory>");
Image load_image(const std::filesystem::path& path);
std::string dump_image(const Image& image);
void save_image(const Image& image, const std::filesystem::path& path);

/// Shortest "%.17g" rendering; lossless for doubles.
std::string format_double(double v);

// Reports -------------------------------------------------------------------

struct LabelRange {
  std::size_t index = 0;
  std::string label;
  Interval range;
};

struct CounterexampleRecord {
  std::string file;
  std::size_t predicted_label = 0;
  std::vector<double> logits;
};

struct Report {
  std::string command = "verify";
  std::optional<Verdict> verdict;
  Scheme scheme = Scheme::Exact;
  std::optional<std::size_t> target;
  std::string target_name;
  Json attack = Json::object();
  std::size_t predicate_variables = 0;
  std::size_t input_constraints = 0;
  std::vector<std::size_t> stars_per_layer;
  std::size_t output_sets = 0;
  std::uint64_t lp_calls = 0;
  double elapsed_seconds = 0.0;
  std::vector<LabelRange> output_ranges;
  std::optional<std::size_t> violating_label;
  bool falsified = false;
  std::size_t discarded_candidates = 0;
  std::vector<CounterexampleRecord> counterexamples;
  std::vector<std::string> warnings;
};

Json report_to_json(const Report& report);
void save_report(const Report& report, const std::filesystem::path& path);

/// Per-output hull of the exact ranges over all sets.
std::vector<LabelRange> output_ranges(const std::vector<ImageStar>& sets, const std::vector<std::string>& labels);

/// CSV "index,label,lo,hi" for plotting output-range figures.
std::string dump_ranges_csv(const std::vector<LabelRange>& ranges);
void save_ranges_csv(const std::vector<LabelRange>& ranges, const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace imagestar::io
