#include "imagestar/cli.hpp"

#include <charconv>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "imagestar/io.hpp"

namespace imagestar::cli {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string network;
  std::string image;
  std::string target;
  std::string attack = "brightening";
  std::optional<double> d;
  std::optional<double> delta;
  std::string adv;
  double l = 0.0;
  std::optional<double> delta_max;
  std::string scheme = "exact";
  std::size_t budget = 10000;
  std::string out;
  std::string ranges;
  std::uint64_t seed = 0;
  std::size_t falsify_samples = 0;
  std::size_t counterexamples = 5;
  unsigned threads = 0;
};

struct AttackSet {
  ImageStar set;
  io::Json params;
  std::vector<std::string> warnings;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--network", f.network, "Network JSON file")->required();
  cmd.add_option("--image", f.image, "Input image CSV")->required();
  cmd.add_option("--attack", f.attack, "Attack kind")
      ->check(CLI::IsMember({"brightening", "interp", "zono"}))
      ->capture_default_str();
  cmd.add_option("--d", f.d, "Brightening threshold");
  cmd.add_option("--delta", f.delta, "Brightening/zonotope strength in [0,1]");
  cmd.add_option("--adv", f.adv, "Adversarial image CSV (interp)");
  cmd.add_option("--l", f.l, "Interpolation start fraction")->capture_default_str();
  cmd.add_option("--delta-max", f.delta_max, "Interpolation width");
  cmd.add_option("--scheme", f.scheme, "Reachability scheme")
      ->check(CLI::IsMember({"exact", "approx"}))
      ->capture_default_str();
  cmd.add_option("--budget", f.budget, "Star budget for the exact scheme")->capture_default_str();
  cmd.add_option("--out", f.out, "Report JSON path");
  cmd.add_option("--ranges", f.ranges, "Per-label output range CSV path");
  cmd.add_option("--threads", f.threads, "Worker threads (0 = hardware)")->capture_default_str();
}

template <typename T>
const T& require(const std::optional<T>& v, const char* flag, const std::string& attack) {
  if (!v) throw Error(std::string("--attack ") + attack + " needs " + flag);
  return *v;
}

AttackSet build_attack(const Flags& f, const Image& image) {
  if (f.attack == "brightening") {
    const double d = require(f.d, "--d", f.attack);
    const double delta = require(f.delta, "--delta", f.attack);
    const std::size_t n = count_attacked_pixels(image, d);
    AttackSet a{brightening_set(image, d, delta, true),
                {{"kind", "brightening"}, {"d", d}, {"delta", delta}, {"attacked_pixels", n}},
                {}};
    if (n == 0) a.warnings.push_back("no pixel reaches the threshold; the input set is the single image");
    return a;
  }
  if (f.attack == "interp") {
    if (f.adv.empty()) throw Error("--attack interp needs --adv");
    const double delta_max = require(f.delta_max, "--delta-max", f.attack);
    const Image adv = io::load_image(f.adv);
    return {interpolation_set(image, adv, f.l, delta_max),
            {{"kind", "interp"}, {"adv", f.adv}, {"l", f.l}, {"delta_max", delta_max}},
            {}};
  }
  const double delta = require(f.delta, "--delta", f.attack);
  return {zonotope_brightening_set(image, delta), {{"kind", "zono"}, {"delta", delta}}, {}};
}

std::size_t resolve_target(const Network& net, const std::string& target) {
  const auto& labels = net.labels();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == target) return i;
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(target.data(), target.data() + target.size(), idx);
  if (ec != std::errc() || ptr != target.data() + target.size() || idx >= labels.size())
    throw Error("unknown target label '" + target + "'");
  return idx;
}

ReachOptions reach_options(const Flags& f) {
  ReachOptions o;
  o.scheme = f.scheme == "approx" ? Scheme::Approx : Scheme::Exact;
  o.star_budget = f.budget;
  o.threads = f.threads;
  return o;
}

void fill_common(io::Report& r, const Flags& f, const AttackSet& a, const ReachStats& stats, std::size_t n_sets) {
  r.scheme = f.scheme == "approx" ? Scheme::Approx : Scheme::Exact;
  r.attack = a.params;
  r.predicate_variables = a.set.num_vars();
  r.input_constraints = a.set.constraints().num_rows();
  r.stars_per_layer = stats.stars_per_layer;
  r.output_sets = n_sets;
  r.lp_calls = stats.lp_calls;
  r.elapsed_seconds = stats.elapsed_seconds;
  r.warnings = a.warnings;
}

void print_ranges(std::ostream& out, const std::vector<io::LabelRange>& ranges) {
  for (const auto& r : ranges)
    out << "  " << r.label << ": [" << io::format_double(r.range.lo) << ", " << io::format_double(r.range.hi) << "]\n";
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  const Network net = io::load_network(f.network);
  const Image image = io::load_image(f.image);
  if (f.target.empty()) throw Error("verify needs --target");
  const std::size_t target = resolve_target(net, f.target);
  const AttackSet attack = build_attack(f, image);
  for (const auto& w : attack.warnings) err << "warning: " << w << "\n";

  VerifyOptions vo;
  vo.reach = reach_options(f);
  vo.seed = f.seed;
  vo.falsify_samples = f.falsify_samples;
  vo.counterexample_count = f.counterexamples;
  const RobustnessResult res = verify_robustness(net, attack.set, target, vo);

  io::Report report;
  fill_common(report, f, attack, res.stats, res.output_sets.size());
  report.verdict = res.verdict;
  report.target = target;
  report.target_name = net.labels()[target];
  report.violating_label = res.violating_label;
  report.falsified = res.falsified;
  report.discarded_candidates = res.discarded_candidates;
  if (!f.out.empty() || !f.ranges.empty()) report.output_ranges = io::output_ranges(res.output_sets, net.labels());

  if (!f.out.empty()) {
    const fs::path report_path(f.out);
    for (std::size_t i = 0; i < res.counterexamples.size(); ++i) {
      const auto& c = res.counterexamples[i];
      const std::string name = report_path.stem().string() + "_cex" + std::to_string(i) + ".csv";
      io::save_image(c.input, report_path.parent_path() / name);
      report.counterexamples.push_back(
          {name, c.predicted_label, std::vector<double>(c.logits.data(), c.logits.data() + c.logits.size())});
    }
  }
  if (!f.ranges.empty()) io::save_ranges_csv(report.output_ranges, f.ranges);
  if (!f.out.empty()) io::save_report(report, f.out);

  out << "verdict: " << verdict_name(res.verdict) << "\n";
  if (res.violating_label) out << "violating label: " << net.labels()[*res.violating_label] << "\n";
  if (!res.counterexamples.empty()) out << "counterexamples: " << res.counterexamples.size() << "\n";
  out << "output sets: " << res.output_sets.size() << ", LP calls: " << res.stats.lp_calls << "\n";

  switch (res.verdict) {
    case Verdict::Robust:
      return kRobust;
    case Verdict::NotRobust:
      return kNotRobust;
    case Verdict::Unknown:
      return kUnknown;
  }
  return kError;
}

int cmd_reach(const Flags& f, std::ostream& out, std::ostream& err) {
  const Network net = io::load_network(f.network);
  const Image image = io::load_image(f.image);
  const AttackSet attack = build_attack(f, image);
  for (const auto& w : attack.warnings) err << "warning: " << w << "\n";

  const ReachResult rr = reach(net, attack.set, reach_options(f));
  io::Report report;
  report.command = "reach";
  fill_common(report, f, attack, rr.stats, rr.output_sets.size());
  report.output_ranges = io::output_ranges(rr.output_sets, net.labels());
  if (!f.ranges.empty()) io::save_ranges_csv(report.output_ranges, f.ranges);
  if (!f.out.empty()) io::save_report(report, f.out);

  out << "output sets: " << rr.output_sets.size() << "\nstars per layer:";
  for (auto n : rr.stats.stars_per_layer) out << " " << n;
  out << "\nLP calls: " << rr.stats.lp_calls << "\noutput ranges:\n";
  print_ranges(out, report.output_ranges);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ImageStar reachability and robustness verification for CNNs", "imagestar"};
  app.require_subcommand(1);
  Flags f;

  auto* verify = app.add_subcommand("verify", "Prove or refute robustness of one image under an attack");
  add_common(*verify, f);
  verify->add_option("--target", f.target, "Expected label (name or index)")->required();
  verify->add_option("--seed", f.seed, "Sampling seed")->capture_default_str();
  verify->add_option("--falsify-samples", f.falsify_samples, "Random simulations when the approx scheme is inconclusive")
      ->capture_default_str();
  verify->add_option("--counterexamples", f.counterexamples, "Counterexamples to extract")->capture_default_str();

  auto* reach_cmd = app.add_subcommand("reach", "Compute and summarize the reachable output sets");
  add_common(*reach_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kError;
  }

  try {
    if (verify->parsed()) return cmd_verify(f, out, err);
    return cmd_reach(f, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"imagestar"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace imagestar::cli
