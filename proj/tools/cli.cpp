/* Copyright 2026 The CPDM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpdm/bundle.hpp"
#include "cpdm/correlation.hpp"
#include "cpdm/error.hpp"
#include "cpdm/fid.hpp"
#include "cpdm/format.hpp"
#include "cpdm/image_io.hpp"
#include "cpdm/metric.hpp"
#include "cpdm/prng.hpp"
#include "cpdm/refnet.hpp"
#include "cpdm/similarity.hpp"
#include "cpdm/toy_model.hpp"
#include "cpdm/unlearning.hpp"

namespace cpdm::cli {
namespace {

namespace fs = std::filesystem;
using refnet::ToyModel;

constexpr std::uint64_t kDefaultToySeed = 42;
constexpr std::size_t kProbeImageSize = 32;

// Malformed flag values that CLI11 cannot catch by type alone.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(parse_double(item));
    } catch (const FormatError&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (values.size() != expected) {
    throw UsageError(std::string(flag) + " expects " + std::to_string(expected) +
                     " comma-separated values");
  }
  return values;
}

struct MetricFlags {
  std::string weights = "0.5,0.1,60000,4";
  std::string clip = "1,50";
  bool no_clamp = false;

  void attach(CLI::App* sub) {
    sub->add_option("--weights", weights, "Layer weights w1,w2,w3,w4")->capture_default_str();
    sub->add_option("--clip", clip, "Normalization range lo,hi")->capture_default_str();
    sub->add_flag("--no-clamp", no_clamp, "Allow negative CM values");
  }

  metric::MetricConfig config() const {
    metric::MetricConfig cfg;
    const std::vector<double> w = parse_list(weights, 4, "--weights");
    std::copy(w.begin(), w.end(), cfg.layer_weights.begin());
    const std::vector<double> c = parse_list(clip, 2, "--clip");
    cfg.clip_lo = c[0];
    cfg.clip_hi = c[1];
    cfg.clamp_cm = !no_clamp;
    cfg.validate();
    return cfg;
  }
};

// Writes data to --out when given, otherwise to the output stream.
void emit(std::string data, const std::string& out_path, std::ostream& out) {
  if (!data.empty() && data.back() != '\n') data += '\n';
  if (out_path.empty()) {
    out << data;
  } else {
    write_file(out_path, data);
  }
}

std::string label_of(const FeatureBundle& b, const fs::path& path) {
  return b.image_id.empty() ? path.stem().string() : b.image_id;
}

std::vector<FeatureBundle> load_dir(const fs::path& dir, std::vector<std::string>& labels) {
  std::vector<FeatureBundle> bundles;
  for (const fs::path& p : list_bundles(dir)) {
    bundles.push_back(load_bundle(p));
    labels.push_back(label_of(bundles.back(), p));
  }
  if (bundles.empty()) throw ValidationError("no " + std::string(kBundleExtension) + " files in " + dir.string());
  return bundles;
}

std::uint64_t refnet_seed() {
  const char* env = std::getenv("CPDM_SEED");
  if (env == nullptr || *env == '\0') return refnet::kDefaultSeed;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 0);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("CPDM_SEED is not an unsigned integer: ") + env);
  }
}

// Accepts a directory of bundles, a saved stats file, or a single bundle
// (treated as a point mass with zero covariance).
metric::GaussianStats load_distribution(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> labels;
    const std::vector<FeatureBundle> bundles = load_dir(path, labels);
    std::vector<Tensor> embeddings;
    for (const FeatureBundle& b : bundles) embeddings.push_back(b.embedding);
    return metric::gaussian_stats(embeddings);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<Entry> entries = read_entries(in);
  const bool is_stats = std::any_of(entries.begin(), entries.end(),
                                    [](const Entry& e) { return e.name == "mean"; });
  if (is_stats) return metric::load_stats(path);
  const FeatureBundle b = load_bundle(path);
  metric::GaussianStats s;
  s.mean.assign(b.embedding.values().begin(), b.embedding.values().end());
  s.covariance.assign(s.dim() * s.dim(), 0.0);
  s.sample_count = 1;
  return s;
}

std::string bundle_info_plain(const FeatureBundle& b) {
  std::string s = "image_id " + b.image_id + "\n";
  s += "extractor_tag " + b.extractor_tag + "\n";
  s += "embedding " + shape_string(b.embedding.shape()) + "\n";
  for (std::size_t i = 0; i < b.stages.size(); ++i) {
    s += std::string(kStageEntries[i]) + " " + shape_string(b.stages[i].shape()) + "\n";
  }
  s += "text_embedding " +
       (b.text_embedding ? shape_string(b.text_embedding->shape()) : std::string("none")) + "\n";
  for (const Entry& e : b.extra) s += "extra " + e.name + " " + shape_string(e.tensor.shape()) + "\n";
  return s;
}

std::string bundle_info_json(const FeatureBundle& b) {
  nlohmann::ordered_json j;
  j["image_id"] = b.image_id;
  j["extractor_tag"] = b.extractor_tag;
  j["embedding"] = b.embedding.shape();
  for (std::size_t i = 0; i < b.stages.size(); ++i) {
    j[std::string(kStageEntries[i])] = b.stages[i].shape();
  }
  j["text_embedding"] = b.text_embedding ? nlohmann::ordered_json(b.text_embedding->shape())
                                         : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  for (const Entry& e : b.extra) extra[e.name] = e.tensor.shape();
  j["extra"] = extra;
  return j.dump(2) + "\n";
}

std::string matrix_json(const analysis::SimilarityMatrix& m, analysis::Variant variant) {
  auto cell = [&](double v) { return m.loss_valued ? significant(v, 9) : fixed6(v); };
  auto labels = [](const std::vector<std::string>& ls) {
    std::string s = "[";
    for (std::size_t i = 0; i < ls.size(); ++i) s += (i > 0 ? ", " : "") + json_quote(ls[i]);
    return s + "]";
  };
  std::string s = "{\n  \"variant\": " + json_quote(analysis::to_string(variant)) + ",\n";
  s += std::string("  \"loss_valued\": ") + (m.loss_valued ? "true" : "false") + ",\n";
  s += "  \"anchors\": " + labels(m.anchor_labels) + ",\n";
  s += "  \"candidates\": " + labels(m.candidate_labels) + ",\n";
  s += "  \"values\": [";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    s += (r > 0 ? ",\n    [" : "\n    [");
    for (std::size_t c = 0; c < m.cols(); ++c) s += (c > 0 ? ", " : "") + cell(m.at(r, c));
    s += "]";
  }
  s += m.rows() > 0 ? "\n  ]\n}\n" : "]\n}\n";
  return s;
}

Tensor floats_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw FormatError(std::string(what) + " must be a non-empty array");
  std::vector<float> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw FormatError(std::string(what) + " must contain numbers");
    v.push_back(e.get<float>());
  }
  return Tensor::vector(std::move(v));
}

std::vector<unlearn::TargetPair> load_targets(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("targets file: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("targets")) j = j["targets"];
  if (!j.is_array() || j.empty()) throw FormatError("targets file must hold a non-empty array");
  std::vector<unlearn::TargetPair> targets;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("x") || !t.contains("y")) {
      throw FormatError("each target needs \"x\" and \"y\" arrays");
    }
    targets.push_back({floats_from_json(t["x"], "x"), floats_from_json(t["y"], "y")});
  }
  return targets;
}

std::vector<float> uniform_floats(Xorshift64Star& rng, std::size_t n, double lo, double hi) {
  std::vector<float> v(n);
  for (float& f : v) f = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

// One target drawn uniformly in [-1, 1] from seed + 1.
unlearn::TargetPair default_target(const ToyModel& model, std::uint64_t seed) {
  Xorshift64Star rng(seed + 1);
  Tensor x = Tensor::vector(uniform_floats(rng, model.input_size(), -1.0, 1.0));
  Tensor y = Tensor::vector(uniform_floats(rng, model.output_size(), -1.0, 1.0));
  return {std::move(x), std::move(y)};
}

std::vector<Tensor> probe_images(std::uint64_t seed, std::size_t count) {
  Xorshift64Star rng(seed + 2);
  std::vector<Tensor> images;
  const std::size_t n = 3 * kProbeImageSize * kProbeImageSize;
  for (std::size_t i = 0; i < count; ++i) {
    images.emplace_back(std::vector<std::size_t>{3, kProbeImageSize, kProbeImageSize},
                        uniform_floats(rng, n, 0.0, 1.0));
  }
  return images;
}

struct ModelFlags {
  std::string model_path;
  std::uint64_t seed = kDefaultToySeed;

  void attach(CLI::App* sub) {
    sub->add_option("--model", model_path, "Toy model JSON (default: generated from --seed)");
    sub->add_option("--seed", seed, "Seed for the default model, target and probes")
        ->capture_default_str();
  }

  ToyModel load() const {
    if (model_path.empty()) return refnet::default_toy_model(seed);
    return refnet::toy_model_from_json(read_file(model_path));
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cpdm: copyright-similarity metrics and unlearning evaluation", "cpdm"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string out_path;
  std::string fmt;
  MetricFlags mflags;
  ModelFlags model_flags;
  std::string path_a;
  std::string path_b;
  std::function<int()> action;

  // extract-ref
  std::string image_path;
  std::string image_id;
  auto* extract = app.add_subcommand("extract-ref", "Compute refnet features for a PPM image");
  extract->add_option("--image", image_path, "Binary PPM (P6) image")->required();
  extract->add_option("--out", out_path, "Bundle to write")->required();
  extract->add_option("--id", image_id, "Image id (default: file stem)");
  extract->callback([&] {
    action = [&] {
      const refnet::RefExtractor extractor(refnet_seed());
      const Tensor image = load_ppm(image_path);
      const std::string id = image_id.empty() ? fs::path(image_path).stem().string() : image_id;
      save_bundle(refnet::forward_features(image, extractor, id), out_path);
      return kExitOk;
    };
  });

  // cm
  auto* cm = app.add_subcommand("cm", "CPDM similarity of two bundles");
  cm->add_option("--a", path_a, "First bundle")->required();
  cm->add_option("--b", path_b, "Second bundle")->required();
  mflags.attach(cm);
  cm->add_option("--format", fmt, "plain or json")->check(CLI::IsMember({"plain", "json"}));
  cm->add_option("--out", out_path, "Write output to file");
  cm->callback([&] {
    action = [&] {
      const metric::MetricConfig cfg = mflags.config();
      const metric::MetricReport r = metric::cpdm_metric(load_bundle(path_a), load_bundle(path_b), cfg);
      emit(fmt == "json" ? metric::to_json(r) : metric::to_plain(r), out_path, out);
      return kExitOk;
    };
  });

  // matrix
  std::string anchors_dir;
  std::string candidates_dir;
  std::string variant_name = "cm";
  std::string pgm_path;
  bool invert = false;
  bool loss_valued = false;
  unsigned jobs = 1;
  auto* matrix = app.add_subcommand("matrix", "Anchor x candidate similarity matrix");
  matrix->add_option("--anchors", anchors_dir, "Directory of anchor bundles")->required();
  matrix->add_option("--candidates", candidates_dir, "Directory of candidate bundles")->required();
  matrix->add_option("--variant", variant_name, "cm, sem, style, sum, sum2 or prod2")
      ->check(CLI::IsMember({"cm", "sem", "style", "sum", "sum2", "prod2"}))
      ->capture_default_str();
  matrix->add_flag("--loss", loss_valued, "Emit raw variant losses instead of similarities");
  matrix->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  matrix->add_option("--format", fmt, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  matrix->add_option("--out", out_path, "Write the matrix to file");
  matrix->add_option("--pgm", pgm_path, "Also write a heatmap PGM");
  matrix->add_flag("--invert", invert, "Invert heatmap intensities");
  mflags.attach(matrix);
  matrix->callback([&] {
    action = [&] {
      const metric::MetricConfig cfg = mflags.config();
      const analysis::Variant variant = analysis::variant_from_string(variant_name);
      std::vector<std::string> anchor_labels;
      std::vector<std::string> candidate_labels;
      const auto anchors = load_dir(anchors_dir, anchor_labels);
      const auto candidates = load_dir(candidates_dir, candidate_labels);
      analysis::SimilarityMatrix m =
          analysis::build_matrix(anchors, candidates, cfg, variant, jobs, loss_valued);
      m.anchor_labels = anchor_labels;
      m.candidate_labels = candidate_labels;
      emit(fmt == "json" ? matrix_json(m, variant) : analysis::to_csv(m), out_path, out);
      if (!pgm_path.empty()) write_file(pgm_path, analysis::render_heatmap(m, invert));
      return kExitOk;
    };
  });

  // heatmap
  std::string matrix_path;
  auto* heatmap = app.add_subcommand("heatmap", "Render a matrix CSV as a PGM heatmap");
  heatmap->add_option("--matrix", matrix_path, "Matrix CSV from the matrix command")->required();
  heatmap->add_option("--out", out_path, "PGM file to write")->required();
  heatmap->add_flag("--invert", invert, "Invert intensities");
  heatmap->callback([&] {
    action = [&] {
      const analysis::SimilarityMatrix m = analysis::matrix_from_csv(read_file(matrix_path));
      write_file(out_path, analysis::render_heatmap(m, invert));
      return kExitOk;
    };
  });

  // fid
  std::string save_a;
  std::string save_b;
  auto* fid = app.add_subcommand("fid", "Frechet distance between two embedding sets");
  fid->add_option("--a", path_a, "Directory of bundles, stats file or single bundle")->required();
  fid->add_option("--b", path_b, "Directory of bundles, stats file or single bundle")->required();
  fid->add_option("--save-a", save_a, "Save the fitted statistics of --a");
  fid->add_option("--save-b", save_b, "Save the fitted statistics of --b");
  fid->add_option("--format", fmt, "plain or json")->check(CLI::IsMember({"plain", "json"}));
  fid->add_option("--out", out_path, "Write output to file");
  fid->callback([&] {
    action = [&] {
      const metric::GaussianStats a = load_distribution(path_a);
      const metric::GaussianStats b = load_distribution(path_b);
      if (!save_a.empty()) metric::save_stats(a, save_a);
      if (!save_b.empty()) metric::save_stats(b, save_b);
      const std::string v = fixed6(metric::fid(a, b));
      emit(fmt == "json" ? "{\"fid\": " + v + "}\n" : v + "\n", out_path, out);
      return kExitOk;
    };
  });

  // delta-clip
  std::string text_path;
  auto* dclip = app.add_subcommand("delta-clip", "Change in text alignment, generated vs unlearned");
  dclip->add_option("--a", path_a, "Bundle of the generated image")->required();
  dclip->add_option("--b", path_b, "Bundle of the unlearned image")->required();
  dclip->add_option("--text", text_path, "Bundle holding the text embedding (default: --a)");
  dclip->add_option("--format", fmt, "plain or json")->check(CLI::IsMember({"plain", "json"}));
  dclip->add_option("--out", out_path, "Write output to file");
  dclip->callback([&] {
    action = [&] {
      const FeatureBundle gen = load_bundle(path_a);
      const FeatureBundle unl = load_bundle(path_b);
      const FeatureBundle text_src = text_path.empty() ? gen : load_bundle(text_path);
      if (!text_src.text_embedding) {
        throw ValidationError("no text_embedding in " + (text_path.empty() ? path_a : text_path));
      }
      const std::string v = fixed6(metric::delta_clip(gen.embedding, unl.embedding, *text_src.text_embedding));
      emit(fmt == "json" ? "{\"delta_clip\": " + v + "}\n" : "delta_clip " + v + "\n", out_path, out);
      return kExitOk;
    };
  });

  // correlate
  std::string ratings_path;
  std::string group_by = "category";
  auto* corr = app.add_subcommand("correlate", "Correlate metric values with human ratings");
  corr->add_option("--ratings", ratings_path, "Ratings CSV")->required();
  corr->add_option("--group-by", group_by, "category or prompt_length")
      ->check(CLI::IsMember({"category", "prompt_length"}))
      ->capture_default_str();
  corr->add_option("--format", fmt, "plain or json")->check(CLI::IsMember({"plain", "json"}));
  corr->add_option("--out", out_path, "Write output to file");
  corr->callback([&] {
    action = [&] {
      const analysis::CorrelationReport r = analysis::correlate_ratings(
          analysis::load_ratings_csv(ratings_path), analysis::group_by_from_string(group_by));
      for (const std::string& w : r.warnings) err << "warning: " << w << "\n";
      emit(fmt == "json" ? analysis::to_json(r) : analysis::to_plain(r), out_path, out);
      return kExitOk;
    };
  });

  // unlearn-ga / unlearn-wp
  std::string targets_path;
  std::string save_model;
  std::size_t probes = 2;
  unlearn::GAConfig ga_cfg;
  unlearn::PruneSpec wp_spec;
  auto add_unlearn_common = [&](CLI::App* sub) {
    model_flags.attach(sub);
    sub->add_option("--targets", targets_path, "Targets JSON: [{\"x\": [...], \"y\": [...]}]");
    sub->add_option("--probes", probes, "Number of probe images for CM evaluation")
        ->check(CLI::Range(std::size_t{0}, std::size_t{64}))
        ->capture_default_str();
    sub->add_option("--out", out_path, "Write the trace JSON to file");
    sub->add_option("--save-model", save_model, "Write the unlearned model JSON");
    mflags.attach(sub);
  };
  auto finish_unlearn = [&](unlearn::UnlearnTrace trace) {
    if (probes > 0) {
      const refnet::RefExtractor extractor(refnet_seed());
      const std::vector<Tensor> images = probe_images(model_flags.seed, probes);
      std::vector<FeatureBundle> anchors;
      for (const Tensor& img : images) {
        anchors.push_back(unlearn::generate_features(trace.original, img, extractor));
      }
      const unlearn::EvaluationReport ev = unlearn::evaluate_unlearning(
          trace.original, trace.unlearned, anchors, images, extractor, mflags.config());
      trace.cm_before = ev.mean_cm_before;
      trace.cm_after = ev.mean_cm_after;
    }
    if (!save_model.empty()) write_file(save_model, refnet::to_json(trace.unlearned));
    emit(unlearn::to_json(trace), out_path, out);
    return kExitOk;
  };
  auto targets_for = [&](const ToyModel& model) {
    return targets_path.empty() ? std::vector<unlearn::TargetPair>{default_target(model, model_flags.seed)}
                                : load_targets(targets_path);
  };

  auto* ga = app.add_subcommand("unlearn-ga", "Gradient-ascent unlearning on the toy model");
  add_unlearn_common(ga);
  ga->add_option("--eta", ga_cfg.eta, "Learning rate")->capture_default_str();
  ga->add_option("--epochs", ga_cfg.epochs, "Epochs over all targets")->capture_default_str();
  ga->callback([&] {
    action = [&] {
      mflags.config();
      ga_cfg.validate();
      const ToyModel model = model_flags.load();
      return finish_unlearn(unlearn::ga_run(model, targets_for(model), ga_cfg));
    };
  });

  auto* wp = app.add_subcommand("unlearn-wp", "Activation-guided weight pruning on the toy model");
  add_unlearn_common(wp);
  wp->add_option("--pc", wp_spec.p_c, "Fraction of units selected per layer")->capture_default_str();
  wp->add_option("--pw", wp_spec.p_w, "Fraction of weights zeroed per selected unit")
      ->capture_default_str();
  wp->callback([&] {
    action = [&] {
      mflags.config();
      wp_spec.validate();
      const ToyModel model = model_flags.load();
      return finish_unlearn(unlearn::wp_run(model, targets_for(model), wp_spec));
    };
  });

  // grad-check
  double h = 1e-6;
  auto* gc = app.add_subcommand("grad-check", "Compare analytic and finite-difference gradients");
  model_flags.attach(gc);
  gc->add_option("--targets", targets_path, "Targets JSON (first entry is used)");
  gc->add_option("--step", h, "Finite-difference step")->check(CLI::PositiveNumber)->capture_default_str();
  gc->add_option("--format", fmt, "plain or json")->check(CLI::IsMember({"plain", "json"}));
  gc->add_option("--out", out_path, "Write output to file");
  gc->callback([&] {
    action = [&] {
      const ToyModel model = model_flags.load();
      const unlearn::TargetPair t = targets_for(model).front();
      const std::string v = significant(refnet::grad_check(model, t.x, t.y, h), 9);
      emit(fmt == "json" ? "{\"max_relative_error\": " + v + "}\n" : "max_relative_error " + v + "\n",
           out_path, out);
      return kExitOk;
    };
  });

  // bundle-info
  auto* info = app.add_subcommand("bundle-info", "Describe a bundle file");
  info->add_option("bundle", path_a, "Bundle file")->required();
  info->add_option("--format", fmt, "plain or json")->check(CLI::IsMember({"plain", "json"}));
  info->add_option("--out", out_path, "Write output to file");
  info->callback([&] {
    action = [&] {
      const FeatureBundle b = load_bundle(path_a);
      emit(fmt == "json" ? bundle_info_json(b) : bundle_info_plain(b), out_path, out);
      return kExitOk;
    };
  });

  if (!args.empty() && !args.front().starts_with("-") && app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    return kExitUsage;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace cpdm::cli
