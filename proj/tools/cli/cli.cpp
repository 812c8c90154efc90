#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "originet/active_imaging.hpp"
#include "originet/activations.hpp"
#include "originet/augment.hpp"
#include "originet/dataset.hpp"
#include "originet/error.hpp"
#include "originet/gradcheck_suite.hpp"
#include "originet/image_io.hpp"
#include "originet/loso.hpp"
#include "originet/serialization.hpp"
#include "originet/trainer.hpp"
#include "report.hpp"

namespace originet::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig rc = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) rc.train.seed = *g.seed;
  return rc;
}

const std::string& require_out(const Globals& g, const char* command) {
  if (g.out.empty()) throw ArgumentError(std::string(command) + ": --out is required");
  return g.out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// active-image
// ---------------------------------------------------------------------------

struct ActiveImageArgs {
  std::string input;
  std::string ft1 = "zero";
  bool abs_diff = false;
  bool color = false;
  bool raw_dump = false;
  std::string format = "png";
};

bool is_single_video(const fs::path& p) {
  return is_raw_video_file(p) || (fs::is_directory(p) && !list_frame_files(p).empty());
}

void write_active(const fs::path& video, const fs::path& target, const ActiveImageArgs& a) {
  FrameSequence seq;
  seq.id = video.filename().string();
  for (Image& f : load_video(video)) seq.frames.push_back(a.color ? std::move(f) : to_grayscale(f));
  ActiveImageOptions opts;
  opts.abs_diff = a.abs_diff;
  if (a.ft1 == "zero") {
    opts.ft1_mode = Ft1Mode::Zero;
  } else if (a.ft1 == "first_frame") {
    opts.ft1_mode = Ft1Mode::FirstFrame;
  } else {
    throw ArgumentError("--ft1 must be zero or first_frame");
  }
  const ActiveImage raw = active_image(seq, opts);
  write_image(target, normalize_active(raw).pixels);
  if (a.raw_dump) {
    fs::path dump = target;
    dump.replace_extension(".rvid");
    write_raw_video(dump, {raw.pixels});
  }
}

int cmd_active_image(const Globals& g, const ActiveImageArgs& a, std::ostream& out) {
  const fs::path input(a.input);
  const fs::path target(require_out(g, "active-image"));
  if (!fs::exists(input)) throw IoError("input not found: " + input.string());
  if (is_single_video(input)) {
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    write_active(input, target, a);
    out << "wrote " << target.string() << '\n';
    return kExitOk;
  }
  if (!fs::is_directory(input)) throw FormatError("not a video: " + input.string());
  std::vector<fs::path> videos;
  for (const auto& e : fs::directory_iterator(input)) {
    if (is_single_video(e.path())) videos.push_back(e.path());
  }
  std::sort(videos.begin(), videos.end());
  if (videos.empty()) throw IoError("no videos under " + input.string());
  fs::create_directories(target);
  for (const fs::path& v : videos) {
    fs::path name = v.filename();
    name.replace_extension("." + a.format);
    write_active(v, target / name, a);
  }
  out << "wrote " << videos.size() << " active images to " << target.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const Globals& g, const std::string& manifest_path, std::ostream& out) {
  const RunConfig rc = resolve_config(g);
  const fs::path dir(require_out(g, "train"));
  const DatasetManifest manifest = load_manifest(manifest_path);
  validate(manifest);

  auto [train_entries, val_entries] =
      train_val_split(manifest.entries, rc.pipeline.train_ratio, rc.train.seed);
  if (val_entries.empty()) val_entries = train_entries;
  std::vector<Sample> train_set;
  for (const Sample& s : materialize(manifest, train_entries, rc.model, rc.pipeline)) {
    for (Sample& a : augment(s, rc.pipeline.augment)) train_set.push_back(std::move(a));
  }
  const std::vector<Sample> val_set = materialize(manifest, val_entries, rc.model, rc.pipeline);

  fs::create_directories(dir);
  const OrigiNet initial = build(rc.model, rc.train.seed);
  save_weights(initial, dir / "initial_weights.ognw");

  std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
  if (!log) throw IoError("cannot write " + (dir / "train_log.jsonl").string());
  const auto started = Clock::now();
  const TrainResult result = train(initial, train_set, val_set, rc.train,
                                   [&](const EpochLog& e) { log << log_line(e) << '\n'; });
  save_weights(result.best_model, dir / "weights.ognw");

  Json report;
  report["command"] = "train";
  report["train_samples"] = train_set.size();
  report["val_samples"] = val_set.size();
  report["epochs_run"] = result.log.size();
  report["best_epoch"] = result.best_epoch;
  report["best_val_acc"] = result.best_val_acc;
  report["final_train_acc"] = result.log.back().train_acc;
  report["param_count"] = param_count(result.best_model);
  report["config"] = config_echo(rc);
  report["timing"] = Json{{"total_ms", ms_since(started)}};
  write_text(dir / "train_report.json", report.dump(2) + "\n");

  out << "trained " << result.log.size() << " epochs, best val acc " << result.best_val_acc
      << " at epoch " << result.best_epoch << "; weights in " << (dir / "weights.ognw").string()
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-loso
// ---------------------------------------------------------------------------

int cmd_eval_loso(const Globals& g, const std::string& manifest_path, bool shuffle,
                  std::ostream& out) {
  const RunConfig rc = resolve_config(g);
  const fs::path dir(require_out(g, "eval-loso"));
  DatasetManifest manifest = load_manifest(manifest_path);
  if (shuffle) manifest = shuffle_labels(std::move(manifest), rc.train.seed);

  fs::create_directories(dir);
  std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
  if (!log) throw IoError("cannot write " + (dir / "train_log.jsonl").string());
  const std::vector<std::string> subjects = manifest.subjects();
  const auto started = Clock::now();
  const LosoResult result = evaluate_loso(manifest, rc, [&](std::size_t fold, const EpochLog& e) {
    log << log_line(e, static_cast<int>(fold), subjects[fold]) << '\n';
  });
  const Json report = loso_report(result, rc, manifest.label_names, shuffle, ms_since(started));
  write_text(dir / "report.json", report.dump(2) + "\n");

  for (const FoldOutcome& f : result.folds) {
    out << "fold " << f.test_subject << ": " << f.correct << "/" << f.test_samples << '\n';
  }
  out << "LOSO accuracy (micro) " << result.micro_accuracy << ", mean over folds "
      << result.mean_fold_accuracy << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

std::string shape_text(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

int cmd_inspect(const Globals& g, const std::string& path, std::ostream& out) {
  ModelConfig config;
  std::string source = "default config";
  if (!path.empty()) {
    const fs::path p(path);
    if (p.extension() == ".ognw") {
      config = load_weights(p).config;
    } else {
      config = load_run_config(p).model;
    }
    source = path;
  } else if (!g.config.empty()) {
    config = load_run_config(g.config).model;
    source = g.config;
  }
  config.validate();

  out << "model from " << source << '\n';
  out << std::left << std::setw(22) << "layer" << std::setw(12) << "kind" << std::setw(14)
      << "output" << std::right << std::setw(12) << "params" << '\n';
  for (const LayerSummary& l : summarize(config)) {
    out << std::left << std::setw(22) << l.name << std::setw(12) << l.kind << std::setw(14)
        << shape_text(l.output_shape) << std::right << std::setw(12) << l.params << '\n';
  }
  const std::size_t total = param_count(config);
  char mem[64];
  std::snprintf(mem, sizeof mem, "%.2f", static_cast<double>(total) * 4.0 / (1024.0 * 1024.0));
  out << "weight layers: " << weight_layer_count(config) << '\n';
  out << "learnable parameters: " << total << '\n';
  out << "float32 memory: " << mem << " MiB\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

struct CurveArgs {
  std::vector<std::string> kinds;
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t steps = 241;
};

int cmd_activations(const Globals& g, const CurveArgs& a, std::ostream& out) {
  const fs::path dir(require_out(g, "activations"));
  std::vector<ActivationKind> kinds;
  if (a.kinds.empty()) {
    kinds = all_activation_kinds();
  } else {
    for (const std::string& k : a.kinds) kinds.push_back(parse_activation_kind(k));
  }
  fs::create_directories(dir);
  for (ActivationKind k : kinds) {
    const fs::path file = dir / (std::string(activation_name(k)) + ".csv");
    write_text(file, activation_curve_csv(Activation::of(k), a.x_min, a.x_max, a.steps));
    out << "wrote " << file.string() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

int cmd_gradcheck(const Globals& g, const std::string& scope, bool plant, std::ostream& out) {
  const std::uint64_t seed = g.seed.value_or(0);
  const std::vector<GradcheckCase> cases = run_gradcheck_suite(parse_gradcheck_scope(scope), seed, plant);
  double worst = 0.0;
  bool all_passed = true;
  char line[160];
  for (const GradcheckCase& c : cases) {
    std::snprintf(line, sizeof line, "%s %-28s discrepancy %.3e (tolerance %.0e)\n",
                  c.passed() ? "PASS" : "FAIL", c.name.c_str(), c.discrepancy, c.tolerance);
    out << line;
    worst = std::max(worst, c.discrepancy);
    all_passed = all_passed && c.passed();
  }
  std::snprintf(line, sizeof line, "%s scope %s seed %llu: max discrepancy %.3e%s\n",
                all_passed ? "PASS" : "FAIL", scope.c_str(), static_cast<unsigned long long>(seed),
                worst, plant ? " (planted fault)" : "");
  out << line;
  return all_passed ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const Globals& g, SynthSpec spec, std::ostream& out) {
  const fs::path dir(require_out(g, "synth"));
  if (g.seed) spec.seed = *g.seed;
  const DatasetManifest m = synth_dataset(spec, dir);
  out << "wrote " << m.entries.size() << " videos of " << spec.num_subjects << " subjects to "
      << (dir / "manifest.csv").string() << '\n';
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const ProtocolError*>(&e)) return kExitFailure;
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e)) {
    return kExitUsage;
  }
  return kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Micro-expression recognition with active images and OrigiNet", "originet"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for initialization, splits and shuffles");
  app.add_option("--config", g.config, "Run configuration file (key = value lines)");
  app.add_option("--out", g.out, "Output file or directory");

  ActiveImageArgs ai;
  auto* active = app.add_subcommand("active-image", "Write normalized active images of videos");
  active->add_option("input", ai.input, "Frame directory, raw video, or directory of videos")->required();
  active->add_option("--ft1", ai.ft1, "Meaning of FT(1): zero or first_frame");
  active->add_flag("--abs-diff", ai.abs_diff, "Use absolute frame differences");
  active->add_flag("--color", ai.color, "Keep color channels instead of converting to gray");
  active->add_flag("--raw-dump", ai.raw_dump, "Also write the unnormalized image as .rvid");
  active->add_option("--format", ai.format, "Image format for directory input (png or pgm)");

  std::string manifest;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a manifest");
  train_cmd->add_option("--manifest", manifest, "Dataset manifest CSV")->required();

  bool shuffle = false;
  auto* loso = app.add_subcommand("eval-loso", "Leave-one-subject-out evaluation");
  loso->add_option("--manifest", manifest, "Dataset manifest CSV")->required();
  loso->add_flag("--shuffle-labels", shuffle, "Permute labels first (chance-level control)");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Print the layer table and parameter count");
  inspect->add_option("path", inspect_path, "Weight file (.ognw) or config file");

  CurveArgs curves;
  auto* acts = app.add_subcommand("activations", "Export activation curves as CSV");
  acts->add_option("--kinds", curves.kinds, "Activation names (default: all)")->delimiter(',');
  acts->add_option("--min", curves.x_min, "Lower end of the range");
  acts->add_option("--max", curves.x_max, "Upper end of the range");
  acts->add_option("--steps", curves.steps, "Number of samples");

  std::string scope = "activation";
  bool plant = false;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  grad->add_option("--scope", scope, "activation, layer or model");
  grad->add_flag("--plant-fault", plant, "Double one analytic gradient; the check must fail");

  SynthSpec spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic micro-motion dataset");
  synth->add_option("--subjects", spec.num_subjects, "Number of subjects");
  synth->add_option("--videos", spec.videos_per_subject, "Videos per subject");
  synth->add_option("--classes", spec.num_classes, "Number of classes");
  synth->add_option("--frames", spec.frames, "Frames per video");
  synth->add_option("--size", spec.size, "Frame height and width");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "originet: " << e.what() << '\n';
    if (!e.get_name().empty() && e.get_exit_code() != 0) err << "run 'originet --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (active->parsed()) return cmd_active_image(g, ai, out);
    if (train_cmd->parsed()) return cmd_train(g, manifest, out);
    if (loso->parsed()) return cmd_eval_loso(g, manifest, shuffle, out);
    if (inspect->parsed()) return cmd_inspect(g, inspect_path, out);
    if (acts->parsed()) return cmd_activations(g, curves, out);
    if (grad->parsed()) return cmd_gradcheck(g, scope, plant, out);
    if (synth->parsed()) return cmd_synth(g, spec, out);
  } catch (const Error& e) {
    err << "originet: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "originet: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace originet::cli
