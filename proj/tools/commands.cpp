#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "pansr/dataset.hpp"
#include "pansr/error.hpp"
#include "pansr/metrics.hpp"
#include "pansr/nn.hpp"
#include "pansr/pansharp.hpp"
#include "pansr/raster_io.hpp"
#include "pansr/rng.hpp"

namespace fs = std::filesystem;

namespace pansr::cli {

namespace {

class SynthCommand : public Command {
 public:
  explicit SynthCommand(CLI::App& root) {
    app = root.add_subcommand("synth", "Generate synthetic MS/PAN scene pairs and a scene list");
    bindings.add(app, "--out", out, "Output directory")->required();
    bindings.add(app, "--scenes", scenes, "Number of scenes")->check(CLI::PositiveNumber);
    bindings.add(app, "--lr-size", lr_size, "MS side length in pixels (PAN is 4x)")->check(CLI::Range(32, 1 << 14));
  }
  void run(const Context& ctx) override {
    Rng rng(ctx.seed);
    std::vector<SceneEntry> list;
    for (int i = 0; i < scenes; ++i) {
      const std::uint64_t s = rng.next_u64();
      const SyntheticScene sc = synth_scene(s, lr_size);
      char id[32];
      std::snprintf(id, sizeof id, "scene%03d", i);
      const fs::path ms = fs::path(out) / (std::string(id) + "_ms.tif");
      const fs::path pan = fs::path(out) / (std::string(id) + "_pan.tif");
      write_raster(sc.ms, ms);
      write_raster(sc.pan, pan);
      list.push_back({id, ms, pan, std::nullopt});
    }
    const fs::path list_path = fs::path(out) / "scenes.json";
    write_scene_list(list_path, list);
    std::cout << "wrote " << scenes << " scenes to " << list_path.string() << "\n";
  }
  std::string out;
  int scenes = 8;
  int lr_size = 64;
};

class PansharpenCommand : public Command {
 public:
  explicit PansharpenCommand(CLI::App& root) {
    app = root.add_subcommand("pansharpen", "SFIM pansharpening of a 4-band MS image with a PAN band");
    bindings.add(app, "--ms", ms, "Multispectral input (4 bands)")->required();
    bindings.add(app, "--pan", pan, "Panchromatic input (1 band)")->required();
    bindings.add(app, "--out", out, "Output raster")->required();
    bindings.add(app, "--kernel", p.kernel_size, "Odd box-filter size for the PAN low-pass");
    bindings.add(app, "--epsilon", p.epsilon, "Guard added to the smoothed PAN (sample units)");
    bindings.add_flag(app, "--no-clamp", no_clamp, "Keep values outside the 12-bit domain");
  }
  void run(const Context&) override {
    p.clamp_output = !no_clamp;
    pansharpen_scene(ms, pan, out, p);
    std::cout << "wrote " << out << "\n";
  }
  std::string ms, pan, out;
  SfimParams p;
  bool no_clamp = false;
};

class TileCommand : public Command {
 public:
  explicit TileCommand(CLI::App& root) {
    app = root.add_subcommand("tile", "Pansharpen scenes and cut aligned LR/HR training tiles");
    bindings.add(app, "--scenes", scenes, "Scene list (JSON)")->required();
    bindings.add(app, "--out", out, "Dataset directory")->required();
    bindings.add(app, "--hr-tile", spec.hr_tile, "HR tile side");
    bindings.add(app, "--lr-tile", spec.lr_tile, "LR tile side");
    bindings.add(app, "--stride,--stride-fraction", spec.stride_fraction, "Stride as a fraction of the tile side");
    bindings.add(app, "--split", spec.split_ratio, "Training fraction of the random split");
    bindings.add(app, "--kernel", sfim.kernel_size, "SFIM box-filter size");
  }
  void run(const Context& ctx) override {
    spec.seed = ctx.seed;
    const auto list = read_scene_list(scenes);
    const auto m = build_dataset(list, spec, out, sfim);
    std::cout << "wrote " << m.records.size() << " tile pairs (" << m.train_count << " train, " << m.val_count
              << " val) to " << out << "\n";
  }
  std::string scenes, out;
  TileSpec spec;
  SfimParams sfim;
};

class TrainCommand : public Command {
 public:
  explicit TrainCommand(CLI::App& root) {
    app = root.add_subcommand("train", "Train a super-resolution network on a tiled dataset");
    bindings.add(app, "--dataset", dataset, "Dataset directory written by `tile`")->required();
    bindings.add(app, "--arch", arch, "srcnn, aesr, rednet30 or srresnet");
    bindings.add(app, "--out", out, "Checkpoint path");
    bindings.add(app, "--steps", cfg.max_steps, "Optimizer steps");
    bindings.add(app, "--batch", cfg.batch_size, "Samples per step");
    bindings.add(app, "--lr", cfg.learning_rate, "Adam learning rate");
    bindings.add(app, "--patch", cfg.patch_lr, "Random LR crop side per sample (0 = whole tile)");
    bindings.add(app, "--eval-interval", cfg.eval_interval, "Steps between history entries");
    bindings.add(app, "--checkpoint-interval", cfg.checkpoint_interval, "Steps between checkpoints (0 = end only)");
  }
  void run(const Context& ctx) override {
    if (out.empty()) out = (fs::path(dataset) / (arch + ".ckpt")).string();
    cfg.seed = ctx.seed;
    nn::Model model(nn::build_architecture(arch), ctx.seed);
    const auto m = load_dataset(dataset);
    const auto tr = nn::make_samples(model, load_pairs(m, Split::Train));
    const auto va = nn::make_samples(model, load_pairs(m, Split::Val));
    std::cerr << "training " << arch << " (" << model.parameter_count() << " parameters) on " << tr.size()
              << " train / " << va.size() << " val tiles\n";
    nn::TrainCallbacks cb;
    std::vector<nn::HistoryEntry> history;
    cb.on_entry = [&](const nn::HistoryEntry& e) {
      history.push_back(e);
      std::cerr << "step " << e.step << "  train " << e.train_loss;
      if (e.val_loss) std::cerr << "  val " << *e.val_loss;
      std::cerr << "\n";
    };
    cb.on_checkpoint = [&](int step, const nn::Model& mdl) {
      nn::save_checkpoint(out, mdl, static_cast<std::uint64_t>(step));
      nn::write_history(nn::history_path(out), mdl, cfg, history);
    };
    nn::train(model, tr, va, cfg, cb);
    std::cout << "wrote " << out << "\n";
  }
  std::string dataset, arch = "srcnn", out;
  nn::TrainConfig cfg;
};

class SrCommand : public Command {
 public:
  explicit SrCommand(CLI::App& root) {
    app = root.add_subcommand("sr", "x4 super-resolution of a 4-band image (optionally pansharpened first)");
    bindings.add(app, "--input", input, "4-band input raster")->required();
    bindings.add(app, "--out", out, "Output raster")->required();
    bindings.add(app, "--model", model_path, "Trained checkpoint");
    bindings.add(app, "--arch", arch, "Use a freshly initialized architecture (seeded) instead of a checkpoint");
    bindings.add(app, "--pan", pan, "Pansharpen the input with this PAN band before super-resolution");
    bindings.add(app, "--tile", tiles.lr_tile, "LR tile side for native-LR networks");
    bindings.add(app, "--overlap", tiles.lr_overlap, "LR tile overlap for native-LR networks");
    bindings.add(app, "--up-tile", tiles.up_tile, "Tile side for pre-upsampled networks");
    bindings.add(app, "--up-overlap", tiles.up_overlap, "Tile overlap for pre-upsampled networks");
  }
  void run(const Context& ctx) override {
    if (model_path.empty() == arch.empty()) throw ValidationError("sr needs exactly one of --model or --arch");
    const nn::Model model =
        model_path.empty() ? nn::Model(nn::build_architecture(arch), ctx.seed) : nn::load_checkpoint(model_path).model;
    RasterImage img = read_raster(input);
    if (!pan.empty()) img = sfim(img, read_raster(pan));
    const RasterImage sr = nn::super_resolve(model, img, tiles);
    write_raster(sr, out);
    std::cout << "wrote " << out << " (" << sr.width << "x" << sr.height << ")\n";
  }
  std::string input, out, model_path, arch, pan;
  nn::TileConfig tiles;
};

class EvaluateCommand : public Command {
 public:
  explicit EvaluateCommand(CLI::App& root) {
    app = root.add_subcommand("evaluate", "PSNR/SSIM/FSIM/ISSM of candidate images against a reference");
    bindings.add(app, "--reference", reference, "Reference raster");
    bindings.add(app, "--candidate", candidates, "name=path, repeatable");
    bindings.add(app, "--pairs", pairs, "JSON list of {name, reference, candidates:[{name, path}]} images");
    bindings.add(app, "--format", format, "table, json or csv")->check(CLI::IsMember({"table", "json", "csv"}));
    bindings.add(app, "--out", out, "Also write the report to this file");
  }
  void run(const Context&) override {
    metrics::MetricReport report;
    if (!reference.empty()) report.append(evaluate_one("image", reference, parse_candidates()));
    if (!pairs.empty()) {
      std::ifstream f(pairs);
      if (!f) throw IoError("cannot open " + pairs);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(pairs + ": " + e.what());
      }
      const fs::path base = fs::path(pairs).parent_path();
      for (const auto& img : j.at("images")) {
        std::vector<std::pair<std::string, std::string>> cands;
        for (const auto& c : img.at("candidates"))
          cands.emplace_back(c.at("name").get<std::string>(), (base / c.at("path").get<std::string>()).string());
        report.append(evaluate_one(img.value("name", "image"), (base / img.at("reference").get<std::string>()).string(),
                                   cands));
      }
    }
    if (reference.empty() && pairs.empty() && !candidates.empty())
      throw ValidationError("--candidate needs --reference");
    const std::string text = metrics::render(report, metrics::parse_report_format(format));
    std::cout << text;
    if (!out.empty()) {
      std::ofstream f(out);
      if (!f) throw IoError("cannot write " + out);
      f << text;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> parse_candidates() const {
    std::vector<std::pair<std::string, std::string>> out_list;
    for (const auto& c : candidates) {
      const auto eq = c.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == c.size())
        throw ValidationError("--candidate expects name=path, got '" + c + "'");
      out_list.emplace_back(c.substr(0, eq), c.substr(eq + 1));
    }
    return out_list;
  }

  static metrics::MetricReport evaluate_one(const std::string& name, const std::string& ref_path,
                                            const std::vector<std::pair<std::string, std::string>>& cands) {
    const RasterImage ref = read_raster(ref_path);
    std::vector<metrics::NamedImage> imgs;
    for (const auto& [n, p] : cands) imgs.push_back({n, read_raster(p)});
    return metrics::evaluate(ref, imgs, {}, name);
  }

 public:
  std::string reference, pairs, format = "table", out;
  std::vector<std::string> candidates;
};

class GradcheckCommand : public Command {
 public:
  explicit GradcheckCommand(CLI::App& root) {
    app = root.add_subcommand("gradcheck", "Finite-difference gradient check of layers and architectures");
    bindings.add(app, "--arch", arch, "Architecture name, or 'all'");
    bindings.add_flag(app, "--no-layers", no_layers, "Skip the per-layer checks");
    bindings.add(app, "--tolerance", tolerance, "Maximum relative error");
    bindings.add(app, "--entries", max_entries, "Entries probed per tensor");
  }
  void run(const Context& ctx) override {
    std::vector<nn::GradCheckReport> reports;
    nn::GradCheckOptions opt;
    opt.max_entries = max_entries;
    if (!no_layers) {
      using nn::LayerSpec;
      for (const LayerSpec& l : {LayerSpec::conv(3, 6), LayerSpec::conv(3, 6, 2), LayerSpec::tconv(3, 6),
                                 LayerSpec::maxpool(), LayerSpec::upsample(), LayerSpec::pixel_shuffle(2),
                                 LayerSpec::prelu(), LayerSpec::relu(), LayerSpec::add_skip(0)})
        reports.push_back(nn::grad_check_layer(l, ctx.seed, opt));
    }
    if (arch == "all") {
      for (const auto& name : nn::architecture_names())
        reports.push_back(nn::grad_check(nn::build_architecture(name), ctx.seed, opt));
    } else if (!arch.empty()) {
      reports.push_back(nn::grad_check(nn::build_architecture(arch), ctx.seed, opt));
    }
    bool ok = true;
    for (const auto& r : reports) {
      std::cout << r.subject << ": max rel err " << r.max_rel_error << (r.passed(tolerance) ? "  ok" : "  FAIL")
                << "\n";
      for (const auto& e : r.entries)
        std::cout << "  " << e.tensor << "  checked " << e.checked << "/" << e.size << "  abs " << e.max_abs_error << "  rel " << e.max_rel_error
                  << (e.skipped ? "  kinks skipped " + std::to_string(e.skipped) : "")
                  << (e.unresolved ? "  unresolved " + std::to_string(e.unresolved) : "") << "\n";
      ok = ok && r.passed(tolerance);
    }
    if (!ok) throw RuntimeFailure("gradient check failed");
  }
  std::string arch = "all";
  bool no_layers = false;
  double tolerance = 1e-4;
  int max_entries = 16;
};

}  // namespace

std::vector<std::unique_ptr<Command>> register_commands(CLI::App& root) {
  std::vector<std::unique_ptr<Command>> cmds;
  cmds.push_back(std::make_unique<SynthCommand>(root));
  cmds.push_back(std::make_unique<PansharpenCommand>(root));
  cmds.push_back(std::make_unique<TileCommand>(root));
  cmds.push_back(std::make_unique<TrainCommand>(root));
  cmds.push_back(std::make_unique<SrCommand>(root));
  cmds.push_back(std::make_unique<EvaluateCommand>(root));
  cmds.push_back(std::make_unique<GradcheckCommand>(root));
  return cmds;
}

}  // namespace pansr::cli
