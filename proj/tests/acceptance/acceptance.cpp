// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   pansr_acceptance [path/to/pansr]
//
// The CLI path (or $PANSR_CLI) is needed by the determinism criterion, which
// drives the real command-line pipeline.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <json.hpp>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "pansr/dataset.hpp"
#include "pansr/metrics.hpp"
#include "pansr/nn.hpp"
#include "pansr/pansharp.hpp"
#include "pansr/parallel.hpp"
#include "pansr/raster_io.hpp"

namespace fs = std::filesystem;
using namespace pansr;

namespace {

// Tolerances and budgets, fixed here and nowhere else.
constexpr double kSsimIdentityTol = 1e-9;
constexpr double kFsimIdentityTol = 1e-6;
constexpr double kIdentityBudgetS = 10.0;
constexpr double kPsnrOneStep = 72.245;
constexpr double kPsnrOneStepTol = 1e-3;
constexpr double kNaiveSsimTol = 1e-8;
constexpr double kIssmTol = 1e-6;
constexpr double kSfimIdentityRelTol = 1e-6;
constexpr double kSfimRatioTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kGradBudgetS = 120.0;
constexpr int kLearnMaxSteps = 2000;
constexpr double kLearnMinValDrop = 0.30;
constexpr double kLearnBudgetS = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome metric_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  int inf_count = 0;
  double ssim_err = 0.0, fsim_err = 0.0;
  const int n = 10;
  for (int i = 0; i < n; ++i) {
    const RasterImage x = testing::random_image(100 + i, 64, 64);
    inf_count += std::isinf(metrics::psnr(x, x)) && metrics::psnr(x, x) > 0;
    ssim_err = std::max(ssim_err, std::abs(metrics::ssim(x, x) - 1.0));
    fsim_err = std::max(fsim_err, std::abs(metrics::fsim(x, x) - 1.0));
  }
  const double t = seconds_since(t0);
  const bool pass = inf_count == n && ssim_err <= kSsimIdentityTol && fsim_err <= kFsimIdentityTol && t < kIdentityBudgetS;
  return {pass, "psnr=inf on " + std::to_string(inf_count) + "/" + std::to_string(n) + ", max |ssim-1| " +
                    fmt("%.2e", ssim_err) + ", max |fsim-1| " + fmt("%.2e", fsim_err) + ", " + fmt("%.1f s", t)};
}

// 2 ---------------------------------------------------------------------------

Outcome psnr_closed_form() {
  const RasterImage zero(32, 32, default_ms_roles(), 0.0);
  const RasterImage one(32, 32, default_ms_roles(), 1.0);
  const RasterImage full(32, 32, default_ms_roles(), 4095.0);
  const double a = metrics::psnr(zero, one, 4095.0);
  const double b = metrics::psnr(zero, full, 4095.0);
  const bool pass = std::abs(a - kPsnrOneStep) <= kPsnrOneStepTol && b == 0.0;
  return {pass, "0 vs 1: " + fmt("%.6f dB", a) + ", 0 vs 4095: " + fmt("%.17g dB", b)};
}

// 3 ---------------------------------------------------------------------------

Outcome ssim_naive_oracle() {
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Plane x = testing::random_plane(rng, 32, 32);
    const Plane y = testing::random_plane(rng, 32, 32);
    worst = std::max(worst, std::abs(metrics::ssim(x, y) - testing::naive_ssim(x, y, 4095.0)));
  }
  return {worst <= kNaiveSsimTol, "20 pairs, max |diff| " + fmt("%.2e", worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome issm_conformance() {
  std::ifstream in(PANSR_TEST_DATA "/issm_reference.json");
  if (!in) return {false, "fixture missing"};
  const auto fixture = nlohmann::json::parse(in);
  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& p : fixture["pairs"]) by_name[p["name"].get<std::string>()] = &p;

  double worst = 0.0;
  int compared = 0;
  bool checksums = true, nan_match = true;
  std::vector<std::pair<double, std::string>> ours, theirs;
  for (const auto& pair : testing::issm_corpus()) {
    const auto it = by_name.find(pair.name);
    if (it == by_name.end()) return {false, "fixture lacks " + pair.name};
    const auto& rec = *it->second;
    checksums = checksums && testing::checksum(pair.reference) == rec["reference_checksum"].get<std::uint64_t>() &&
                testing::checksum(pair.candidate) == rec["candidate_checksum"].get<std::uint64_t>();
    const RasterImage ref = pair.reference.to_raster(), cand = pair.candidate.to_raster();
    for (int b = 0; b < 4; ++b) {
      const metrics::IssmTerms t = metrics::issm_terms(ref.bands[b], cand.bands[b]);
      const auto& rb = rec["bands"][b];
      worst = std::max({worst, std::abs(t.ehs - rb["ehs"].get<double>()) / std::max(1.0, std::abs(t.ehs)),
                        std::abs(t.ssim - rb["ssim"].get<double>()), std::abs(t.value - rb["issm"].get<double>())});
      if (rb["ec"].is_null())
        nan_match = nan_match && std::isnan(t.ec);
      else
        worst = std::max(worst, std::abs(t.ec - rb["ec"].get<double>()));
    }
    const double v = metrics::issm(ref, cand), want = rec["issm"].get<double>();
    worst = std::max(worst, std::abs(v - want));
    ++compared;
    if (pair.name.rfind("degrade", 0) == 0) {
      ours.emplace_back(v, pair.name);
      theirs.emplace_back(want, pair.name);
    }
  }
  const auto desc = [](const auto& a, const auto& b) { return a.first > b.first; };
  std::sort(ours.begin(), ours.end(), desc);
  std::sort(theirs.begin(), theirs.end(), desc);
  const auto& frozen = fixture["degradation_order"];
  bool order = ours.size() == 3 && frozen.size() == 3;
  for (std::size_t i = 0; order && i < ours.size(); ++i)
    order = ours[i].second == theirs[i].second && ours[i].second == frozen[i].get<std::string>();
  const bool pass = compared >= 20 && checksums && nan_match && worst <= kIssmTol && order;
  return {pass, std::to_string(compared) + " pairs, max |diff| over per-band terms and image value " +
                    fmt("%.2e", worst) + (checksums ? "" : ", corpus checksum mismatch") +
                    (nan_match ? "" : ", undefined edge correlation mismatch") +
                    (order ? ", degradation order reproduced" : ", degradation order differs")};
}

// 5 ---------------------------------------------------------------------------

Outcome sfim_identities() {
  Rng rng(5);
  double id_err = 0.0, ratio_err = 0.0;
  std::size_t ratio_points = 0;
  SfimParams p;
  p.clamp_output = false;  // clamping would break both identities by construction
  for (int s = 0; s < 10; ++s) {
    const SyntheticScene sc = synth_scene(rng.next_u64(), 32);
    const RasterImage up = resample(sc.ms, ResampleSpec{}, ResampleDirection::Up);

    RasterImage flat = sc.pan;
    for (auto& v : flat.bands[0].values()) v = 1500.0;
    const RasterImage id = sfim(sc.ms, flat, p);
    for (int b = 0; b < 4; ++b)
      for (std::size_t i = 0; i < up.bands[b].size(); ++i) {
        const double ref = up.bands[b].values()[i];
        id_err = std::max(id_err, std::abs(id.bands[b].values()[i] - ref) / std::max(1.0, std::abs(ref)));
      }

    const RasterImage out = sfim(sc.ms, sc.pan, p);
    for (int b = 0; b < 3; ++b)
      for (std::size_t i = 0; i < up.bands[b].size(); ++i) {
        const double ub = up.bands[b].values()[i], un = up.bands[3].values()[i];
        const double ob = out.bands[b].values()[i], on = out.bands[3].values()[i];
        if (un == 0.0 || on == 0.0 || ub == 0.0) continue;  // ratio undefined
        ratio_err = std::max(ratio_err, std::abs(ob / on - ub / un) / std::abs(ub / un));
        ++ratio_points;
      }
  }
  const bool pass = id_err < kSfimIdentityRelTol && ratio_err < kSfimRatioTol && ratio_points > 0;
  return {pass, "10 scenes, constant-PAN rel err " + fmt("%.2e", id_err) + ", band-ratio rel err " +
                    fmt("%.2e", ratio_err)};
}

// 6 ---------------------------------------------------------------------------

Outcome tiling_oracle() {
  Rng rng(6);
  int agree = 0;
  for (int k = 0; k < 50; ++k) {
    const int tile = 1 + static_cast<int>(rng.uniform_index(128));
    const int stride = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(tile)));
    const int size = static_cast<int>(rng.uniform_index(1200));
    agree += tile_count(size, tile, stride) == testing::enumerate_tile_starts(size, tile, stride);
  }
  const TileSpec spec;
  const auto small = tile_scene(testing::random_image(1, 64, 64), testing::random_image(2, 256, 256), spec, "s");
  const int big_lr = tile_count(1000, spec.lr_tile, spec.lr_stride());
  const int big_hr = tile_count(4000, spec.hr_tile, spec.hr_stride());
  const int big_enum = testing::enumerate_tile_starts(4000, spec.hr_tile, spec.hr_stride());
  const bool pass = agree == 50 && small.size() == 9 && big_lr * big_lr == 3721 && big_hr * big_hr == 3721 &&
                    big_enum * big_enum == 3721;
  return {pass, std::to_string(agree) + "/50 random cases agree, 64x64 LR -> " + std::to_string(small.size()) +
                    " pairs, 1000x1000 LR -> " + std::to_string(big_lr * big_lr) + " pairs"};
}

// 7 ---------------------------------------------------------------------------

Outcome gradient_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<nn::LayerSpec> layers{nn::LayerSpec::conv(3, 6),      nn::LayerSpec::conv(3, 4, 2), nn::LayerSpec::tconv(3, 6),
                                          nn::LayerSpec::maxpool(),      nn::LayerSpec::upsample(),
                                          nn::LayerSpec::pixel_shuffle(2), nn::LayerSpec::prelu(),
                                          nn::LayerSpec::relu(),         nn::LayerSpec::add_skip(0)};
  double worst = 0.0;
  std::string worst_name, failed;
  auto note = [&](const nn::GradCheckReport& r) {
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_name = r.subject;
    }
    if (!r.passed(kGradTol)) failed += " " + r.subject;
  };
  for (const auto& l : layers) note(nn::grad_check_layer(l, 7));
  for (const auto& a : nn::architecture_names()) note(nn::grad_check(nn::build_architecture(a), 7));
  const double t = seconds_since(t0);
  const bool pass = failed.empty() && t < kGradBudgetS;
  return {pass, std::to_string(layers.size()) + " layer configurations + 4 architectures, max rel err " + fmt("%.2e", worst) + " (" + worst_name + ")" +
                    (failed.empty() ? "" : ", failed:" + failed) + ", " + fmt("%.1f s", t)};
}

// 8 ---------------------------------------------------------------------------

Outcome desk_scale_learning() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint64_t kSeed = 2024;
  // Same scene generation as `pansr synth --scenes 8 --lr-size 64`.
  Rng rng(kSeed);
  TileSpec spec;
  spec.seed = kSeed;
  std::vector<TilePair> pairs;
  for (int i = 0; i < 8; ++i) {
    const SyntheticScene sc = synth_scene(rng.next_u64(), 64);
    const auto p = tile_scene(sc.ms, sfim(sc.ms, sc.pan), spec, "scene" + std::to_string(i));
    pairs.insert(pairs.end(), p.begin(), p.end());
  }
  const auto [train_pairs, val_pairs] = split_dataset(pairs, spec);

  nn::Model model(nn::build_architecture("srcnn"), kSeed);
  const auto train_set = nn::make_samples(model, train_pairs);
  const auto val_set = nn::make_samples(model, val_pairs);
  nn::TrainConfig cfg;
  cfg.max_steps = kLearnMaxSteps;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-3;
  cfg.patch_lr = 8;
  cfg.eval_interval = 500;
  cfg.seed = kSeed;
  const auto history = nn::train(model, train_set, val_set, cfg);
  const double v0 = *history.front().val_loss, v1 = *history.back().val_loss;
  const double drop = 1.0 - v1 / v0;

  double ssim_model = 0.0, ssim_bicubic = 0.0;
  for (const auto& p : val_pairs) {
    ssim_model += metrics::ssim(p.hr, nn::super_resolve(model, p.lr));
    ssim_bicubic += metrics::ssim(p.hr, resample(p.lr, ResampleSpec{}, ResampleDirection::Up).clamped());
  }
  ssim_model /= static_cast<double>(val_pairs.size());
  ssim_bicubic /= static_cast<double>(val_pairs.size());
  const double t = seconds_since(t0);
  const bool pass = ssim_model > ssim_bicubic && drop >= kLearnMinValDrop && t < kLearnBudgetS &&
                    history.back().step <= kLearnMaxSteps;
  return {pass, std::to_string(train_pairs.size()) + " train / " + std::to_string(val_pairs.size()) +
                    " val tiles, " + std::to_string(history.back().step) + " steps, held-out SSIM " +
                    fmt("%.4f", ssim_model) + " vs bicubic " + fmt("%.4f", ssim_bicubic) + ", val MSE " +
                    fmt("%.3g", v0) + " -> " + fmt("%.3g", v1) + fmt(" (-%.1f%%)", 100.0 * drop) + ", " +
                    fmt("%.0f s", t)};
}

// 9 ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
  const std::string s = slurp(p);
  return {s.begin(), s.end()};
}

bool run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str()) == 0;
}

// synth -> tile -> train -> pansharpen -> sr -> evaluate, all through the CLI.
bool pipeline(const std::string& cli, const fs::path& dir, int threads, std::string& error) {
  const std::string g = "--seed 7 --threads " + std::to_string(threads) + " ";
  const std::string d = "\"" + dir.string() + "\"";
  const fs::path log = dir.parent_path() / (dir.filename().string() + ".log");
  const std::vector<std::string> steps{
      "synth --out " + d + "/scenes --scenes 3 --lr-size 32",
      "tile --scenes " + d + "/scenes/scenes.json --out " + d + "/ds --hr-tile 64 --lr-tile 16",
      "train --dataset " + d + "/ds --steps 20 --batch 4 --patch 8 --eval-interval 10 --out " + d + "/model.ckpt",
      "pansharpen --ms " + d + "/scenes/scene000_ms.tif --pan " + d + "/scenes/scene000_pan.tif --out " + d +
          "/hr.tif",
      "sr --input " + d + "/scenes/scene000_ms.tif --model " + d + "/model.ckpt --out " + d + "/sr.tif",
      "evaluate --reference " + d + "/hr.tif --candidate SRCNN=" + d + "/sr.tif --format json --out " + d +
          "/report.json",
  };
  for (const auto& s : steps)
    if (!run_cli(cli, g + s, log)) {
      error = "command failed: " + s.substr(0, s.find(' ')) + " (see " + log.string() + ")";
      return false;
    }
  return true;
}

Outcome determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "pansr CLI not found (pass its path or set PANSR_CLI)"};
  testing::TempDir tmp("acceptance_det");
  const std::vector<std::pair<std::string, int>> runs{{"a", 1}, {"b", 1}, {"c", 8}};
  for (const auto& [name, threads] : runs) {
    std::string error;
    if (!pipeline(cli, tmp / name, threads, error)) return {false, error};
  }
  const std::vector<std::string> artifacts{"model.ckpt", "model.ckpt.history.json", "report.json", "sr.tif",
                                           "ds/manifest.jsonl"};
  std::string differ;
  for (const auto& f : artifacts) {
    const std::string a = slurp(tmp / "a" / f);
    if (a.empty()) return {false, f + " missing"};
    if (a != slurp(tmp / "b" / f)) differ += " " + f + "(rerun)";
    if (a != slurp(tmp / "c" / f)) differ += " " + f + "(threads 8)";
  }
  return {differ.empty(), differ.empty() ? "checkpoint, history, report, SR raster and manifest identical across "
                                           "two runs and --threads 1 vs 8"
                                         : "differences:" + differ};
}

// 10 --------------------------------------------------------------------------

Outcome round_trips() {
  testing::TempDir tmp("acceptance_rt");
  Rng rng(10);
  int raster_ok = 0, ckpt_ok = 0;
  for (int k = 0; k < 20; ++k) {
    const int w = 1 + static_cast<int>(rng.uniform_index(48)), h = 1 + static_cast<int>(rng.uniform_index(48));
    const bool pan = rng.uniform_index(2) == 0;
    RasterImage img = testing::random_image(rng.next_u64(), w, h, pan ? 1 : 4);
    if (rng.uniform_index(2)) img.pixel_size_m = 0.5 * static_cast<double>(1 + rng.uniform_index(8));
    const fs::path a = tmp / ("r" + std::to_string(k) + ".tif"), b = tmp / ("r" + std::to_string(k) + "b.tif");
    write_raster(img, a);
    const RasterImage back = read_raster(a);
    write_raster(back, b);
    bool same = back.width == w && back.height == h && back.roles == img.roles && back.pixel_size_m == img.pixel_size_m;
    for (int band = 0; same && band < img.band_count(); ++band)
      same = std::equal(img.bands[band].values().begin(), img.bands[band].values().end(),
                        back.bands[band].values().begin());
    raster_ok += same && slurp(a) == slurp(b);
  }
  const auto& names = nn::architecture_names();
  for (int k = 0; k < 20; ++k) {
    const std::string& arch = names[rng.uniform_index(names.size())];
    const nn::Model m(nn::build_architecture(arch), rng.next_u64());
    const std::uint64_t step = rng.uniform_index(100000);
    const fs::path p = tmp / ("m" + std::to_string(k) + ".ckpt");
    nn::save_checkpoint(p, m, step);
    const nn::Checkpoint c = nn::load_checkpoint(p);
    nn::Tensor x({1, 4, 4, 4});
    for (auto& v : x.values()) v = rng.uniform01();
    const nn::Tensor y0 = m.forward_lr(x), y1 = c.model.forward_lr(x);
    const bool same = c.step == step && nn::encode_checkpoint(c.model, step) == file_bytes(p) &&
                      std::equal(y0.values().begin(), y0.values().end(), y1.values().begin());
    ckpt_ok += same;
  }
  return {raster_ok == 20 && ckpt_ok == 20,
          "raster " + std::to_string(raster_ok) + "/20, checkpoint " + std::to_string(ckpt_ok) + "/20 bit-exact"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = argc > 1 ? argv[1] : "";
  if (cli.empty())
    if (const char* env = std::getenv("PANSR_CLI")) cli = env;

  const std::vector<Criterion> criteria{
      {1, "metric identities", metric_identities},
      {2, "PSNR closed forms", psnr_closed_form},
      {3, "SSIM naive-oracle equivalence", ssim_naive_oracle},
      {4, "ISSM reference conformance", issm_conformance},
      {5, "SFIM identities", sfim_identities},
      {6, "tiling oracle", tiling_oracle},
      {7, "gradient checks", gradient_checks},
      {8, "desk-scale learning", desk_scale_learning},
      {9, "determinism", [&] { return determinism(cli); }},
      {10, "round-trips", round_trips},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %2d %-30s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
