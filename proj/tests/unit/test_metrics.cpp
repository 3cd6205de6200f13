#include <doctest.h>

#include <cmath>
#include <limits>
#include <json.hpp>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pansr/error.hpp"
#include "pansr/metrics.hpp"
#include "pansr/parallel.hpp"

using namespace pansr;
using namespace pansr::metrics;
using pansr::testing::naive_ssim;
using pansr::testing::random_image;
using pansr::testing::random_plane;
using pansr::testing::textured_image;
using pansr::testing::with_noise;

namespace {

Plane step_plane(int w, int h, int edge_x, double lo, double hi) {
  Plane p(w, h, lo);
  for (int y = 0; y < h; ++y)
    for (int x = edge_x; x < w; ++x) p(x, y) = hi;
  return p;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr closed forms") {
  const RasterImage zero(16, 16, default_ms_roles(), 0.0);
  const RasterImage one(16, 16, default_ms_roles(), 1.0);
  const RasterImage full(16, 16, default_ms_roles(), 4095.0);
  CHECK(std::isinf(psnr(zero, zero)));
  CHECK(std::abs(psnr(zero, one) - 72.245) < 1e-3);
  CHECK(std::abs(psnr(zero, one) - 20.0 * std::log10(4095.0)) < 1e-9);
  CHECK(psnr(zero, full) == 0.0);
  CHECK_THROWS_AS(psnr(zero, RasterImage(8, 8, default_ms_roles())), ValidationError);
}

TEST_CASE("psnr is invariant to a common intensity scale") {
  const RasterImage a = random_image(3, 16, 16), b = random_image(4, 16, 16);
  RasterImage a2 = a, b2 = b;
  for (auto* img : {&a2, &b2})
    for (auto& band : img->bands)
      for (auto& v : band.values()) v *= 2.5;
  CHECK(std::abs(psnr(a, b) - psnr(a2, b2, 2.5 * 4095.0)) < 1e-9);
  CHECK(psnr(a, b) >= 0.0);
}

TEST_CASE("ssim matches a naive double loop") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const Plane x = random_plane(rng, 32, 32);
    const Plane y = random_plane(rng, 32, 32);
    CHECK(std::abs(ssim(x, y) - naive_ssim(x, y, 4095.0)) < 1e-8);
  }
}

TEST_CASE("ssim of constant images follows the C1 formula") {
  const Plane zero(16, 16, 0.0), full(16, 16, 4095.0);
  const double c1 = 40.95 * 40.95;
  CHECK(std::abs(ssim(zero, full) - c1 / (4095.0 * 4095.0 + c1)) < 1e-7);
  CHECK(ssim(zero, zero) == 1.0);
}

TEST_CASE("ssim identity, symmetry and range") {
  const RasterImage a = random_image(5, 24, 24), b = random_image(6, 24, 24);
  CHECK(std::abs(ssim(a, a) - 1.0) < 1e-9);
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-9);
  const Plane m = ssim_map(a.bands[0], b.bands[0]);
  CHECK(m.width() == 14);
  for (double v : m.values()) CHECK((v >= -1.0 && v <= 1.0));
  CHECK_THROWS_AS(ssim(Plane(8, 8), Plane(8, 8)), ValidationError);
}

TEST_CASE("ssim windows are normalized") {
  for (const SsimParams& p : {SsimParams{}, SsimParams::uniform7()}) {
    double s = 0.0;
    for (double v : ssim_window(p)) s += v;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("phase congruency of a constant band is zero") {
  const Plane pc = phase_congruency(Plane(32, 32, 1234.0));
  for (double v : pc.values()) CHECK(v == 0.0);
}

TEST_CASE("phase congruency stays in [0, 1]") {
  Rng rng(21);
  const Plane pc = phase_congruency(random_plane(rng, 40, 36, 0.0, 255.0));
  for (double v : pc.values()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("phase congruency peaks on a step edge") {
  // The periodic FFT boundary adds a wrap-around edge at x = 0, so only the
  // interior columns are searched.
  const int w = 64, edge = 32;
  const Plane pc = phase_congruency(step_plane(w, 48, edge, 40.0, 200.0));
  double best = -1.0;
  int best_x = -1;
  for (int y = 0; y < 48; ++y)
    for (int x = 8; x < w - 8; ++x)
      if (pc(x, y) > best) {
        best = pc(x, y);
        best_x = x;
      }
  CHECK((best_x == edge - 1 || best_x == edge));
  CHECK(best > 0.5);
}

TEST_CASE("fsim identity, symmetry and range") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const RasterImage a = textured_image(s, 48, 48);
    const RasterImage b = with_noise(a, 60.0, s + 100);
    CHECK(std::abs(fsim(a, a) - 1.0) < 1e-6);
    const double ab = fsim(a, b);
    CHECK(std::abs(ab - fsim(b, a)) < 1e-9);
    CHECK((ab >= 0.0 && ab <= 1.0));
  }
  CHECK(fsim(Plane(32, 32, 5.0), Plane(32, 32, 900.0)) == 1.0);
}

TEST_CASE("fsim orders noise levels") {
  const RasterImage a = textured_image(42, 64, 64);
  CHECK(fsim(a, with_noise(a, 20.0, 7)) > fsim(a, with_noise(a, 80.0, 7)));
}

TEST_CASE("all metrics degrade with noise") {
  const RasterImage a = textured_image(8, 48, 48);
  MetricValues prev = evaluate_pair(a, a);
  for (double sigma : {20.0, 80.0, 320.0}) {
    const MetricValues v = evaluate_pair(a, with_noise(a, sigma, 99));
    CHECK(v.psnr < prev.psnr);
    CHECK(v.ssim <= prev.ssim);
    CHECK(v.fsim <= prev.fsim);
    CHECK(v.issm <= prev.issm);
    prev = v;
  }
}

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(Plane(16, 16, 77.0)) == 0.0);
  Plane two(16, 16, 10.0);
  for (std::size_t i = 0; i < two.size(); i += 2) two.values()[i] = 200.0;
  CHECK(std::abs(shannon_entropy(two) - 1.0) < 1e-9);
  Plane ramp(256, 1);
  for (int x = 0; x < 256; ++x) ramp(x, 0) = x;
  CHECK(std::abs(shannon_entropy(ramp) - 8.0) < 1e-9);
}

TEST_CASE("entropy histogram similarity of a constant pair") {
  // Everything lands in one bin holding all n samples.
  const double n = 64.0;
  CHECK(entropy_histogram_similarity(Plane(8, 8, 3.0), Plane(8, 8, 9.0)) ==
        doctest::Approx(-n * std::log2(n)));
}

TEST_CASE("canny marks a one-pixel line on a step edge") {
  const int w = 40, h = 30, edge = 20;
  const EdgeMap e = canny_edges(step_plane(w, h, edge, 30.0, 220.0));
  for (int y = 3; y < h - 3; ++y) {
    int count = 0, where = -1;
    for (int x = 0; x < w; ++x)
      if (e(x, y)) {
        ++count;
        where = x;
      }
    CHECK(count == 1);
    CHECK((where == edge - 1 || where == edge));
  }
  CHECK(canny_edges(Plane(16, 16, 50.0)).count() == 0);
}

TEST_CASE("opencv-style canny on a step edge") {
  const EdgeMap e = canny_edges(step_plane(20, 12, 10, 0.0, 255.0), CannyParams::opencv(100, 200));
  for (int y = 0; y < 12; ++y) {
    int count = 0;
    for (int x = 0; x < 20; ++x) count += e(x, y);
    CHECK(count == 1);
  }
}

TEST_CASE("edge correlation") {
  const EdgeMap a = canny_edges(step_plane(20, 12, 10, 0.0, 255.0), CannyParams::opencv(100, 200));
  CHECK(edge_correlation(a, a) == doctest::Approx(1.0));
  const EdgeMap none = canny_edges(Plane(20, 12, 0.0), CannyParams::opencv(100, 200));
  CHECK(std::isnan(edge_correlation(a, none)));
}

TEST_CASE("parameter validation") {
  SsimParams s;
  s.k1 = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  FsimParams f;
  f.T2 = -1.0;
  CHECK_THROWS_AS(f.validate(), ValidationError);
  IssmParams i;
  i.A = 0.0;
  CHECK_THROWS_AS(i.validate(), ValidationError);
  CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
}

TEST_CASE("evaluate with the reference as candidate") {
  const RasterImage ref = textured_image(1, 32, 32);
  const MetricReport r = evaluate(ref, {{"Same", ref}, {"Noisy", with_noise(ref, 100.0, 3)}});
  REQUIRE(r.methods.size() == 2);
  const MetricValues& same = r.cells[0][0];
  CHECK(std::isinf(same.psnr));
  CHECK(std::abs(same.ssim - 1.0) < 1e-9);
  CHECK(std::abs(same.fsim - 1.0) < 1e-6);
  CHECK(same.issm == doctest::Approx(issm(ref, ref)));
  CHECK_THROWS_AS(evaluate(ref, {{"A", ref}, {"A", ref}}), ValidationError);
}

TEST_CASE("evaluate does not depend on the thread count") {
  const RasterImage ref = textured_image(2, 32, 32);
  std::vector<NamedImage> c;
  for (int i = 0; i < 4; ++i) c.push_back({"m" + std::to_string(i), with_noise(ref, 30.0 * (i + 1), i)});
  const int saved = thread_count();
  set_thread_count(1);
  const std::string one = render_csv(evaluate(ref, c));
  set_thread_count(8);
  const std::string eight = render_csv(evaluate(ref, c));
  set_thread_count(saved);
  CHECK(one == eight);
}

TEST_CASE("report rendering") {
  MetricReport r;
  r.methods = {"Bicubic", "SRCNN"};
  r.images = {"img"};
  r.cells = {{MetricValues{31.9, 0.61, 0.80, 0.5}, MetricValues{std::numeric_limits<double>::infinity(), 0.66, 0.79, 0.6}}};

  const std::string table = render_table(r);
  CHECK(table.find("Bicubic") != std::string::npos);
  CHECK(table.find("0.6600*") != std::string::npos);
  CHECK(table.find("0.8000*") != std::string::npos);
  CHECK(table.find("inf*") != std::string::npos);
  for (Metric m : kAllMetrics) CHECK(table.find(std::string(to_string(m))) != std::string::npos);

  const auto j = nlohmann::json::parse(render_json(r));
  CHECK(j["methods"].size() == 2);
  CHECK(j["values"]["PSNR"]["SRCNN"] == "inf");
  CHECK(j["values"]["SSIM"]["Bicubic"].get<double>() == 0.61);

  const std::string csv = render_csv(r);
  CHECK(csv.find("SRCNN") != std::string::npos);
  CHECK(csv.find("inf") != std::string::npos);
}

TEST_CASE("empty report renders") {
  const MetricReport r = evaluate(textured_image(1, 16, 16), {});
  CHECK(r.empty());
  CHECK(render_table(r).find("no candidates") != std::string::npos);
  CHECK(nlohmann::json::parse(render_json(r)).is_object());
  CHECK_NOTHROW(render_csv(r));
}

TEST_CASE("averaged report") {
  MetricReport a;
  a.methods = {"X"};
  a.images = {"one"};
  a.cells = {{MetricValues{10, 0.2, 0.4, 0.6}}};
  MetricReport b = a;
  b.images = {"two"};
  b.cells = {{MetricValues{20, 0.4, 0.6, 0.8}}};
  a.append(b);
  const auto avg = a.averaged();
  CHECK(avg[0].psnr == doctest::Approx(15.0));
  CHECK(avg[0].ssim == doctest::Approx(0.3));
  MetricReport c = a;
  c.methods = {"Y"};
  CHECK_THROWS_AS(a.append(c), ValidationError);
}

}  // TEST_SUITE
