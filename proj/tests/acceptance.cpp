// Copyright (c) the chartseal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "chartseal/chartgen.hpp"
#include "chartseal/degrade.hpp"
#include "chartseal/detect.hpp"
#include "chartseal/errors.hpp"
#include "chartseal/intent.hpp"
#include "chartseal/metrics.hpp"
#include "chartseal/pipeline.hpp"
#include "chartseal/train.hpp"
#include "chartseal/wavelet.hpp"

namespace fs = std::filesystem;
using namespace chartseal;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

// ---------------------------------------------------------------- 1
Outcome invertibility() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> scale(0.05, 1.0);
  std::uniform_real_distribution<double> pix(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    InnConfig cfg;
    cfg.blocks = 2 + trial % 3;
    cfg.growth = 8;
    cfg.pem_width = 8;
    cfg.pem_res_blocks = 1;
    InnModel model(cfg);
    model.randomize(1000 + static_cast<std::uint64_t>(trial), scale(rng));
    ImageTensor cover(32, 32, 3), map(32, 32, 3);
    for (auto& v : cover.data) v = pix(rng);
    for (auto& v : map.data) v = pix(rng);
    const Tensor xc = haar_forward(cover), xl = haar_forward(map);
    const StreamPair fwd = embed_streams(model, xc, xl);
    // Oracle initialization: the reveal side is handed the embed side's map stream.
    const StreamPair back = reveal_streams(model, fwd.cover, fwd.map);
    worst = std::max({worst, max_abs_diff(back.cover, xc), max_abs_diff(back.map, xl)});
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0,
          "max_abs_err=" + fmt("%.3g", worst) + " runtime_s=" + fmt("%.2f", secs)};
}

// ---------------------------------------------------------------- 2
Outcome wavelet() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> half(1, 32);
  std::uniform_real_distribution<double> pix(0.0, 1.0);
  double worst_rec = 0.0, worst_energy = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ImageTensor img(2 * half(rng), 2 * half(rng), 3);
    for (auto& v : img.data) v = pix(rng);
    const SubbandSet sb = dwt(img);
    const ImageTensor back = idwt(sb);
    double e_img = 0.0, e_sb = 0.0;
    for (std::size_t k = 0; k < img.size(); ++k) {
      worst_rec = std::max(worst_rec, std::abs(back.data[k] - img.data[k]));
      e_img += img.data[k] * img.data[k];
    }
    for (const Tensor* t : {&sb.ll, &sb.lh, &sb.hl, &sb.hh})
      for (double v : t->v) e_sb += v * v;
    worst_energy = std::max(worst_energy, std::abs(e_sb - e_img) / e_img);
  }
  const double secs = seconds_since(t0);
  return {worst_rec < 1e-9 && worst_energy < 1e-6 && secs < 5.0,
          "max_rec_err=" + fmt("%.3g", worst_rec) + " max_energy_rel=" + fmt("%.3g", worst_energy) +
              " runtime_s=" + fmt("%.2f", secs)};
}

// ---------------------------------------------------------------- 3
Outcome gradients() {
  const auto t0 = Clock::now();
  InnConfig cfg;
  cfg.image_channels = 1;
  cfg.blocks = 2;
  cfg.growth = 1;
  cfg.pem_width = 4;
  cfg.pem_res_blocks = 1;
  InnModel model(cfg);
  model.randomize(303, 0.1);
  std::mt19937_64 rng(304);
  // Inputs stay clear of the [0, 1] clamp so central differences do not straddle a kink.
  std::uniform_real_distribution<double> pix(0.2, 0.8);
  ImageTensor cover(16, 16, 1);
  for (auto& v : cover.data) v = pix(rng);
  const ImageTensor map = realize_location_map(CheckerboardPattern{4, {0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}}, 16, 16, 1);
  const GradcheckReport good = gradcheck(model, cover, map, 1e-3);
  GradcheckOptions flip;
  flip.tamper_gradient = [](std::span<double> g) {
    for (double& v : g) v = -v;
  };
  const GradcheckReport bad = gradcheck(model, cover, map, 1e-3, flip);
  const double secs = seconds_since(t0);
  return {good.passed && good.max_rel_error < 1e-3 && !bad.passed && secs < 60.0,
          "params=" + std::to_string(model.parameter_count()) + " checked=" + std::to_string(good.entries.size()) +
              " max_rel_err=" + fmt("%.3g", good.max_rel_error) + " sign_flip_max_rel_err=" +
              fmt("%.3g", bad.max_rel_error) + " runtime_s=" + fmt("%.2f", secs)};
}

// ---------------------------------------------------------------- 4, 5
struct ToyArtifacts {
  std::vector<std::uint8_t> checkpoint;
  std::string loss_log;
  std::string heldout_csv;
  std::string corpus_csv;
  Outcome c4;
  Outcome c5;
};

InnConfig toy_model_config() {
  InnConfig cfg;
  cfg.blocks = 2;
  cfg.growth = 8;
  cfg.pem_width = 16;
  cfg.pem_res_blocks = 1;
  return cfg;
}

TrainConfig toy_train_config() {
  TrainConfig cfg;
  cfg.alpha = 100.0;
  cfg.beta = 1.0;
  cfg.iterations = 1000;
  cfg.batch_size = 3;
  cfg.learning_rate = 2e-3;
  cfg.seed = 404;
  cfg.cosine_decay = true;
  cfg.mix_channels_in_batch = true;
  return cfg;
}

const MapPattern kPattern = CheckerboardPattern{};

// Blackened 16x16 patch, position varies per chart.
ImageTensor patch_tamper(const ImageTensor& img, int i) {
  TamperOp op;
  op.kind = TamperKind::kPaintRect;
  const int x0 = 8 + 8 * (i % 4), y0 = 8 + 8 * ((i / 4) % 4);
  op.rect = {x0, y0, x0 + 16, y0 + 16};
  op.color = {0.0, 0.0, 0.0};
  return apply_tamper(img, {op}).tampered;
}

ToyArtifacts toy_run(const fs::path& dir) {
  ToyArtifacts out;
  const auto t0 = Clock::now();
  std::vector<ImageTensor> covers;
  for (int i = 0; i < 32; ++i) covers.push_back(render_chart(random_chart_spec(4000 + static_cast<std::uint64_t>(i))));
  InnModel model(toy_model_config());
  model.randomize(405);
  std::ostringstream log;
  const auto records = train(model, covers, kPattern, toy_train_config(), &log);
  const double train_secs = seconds_since(t0);
  out.checkpoint = serialize_checkpoint(model);
  out.loss_log = log.str();

  // Smoothed loss: means over ten consecutive blocks of iterations.
  const std::size_t blocks = 10, per = records.size() / blocks;
  std::vector<double> smooth;
  for (std::size_t b = 0; b < blocks; ++b) {
    double s = 0.0;
    for (std::size_t k = b * per; k < (b + 1) * per; ++k) s += records[k].loss.total;
    smooth.push_back(s / static_cast<double>(per));
  }
  bool monotone = true;
  for (std::size_t b = 1; b < smooth.size(); ++b) monotone = monotone && smooth[b] <= smooth[b - 1];

  // Held-out charts, never seen in training.
  const int n_eval = 16;
  std::vector<double> psnrs, noise, ious, map_err, jnoise, jious;
  std::ostringstream csv;
  csv << "chart,psnr_db,noise_percentage,map_mae,patch_iou,jpeg90_noise_percentage,jpeg90_patch_iou\n";
  const Degradation jpeg{JpegCompression{90}, 0};
  const DetectionConfig dcfg;
  for (int i = 0; i < n_eval; ++i) {
    const ImageTensor cover = render_chart(random_chart_spec(9000 + static_cast<std::uint64_t>(i)));
    const ImageTensor prot = protect(model, cover, kPattern);
    const ImageTensor map = realize_location_map(kPattern, cover.height, cover.width);
    const ImageTensor patched = patch_tamper(prot, i);
    const TamperMask truth = pixel_difference(prot, patched);

    const Detection clean = detect(model, kPattern, prot, dcfg);
    const Detection hit = detect(model, kPattern, patched, dcfg);
    const Detection jclean = detect(model, kPattern, apply(jpeg, prot), dcfg);
    const Detection jhit = detect(model, kPattern, apply(jpeg, patched), dcfg);
    double mae = 0.0;
    for (std::size_t k = 0; k < map.size(); ++k) mae += std::abs(clean.revealed_map.data[k] - map.data[k]);
    mae /= static_cast<double>(map.size());

    psnrs.push_back(psnr(cover, prot));
    noise.push_back(mask_scores(clean.mask, TamperMask(cover.height, cover.width)).noise_percentage);
    ious.push_back(mask_scores(hit.mask, truth).iou);
    map_err.push_back(mae);
    jnoise.push_back(mask_scores(jclean.mask, TamperMask(cover.height, cover.width)).noise_percentage);
    jious.push_back(mask_scores(jhit.mask, truth).iou);
    csv << i << ',' << format_number(psnrs.back()) << ',' << format_number(noise.back()) << ','
        << format_number(mae) << ',' << format_number(ious.back()) << ',' << format_number(jnoise.back()) << ','
        << format_number(jious.back()) << '\n';
  }
  auto mean = [](const std::vector<double>& v) { return summarize(v).mean; };
  csv << "mean," << format_number(mean(psnrs)) << ',' << format_number(mean(noise)) << ','
      << format_number(mean(map_err)) << ',' << format_number(mean(ious)) << ',' << format_number(mean(jnoise))
      << ',' << format_number(mean(jious)) << '\n';
  out.heldout_csv = csv.str();

  // Corpus evaluation through the library pipeline, for the determinism check.
  CorpusOptions copts;
  copts.count = 8;
  copts.seed = 406;
  out.corpus_csv = evaluation_csv(evaluate(model, kPattern, gen_corpus(copts)));

  const double secs = seconds_since(t0);
  const bool a = mean(psnrs) >= 30.0;
  const bool b = mean(noise) < 0.01;
  const bool c = mean(ious) >= 0.5;
  const bool drop = records.size() > 500 && records[500].loss.total < records[0].loss.total;
  out.c4 = {a && b && c && monotone,
            "psnr_db=" + fmt("%.2f", mean(psnrs)) + (a ? "" : "(<30)") + " noise=" + fmt("%.4f", 100 * mean(noise)) +
                "%" + (b ? "" : "(>=1%)") + " patch_iou=" + fmt("%.3f", mean(ious)) + (c ? "" : "(<0.5)") +
                " smoothed_loss_monotone=" + (monotone ? "yes" : "no") + " loss[0]=" +
                fmt("%.4f", records.front().loss.total) + " loss[500]=" +
                (records.size() > 500 ? fmt("%.4f", records[500].loss.total) : std::string("n/a")) +
                (drop ? "" : "(not lower)") + " map_mae=" + fmt("%.4f", mean(map_err)) +
                " train_s=" + fmt("%.0f", train_secs) + " total_s=" + fmt("%.0f", secs)};
  const bool jn = mean(jnoise) < 0.05;
  const bool ji = mean(jious) >= 0.4;
  out.c5 = {jn && ji, "jpeg90_noise=" + fmt("%.2f", 100 * mean(jnoise)) + "%" + (jn ? "" : "(>=5%)") +
                          " jpeg90_patch_iou=" + fmt("%.3f", mean(jious)) + (ji ? "" : "(<0.4)")};

  fs::create_directories(dir);
  std::ofstream(dir / "toy.vzm", std::ios::binary)
      .write(reinterpret_cast<const char*>(out.checkpoint.data()), static_cast<std::streamsize>(out.checkpoint.size()));
  write_file(dir / "toy_loss.log", out.loss_log);
  write_file(dir / "toy_heldout.csv", out.heldout_csv);
  write_file(dir / "toy_corpus.csv", out.corpus_csv);
  return out;
}

// ---------------------------------------------------------------- 6
Outcome metrics_oracle() {
  std::mt19937_64 rng(606);
  std::bernoulli_distribution bit(0.45);
  int mismatches = 0, identity_fail = 0;
  for (int t = 0; t < 200; ++t) {
    TamperMask p(8, 8), q(8, 8);
    for (auto& v : p.bits) v = bit(rng);
    for (auto& v : q.bits) v = bit(rng);
    int inter = 0, uni = 0, np = 0, nq = 0;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const bool a = p.at(y, x), b = q.at(y, x);
        inter += a && b;
        uni += a || b;
        np += a;
        nq += b;
      }
    }
    const double iou = uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    const double f1 = np + nq == 0 ? 1.0 : 2.0 * inter / (np + nq);
    const MaskReport r = mask_scores(p, q);
    if (r.iou != iou || r.f1 != f1 || r.noise_percentage != np / 64.0) ++mismatches;
    if (std::abs(r.f1 - 2 * r.iou / (1 + r.iou)) > 1e-9) ++identity_fail;
  }
  ImageTensor a(32, 32, 3, 0.3), b(32, 32, 3, 0.4);
  const double p20 = psnr(a, b), r01 = rmse_map(a, b);
  const bool consts = std::abs(p20 - 20.0) < 1e-9 && std::abs(r01 - 0.1) < 1e-9;
  return {mismatches == 0 && identity_fail == 0 && consts,
          "mismatches=" + std::to_string(mismatches) + "/200 identity_failures=" + std::to_string(identity_fail) +
              " psnr=" + fmt("%.12f", p20) + " rmse=" + fmt("%.12f", r01)};
}

// ---------------------------------------------------------------- 7
Outcome residual_oracle() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0, monotone_fail = 0;
  const double taus[] = {0.1, 0.2, 0.5};
  for (int t = 0; t < 100; ++t) {
    ImageTensor orig(16, 16, 3), rev(16, 16, 3);
    for (auto& v : orig.data) v = u(rng);
    for (std::size_t k = 0; k < rev.size(); ++k) rev.data[k] = std::clamp(orig.data[k] + 0.6 * (u(rng) - 0.5), 0.0, 1.0);
    std::vector<TamperMask> masks;
    for (double tau : taus) {
      DetectionConfig cfg;
      cfg.tau = tau;
      const TamperMask m = residual_mask(orig, rev, cfg);
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          bool any = false;
          for (int c = 0; c < 3; ++c) any = any || std::abs(orig.at(y, x, c) - rev.at(y, x, c)) >= tau;
          if (m.at(y, x) != static_cast<std::uint8_t>(any)) ++mismatches;
        }
      }
      masks.push_back(m);
    }
    for (std::size_t k = 1; k < masks.size(); ++k)
      for (std::size_t i = 0; i < masks[k].bits.size(); ++i)
        if (masks[k].bits[i] > masks[k - 1].bits[i]) ++monotone_fail;
  }
  return {mismatches == 0 && monotone_fail == 0,
          "pixel_mismatches=" + std::to_string(mismatches) + " monotonicity_violations=" + std::to_string(monotone_fail)};
}

// ---------------------------------------------------------------- 8
Outcome rule_table() {
  struct Row {
    ComponentLabel c;
    std::vector<std::string> primary, secondary;
  };
  const std::vector<Row> table = {
      {ComponentLabel::kRegion,
       {"Modifying data point values", "Adding or removing data points", "Data-visual disproportion"},
       {"Modifying the colormap"}},
      {ComponentLabel::kDataLabels,
       {"Modifying data point values", "Hiding labels"},
       {"Adding or removing data points", "Data-visual disproportion"}},
      {ComponentLabel::kAxis, {"Modifying coordinate values"}, {"Hiding labels"}},
      {ComponentLabel::kLegend, {"Modifying the legend"}, {}},
      {ComponentLabel::kAnnotation, {"Deceptive auxiliary annotations"}, {}},
      {ComponentLabel::kLogo, {"Adding or removing logos"}, {}},
      {ComponentLabel::kColormap, {"Modifying the colormap"}, {}},
  };
  int ok = 0;
  for (const auto& row : table) {
    const MappingRule r = rule_lookup(row.c);
    std::vector<std::string> p, s;
    for (auto m : r.primary_methods) p.emplace_back(method_name(m));
    for (auto m : r.secondary_methods) s.emplace_back(method_name(m));
    ok += p == row.primary && s == row.secondary;
  }
  return {ok == 7, std::to_string(ok) + "/7 components match"};
}

// ---------------------------------------------------------------- 9
struct IntentArtifacts {
  std::string truth_reports;
  std::string geometric_reports;
  Outcome c9;
};

bool schema_valid(const AnalysisResult& r) {
  try {
    const auto refined = parse_refinement("```json\n" + refinement_to_json(r.refined).dump() + "\n```");
    const auto report = parse_intent("```json\n" + to_json(r.report).dump() + "\n```");
    return refined.size() == r.refined.size() && report.entries.size() == r.report.entries.size();
  } catch (const Error&) {
    return false;
  }
}

IntentArtifacts intent_run(const fs::path& dir) {
  IntentArtifacts out;
  CorpusOptions opts;
  opts.count = 50;
  opts.seed = 909;
  const auto items = gen_corpus(opts);
  TruthMockBackend truth(corpus_manifest(items));
  GeometricMockBackend geo;
  DetectionConfig dcfg;
  dcfg.min_area = 0;
  int ops_total = 0, ops_correct = 0, truth_valid = 0, geo_valid = 0, geo_entries = 0, geo_flagged = 0;
  nlohmann::json truth_all = nlohmann::json::array(), geo_all = nlohmann::json::array();
  for (const auto& item : items) {
    // Regions come from the ground-truth mask so the check does not depend on detector quality.
    const auto regions = extract_regions(item.truth_mask, dcfg);
    AnalyzeConfig acfg;
    acfg.image_ref = item_stem(item.index) + ".png";
    const AnalysisResult t = analyze(truth, item.tampered, regions, acfg);
    truth_valid += schema_valid(t);
    for (std::size_t k = 0; k < item.ops.size(); ++k) {
      ++ops_total;
      ops_correct += k < t.report.entries.size() && t.report.entries[k].method == item.ops[k].method;
    }
    truth_all.push_back(to_json(t.report));

    const AnalysisResult g = analyze(geo, item.tampered, regions, acfg);
    geo_valid += schema_valid(g);
    for (const auto& e : g.report.entries) {
      ++geo_entries;
      geo_flagged += e.non_conformant;
    }
    geo_all.push_back(to_json(g.report));
  }
  out.truth_reports = truth_all.dump(2) + "\n";
  out.geometric_reports = geo_all.dump(2) + "\n";
  const int n = static_cast<int>(items.size());
  out.c9 = {ops_correct == ops_total && truth_valid == n && geo_valid == n && geo_flagged == 0 && geo_entries > 0,
            "truth_method_accuracy=" + std::to_string(ops_correct) + "/" + std::to_string(ops_total) +
                " truth_schema_valid=" + std::to_string(truth_valid) + "/" + std::to_string(n) +
                " geometric_schema_valid=" + std::to_string(geo_valid) + "/" + std::to_string(n) +
                " geometric_conformant=" + std::to_string(geo_entries - geo_flagged) + "/" +
                std::to_string(geo_entries)};
  fs::create_directories(dir);
  write_file(dir / "intent_truth.json", out.truth_reports);
  write_file(dir / "intent_geometric.json", out.geometric_reports);
  return out;
}

void report(int n, const Outcome& o) {
  std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chartseal acceptance run"};
  fs::path workdir = fs::temp_directory_path() / "chartseal_acceptance";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "where artifacts of the toy runs are written");
  app.add_option("--only", only, "run just these criteria (10 implies 4 and 9)");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };

  bool all = true;
  auto record = [&](int k, const Outcome& o) {
    report(k, o);
    all = all && o.pass;
  };
  if (want(1)) record(1, invertibility());
  if (want(2)) record(2, wavelet());
  if (want(3)) record(3, gradients());

  const bool need_toy = want(4) || want(5) || want(10);
  const bool need_intent = want(9) || want(10);
  ToyArtifacts toy;
  IntentArtifacts intent;
  if (need_toy) {
    toy = toy_run(workdir / "run1");
    if (want(4)) record(4, toy.c4);
    if (want(5)) record(5, toy.c5);
  }
  if (want(6)) record(6, metrics_oracle());
  if (want(7)) record(7, residual_oracle());
  if (want(8)) record(8, rule_table());
  if (need_intent) {
    intent = intent_run(workdir / "run1");
    if (want(9)) record(9, intent.c9);
  }
  if (want(10)) {
    const ToyArtifacts toy2 = toy_run(workdir / "run2");
    const IntentArtifacts intent2 = intent_run(workdir / "run2");
    const bool ckpt = toy.checkpoint == toy2.checkpoint;
    const bool csvs = toy.heldout_csv == toy2.heldout_csv && toy.corpus_csv == toy2.corpus_csv &&
                      toy.loss_log == toy2.loss_log;
    const bool reports = intent.truth_reports == intent2.truth_reports &&
                         intent.geometric_reports == intent2.geometric_reports;
    record(10, {ckpt && csvs && reports, std::string("checkpoints_identical=") + (ckpt ? "yes" : "no") +
                                             " csvs_identical=" + (csvs ? "yes" : "no") +
                                             " reports_identical=" + (reports ? "yes" : "no")});
  }
  return all ? 0 : 1;
}
