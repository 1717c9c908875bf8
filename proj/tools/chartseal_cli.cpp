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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "chartseal/chartgen.hpp"
#include "chartseal/detect.hpp"
#include "chartseal/errors.hpp"
#include "chartseal/intent.hpp"
#include "chartseal/metrics.hpp"
#include "chartseal/pipeline.hpp"
#include "chartseal/train.hpp"

namespace fs = std::filesystem;
using namespace chartseal;

namespace {

constexpr int kExitFound = 1;
constexpr int kExitError = 2;

struct MapOptions {
  int cell = 16;
  MapPattern pattern() const {
    CheckerboardPattern p;
    p.cell = cell;
    return p;
  }
};

struct DetectOptions {
  double tau = 0.2;
  int min_area = 16;
  int connectivity = 8;
  int morph_radius = 0;  // 0 disables open-close
  DetectionConfig config() const {
    DetectionConfig c;
    c.tau = tau;
    c.min_area = min_area;
    c.connectivity = connectivity;
    c.morphology = morph_radius > 0 ? Morphology::kOpenClose : Morphology::kNone;
    c.morph_radius = std::max(1, morph_radius);
    return c;
  }
};

void add_map_options(CLI::App* cmd, MapOptions& m) {
  cmd->add_option("--cell", m.cell, "checkerboard cell size of the location map")->check(CLI::PositiveNumber);
}

void add_detect_options(CLI::App* cmd, DetectOptions& d) {
  cmd->add_option("--tau", d.tau, "residual threshold")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-area", d.min_area, "smallest region kept, in pixels")->check(CLI::NonNegativeNumber);
  cmd->add_option("--connectivity", d.connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
  cmd->add_option("--morph-radius", d.morph_radius, "open-close radius, 0 = off")->check(CLI::NonNegativeNumber);
}

InnModel load_model(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("model checkpoint not found: " + path.string());
  return load_checkpoint(path);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Write-then-rename so readers never see a partial file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::vector<int> parse_ints(const std::string& s, std::size_t expected, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  if (out.size() != expected) throw ArgumentError(std::string(what) + " needs " + std::to_string(expected) + " comma-separated integers");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chartseal: protect charts with a fragile location map, detect and explain tampering"};
  app.set_config("--config", "", "TOML/INI file with option values (command-line flags win)");
  app.require_subcommand(1);
  // Global options may also follow the subcommand name.
  app.fallthrough();
  std::uint64_t seed = 0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads for batch commands")->check(CLI::PositiveNumber);

  // train ------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model on synthetic charts or a corpus");
  fs::path train_out = "model.vzm", train_corpus, train_log;
  int charts = 32, size = 64;
  InnConfig inn;
  inn.blocks = 2;
  inn.growth = 8;
  inn.pem_width = 16;
  inn.pem_res_blocks = 1;
  TrainConfig tcfg;
  tcfg.learning_rate = 1e-3;
  tcfg.batch_size = 3;
  MapOptions train_map;
  train_cmd->add_option("-o,--out", train_out, "checkpoint to write");
  train_cmd->add_option("--corpus", train_corpus, "train on the clean images of this corpus");
  train_cmd->add_option("--charts", charts, "number of synthetic charts when no corpus is given");
  train_cmd->add_option("--size", size, "synthetic chart size (even)");
  train_cmd->add_option("--iterations", tcfg.iterations);
  train_cmd->add_option("--batch", tcfg.batch_size);
  train_cmd->add_option("--lr", tcfg.learning_rate);
  train_cmd->add_option("--alpha", tcfg.alpha, "weight of the image loss");
  train_cmd->add_option("--beta", tcfg.beta, "weight of the map loss");
  train_cmd->add_option("--blocks", inn.blocks);
  train_cmd->add_option("--growth", inn.growth);
  train_cmd->add_option("--pem-width", inn.pem_width);
  train_cmd->add_option("--pem-res", inn.pem_res_blocks);
  train_cmd->add_option("--pem-attn", inn.pem_attn_blocks);
  train_cmd->add_option("--checkpoint-every", tcfg.checkpoint_every);
  train_cmd->add_option("--log", train_log, "per-iteration loss log");
  train_cmd->add_flag("--cosine", tcfg.cosine_decay, "decay the learning rate along a cosine to --final-lr-fraction");
  train_cmd->add_option("--final-lr-fraction", tcfg.final_lr_fraction);
  train_cmd->add_flag("--mix-channels", tcfg.mix_channels_in_batch,
                      "cycle the degradation schedule inside each batch");
  add_map_options(train_cmd, train_map);

  // protect ----------------------------------------------------------------
  auto* protect_cmd = app.add_subcommand("protect", "embed the location map into a chart");
  fs::path model_path = "model.vzm", in_path, out_path;
  MapOptions map_opts;
  protect_cmd->add_option("input", in_path)->required();
  protect_cmd->add_option("output", out_path)->required();
  protect_cmd->add_option("-m,--model", model_path);
  add_map_options(protect_cmd, map_opts);

  // tamper -----------------------------------------------------------------
  auto* tamper_cmd = app.add_subcommand("tamper", "apply edit operations to an image");
  fs::path ops_file, mask_out;
  std::vector<std::string> op_json;
  std::string patch;
  tamper_cmd->add_option("input", in_path)->required();
  tamper_cmd->add_option("output", out_path)->required();
  tamper_cmd->add_option("--ops", ops_file, "JSON file with an array of operations");
  tamper_cmd->add_option("--op", op_json, "one operation as JSON (repeatable)");
  tamper_cmd->add_option("--patch", patch, "x0,y0,x1,y1: paint the rectangle black");
  tamper_cmd->add_option("--mask", mask_out, "also write the ground-truth mask");

  // detect -----------------------------------------------------------------
  auto* detect_cmd = app.add_subcommand("detect", "localize tampering; exit 1 when regions are found");
  fs::path out_dir;
  DetectOptions det_opts;
  detect_cmd->add_option("input", in_path)->required();
  detect_cmd->add_option("-m,--model", model_path);
  detect_cmd->add_option("-d,--out-dir", out_dir, "where to write outputs (default: next to the input)");
  add_map_options(detect_cmd, map_opts);
  add_detect_options(detect_cmd, det_opts);

  // analyze ----------------------------------------------------------------
  auto* analyze_cmd = app.add_subcommand("analyze", "explain detected regions with a multimodal model");
  std::vector<fs::path> analyze_inputs;
  std::string endpoint, mock, api_model;
  fs::path truth_manifest;
  HttpBackendConfig http;
  analyze_cmd->add_option("inputs", analyze_inputs, "suspect images")->required();
  analyze_cmd->add_option("-m,--model", model_path);
  analyze_cmd->add_option("-d,--out-dir", out_dir);
  analyze_cmd->add_option("--endpoint", endpoint, "HTTP endpoint of the model service");
  analyze_cmd->add_option("--api-model", api_model, "model name sent to the endpoint");
  analyze_cmd->add_option("--token-env", http.token_env, "environment variable holding the API token");
  analyze_cmd->add_option("--timeout", http.timeout_seconds, "seconds per request");
  analyze_cmd->add_option("--retries", http.retries);
  analyze_cmd->add_option("--max-in-flight", http.max_in_flight);
  analyze_cmd->add_option("--mock", mock, "offline backend instead of an endpoint")
      ->check(CLI::IsMember({"geometric", "truth"}));
  analyze_cmd->add_option("--truth", truth_manifest, "corpus manifest for --mock truth");
  add_map_options(analyze_cmd, map_opts);
  add_detect_options(analyze_cmd, det_opts);

  // gen-corpus -------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("gen-corpus", "render synthetic charts with recorded edits");
  CorpusOptions corpus;
  std::vector<std::string> kinds;
  gen_cmd->add_option("output", out_dir)->required();
  gen_cmd->add_option("-n,--count", corpus.count)->required();
  gen_cmd->add_option("--ops-per-item", corpus.ops_per_item, "0 writes an untampered corpus")->check(CLI::Range(0, 3));
  gen_cmd->add_option("--kinds", kinds, "allowed edit kinds (default: all)");
  gen_cmd->add_option("--size", size);

  // evaluate ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "protect, replay edits and score detection over a corpus");
  fs::path corpus_dir, csv_out = "evaluation.csv", json_out;
  int jpeg = 0;
  eval_cmd->add_option("corpus", corpus_dir)->required();
  eval_cmd->add_option("-m,--model", model_path);
  eval_cmd->add_option("-o,--out", csv_out, "CSV report");
  eval_cmd->add_option("--json", json_out, "per-item JSON report");
  eval_cmd->add_option("--jpeg", jpeg, "JPEG quality applied before detection, 0 = off")->check(CLI::Range(0, 100));
  add_map_options(eval_cmd, map_opts);
  add_detect_options(eval_cmd, det_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*train_cmd) {
      std::vector<ImageTensor> covers;
      if (!train_corpus.empty()) {
        for (const auto& item : read_corpus(train_corpus)) covers.push_back(item.clean);
      } else {
        if (charts < 1) throw ArgumentError("--charts must be positive");
        for (int i = 0; i < charts; ++i) {
          covers.push_back(render_chart(random_chart_spec(seed * 7919ULL + static_cast<std::uint64_t>(i), size, size)));
        }
      }
      inn.image_channels = covers.front().channels;
      tcfg.seed = seed;
      tcfg.checkpoint_path = train_out;
      InnModel model(inn);
      model.randomize(seed);
      std::ofstream log;
      if (!train_log.empty()) log.open(train_log, std::ios::trunc);
      const auto records = train(model, covers, train_map.pattern(), tcfg, train_log.empty() ? nullptr : &log);
      save_checkpoint(model, train_out);
      if (!records.empty()) {
        const auto& last = records.back().loss;
        std::cout << "iterations=" << records.size() << " enc=" << last.enc << " ext=" << last.ext
                  << " total=" << last.total << '\n';
      }
      return 0;
    }

    if (*protect_cmd) {
      const InnModel model = load_model(model_path);
      const ImageTensor cover = to_rgb(load_image(in_path));
      const ImageTensor prot = protect(model, cover, map_opts.pattern());
      if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
      save_image(prot, out_path);
      std::cout << "psnr_db=" << format_number(psnr(cover, prot)) << '\n';
      return 0;
    }

    if (*tamper_cmd) {
      std::vector<TamperOp> ops;
      if (!ops_file.empty()) {
        std::ifstream in(ops_file);
        if (!in) throw IoError("cannot read " + ops_file.string());
        const auto j = nlohmann::json::parse(in);
        for (const auto& o : j) ops.push_back(tamper_op_from_json(o));
      }
      for (const auto& s : op_json) ops.push_back(tamper_op_from_json(nlohmann::json::parse(s)));
      if (!patch.empty()) {
        const auto r = parse_ints(patch, 4, "--patch");
        TamperOp op;
        op.kind = TamperKind::kPaintRect;
        op.rect = {r[0], r[1], r[2], r[3]};
        op.color = {0.0, 0.0, 0.0};
        ops.push_back(op);
      }
      if (ops.empty()) throw ArgumentError("no operations given (use --ops, --op or --patch)");
      const TamperResult t = apply_tamper(to_rgb(load_image(in_path)), ops);
      if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
      save_image(t.tampered, out_path);
      if (!mask_out.empty()) save_mask(t.truth_mask, mask_out);
      std::cout << "changed_pixels=" << t.truth_mask.count() << '\n';
      return 0;
    }

    if (*detect_cmd) {
      const InnModel model = load_model(model_path);
      const ImageTensor suspect = to_rgb(load_image(in_path));
      const Detection d = detect(model, map_opts.pattern(), suspect, det_opts.config());
      const fs::path dir = out_dir.empty() ? in_path.parent_path() : out_dir;
      if (!dir.empty()) fs::create_directories(dir);
      const std::string stem = in_path.stem().string();
      save_mask(d.mask, dir / (stem + ".mask.png"));
      write_text(dir / (stem + ".regions.json"), regions_to_json(d.regions).dump(2) + "\n");
      save_image(d.overlay, dir / (stem + ".overlay.png"));
      std::cout << "regions=" << d.regions.size() << " noise_percentage="
                << format_number(static_cast<double>(d.mask.count()) / static_cast<double>(d.mask.bits.size())) << '\n';
      return d.regions.empty() ? 0 : kExitFound;
    }

    if (*analyze_cmd) {
      std::unique_ptr<MllmBackend> backend;
      if (mock == "geometric") {
        backend = std::make_unique<GeometricMockBackend>();
      } else if (mock == "truth") {
        if (truth_manifest.empty()) throw ArgumentError("--mock truth needs --truth <manifest.json>");
        std::ifstream in(truth_manifest);
        if (!in) throw IoError("cannot read " + truth_manifest.string());
        backend = std::make_unique<TruthMockBackend>(nlohmann::json::parse(in));
      } else {
        if (endpoint.empty()) throw ArgumentError("give --endpoint or --mock");
        http.endpoint = endpoint;
        http.model = api_model;
        backend = std::make_unique<HttpBackend>(http);
      }
      const InnModel model = load_model(model_path);
      std::mutex backend_mu;
      // Mock backends are not thread-safe; the HTTP backend throttles itself.
      const bool serialize = !mock.empty();
      parallel_for(static_cast<int>(analyze_inputs.size()), jobs, [&](int i) {
        const fs::path& input = analyze_inputs[static_cast<std::size_t>(i)];
        const ImageTensor suspect = to_rgb(load_image(input));
        const Detection d = detect(model, map_opts.pattern(), suspect, det_opts.config());
        AnalyzeConfig acfg;
        acfg.image_ref = input.filename().string();
        AnalysisResult r;
        if (serialize) {
          std::lock_guard lock(backend_mu);
          r = analyze(*backend, suspect, d.regions, acfg);
        } else {
          r = analyze(*backend, suspect, d.regions, acfg);
        }
        const fs::path dir = out_dir.empty() ? input.parent_path() : out_dir;
        write_text(dir / (input.stem().string() + ".intent.json"), to_json(r.report).dump(2) + "\n");
      });
      return 0;
    }

    if (*gen_cmd) {
      corpus.seed = seed;
      corpus.height = corpus.width = size;
      if (!kinds.empty()) {
        corpus.kinds.clear();
        for (const auto& k : kinds) {
          const auto kind = parse_tamper_kind(k);
          if (!kind) throw ArgumentError("unknown edit kind '" + k + "'");
          corpus.kinds.insert(*kind);
        }
      }
      const auto items = gen_corpus(corpus);
      write_corpus(out_dir, items);
      std::cout << "items=" << items.size() << '\n';
      return 0;
    }

    if (*eval_cmd) {
      const InnModel model = load_model(model_path);
      const auto items = read_corpus(corpus_dir);
      EvaluationOptions eopts;
      eopts.detection = det_opts.config();
      eopts.jobs = jobs;
      if (jpeg > 0) eopts.jpeg_quality = jpeg;
      const EvaluationResult result = evaluate(model, map_opts.pattern(), items, eopts);
      const std::string csv = evaluation_csv(result);
      write_text(csv_out, csv);
      if (!json_out.empty()) write_text(json_out, evaluation_json(result).dump(2) + "\n");
      std::cout << csv;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "chartseal: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
