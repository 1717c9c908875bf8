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


// Scripted invocations of the command-line tool.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chartseal/chartgen.hpp"
#include "chartseal/image.hpp"
#include "chartseal/inn.hpp"

namespace fs = std::filesystem;
using namespace chartseal;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static fs::path dir() { return fs::temp_directory_path() / "chartseal_test_cli"; }

  static void SetUpTestSuite() {
    fs::remove_all(dir());
    fs::create_directories(dir());
    // A zero model reveals an all-black map, so against the default
    // checkerboard every white cell shows up as damage.
    save_checkpoint(InnModel(InnConfig{.blocks = 1, .growth = 2, .pem_width = 4, .pem_res_blocks = 1}),
                    dir() / "zero.vzm");
    save_image(render_chart(random_chart_spec(1)), dir() / "chart.png");
    const auto even = render_chart(random_chart_spec(2, 50, 62));
    ImageTensor odd(33, 45, 3);
    for (int y = 0; y < 33; ++y)
      for (int x = 0; x < 45; ++x)
        for (int c = 0; c < 3; ++c) odd.at(y, x, c) = even.at(y, x, c);
    save_image(odd, dir() / "odd.png");
    std::ofstream(dir() / "corrupt.png") << "\x89PNG garbage";
  }

  static Invocation run(const std::string& args) {
    const fs::path out = dir() / "stdout.txt", err = dir() / "stderr.txt";
    const std::string cmd = std::string(CHARTSEAL_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Invocation r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string p(const std::string& name) { return (dir() / name).string(); }
};

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"train", "protect", "tamper", "detect", "analyze", "gen-corpus", "evaluate"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
}

TEST_F(Cli, UnknownOptionIsError) {
  EXPECT_EQ(run("detect " + p("chart.png") + " --bogus").code, 2);
  // Tokens come from the environment; there is no flag for them.
  EXPECT_EQ(run("analyze " + p("chart.png") + " --mock geometric --token abc").code, 2);
}

TEST_F(Cli, ProtectMissingCheckpoint) {
  auto r = run("protect " + p("chart.png") + " " + p("out.png") + " -m " + p("nope.vzm"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(p("nope.vzm")), std::string::npos) << r.err;
}

TEST_F(Cli, TrainThenProtect) {
  auto t = run("--seed 3 train --iterations 2 --charts 2 --size 48 --growth 2 --pem-width 4 --batch 1 -o " +
               p("tiny.vzm") + " --log " + p("tiny.log"));
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(p("tiny.vzm")));
  EXPECT_NE(t.out.find("iterations=2"), std::string::npos);

  auto r = run("protect " + p("chart.png") + " " + p("protected.png") + " -m " + p("tiny.vzm"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("protected.png")));
  EXPECT_EQ(r.out.rfind("psnr_db=", 0), 0u) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);

  auto o = run("protect " + p("odd.png") + " " + p("odd_protected.png") + " -m " + p("tiny.vzm"));
  ASSERT_EQ(o.code, 0) << o.err;
  auto img = load_image(p("odd_protected.png"));
  EXPECT_EQ(img.height, 33);
  EXPECT_EQ(img.width, 45);
}

TEST_F(Cli, TrainIsDeterministic) {
  const std::string args = "--seed 4 train --iterations 2 --charts 2 --size 48 --growth 2 --pem-width 4 --batch 1 -o ";
  ASSERT_EQ(run(args + p("d1.vzm")).code, 0);
  ASSERT_EQ(run(args + p("d2.vzm")).code, 0);
  EXPECT_EQ(slurp(p("d1.vzm")), slurp(p("d2.vzm")));
}

TEST_F(Cli, DetectExitCodes) {
  auto found = run("detect " + p("chart.png") + " -m " + p("zero.vzm") + " -d " + p("det"));
  EXPECT_EQ(found.code, 1) << found.err;
  for (const char* f : {"chart.mask.png", "chart.regions.json", "chart.overlay.png"})
    EXPECT_TRUE(fs::exists(dir() / "det" / f)) << f;
  auto regions = nlohmann::json::parse(slurp(dir() / "det" / "chart.regions.json"));
  EXPECT_FALSE(regions.empty());
  auto mask = load_image(dir() / "det" / "chart.mask.png");
  EXPECT_EQ(mask.channels, 1);
  for (double v : mask.data) EXPECT_TRUE(v == 0.0 || v == 1.0);

  auto clean = run("detect " + p("chart.png") + " -m " + p("zero.vzm") + " -d " + p("det2") + " --min-area 100000");
  EXPECT_EQ(clean.code, 0) << clean.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir() / "det2" / "chart.regions.json")).size(), 0u);

  EXPECT_EQ(run("detect " + p("corrupt.png") + " -m " + p("zero.vzm")).code, 2);
  EXPECT_EQ(run("detect " + p("missing.png") + " -m " + p("zero.vzm")).code, 2);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  std::ofstream(dir() / "cfg.ini") << "[detect]\nmin-area=100000\n";
  auto a = run("--config " + p("cfg.ini") + " detect " + p("chart.png") + " -m " + p("zero.vzm") + " -d " + p("c1"));
  EXPECT_EQ(a.code, 0) << a.err;
  auto b = run("--config " + p("cfg.ini") + " detect " + p("chart.png") + " -m " + p("zero.vzm") + " -d " + p("c2") +
               " --min-area 16");
  EXPECT_EQ(b.code, 1) << b.err;
}

TEST_F(Cli, TamperPatch) {
  auto r = run("tamper " + p("chart.png") + " " + p("patched.png") + " --patch 10,10,26,26 --mask " + p("patch_mask.png"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = load_image(p("patch_mask.png"));
  double on = 0;
  for (double v : m.data) on += v;
  EXPECT_GT(on, 0);
  EXPECT_LE(on, 256);
  EXPECT_EQ(run("tamper " + p("chart.png") + " " + p("x.png")).code, 2);
  EXPECT_EQ(run("tamper " + p("chart.png") + " " + p("x.png") + " --patch 60,60,80,80").code, 2);
}

TEST_F(Cli, CorpusAndEvaluate) {
  ASSERT_EQ(run("--seed 5 gen-corpus " + p("corpus") + " -n 3 --ops-per-item 2").code, 0);
  ASSERT_EQ(run("--seed 5 gen-corpus " + p("corpus_b") + " -n 3 --ops-per-item 2").code, 0);
  EXPECT_EQ(slurp(dir() / "corpus" / "manifest.json"), slurp(dir() / "corpus_b" / "manifest.json"));
  EXPECT_EQ(run("gen-corpus " + p("c0") + " -n 0").code, 2);

  const std::string eval = "evaluate " + p("corpus") + " -m " + p("zero.vzm") + " --jobs 2 -o ";
  auto e1 = run(eval + p("e1.csv") + " --json " + p("e1.json"));
  ASSERT_EQ(e1.code, 0) << e1.err;
  ASSERT_EQ(run(eval + p("e2.csv")).code, 0);
  const std::string csv = slurp(p("e1.csv"));
  EXPECT_EQ(csv, slurp(p("e2.csv")));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "item,methods,noise_percentage,rmse,iou,f1");
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(slurp(p("e1.json"))).is_object() ||
              nlohmann::json::parse(slurp(p("e1.json"))).is_array());

  ASSERT_EQ(run("gen-corpus " + p("clean") + " -n 2 --ops-per-item 0").code, 0);
  ASSERT_EQ(run("evaluate " + p("clean") + " -m " + p("zero.vzm") + " -o " + p("clean.csv")).code, 0);
  const std::string clean = slurp(p("clean.csv"));
  EXPECT_EQ(clean.substr(0, clean.find('\n')), "item,methods,noise_percentage,rmse");

  fs::create_directories(dir() / "empty");
  std::ofstream(dir() / "empty" / "manifest.json") << "[]\n";
  EXPECT_EQ(run("evaluate " + p("empty") + " -m " + p("zero.vzm") + " -o " + p("empty.csv")).code, 2);
}

TEST_F(Cli, AnalyzeWithMocks) {
  ASSERT_EQ(run("--seed 6 gen-corpus " + p("acorpus") + " -n 2 --ops-per-item 1").code, 0);
  auto g = run("analyze " + p("acorpus/tampered/0000.png") + " -m " + p("zero.vzm") + " --mock geometric -d " +
               p("intent"));
  ASSERT_EQ(g.code, 0) << g.err;
  auto j = nlohmann::json::parse(slurp(dir() / "intent" / "0000.intent.json"));
  EXPECT_TRUE(j.contains("tampering_intents"));

  auto t = run("analyze " + p("acorpus/tampered/0001.png") + " -m " + p("zero.vzm") + " --mock truth --truth " +
               p("acorpus/manifest.json") + " -d " + p("intent"));
  ASSERT_EQ(t.code, 0) << t.err;
  auto manifest = nlohmann::json::parse(slurp(dir() / "acorpus" / "manifest.json"));
  auto k = nlohmann::json::parse(slurp(dir() / "intent" / "0001.intent.json"));
  ASSERT_EQ(k["tampering_intents"].size(), 1u);
  EXPECT_EQ(k["tampering_intents"][0]["method"], manifest[1]["ops"][0]["method_name"]);

  EXPECT_EQ(run("analyze " + p("chart.png") + " -m " + p("zero.vzm")).code, 2);
  EXPECT_EQ(run("analyze " + p("chart.png") + " -m " + p("zero.vzm") + " --mock truth").code, 2);
}
