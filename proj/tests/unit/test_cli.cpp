#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dupscope/cli.hpp"
#include "support/corpus.hpp"
#include "support/synth.hpp"
#include "support/tempdir.hpp"

using namespace dupscope;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dupscope");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Ten solid-colour entries against a red query; the histogram verdict is exact, and 7 labels agree.
std::filesystem::path write_toy_set(const testkit::TempDir& tmp) {
  save_png(RasterImage::filled(16, 16, 200, 0, 0), tmp / "q.png");
  const bool red[10] = {true, false, true, true, false, true, false, false, false, true};
  const char* label[10] = {"similar", "dissimilar", "similar", "dissimilar", "dissimilar",
                           "similar", "similar",    "dissimilar", "similar", "similar"};
  std::ofstream csv(tmp / "toy.csv");
  csv << "path,label\nq.png,query\n";
  for (int i = 0; i < 10; ++i) {
    const std::string name = "e" + std::to_string(i) + ".png";
    save_png(red[i] ? RasterImage::filled(16, 16, 200, 0, 0) : RasterImage::filled(16, 16, 0, 0, 200), tmp / name);
    csv << name << ',' << label[i] << '\n';
  }
  return tmp / "toy.csv";
}

}  // namespace

TEST(Cli, CompareSameImageIsSimilarExitZero) {
  testkit::TempDir tmp("cli");
  save_png(testkit::synth_scene(1, 200, 200, testkit::random_palette(1)), tmp / "x.png");
  const auto r = run_cli({"compare", "--method", "improved-orb", "--a", (tmp / "x.png").string(), "--b", (tmp / "x.png").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("verdict=similar"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("elapsed="), std::string::npos);
}

TEST(Cli, CompareDissimilarExitOneAndJson) {
  testkit::TempDir tmp("cli");
  save_png(RasterImage::filled(8, 8, 255, 0, 0), tmp / "r.png");
  save_png(RasterImage::filled(8, 8, 0, 0, 255), tmp / "b.png");
  const auto r = run_cli({"--json", "compare", "--method", "histogram", "--a", (tmp / "r.png").string(), "--b",
                          (tmp / "b.png").string()});
  EXPECT_EQ(r.code, 1);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["score"], 1.0);
  EXPECT_EQ(j["similar"], false);
  EXPECT_TRUE(j["elapsed_seconds"].is_number());
}

TEST(Cli, ErrorsExitTwo) {
  testkit::TempDir tmp("cli");
  auto r = run_cli({"compare", "--a", (tmp / "none.png").string(), "--b", (tmp / "none.png").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  r = run_cli({"--json", "compare", "--method", "orb2", "--a", "x", "--b", "y"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out)["error"], "InvalidArgument");
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"compare"}).code, 2);
}

TEST(Cli, EvaluateMatchesHandCount) {
  testkit::TempDir tmp("cli");
  const auto set = write_toy_set(tmp);
  const auto r = run_cli({"--json", "evaluate", "--method", "histogram", "--set", set.string(), "--threshold", "0.4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(r.out)["accuracy"].get<double>(), 0.7);
}

TEST(Cli, SweepWritesNineRowCurve) {
  testkit::TempDir tmp("cli");
  const auto set = write_toy_set(tmp);
  const auto r = run_cli({"sweep", "--method", "histogram", "--sets", set.string() + "," + set.string(), "--thresholds",
                          "0.1..0.9:0.1", "--out", (tmp / "curve.csv").string(), "--variance-at", "0.2,0.4,0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(tmp / "curve.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "set,threshold,accuracy,retrieved");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 18);
  EXPECT_NE(r.out.find("average variance 0.0000"), std::string::npos) << r.out;

  const auto one = run_cli({"sweep", "--method", "histogram", "--sets", set.string(), "--out", (tmp / "one.csv").string()});
  ASSERT_EQ(one.code, 0);
  const auto body = slurp(tmp / "one.csv");
  EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 10);
}

TEST(Cli, IngestThenSearch) {
  testkit::TempDir tmp("cli");
  testkit::FixtureServer server;
  const auto ev = testkit::make_event(31, 2, 3, 192);
  testkit::publish(server, ev.images, "storm");
  save_png(ev.query, tmp / "q.png");
  auto r = run_cli({"--json", "ingest", "--source", server.feed_url(), "--keywords", "storm", "--out", (tmp / "c").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["images"], 5);
  r = run_cli({"search", "--method", "histogram", "--threshold", "0.9", "--query", (tmp / "q.png").string(), "--corpus",
               (tmp / "c").string(), "--out", (tmp / "results.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(tmp / "results.json"));
  EXPECT_EQ(j["corpus_size"], 5);
  EXPECT_EQ(j["reduction_pct"].get<double>(), search_space_reduction(5, static_cast<long long>(j["results"].size())));
  EXPECT_NE(r.out.find("reduction"), std::string::npos);
}

TEST(Cli, AugmentAndTrainAreSeedDeterministic) {
  testkit::TempDir tmp("cli");
  std::filesystem::create_directories(tmp / "src");
  for (std::uint64_t i = 0; i < 3; ++i)
    save_png(testkit::synth_scene(50 + i, 72, 64, testkit::random_palette(i)), tmp / "src" / ("s" + std::to_string(i) + ".png"));
  for (const char* out : {"a", "b"}) {
    const auto r = run_cli({"--seed", "9", "augment", "--in", (tmp / "src").string(), "--out", (tmp / out).string(),
                            "--pairs-per-image", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const auto a = read_manifest(tmp / "a" / "manifest.jsonl"), b = read_manifest(tmp / "b" / "manifest.jsonl");
  ASSERT_EQ(a.pairs.size(), 6u);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].label, b.pairs[i].label);
    EXPECT_EQ(a.pairs[i].seed, b.pairs[i].seed);
    EXPECT_EQ(slurp(a.pairs[i].image_b), slurp(b.pairs[i].image_b));
  }

  std::string ckpt[2];
  for (int k = 0; k < 2; ++k) {
    const auto out = (tmp / ("m" + std::to_string(k) + ".ckpt")).string();
    const auto r = run_cli({"--seed", "4", "--threads", "1", "train", "--manifest", (tmp / "a" / "manifest.jsonl").string(),
                            "--epochs", "2", "--batch-size", "3", "--input-size", "64", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    ckpt[k] = slurp(out);
    const auto hist = slurp(out + ".history.csv");
    EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 3);
  }
  EXPECT_EQ(ckpt[0], ckpt[1]);
}
