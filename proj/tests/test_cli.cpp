#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "lmac/error.hpp"
#include "test_util.hpp"

using namespace lmac;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lmac_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name), std::ios::binary) << content;
    return path(name);
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::size_t file_count() const {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir_), fs::directory_iterator()));
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::string fake_bridge(const std::string& flags = "") {
  return std::string("'") + LMAC_FAKE_BRIDGE + "' " + flags;
}

const std::string kEnglish = std::string(LMAC_TEST_DATA) + "/english_sample.txt";

}  // namespace

TEST(ModelSpec, Parses) {
  EXPECT_EQ(cli::parse_model_spec("uniform").kind, cli::ModelSpec::Kind::kUniform);
  const auto ng = cli::parse_model_spec("ngram:5");
  EXPECT_EQ(ng.kind, cli::ModelSpec::Kind::kNgram);
  EXPECT_EQ(ng.order, 5u);
  const auto br = cli::parse_model_spec("bridge:python3 serve.py --model x");
  EXPECT_EQ(br.kind, cli::ModelSpec::Kind::kBridge);
  EXPECT_EQ(br.endpoint, "python3 serve.py --model x");
  EXPECT_TRUE(cli::parse_model_spec("bridge").endpoint.empty());
  for (const char* bad : {"ngram:0", "ngram:9", "ngram:", "ngram:x", "lstm", "ngram:123"}) {
    EXPECT_EQ(lmac::testing::error_code_of([&] { cli::parse_model_spec(bad); }),
              ErrorCode::kInvalidArgument)
        << bad;
  }
}

TEST_F(CliTest, CompressDecompressRoundTrip) {
  std::mt19937_64 rng(101);
  for (const std::string model : {"uniform", "ngram:1", "ngram:3", "ngram:8"}) {
    const std::string data = lmac::testing::random_bytes(rng, 3000) + "tail text tail text";
    const auto in = write("in.bin", data);
    ASSERT_EQ(run({"compress", in.string(), "--model", model}), 0) << err_.str();
    ASSERT_TRUE(fs::exists(path("in.bin.lmac")));
    fs::remove(in);
    ASSERT_EQ(run({"decompress", path("in.bin.lmac").string(), "--model", model}), 0) << err_.str();
    EXPECT_EQ(read(in), data) << model;
    fs::remove(path("in.bin.lmac"));
  }
}

TEST_F(CliTest, EmptyFileGivesEosOnlyPayload) {
  const auto in = write("empty.txt", "");
  ASSERT_EQ(run({"compress", in.string(), "--model", "uniform", "--out", path("e.lmac").string()}), 0);
  const std::string c = read(path("e.lmac"));
  // 16-byte header + "uniform" + at most 12 payload bits.
  EXPECT_EQ(c.substr(0, 4), "LMAC");
  EXPECT_LE(c.size(), 16u + 7u + 2u);
  EXPECT_GE(c.size(), 16u + 7u + 1u);
  ASSERT_EQ(run({"decompress", path("e.lmac").string(), "--model", "uniform", "--out",
                 path("e.out").string()}),
            0);
  EXPECT_EQ(read(path("e.out")), "");
}

TEST_F(CliTest, EnglishShrinksUnderOrderThree) {
  ASSERT_EQ(run({"compress", kEnglish, "--model", "ngram:3", "--out", path("en.lmac").string()}), 0);
  EXPECT_LT(fs::file_size(path("en.lmac")), fs::file_size(kEnglish));
}

TEST_F(CliTest, WrongModelIsAMismatchAndWritesNothing) {
  const auto in = write("a.txt", "some text to compress");
  ASSERT_EQ(run({"compress", in.string(), "--model", "ngram:2"}), 0);
  const auto before = file_count();
  EXPECT_EQ(run({"decompress", path("a.txt.lmac").string(), "--model", "ngram:3", "--out",
                 path("a.out").string()}),
            kExitModel);
  EXPECT_NE(err_.str().find("model-mismatch"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("a.out")));
  EXPECT_EQ(file_count(), before);
}

TEST_F(CliTest, TruncatedContainerIsCorrupt) {
  std::mt19937_64 rng(102);
  const auto in = write("r.bin", lmac::testing::random_bytes(rng, 4000));
  ASSERT_EQ(run({"compress", in.string(), "--model", "ngram:2", "--out", path("r.lmac").string()}), 0);
  const std::string full = read(path("r.lmac"));
  for (std::size_t keep : {full.size() - 1, full.size() / 2, std::size_t{16 + 7 + 3}}) {
    write("cut.lmac", full.substr(0, keep));
    EXPECT_EQ(run({"decompress", path("cut.lmac").string(), "--model", "ngram:2", "--out",
                   path("cut.out").string()}),
              kExitCorrupt)
        << keep << " " << err_.str();
    EXPECT_FALSE(fs::exists(path("cut.out")));
  }
}

TEST_F(CliTest, BadContainerHeadersAreFormatErrors) {
  write("bad.lmac", "LMAX\x01\x00\x00\x01u");
  EXPECT_EQ(run({"decompress", path("bad.lmac").string(), "--out", path("o").string()}), kExitInput);
  std::string wrong_version("LMAC\x02\x00\x00\x00", 8);
  wrong_version += std::string(8, '\0');
  write("v.lmac", wrong_version);
  EXPECT_EQ(run({"decompress", path("v.lmac").string(), "--out", path("o").string()}), kExitInput);
  EXPECT_EQ(run({"decompress", path("missing.lmac").string()}), kExitInput);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run({"compress"}), kExitUsage);
  EXPECT_EQ(run({"compress", "x", "--model", "ngram:99"}), kExitUsage);
  EXPECT_EQ(run({"evaluate", "x", "--mode", "guess"}), kExitUsage);
  EXPECT_EQ(run({"evaluate", "x", "--jobs", "0"}), kExitUsage);
  EXPECT_EQ(run({"estimate", "x", "--tokenizer", "bpe"}), kExitUsage);
  EXPECT_EQ(run({"compress", "--help"}), kExitOk);
  EXPECT_NE(out_.str().find("--model"), std::string::npos);
}

TEST_F(CliTest, EstimateWritesPerTokenReport) {
  const auto in = write("t.txt", "abab");
  ASSERT_EQ(run({"estimate", in.string(), "--model", "uniform", "--out", path("t.tsv").string()}), 0);
  const std::string tsv = read(path("t.tsv"));
  std::istringstream lines(tsv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 2) << line;
    ++n;
  }
  EXPECT_EQ(n, 5u);
  EXPECT_NE(out_.str().find("mode:       estimated"), std::string::npos);
}

TEST_F(CliTest, EvaluateRandomBytesUnderUniform) {
  // Random bytes with whitespace stripped so each "word" is binary noise.
  std::mt19937_64 rng(103);
  std::string corpus;
  for (int w = 0; w < 2000; ++w) {
    for (int i = 0; i < 24; ++i) {
      char c;
      do c = static_cast<char>(rng() & 0xFF); while (std::isspace(static_cast<unsigned char>(c)));
      corpus.push_back(c);
    }
    corpus.push_back(' ');
  }
  const auto in = write("noise.txt", corpus);
  ASSERT_EQ(run({"evaluate", in.string(), "--model", "uniform", "--mode", "coded", "--out",
                 path("r.json").string()}),
            0)
      << err_.str();
  const auto doc = nlohmann::json::parse(read(path("r.json")));
  EXPECT_EQ(doc["chunks"].size(), 10u);
  EXPECT_EQ(doc["mode"], "coded");
  EXPECT_NEAR(doc["ratio"].get<double>(), 1.0, 0.01);
}

TEST_F(CliTest, EvaluateModesAgreeAndJobsDoNotMatter) {
  ASSERT_EQ(run({"evaluate", kEnglish, "--model", "ngram:3", "--mode", "coded", "--jobs", "1", "--out",
                 path("c1.json").string()}),
            0);
  ASSERT_EQ(run({"evaluate", kEnglish, "--model", "ngram:3", "--mode", "coded", "--jobs", "3", "--out",
                 path("c3.json").string()}),
            0);
  ASSERT_EQ(run({"evaluate", kEnglish, "--model", "ngram:3", "--out", path("e.json").string()}), 0);
  EXPECT_EQ(read(path("c1.json")), read(path("c3.json")));
  const auto coded = nlohmann::json::parse(read(path("c1.json")));
  const auto est = nlohmann::json::parse(read(path("e.json")));
  EXPECT_EQ(est["mode"], "estimated");
  const double rc = coded["ratio"], re = est["ratio"];
  EXPECT_LT(std::abs(rc - re) / re, 0.005);
  EXPECT_GT(rc, 1.0);
  EXPECT_LT(rc, 4.0);

  ASSERT_EQ(run({"evaluate", kEnglish, "--chunk-words", "50", "--max-chunks", "7", "--out",
                 path("s.json").string()}),
            0);
  const auto small = nlohmann::json::parse(read(path("s.json")));
  EXPECT_EQ(small["chunks"].size(), 7u);
  EXPECT_EQ(small["words_per_chunk"], 50);
}

TEST_F(CliTest, EvaluateShortCorpusIsInputError) {
  const auto in = write("short.txt", "only a few words here");
  EXPECT_EQ(run({"evaluate", in.string(), "--out", path("r.json").string()}), kExitInput);
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(CliTest, RankPublishedFixture) {
  const std::string data = LMAC_FIXTURE_DATA;
  ASSERT_EQ(run({"rank", "--scores", data + "/published_ratios.csv", "--accuracy",
                 data + "/published_accuracy.csv", "--out", path("rank.json").string()}),
            0)
      << err_.str();
  const auto doc = nlohmann::json::parse(read(path("rank.json")));
  std::vector<std::string> order;
  for (const auto& r : doc["ranking"]) order.push_back(r["model"]);
  EXPECT_EQ(order, (std::vector<std::string>{"mistral-7b", "llama-2-7b", "gpt2-xl-1.5b",
                                             "opt-iml-1.3b", "gpt2-774m"}));
  ASSERT_EQ(doc["tasks"].size(), 3u);
  for (const auto& t : doc["tasks"]) {
    EXPECT_EQ(t["spearman"], 1.0);
    EXPECT_EQ(t["order_agreement"], true);
  }
}

TEST_F(CliTest, RankFromReportsAndErrors) {
  ASSERT_EQ(run({"evaluate", kEnglish, "--model", "uniform", "--out", path("u.json").string()}), 0);
  ASSERT_EQ(run({"evaluate", kEnglish, "--model", "ngram:1", "--out", path("n1.json").string()}), 0);
  const auto acc = write("acc.csv",
                         "model,task,accuracy,source\nuniform,toy,40,x\nngram:1,toy,60,y\n");
  ASSERT_EQ(run({"rank", "--report", path("u.json").string(), "--report", path("n1.json").string(),
                 "--accuracy", acc.string()}),
            0)
      << err_.str();
  EXPECT_EQ(out_.str().find("  1  ngram:1"), 0u) << out_.str();
  EXPECT_NE(out_.str().find("toy (n=2): spearman=1.000"), std::string::npos);

  // Single model: ranking plus an undefined correlation.
  const auto solo = write("solo.csv", "model,task,accuracy,source\nngram:1,toy,60,y\n");
  ASSERT_EQ(run({"rank", "--report", path("n1.json").string(), "--accuracy", solo.string()}), 0);
  EXPECT_NE(out_.str().find("spearman=undefined"), std::string::npos);

  const auto ghost = write("ghost.csv", "model,task,accuracy,source\nghost-7b,toy,60,y\n");
  EXPECT_EQ(run({"rank", "--report", path("n1.json").string(), "--accuracy", ghost.string(), "--out",
                 path("g.json").string()}),
            kExitInput);
  EXPECT_NE(err_.str().find("ghost-7b"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("g.json")));
  EXPECT_EQ(run({"rank"}), kExitInput);
}

TEST_F(CliTest, BridgeModelThroughFreshProcesses) {
  const auto in = write("b.txt", "a bridge backed round trip with its own tokenizer");
  const std::string model = "bridge:" + fake_bridge("--mode counts --name toy");
  ASSERT_EQ(run({"compress", in.string(), "--model", model, "--tokenizer", "bridge", "--out",
                 path("b.lmac").string()}),
            0)
      << err_.str();
  const std::string c = read(path("b.lmac"));
  EXPECT_EQ(static_cast<unsigned char>(c[5]), 0x01);
  EXPECT_NE(c.find("bridge:toy"), std::string::npos);
  ASSERT_EQ(run({"decompress", path("b.lmac").string(), "--model", model, "--out",
                 path("b.out").string()}),
            0)
      << err_.str();
  EXPECT_EQ(read(path("b.out")), read(in));
}

TEST_F(CliTest, BridgeEndpointFromEnvironment) {
  const auto in = write("env.txt", "environment override");
  setenv(cli::kBridgeEndpointEnv, fake_bridge("--name envbridge").c_str(), 1);
  const int rc = run({"compress", in.string(), "--model", "bridge:/nonexistent/bridge", "--out",
                      path("env.lmac").string()});
  unsetenv(cli::kBridgeEndpointEnv);
  ASSERT_EQ(rc, 0) << err_.str();
  EXPECT_NE(read(path("env.lmac")).find("bridge:envbridge"), std::string::npos);
  EXPECT_EQ(run({"compress", in.string(), "--model", "bridge"}), kExitInput);
}

TEST_F(CliTest, BridgeFailuresMapToModelExitCode) {
  const auto in = write("f.txt", "text");
  EXPECT_EQ(run({"compress", in.string(), "--model", "bridge:" + fake_bridge("--fault bad-sum"),
                 "--out", path("f.lmac").string()}),
            kExitModel);
  EXPECT_FALSE(fs::exists(path("f.lmac")));
  EXPECT_EQ(run({"compress", in.string(), "--model", "bridge:exit 3"}), kExitModel);
}

TEST_F(CliTest, AtomicWriteLeavesNoTemporaries) {
  cli::write_file_atomic(path("x.txt"), "first");
  cli::write_file_atomic(path("x.txt"), "second");
  EXPECT_EQ(read(path("x.txt")), "second");
  EXPECT_EQ(file_count(), 1u);
  EXPECT_EQ(lmac::testing::error_code_of(
                [&] { cli::write_file_atomic(path("no/such/dir/x.txt"), "data"); }),
            ErrorCode::kInput);
}

TEST_F(CliTest, BinaryExitCodes) {
  const auto in = write("p.txt", "process level check");
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string bin = std::string("'") + LMAC_CLI_BINARY + "'";
  EXPECT_EQ(status(bin + " compress '" + in.string() + "'"), 0);
  EXPECT_EQ(status(bin + " decompress '" + in.string() + ".lmac' --model uniform --out '" +
                   path("p.out").string() + "'"),
            4);
  EXPECT_EQ(status(bin + " decompress '" + in.string() + ".lmac' --out '" + path("p.out").string() + "'"),
            0);
  EXPECT_EQ(read(path("p.out")), "process level check");
  EXPECT_EQ(status(bin + " --bogus"), 2);
}
