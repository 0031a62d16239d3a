// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcclean/cli.hpp"
#include "support.hpp"

namespace pcclean {
namespace {

namespace fs = std::filesystem;
using testing_support::tiny_config;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pcclean");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value of a "key = value" line in a report.
std::string field(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return "";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pcclean_test_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // A detector whose output is sigmoid(bias) everywhere and a denoiser whose
  // displacement is exactly zero.
  std::string constant_detector(double bias) const {
    Model m = make_model(ModelKind::Detector, tiny_config(ModelKind::Detector, GraphConvVariant::FixedLowDim, 8),
                         InitScheme::He, 1);
    for (double& v : m.params.at("head.out.w").mutable_values()) v = 0.0;
    for (double& v : m.params.at("head.out.b").mutable_values()) v = bias;
    const std::string p = path(bias < 0 ? "never.ckpt" : "always.ckpt");
    save_model(m, p);
    return p;
  }
  std::string zero_denoiser() const {
    Model m = make_model(ModelKind::Denoiser, tiny_config(ModelKind::Denoiser, GraphConvVariant::FixedLowDim, 8),
                         InitScheme::He, 2);
    for (double& v : m.params.at("head.out.w").mutable_values()) v = 0.0;
    for (double& v : m.params.at("head.out.b").mutable_values()) v = 0.0;
    const std::string p = path("zero.ckpt");
    save_model(m, p);
    return p;
  }
  std::string noisy_cloud(std::size_t n = 300) const {
    const std::string clean = path("clean.xyz");
    const std::string noisy = path("noisy.xyz");
    EXPECT_EQ(run_cli({"generate", "--shape", "sphere", "--points", std::to_string(n), "--seed", "3", "--output", clean})
                  .code,
              0);
    EXPECT_EQ(run_cli({"contaminate", "--input", clean, "--output", noisy, "--shape", "sphere", "--noise-level", "0.01",
                       "--outlier-fraction", "0.2", "--seed", "4", "--manifest", path("m.json")})
                  .code,
              0);
    return noisy;
  }

  fs::path dir_;
};

const std::vector<std::string> kTinyModel = {"--k",           "8",   "--local-widths", "5,6,7,8", "--global-width",
                                             "9",             "--head-widths",  "7,6",     "--qstn-widths",
                                             "5,6",           "--qstn-hidden",  "5",       "--patch-points", "24"};

std::vector<std::string> with_tiny(std::vector<std::string> args) {
  args.insert(args.end(), kTinyModel.begin(), kTinyModel.end());
  return args;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"generate", "--output", path("a.xyz"), "--bogus"}).code, 1);
  EXPECT_EQ(run_cli({"generate", "--output", path("a.xyz"), "--shape", "blob"}).code, 1);
  EXPECT_EQ(run_cli({"clean", "--input", path("x.xyz"), "--output", path("y.xyz")}).code, 1);
  EXPECT_EQ(run_cli({"train-detector", "--output", path("d.ckpt"), "--preset", "fast"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, MissingFileExitsTwo) {
  const CliResult r = run_cli({"eval", "--input", path("nope.xyz"), "--reference", path("nope.xyz")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.xyz"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"clean", "--input", path("nope.xyz"), "--output", path("o.xyz"), "--skip-detect", "--checkpoint",
                     path("missing.ckpt")})
                .code,
            2);
}

TEST_F(CliTest, MalformedCloudExitsTwo) {
  std::ofstream(path("bad.xyz")) << "1.0 2.0\n";
  const CliResult r = run_cli({"eval", "--input", path("bad.xyz"), "--reference", path("bad.xyz")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(CliTest, IdentityPipelineReproducesInput) {
  const std::string noisy = noisy_cloud();
  const std::string out = path("out.xyz");
  const CliResult r = run_cli({"clean", "--input", noisy, "--output", out, "--checkpoint", constant_detector(-50),
                               "--checkpoint", zero_denoiser(), "--patch-points", "24"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "outliers_removed"), "0");
  EXPECT_EQ(read_cloud(out), read_cloud(noisy));
}

TEST_F(CliTest, EvalOfIdenticalCloudsReportsZeroChamfer) {
  const std::string noisy = noisy_cloud();
  const CliResult r = run_cli({"eval", "--input", noisy, "--reference", noisy});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "chamfer_distance"), "0");
}

TEST_F(CliTest, EvalReportsAuprAndCurve) {
  const std::string noisy = noisy_cloud();
  const CliResult r = run_cli({"eval", "--input", noisy, "--checkpoint", constant_detector(-50), "--patch-points", "24",
                               "--pr-curve", path("pr.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  // A constant score ranks nothing: AUPR equals the prevalence.
  EXPECT_NEAR(std::stod(field(r.out, "aupr")), 0.2, 1e-12);
  EXPECT_EQ(field(r.out, "outliers_flagged"), "0");
  EXPECT_EQ(slurp(path("pr.csv")).substr(0, 26), "threshold,recall,precision");
}

TEST_F(CliTest, EverythingRemovedExitsTwo) {
  const std::string noisy = noisy_cloud();
  const CliResult r = run_cli({"clean", "--input", noisy, "--output", path("o.xyz"), "--checkpoint",
                               constant_detector(50), "--skip-denoise", "--patch-points", "24"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("outlier"), std::string::npos) << r.err;
}

TEST_F(CliTest, NothingFlaggedLeavesChamferUnchanged) {
  const std::string noisy = noisy_cloud();
  const CliResult r = run_cli({"clean", "--input", noisy, "--output", path("o.xyz"), "--checkpoint",
                               constant_detector(-50), "--skip-denoise", "--patch-points", "24", "--reference",
                               path("clean.xyz")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "chamfer_input"), field(r.out, "chamfer_output"));
}

TEST_F(CliTest, GenerateIsByteDeterministic) {
  for (const char* name : {"a.ply", "b.ply"})
    ASSERT_EQ(run_cli({"generate", "--shape", "torus", "--points", "500", "--seed", "9", "--output", path(name)}).code,
              0);
  EXPECT_EQ(slurp(path("a.ply")), slurp(path("b.ply")));
  EXPECT_EQ(read_cloud(path("a.ply")).size(), 500u);
}

TEST_F(CliTest, TrainingIsByteDeterministic) {
  noisy_cloud(400);
  for (const char* tag : {"1", "2"}) {
    const CliResult d = run_cli(with_tiny({"train-detector", "--manifest", path("m.json"), "--output",
                                           path(std::string("det") + tag + ".ckpt"), "--epochs", "2", "--samples", "40",
                                           "--log", path(std::string("det") + tag + ".log")}));
    ASSERT_EQ(d.code, 0) << d.err;
    const CliResult n = run_cli(with_tiny({"train-denoiser", "--manifest", path("m.json"), "--output",
                                           path(std::string("den") + tag + ".ckpt"), "--epochs", "2", "--samples",
                                           "40"}));
    ASSERT_EQ(n.code, 0) << n.err;
  }
  EXPECT_EQ(slurp(path("det1.ckpt")), slurp(path("det2.ckpt")));
  EXPECT_EQ(slurp(path("det1.log")), slurp(path("det2.log")));
  EXPECT_EQ(slurp(path("den1.ckpt")), slurp(path("den2.ckpt")));
  EXPECT_EQ(load_model(path("det1.ckpt")).config.k, 8u);

  for (const char* tag : {"1", "2"}) {
    ASSERT_EQ(run_cli({"clean", "--input", path("noisy.xyz"), "--output", path(std::string("c") + tag + ".xyz"),
                       "--checkpoint", path("det1.ckpt"), "--checkpoint", path("den1.ckpt"), "--patch-points", "24",
                       "--threshold", "1"})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(path("c1.xyz")), slurp(path("c2.xyz")));
}

TEST_F(CliTest, DenoiserNeedsPairedReferences) {
  const std::string noisy = noisy_cloud();
  EXPECT_EQ(run_cli(with_tiny({"train-denoiser", "--input", noisy, "--output", path("d.ckpt")})).code, 1);
  // Index-aligned pairs with different sizes are a data error.
  ASSERT_EQ(run_cli({"generate", "--shape", "sphere", "--points", "10", "--output", path("small.xyz")}).code, 0);
  EXPECT_EQ(run_cli(with_tiny({"train-denoiser", "--input", noisy, "--reference", path("small.xyz"), "--output",
                               path("d.ckpt"), "--epochs", "1"}))
                .code,
            2);
}

TEST_F(CliTest, BenchReportsBothVariants) {
  const std::string noisy = noisy_cloud();
  const CliResult r = run_cli({"bench", "--input", noisy, "--checkpoint", constant_detector(-50), "--repeat", "3",
                               "--max-points", "10", "--patch-points", "24"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("variant = ours1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("variant = ours2"), std::string::npos) << r.out;
  EXPECT_GT(std::stod(field(r.out, "ours2_over_ours1")), 0.0);
  EXPECT_EQ(run_cli({"bench", "--input", noisy, "--checkpoint", path("never.ckpt"), "--repeat", "2"}).code, 1);
}

TEST_F(CliTest, ConfigFileSuppliesDefaultsAndFlagsWin) {
  std::ofstream(path("cfg.toml")) << "[generate]\nshape = \"cube\"\npoints = 50\nseed = 5\n";
  ASSERT_EQ(run_cli({"--config", path("cfg.toml"), "generate", "--output", path("a.xyz")}).code, 0);
  ASSERT_EQ(run_cli({"generate", "--shape", "cube", "--points", "50", "--seed", "5", "--output", path("b.xyz")}).code,
            0);
  EXPECT_EQ(slurp(path("a.xyz")), slurp(path("b.xyz")));
  ASSERT_EQ(run_cli({"--config", path("cfg.toml"), "generate", "--points", "60", "--output", path("c.xyz")}).code, 0);
  EXPECT_EQ(read_cloud(path("c.xyz")).size(), 60u);
}

#ifdef PCCLEAN_CLI_PATH
TEST_F(CliTest, ProcessExitCodes) {
  const std::string exe = PCCLEAN_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(exe + " generate --points 20 --output " + path("p.xyz")), 0);
  EXPECT_EQ(status(exe + " generate --wat"), 1);
  EXPECT_EQ(status(exe + " eval --input " + path("none.xyz") + " --reference " + path("none.xyz")), 2);
}
#endif

}  // namespace
}  // namespace pcclean
