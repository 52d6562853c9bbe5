// Copyright 2026 The mie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mie/cli.hpp"

namespace mie::cli {
namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_args(std::vector<std::string> args) {
    args.insert(args.begin(), "mie");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("mie_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int count_lines(const std::string& text, const std::string& prefix = "") {
    std::istringstream in(text);
    int n = 0;
    for (std::string line; std::getline(in, line);)
        if (line.rfind(prefix, 0) == 0) ++n;
    return n;
}

TEST(Angles, PlainAndPiMultiples) {
    EXPECT_DOUBLE_EQ(parse_angle("0.5"), 0.5);
    EXPECT_DOUBLE_EQ(parse_angle("0.25pi"), 0.25 * std::numbers::pi);
    EXPECT_DOUBLE_EQ(parse_angle("pi"), std::numbers::pi);
    EXPECT_THROW(parse_angle("abc"), ContractViolation);
    EXPECT_THROW(parse_angle("0.2rad"), ContractViolation);
}

TEST(Cli, UsageErrorsExitWithTwo) {
    EXPECT_EQ(run_args({}).code, kUsage);
    EXPECT_EQ(run_args({"frobnicate"}).code, kUsage);
    EXPECT_EQ(run_args({"generate"}).code, kUsage); // --out is required
    EXPECT_EQ(run_args({"generate", "--geometry", "ring", "--out", temp_path("x")}).code, kUsage);
    EXPECT_EQ(run_args({"generate", "--L", "5", "--out", temp_path("x")}).code, kUsage);
    EXPECT_EQ(run_args({"generate", "--geometry", "grid", "--theta", "zz", "--out", temp_path("x")}).code, kUsage);
    EXPECT_EQ(run_args({"--help"}).code, kOk);
}

TEST(Cli, GenerateIsReproducibleAndEchoesConfig) {
    const std::string a = temp_path("a.jsonl"), b = temp_path("b.jsonl");
    const auto ra = run_args({"generate", "--geometry", "grid", "--L", "3", "--theta", "0.3pi", "--repeats", "50",
                              "--seed", "9", "--meas-flip", "0.01", "--out", a});
    ASSERT_EQ(ra.code, kOk) << ra.err;
    EXPECT_EQ(count_lines(ra.out, "# config: "), 1);
    EXPECT_NE(ra.out.find("records 50 discarded"), std::string::npos);
    ASSERT_EQ(run_args({"generate", "--geometry", "grid", "--L", "3", "--theta", "0.3pi", "--repeats", "50", "--seed",
                        "9", "--meas-flip", "0.01", "--out", b, "--workers", "2"})
                  .code,
              kOk);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_TRUE(std::filesystem::exists(manifest_path(a)));
    const auto man = read_manifest(a);
    EXPECT_EQ(man->record_count, 50u);
    EXPECT_EQ(man->creation.at("seed"), 9);

    const auto oracle = run_args({"generate", "--geometry", "grid", "--L", "3", "--theta", "0.3pi", "--repeats",
                                  "5", "--oracle", "--out", b});
    ASSERT_EQ(oracle.code, kOk);
    EXPECT_TRUE(read_records(b)[0].born_prob.has_value());
    EXPECT_EQ(run_args({"generate", "--oracle", "--out", b}).code, kUsage); // chains have no oracle sampler
    for (const auto& p : {a, b}) {
        std::remove(p.c_str());
        std::remove(manifest_path(p).c_str());
    }
}

TEST(Cli, EvaluateWritesVersionedCsv) {
    const std::string data = temp_path("eval.jsonl"), csv = temp_path("eval.csv");
    ASSERT_EQ(run_args({"generate", "--L", "6", "--repeats", "400", "--out", data}).code, kOk);
    const auto r = run_args({"evaluate", "--data", data, "--model", "gate", "--epsilon", "0.1", "--out", csv});
    ASSERT_EQ(r.code, kOk) << r.err;
    const std::string text = slurp(csv);
    EXPECT_EQ(text.rfind("# schema: mie-evaluate/1\n", 0), 0u);
    EXPECT_NE(text.find("model,n,entropy_bound"), std::string::npos);
    EXPECT_NE(text.find("\ngate,400,"), std::string::npos);
    EXPECT_EQ(run_args({"evaluate", "--data", temp_path("missing.jsonl")}).code, kData);
    EXPECT_EQ(run_args({"evaluate", "--data", data, "--model", "born"}).code, kUsage); // no checkpoint
    std::remove(data.c_str());
    std::remove(manifest_path(data).c_str());
    std::remove(csv.c_str());
}

TEST(Cli, TrainThenEvaluateCheckpoint) {
    const std::string data = temp_path("train.jsonl"), ckpt = temp_path("model.ckpt"), curve = temp_path("curve.csv");
    ASSERT_EQ(run_args({"generate", "--L", "4", "--repeats", "600", "--seed", "2", "--out", data}).code, kOk);
    const auto t = run_args({"train", "--data", data, "--kind", "born", "--chi", "2", "--epochs", "1", "--checkpoints",
                             "0.5", "--out", ckpt, "--curve", curve, "--lr", "0.01"});
    ASSERT_EQ(t.code, kOk) << t.err;
    const std::string text = slurp(curve);
    EXPECT_EQ(text.rfind("# schema: mie-train-curve/1\n", 0), 0u);
    EXPECT_EQ(count_lines(text), 5); // schema, header, epochs 0, 0.5, 1
    const auto e = run_args({"evaluate", "--data", data, "--model", "born", "--checkpoint", ckpt});
    ASSERT_EQ(e.code, kOk) << e.err;
    EXPECT_NE(e.out.find("\nborn,"), std::string::npos);
    EXPECT_EQ(run_args({"evaluate", "--data", data, "--model", "attention", "--checkpoint", ckpt}).code, kData);
    for (const auto& p : {data, manifest_path(data), ckpt, curve}) std::remove(p.c_str());
}

TEST(Cli, TrainWithRestartsReportsChosenCandidate) {
    const std::string data = temp_path("restart.jsonl"), ckpt = temp_path("restart.ckpt");
    ASSERT_EQ(run_args({"generate", "--L", "4", "--repeats", "300", "--seed", "3", "--out", data}).code, kOk);
    const auto t = run_args({"train", "--data", data, "--kind", "born", "--chi", "2", "--epochs", "0.5", "--restarts",
                             "2", "--out", ckpt});
    ASSERT_EQ(t.code, kOk) << t.err;
    EXPECT_NE(t.out.find("# restarts: {\"chosen\":"), std::string::npos);
    EXPECT_EQ(count_lines(t.out, "0,0,"), 1); // only the chosen curve
    EXPECT_EQ(count_lines(t.err, "# restart 1: "), 2);
    EXPECT_EQ(run_args({"train", "--data", data, "--restarts", "0", "--out", ckpt}).code, kUsage);
    for (const auto& p : {data, manifest_path(data), ckpt}) std::remove(p.c_str());
}

TEST(Cli, SweepEmitsOneRowPerPoint) {
    const auto r = run_args({"sweep", "--L", "3", "--thetas", "0,0.25pi", "--ds", "1,2", "--repeats", "50"});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_EQ(count_lines(r.out, "# schema: mie-sweep/1"), 1);
    EXPECT_EQ(count_lines(r.out) - 3, 4); // minus config, schema, header
    EXPECT_EQ(run_args({"sweep", "--L", "3", "--thetas", "4.0"}).code, kUsage);
}

TEST(Cli, EveryRepeatDiscardedIsANumericalFailure) {
    const auto r = run_args({"sweep", "--L", "3", "--thetas", "0.2pi", "--repeats", "1", "--meas-flip", "0.5"});
    EXPECT_EQ(r.code, kNumerical) << r.out;
}

TEST(Cli, AnalyzeTables) {
    const std::string data = temp_path("an.jsonl");
    ASSERT_EQ(run_args({"generate", "--geometry", "grid", "--L", "3", "--theta", "0.25pi", "--repeats", "300", "--out",
                        data})
                  .code,
              kOk);
    const auto r = run_args({"analyze", "--data", data, "--flip-rows", "1,2", "--flip-sites", "4", "--multiplicity",
                             "--exclude-rows", "0"});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_NE(r.out.find("\nnone,"), std::string::npos);
    EXPECT_NE(r.out.find("\nrow1,"), std::string::npos);
    EXPECT_NE(r.out.find("\nsites:4,"), std::string::npos);
    EXPECT_NE(r.out.find("# schema: mie-multiplicity/1\nk,count\n"), std::string::npos);
    EXPECT_EQ(run_args({"analyze", "--data", data}).code, kUsage);
    EXPECT_EQ(run_args({"analyze", "--data", data, "--classify", "parity"}).code, kUsage);
    std::remove(data.c_str());
    std::remove(manifest_path(data).c_str());
}

} // namespace
} // namespace mie::cli
