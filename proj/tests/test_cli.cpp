#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hgb/cli.hpp"

using namespace hgb;
using Json = nlohmann::ordered_json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hgb_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("hgb_test_" + name);
  std::ofstream(path) << content;
  return path;
}

std::string data(const std::string& name) { return std::string(HGB_TEST_DATA) + "/" + name; }

}  // namespace

TEST(Classify, ReportsCriteriaAndSystem) {
  Outcome r = invoke({"classify", "--alpha", "1/5,4/5", "--beta", "0,1/2"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["command"], "classify");
  EXPECT_EQ(j["system"]["kind"], "regular");
  EXPECT_EQ(j["system"]["conductor"], 10);
  EXPECT_EQ(j["criteria"]["real_structure"], true);
  EXPECT_EQ(j["criteria"]["rational_structure"], false);
  EXPECT_EQ(j["criteria"]["fixed_field_degree"], 2);
  EXPECT_EQ(j["status"], "ok");
}

TEST(Classify, FullOrbitsGiveRationalStructure) {
  Outcome r = invoke({"classify", "--alpha", "0,1/3,2/3", "--beta", "1/2"});
  ASSERT_EQ(r.code, 0);
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["criteria"]["real_structure"], true);
  EXPECT_EQ(j["criteria"]["rational_structure"], true);
  EXPECT_EQ(j["criteria"]["phi_decomposition"]["r_list"], Json::array({3}));
}

TEST(Json, OutputRoundTripsByteForByte) {
  for (const char* cmd : {"classify", "monodromy", "descend", "perverse", "all"}) {
    Outcome r = invoke({cmd, "--alpha", "1/7,2/7,4/7", "--beta", "0,0,0"});
    ASSERT_EQ(r.code, 0) << cmd << r.err;
    EXPECT_EQ(Json::parse(r.out).dump(2) + "\n", r.out) << cmd;
  }
}

TEST(Json, MonodromyStageInvariants) {
  Json j = Json::parse(invoke({"monodromy", "--alpha", "1/3,2/3", "--beta", "1/4,3/4"}).out);
  EXPECT_EQ(j["monodromy"]["rank_M1_minus_I"], 1);
  EXPECT_EQ(j["monodromy"]["product_is_identity"], true);
  EXPECT_EQ(j["monodromy"]["entries_rational"], true);
}

TEST(Descend, ScrambledModelIsRecovered) {
  Outcome r = invoke({"descend", "--alpha", "1/5,4/5", "--beta", "0,1/2", "--scramble", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["descent"]["verified"], true);
}

TEST(Descend, UnreachableFieldExitsWithObstruction) {
  Outcome r = invoke({"descend", "--alpha", "1/5", "--beta", "0", "--field", "rationals"});
  EXPECT_EQ(r.code, 1);
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["descent"]["status"], "obstructed");
  EXPECT_NE(j["descent"]["reason"].get<std::string>().find("1/5"), std::string::npos);
  EXPECT_EQ(j["status"], "negative");
}

TEST(Perverse, AllDiagramsHaveStructure) {
  Outcome r = invoke({"perverse", "--alpha", "1/5,4/5", "--beta", "0,1/2"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(r.out);
  std::size_t count = 0;
  for (const auto& diag : j["perverse"]) {
    EXPECT_EQ(diag["axioms"], true) << diag.dump();
    EXPECT_EQ(diag["K_structure"], true) << diag.dump();
    ++count;
  }
  EXPECT_EQ(count, 9u);
}

TEST(Stokes, WritesGeometryCsv) {
  auto csv = std::filesystem::temp_directory_path() / "hgb_test_geometry.csv";
  std::filesystem::remove(csv);
  Outcome r = invoke({"stokes", "--alpha", "0,1/2", "--beta", "", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "kind,name,start,end");
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(rest.find("S_plus"), std::string::npos);
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["stokes"]["verification"]["ok"], true);
}

TEST(Stokes, ApproximateExponentsAreAccepted) {
  Outcome r = invoke({"stokes", "--alpha-approx", "0.2,0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(Json::parse(r.out)["warnings"].empty());
}

TEST(ExitCodes, UsageErrors) {
  EXPECT_EQ(invoke({"classify", "--alpha", "0.5"}).code, 2);
  EXPECT_EQ(invoke({"classify", "--alpha", "1/2", "--bogus"}).code, 2);
  EXPECT_EQ(invoke({"classify"}).code, 2);
  EXPECT_EQ(invoke({"stokes", "--alpha", "0,1/2", "--precision", "20"}).code, 2);
  EXPECT_EQ(invoke({"stokes", "--alpha", "0,1/2", "--tol", "0"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_NE(invoke({"classify", "--alpha", "0.5"}).err.find("malformed"), std::string::npos);
}

TEST(ExitCodes, NegativeAndNumericOutcomes) {
  EXPECT_EQ(invoke({"stokes", "--alpha", "1/2", "--beta", "0"}).code, 1);
  EXPECT_EQ(invoke({"stokes", "--alpha", "0,0", "--beta", ""}).code, 3);
  EXPECT_EQ(invoke({"monodromy", "--alpha", "0,1/2", "--beta", ""}).code, 1);
}

TEST(Determinism, IdenticalRunsAreByteIdentical) {
  const std::vector<std::string> args{"all", "--alpha", "1/5,4/5", "--beta", "0,1/2", "--scramble", "--seed", "3"};
  EXPECT_EQ(invoke(args).out, invoke(args).out);
  const std::vector<std::string> st{"stokes", "--alpha", "0,1/3,2/3", "--beta", "0"};
  EXPECT_EQ(invoke(st).out, invoke(st).out);
}

TEST(Markdown, RendersHeadingsAndBullets) {
  Outcome r = invoke({"classify", "--alpha", "1/2", "--beta", "0", "--format", "markdown"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# hgb report", 0), 0u);
  EXPECT_NE(r.out.find("- **"), std::string::npos);
}

TEST(Batch, CatalogueMeetsEveryExpectation) {
  Outcome r = invoke({"batch", data("catalogue.ndjson")});
  ASSERT_EQ(r.code, 0) << r.out;
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["summary"]["total"], 12);
  EXPECT_EQ(j["summary"]["passed"], 12);
}

TEST(Batch, EmptyCatalogueSucceedsWithNoRows) {
  Outcome r = invoke({"batch", temp_file("empty.ndjson", "").string()});
  EXPECT_EQ(r.code, 0);
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["summary"]["total"], 0);
}

TEST(Batch, MalformedLineBecomesErrorRow) {
  const std::string content = "{\"alpha\":\"1/2\",\"beta\":\"0\"}\nnot json\n{\"alpha\":\"1/2\",\"stages\":[\"nope\"]}\n";
  Outcome r = invoke({"batch", temp_file("bad.ndjson", content).string()});
  EXPECT_EQ(r.code, 1);
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["summary"]["passed"], 1);
  EXPECT_EQ(j["summary"]["errors"], 2);
  EXPECT_EQ(j["rows"][1]["status"], "error");
}

TEST(Batch, FailedExpectationIsReported) {
  Outcome r = invoke({"batch", temp_file("fail.ndjson", "{\"alpha\":\"1/5\",\"beta\":\"0\",\"expectations\":"
                                                          "{\"real_structure\":true}}\n")
                                   .string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.out)["rows"][0]["status"], "fail");
}

TEST(Batch, MissingCatalogueIsUsageError) {
  EXPECT_EQ(invoke({"batch", "/nonexistent/catalogue.ndjson"}).code, 2);
}

TEST(Executable, MatchesInProcessDriver) {
  const std::string cmd = std::string(HGB_CLI_PATH) + " classify --alpha 1/3,2/3 --beta 0,1/2";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_EQ(out, invoke({"classify", "--alpha", "1/3,2/3", "--beta", "0,1/2"}).out);
}
