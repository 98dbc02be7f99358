#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hmdiff/report.hpp"
#include "json.hpp"

using namespace hmdiff;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = HMDIFF_SOURCE_DIR;

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "hmdiff");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hmdiff_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> names;
    if (!fs::exists(dir)) return names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

const std::string kOracleConfig = (kSource / "tests/fixtures/oracle4/config.json").string();
const std::string kGoldenConfig = (kSource / "tests/fixtures/golden/config.json").string();

}  // namespace

TEST_CASE("validate succeeds on the oracle fixture") {
    const auto out = scratch("validate");
    const auto r = run({"--config", kOracleConfig, "--out", out.string(), "validate"});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(slurp(out / "validation.json"));
    CHECK(j["status"] == "ok");
    CHECK(j["num_samples"] == 4);
    CHECK(j["inputs"].size() == 5);
}

TEST_CASE("validate reports coverage mismatches with exit 2") {
    const auto dir = scratch("truncated");
    for (const auto& e : fs::directory_iterator(kSource / "tests/fixtures/oracle4")) {
        fs::copy_file(e.path(), dir / e.path().filename());
    }
    write_file(dir / "predictions_base.csv", "sample_id,label\ns1,0\ns2,1\ns3,0\n");
    const auto r = run({"--config", (dir / "config.json").string(), "--out", (dir / "out").string(), "validate"});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("CoverageMismatch") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "out/validation.json"));
    CHECK(j["status"] == "failed");
    CHECK(j["error_code"] == "CoverageMismatch");
}

TEST_CASE("accuracy and oracle teaming on the hand fixture") {
    const auto out = scratch("oracle4");
    REQUIRE(run({"--config", kOracleConfig, "--out", out.string(), "report", "accuracy"}).code == kExitOk);
    const std::string acc = slurp(out / "accuracy.csv");
    CHECK(acc.find("perfect,machine,hard,1,4") != std::string::npos);
    CHECK(acc.find("base,machine,hard,0.5,4") != std::string::npos);

    const auto team_out = scratch("oracle4_team");
    REQUIRE(run({"--config", kOracleConfig, "--out", team_out.string(), "report", "teaming", "--mode", "oracle"}).code ==
            kExitOk);
    const std::string matrix = slurp(team_out / "teaming_matrix.csv");
    CHECK(matrix.find("base,human,partner,0.5,0.5,0.75,0.25,") != std::string::npos);
}

TEST_CASE("report all is deterministic and matches the stored golden outputs") {
    const auto a = scratch("golden_a");
    const auto b = scratch("golden_b");
    REQUIRE(run({"--config", kGoldenConfig, "--seed", "11", "--out", a.string(), "report", "all"}).code == kExitOk);
    REQUIRE(run({"--config", kGoldenConfig, "--seed", "11", "--out", b.string(), "report", "all"}).code == kExitOk);
    const auto names = listing(a);
    CHECK(names == listing(b));
    CHECK(names == listing(kSource / "tests/golden"));
    for (const auto& name : names) {
        INFO(name);
        CHECK(slurp(a / name) == slurp(b / name));
        CHECK(slurp(a / name) == slurp(kSource / "tests/golden" / name));
    }
}

TEST_CASE("synth gen writes a loadable population") {
    const auto dir = scratch("synth");
    write_file(dir / "pop.json",
               R"({"num_classes": 3, "n_samples": 10, "seed": 5, "machines": [{"id": "m", "confusion": 1.0}], "humans": [{"id": "h", "confusion": 1.0}]})");
    const auto r = run({"--out", (dir / "gen").string(), "synth", "gen", (dir / "pop.json").string()});
    REQUIRE(r.code == kExitOk);
    const auto out = scratch("synth_acc");
    REQUIRE(run({"--config", (dir / "gen/config.json").string(), "--out", out.string(), "report", "accuracy"}).code ==
            kExitOk);
    const std::string acc = slurp(out / "accuracy.csv");
    CHECK(acc.find("m,machine,soft,1,10") != std::string::npos);
    CHECK(acc.find("h,human,hard,1,10") != std::string::npos);
}

TEST_CASE("error exit codes") {
    const auto dir = scratch("errors");
    write_file(dir / "bad.json", R"({"num_classes": 3, "n_samples": -1})");
    CHECK(run({"--out", (dir / "x").string(), "synth", "gen", (dir / "bad.json").string()}).code == kExitValidation);
    CHECK(run({"--config", (dir / "missing.json").string(), "--out", (dir / "y").string(), "report", "all"}).code ==
          kExitIo);
    CHECK(run({"report", "nonsense"}).code == kExitValidation);
    CHECK(run({"--config", kOracleConfig, "--out", (dir / "z").string(), "report", "all", "--eta", "2"}).code ==
          kExitValidation);
    CHECK(run({"--version"}).code == kExitOk);
}

TEST_CASE("a failing computation leaves the output directory untouched") {
    const auto dir = scratch("atomic");
    const auto out = dir / "out";
    const auto r = run({"--config", kGoldenConfig, "--out", out.string(), "report", "difficulty", "--bins",
                        "machine_confidence=uniform:0.5:1:5"});
    CHECK(r.code == kExitComputation);
    CHECK(listing(out).empty());
}
