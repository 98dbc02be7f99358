#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hmdiff/error.hpp"
#include "hmdiff/metrics.hpp"
#include "hmdiff/synth.hpp"

using namespace hmdiff;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error_message(const std::string& json) {
    try {
        parse_population_config(json);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
        return e.what();
    }
    FAIL("expected InvalidConfig");
    return "";
}

PopulationConfig small(std::size_t k, std::size_t n, std::uint64_t seed) {
    PopulationConfig cfg;
    for (std::size_t c = 0; c < k; ++c) cfg.class_names.push_back("c" + std::to_string(c));
    cfg.n_samples = n;
    cfg.class_prior.assign(k, 1.0 / static_cast<double>(k));
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("identity confusions give perfect classifiers") {
    auto cfg = small(4, 10, 1);
    cfg.machines.push_back({"m", 0.0, symmetric_confusion(4, 1.0), 1.0, PredictionKind::Soft, ""});
    cfg.humans.push_back({"h", symmetric_confusion(4, 1.0), std::nullopt});
    const auto f = generate(cfg);
    CHECK(f.size() == 10);
    CHECK(accuracy(f, "m") == 1.0);
    CHECK(accuracy(f, "h") == 1.0);
}

TEST_CASE("rho = 1 with a shared confusion gives identical labels") {
    auto cfg = small(5, 2000, 7);
    cfg.shared_confusion = symmetric_confusion(5, 0.6);
    cfg.machines.push_back({"a", 1.0, symmetric_confusion(5, 0.9), 1.0, PredictionKind::Soft, ""});
    cfg.machines.push_back({"b", 1.0, symmetric_confusion(5, 0.3), 2.0, PredictionKind::Hard, ""});
    const auto f = generate(cfg);
    const auto a = f.view("a");
    const auto b = f.view("b");
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(a.labels[i] == b.labels[i]);
}

TEST_CASE("soft rows: argmax is the drawn label and confidence is at least 1/K") {
    auto cfg = small(6, 3000, 11);
    cfg.machines.push_back({"m", 0.0, symmetric_confusion(6, 0.5), 0.5, PredictionKind::Soft, ""});
    const auto f = generate(cfg);
    const auto v = f.view("m");
    for (std::size_t i = 0; i < f.size(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 6; ++c) sum += v.probs[i * 6 + c];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.confidence(i) >= 1.0 / 6.0 - 1e-12);
    }
}

TEST_CASE("empirical confusion converges to the expected mixture") {
    auto cfg = small(4, 40000, 23);
    std::vector<double> shared{0.7, 0.1, 0.1, 0.1, 0.2, 0.6, 0.1, 0.1, 0.0, 0.3, 0.7, 0.0, 0.25, 0.25, 0.0, 0.5};
    cfg.shared_confusion = shared;
    std::vector<double> own{0.9, 0.05, 0.05, 0.0, 0.0, 0.8, 0.2, 0.0, 0.1, 0.1, 0.8, 0.0, 0.0, 0.0, 0.4, 0.6};
    cfg.machines.push_back({"m", 0.35, own, 1.0, PredictionKind::Soft, ""});
    cfg.humans.push_back({"h", own, TimeModel{1.0, 2.0}});
    const auto f = generate(cfg);
    for (const char* id : {"m", "h"}) {
        const auto expected = expected_confusion(cfg, id);
        const auto got = confusion(f, f.view(id));
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(got.cell(r, c) - expected[r * 4 + c]) < 0.02);
        }
    }
    // Mixture formula by hand.
    const auto mix = expected_confusion(cfg, "m");
    for (std::size_t i = 0; i < 16; ++i) CHECK(mix[i] == doctest::Approx(0.35 * shared[i] + 0.65 * own[i]).epsilon(1e-15));
    CHECK_THROWS_AS(expected_confusion(cfg, "nobody"), Error);
}

TEST_CASE("generation is deterministic and streams are independent") {
    auto cfg = small(3, 500, 99);
    cfg.shared_confusion = symmetric_confusion(3, 0.7);
    cfg.machines.push_back({"a", 0.5, symmetric_confusion(3, 0.8), 1.0, PredictionKind::Soft, ""});
    cfg.humans.push_back({"h", symmetric_confusion(3, 0.8), TimeModel{2.0, 5.0}});
    const auto f1 = generate(cfg);
    const auto f2 = generate(cfg);
    const auto a1 = f1.view("a");
    const auto a2 = f2.view("a");
    for (std::size_t i = 0; i < f1.size() * 3; ++i) CHECK(a1.probs[i] == a2.probs[i]);

    // Adding another classifier leaves the existing draws untouched.
    auto more = cfg;
    more.machines.push_back({"b", 0.2, symmetric_confusion(3, 0.5), 1.0, PredictionKind::Hard, ""});
    more.humans.push_back({"h2", symmetric_confusion(3, 0.5), std::nullopt});
    const auto f3 = generate(more);
    const auto a3 = f3.view("a");
    for (std::size_t i = 0; i < f1.size() * 3; ++i) CHECK(a1.probs[i] == a3.probs[i]);
    CHECK(f1.human("h").times == f3.human("h").times);
    for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1.truth()[i] == f3.truth()[i]);

    auto other = cfg;
    other.seed = 100;
    const auto f4 = generate(other);
    bool differs = false;
    for (std::size_t i = 0; i < f1.size(); ++i) differs = differs || f1.truth()[i] != f4.truth()[i];
    CHECK(differs);
}

TEST_CASE("config errors name the offending field") {
    CHECK(config_error_message(R"({"n_samples": 5})").find("class_names") != std::string::npos);
    CHECK(config_error_message(R"({"num_classes": 3})").find("n_samples") != std::string::npos);
    CHECK(config_error_message(R"({"num_classes": 2, "n_samples": 4, "machines": [{"id": "m", "confusion": [[0.5, 0.4], [0, 1]]}]})")
              .find("machines[0].confusion[0]") != std::string::npos);
    CHECK(config_error_message(R"({"num_classes": 2, "n_samples": 4, "machines": [{"id": "m", "confusion": 0.9, "shared_error_weight": 2}]})")
              .find("machines[0].shared_error_weight") != std::string::npos);
    CHECK(config_error_message(R"({"num_classes": 2, "n_samples": 4, "machines": [{"id": "m", "confusion": 0.9}], "humans": [{"id": "m", "confusion": 0.9}]})")
              .find("used twice") != std::string::npos);
    CHECK(config_error_message("{not json").find("config") != std::string::npos);
}

TEST_CASE("scalar confusions expand to symmetric matrices") {
    const auto cfg = parse_population_config(
        R"({"num_classes": 4, "n_samples": 3, "shared_confusion": 0.7, "machines": [{"id": "m", "confusion": 0.4}]})");
    CHECK(cfg.class_names.size() == 4);
    REQUIRE(cfg.shared_confusion.has_value());
    CHECK((*cfg.shared_confusion)[0] == 0.7);
    CHECK((*cfg.shared_confusion)[1] == doctest::Approx(0.1));
    CHECK(cfg.machines[0].confusion == symmetric_confusion(4, 0.4));
    CHECK(cfg.class_prior == std::vector<double>(4, 0.25));
}

TEST_CASE("regenerating the golden population reproduces the fixture files") {
    const fs::path src = HMDIFF_SOURCE_DIR;
    const auto cfg = load_population_config(src / "tests/fixtures/golden_population.json");
    const fs::path out = fs::temp_directory_path() / "hmdiff_test_synth_golden";
    fs::remove_all(out);
    fs::create_directories(out);
    const auto names = write_frame_files(generate(cfg), out);
    CHECK(names.size() == 11);
    for (const auto& name : names) {
        INFO(name);
        CHECK(slurp(out / name) == slurp(src / "tests/fixtures/golden" / name));
    }
    fs::remove_all(out);
}
