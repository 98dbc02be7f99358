#include <algorithm>
#include <charconv>
#include <cmath>

#include "hmdiff/digest.hpp"
#include "hmdiff/error.hpp"
#include "hmdiff/report.hpp"
#include "json.hpp"

namespace hmdiff {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(std::string_view source, const std::string& field, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, std::string(source) + ": " + field + ": " + what);
}

double parse_real(std::string_view text, std::string_view what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidConfig, "bad number '" + std::string(text) + "' in " + std::string(what));
    }
    return v;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::InvalidConfig, "bad count '" + std::string(text) + "' in " + std::string(what));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

std::string string_at(const json& j, const std::string& key, std::string_view source) {
    if (!j.contains(key)) config_error(source, key, "missing");
    if (!j[key].is_string()) config_error(source, key, "expected a string");
    return j[key].get<std::string>();
}

double real_at(const json& j, const std::string& key, std::string_view source) {
    if (!j[key].is_number()) config_error(source, key, "expected a number");
    return j[key].get<double>();
}

}  // namespace

std::string_view to_string(OlsPoints points) {
    return points == OlsPoints::PerClassifier ? "per_classifier" : "bin_means";
}

OlsPoints parse_ols_points(std::string_view text) {
    if (text == "per_classifier") return OlsPoints::PerClassifier;
    if (text == "bin_means") return OlsPoints::BinMeans;
    throw Error(ErrorCode::InvalidConfig, "ols points must be per_classifier|bin_means, got '" + std::string(text) + "'");
}

DifficultyMetric parse_difficulty_metric(std::string_view text) {
    for (auto m : {DifficultyMetric::MachineConfidence, DifficultyMetric::MachineAgreement,
                   DifficultyMetric::HumanAgreement, DifficultyMetric::HumanEntropy,
                   DifficultyMetric::AnnotationTime}) {
        if (to_string(m) == text) return m;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown difficulty metric '" + std::string(text) + "'");
}

std::vector<double> parse_real_list(std::string_view text) {
    std::vector<double> out;
    for (auto part : split(text, ',')) out.push_back(parse_real(part, "list"));
    return out;
}

BinSpec parse_bin_spec(std::string_view text) {
    const auto parts = split(text, ':');
    const std::string_view kind = parts[0];
    if (kind == "levels" && parts.size() == 1) {
        BinSpec s = BinSpec::levels(1);
        s.count = 0;  // resolved against the group size
        return s;
    }
    if (kind == "uniform" && parts.size() == 4) {
        return BinSpec::uniform(parse_real(parts[1], "bins"), parse_real(parts[2], "bins"),
                                parse_count(parts[3], "bins"));
    }
    if (kind == "quantiles" && parts.size() == 2) return BinSpec::quantiles(parse_count(parts[1], "bins"));
    if (kind == "edges" && parts.size() == 2) return BinSpec::explicit_edges(parse_real_list(parts[1]));
    throw Error(ErrorCode::InvalidConfig,
                "bin spec must be uniform:lo:hi:count, quantiles:n, edges:a,b,... or levels; got '" +
                    std::string(text) + "'");
}

std::string to_string(const BinSpec& spec) {
    switch (spec.kind) {
        case BinSpec::Kind::Levels: return spec.count == 0 ? "levels" : "levels:" + std::to_string(spec.count);
        case BinSpec::Kind::Uniform:
            return "uniform:" + format_real(spec.lo) + ":" + format_real(spec.hi) + ":" + std::to_string(spec.count);
        case BinSpec::Kind::Quantiles: return "quantiles:" + std::to_string(spec.count);
        case BinSpec::Kind::Edges: {
            std::string s = "edges:";
            for (std::size_t i = 0; i < spec.edges.size(); ++i) s += (i ? "," : "") + format_real(spec.edges[i]);
            return s;
        }
    }
    return "";
}

void RunSettings::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
    if (eta_grid.empty()) throw Error(ErrorCode::InvalidConfig, "eta grid is empty");
    for (double e : eta_grid) {
        if (!(e >= 0.0 && e <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eta grid values must lie in [0,1]");
    }
    if (!std::is_sorted(eta_grid.begin(), eta_grid.end()) ||
        std::adjacent_find(eta_grid.begin(), eta_grid.end()) != eta_grid.end()) {
        throw Error(ErrorCode::InvalidConfig, "eta grid must be strictly ascending");
    }
    if (eta && !(*eta >= 0.0 && *eta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eta must lie in [0,1]");
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir, std::string_view source) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string(source) + ": " + e.what());
    }
    if (!j.is_object()) config_error(source, "<root>", "expected an object");

    RunConfig cfg;
    cfg.classes = resolve(base_dir, string_at(j, "classes", source));
    cfg.truth = resolve(base_dir, string_at(j, "truth", source));

    auto entries = [&](const char* key) {
        if (!j.contains(key)) return json::array();
        if (!j[key].is_array()) config_error(source, key, "expected an array");
        return j[key];
    };
    const json preds = entries("predictions");
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string field = "predictions[" + std::to_string(i) + "]";
        const json& e = preds[i];
        PredictionInput in;
        if (e.is_string()) {
            in.path = resolve(base_dir, e.get<std::string>());
        } else if (e.is_object()) {
            in.path = resolve(base_dir, string_at(e, "path", std::string(source) + ": " + field));
            if (e.contains("id")) in.id = string_at(e, "id", std::string(source) + ": " + field);
            if (e.contains("group")) in.group = string_at(e, "group", std::string(source) + ": " + field);
        } else {
            config_error(source, field, "expected a path or an object");
        }
        cfg.predictions.push_back(std::move(in));
    }
    const json anns = entries("annotations");
    for (std::size_t i = 0; i < anns.size(); ++i) {
        const std::string field = "annotations[" + std::to_string(i) + "]";
        const json& e = anns[i];
        AnnotationInput in;
        if (e.is_string()) {
            in.path = resolve(base_dir, e.get<std::string>());
        } else if (e.is_object()) {
            in.path = resolve(base_dir, string_at(e, "path", std::string(source) + ": " + field));
            if (e.contains("id")) in.id = string_at(e, "id", std::string(source) + ": " + field);
        } else {
            config_error(source, field, "expected a path or an object");
        }
        cfg.annotations.push_back(std::move(in));
    }

    RunSettings& s = cfg.settings;
    try {
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned()) config_error(source, "seed", "expected a non-negative integer");
            s.seed = j["seed"].get<std::uint64_t>();
        }
        if (j.contains("alpha")) s.alpha = real_at(j, "alpha", source);
        if (j.contains("eta_grid")) {
            if (!j["eta_grid"].is_array()) config_error(source, "eta_grid", "expected an array");
            s.eta_grid.clear();
            for (const auto& v : j["eta_grid"]) {
                if (!v.is_number()) config_error(source, "eta_grid", "expected numbers");
                s.eta_grid.push_back(v.get<double>());
            }
        }
        if (j.contains("eta") && !j["eta"].is_null()) s.eta = real_at(j, "eta", source);
        if (j.contains("mode")) s.mode = parse_teaming_mode(string_at(j, "mode", source));
        if (j.contains("error_filter")) s.error_filter = parse_error_filter(string_at(j, "error_filter", source));
        if (j.contains("sd_norm")) s.sd_norm = parse_sd_norm(string_at(j, "sd_norm", source));
        if (j.contains("pooling")) s.pooling = parse_pooling(string_at(j, "pooling", source));
        if (j.contains("tie")) s.tie = parse_tie_rule(string_at(j, "tie", source));
        if (j.contains("ols_points")) s.ols_points = parse_ols_points(string_at(j, "ols_points", source));
        if (j.contains("threshold_partner")) s.threshold_partner = string_at(j, "threshold_partner", source);
        if (j.contains("bins")) {
            if (!j["bins"].is_object()) config_error(source, "bins", "expected an object");
            for (const auto& [metric, spec] : j["bins"].items()) {
                if (!spec.is_string()) config_error(source, "bins." + metric, "expected a bin spec string");
                s.bins[parse_difficulty_metric(metric)] = parse_bin_spec(spec.get<std::string>());
            }
        }
        if (j.contains("quadrant_thresholds")) {
            const json& q = j["quadrant_thresholds"];
            if (!q.is_object()) config_error(source, "quadrant_thresholds", "expected an object");
            if (q.contains("machine")) s.quadrant_thresholds.machine = real_at(q, "machine", source);
            if (q.contains("human")) s.quadrant_thresholds.human = real_at(q, "human", source);
        }
        s.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        throw Error(ErrorCode::InvalidConfig, std::string(source) + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    return parse_run_config(read_file(path), base, path.string());
}

LoadedInputs load_inputs(const RunConfig& config) {
    std::vector<InputFile> files;
    auto record = [&](std::string role, const fs::path& path, std::string id, std::size_t rows,
                      const std::string& bytes) {
        files.push_back(InputFile{std::move(role), path.filename().string(), std::move(id), rows, sha256_hex(bytes)});
    };

    const std::string classes_text = read_file(config.classes);
    LabelSpace ls = parse_label_space_text(classes_text, config.classes.string());
    record("classes", config.classes, "", ls.size(), classes_text);

    const std::string truth_text = read_file(config.truth);
    LabelTable truth = parse_truth_text(truth_text, ls, config.truth.string());
    record("truth", config.truth, "", truth.sample_ids.size(), truth_text);

    std::vector<PredictionSet> machines;
    for (const auto& in : config.predictions) {
        const std::string text = read_file(in.path);
        const std::string id = in.id ? *in.id : id_from_filename(in.path, "predictions_");
        PredictionSet set = parse_predictions_text(text, ls, id, in.path.string());
        set.group = in.group;
        record("predictions", in.path, set.classifier_id, set.size(), text);
        machines.push_back(std::move(set));
    }
    std::vector<AnnotationSet> humans;
    for (const auto& in : config.annotations) {
        const std::string text = read_file(in.path);
        const std::string id = in.id ? *in.id : id_from_filename(in.path, "annotations_");
        AnnotationSet set = parse_annotations_text(text, ls, id, in.path.string());
        record("annotations", in.path, set.annotator_id, set.size(), text);
        humans.push_back(std::move(set));
    }
    if (machines.empty() && humans.empty()) {
        throw Error(ErrorCode::InvalidConfig, "config lists no predictions or annotations");
    }
    EvalFrame frame = build_frame(std::move(truth), std::move(machines), std::move(humans), std::move(ls));
    return LoadedInputs{std::move(frame), std::move(files)};
}

}  // namespace hmdiff
