#include "hmdiff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>

#include "json.hpp"

#include "hmdiff/error.hpp"
#include "hmdiff/io.hpp"
#include "hmdiff/random.hpp"

namespace hmdiff {

namespace {

using nlohmann::json;

constexpr double kRowTolerance = 1e-9;

[[noreturn]] void config_error(const std::string& path, const std::string& message) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + message);
}

void check_simplex(const std::vector<double>& values, std::size_t k, const std::string& path) {
    for (std::size_t r = 0; r * k < values.size(); ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double v = values[r * k + c];
            if (!(v >= 0.0 && v <= 1.0)) {
                config_error(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]", "entry outside [0,1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) {
            config_error(path + "[" + std::to_string(r) + "]", "row sums to " + format_real(sum));
        }
    }
}

void check_matrix(const std::vector<double>& m, std::size_t k, const std::string& path) {
    if (m.size() != k * k) config_error(path, "must be " + std::to_string(k) + "x" + std::to_string(k));
    check_simplex(m, k, path);
}

double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    return j.get<double>();
}

// A matrix is either a list of K rows or a single number d meaning
// symmetric_confusion(K, d).
std::vector<double> matrix_at(const json& j, std::size_t k, const std::string& path) {
    if (j.is_number()) {
        const double d = j.get<double>();
        if (!(d >= 0.0 && d <= 1.0)) config_error(path, "diagonal must be in [0,1]");
        return symmetric_confusion(k, d);
    }
    if (!j.is_array() || j.size() != k) config_error(path, "expected " + std::to_string(k) + " rows or a number");
    std::vector<double> out;
    for (std::size_t r = 0; r < k; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != k) config_error(row_path, "expected " + std::to_string(k) + " entries");
        for (std::size_t c = 0; c < k; ++c) out.push_back(number_at(j[r][c], row_path + "[" + std::to_string(c) + "]"));
    }
    return out;
}

// Inverse CDF over a confusion row with the true class listed first.
int draw_label(std::span<const double> row, int truth, double u) {
    double acc = row[static_cast<std::size_t>(truth)];
    if (u < acc) return truth;
    int last_positive = row[static_cast<std::size_t>(truth)] > 0.0 ? truth : -1;
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (static_cast<int>(c) == truth) continue;
        if (row[c] > 0.0) last_positive = static_cast<int>(c);
        acc += row[c];
        if (u < acc) return static_cast<int>(c);
    }
    return last_positive >= 0 ? last_positive : truth;
}

std::string sample_id(std::size_t i, std::size_t n) {
    const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
    std::string digits = std::to_string(i);
    return "s" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

std::vector<double> symmetric_confusion(std::size_t num_classes, double diagonal) {
    std::vector<double> m(num_classes * num_classes, (1.0 - diagonal) / static_cast<double>(num_classes - 1));
    for (std::size_t c = 0; c < num_classes; ++c) m[c * num_classes + c] = diagonal;
    return m;
}

void PopulationConfig::validate() const {
    const std::size_t k = num_classes();
    if (k < 2) config_error("class_names", "need at least 2 classes");
    if (n_samples < 1) config_error("n_samples", "must be >= 1");
    if (class_prior.size() != k) config_error("class_prior", "must have K entries");
    check_simplex(class_prior, k, "class_prior");
    if (shared_confusion) check_matrix(*shared_confusion, k, "shared_confusion");
    if (machines.empty() && humans.empty()) config_error("machines", "need at least one machine or human");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < machines.size(); ++i) {
        const auto& m = machines[i];
        const std::string path = "machines[" + std::to_string(i) + "]";
        if (m.id.empty()) config_error(path + ".id", "must be nonempty");
        if (!(m.shared_error_weight >= 0.0 && m.shared_error_weight <= 1.0)) {
            config_error(path + ".shared_error_weight", "must be in [0,1]");
        }
        if (!(m.confidence_sharpness > 0.0)) config_error(path + ".confidence_sharpness", "must be > 0");
        check_matrix(m.confusion, k, path + ".confusion");
        ids.push_back(m.id);
    }
    for (std::size_t i = 0; i < humans.size(); ++i) {
        const auto& h = humans[i];
        const std::string path = "humans[" + std::to_string(i) + "]";
        if (h.id.empty()) config_error(path + ".id", "must be nonempty");
        check_matrix(h.confusion, k, path + ".confusion");
        if (h.time_model && (!(h.time_model->mean_easy >= 0.0) || !(h.time_model->mean_hard >= 0.0))) {
            config_error(path + ".time_model", "means must be >= 0");
        }
        ids.push_back(h.id);
    }
    std::sort(ids.begin(), ids.end());
    if (auto it = std::adjacent_find(ids.begin(), ids.end()); it != ids.end()) {
        config_error("machines/humans", "id '" + *it + "' used twice");
    }
}

PopulationConfig parse_population_config(std::string_view json_text, std::string_view source) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string(source) + ": " + e.what());
    }
    if (!j.is_object()) config_error(std::string(source), "top level must be an object");

    PopulationConfig cfg;
    if (j.contains("class_names")) {
        if (!j["class_names"].is_array()) config_error("class_names", "expected a list of strings");
        for (const auto& name : j["class_names"]) {
            if (!name.is_string()) config_error("class_names", "expected a list of strings");
            cfg.class_names.push_back(name.get<std::string>());
        }
    } else if (j.contains("num_classes")) {
        const double k = number_at(j["num_classes"], "num_classes");
        if (k < 2 || k != std::floor(k)) config_error("num_classes", "must be an integer >= 2");
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) cfg.class_names.push_back("class_" + std::to_string(c));
    } else {
        config_error("class_names", "either class_names or num_classes is required");
    }
    const std::size_t k = cfg.class_names.size();
    if (k < 2) config_error("class_names", "need at least 2 classes");

    if (!j.contains("n_samples")) config_error("n_samples", "required");
    const double n = number_at(j["n_samples"], "n_samples");
    if (n < 1 || n != std::floor(n)) config_error("n_samples", "must be an integer >= 1");
    cfg.n_samples = static_cast<std::size_t>(n);

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
            config_error("seed", "must be a nonnegative integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    if (j.contains("class_prior")) {
        if (!j["class_prior"].is_array()) config_error("class_prior", "expected a list");
        for (std::size_t c = 0; c < j["class_prior"].size(); ++c) {
            cfg.class_prior.push_back(number_at(j["class_prior"][c], "class_prior[" + std::to_string(c) + "]"));
        }
    } else {
        cfg.class_prior.assign(k, 1.0 / static_cast<double>(k));
    }
    if (j.contains("shared_confusion")) cfg.shared_confusion = matrix_at(j["shared_confusion"], k, "shared_confusion");

    if (j.contains("machines")) {
        if (!j["machines"].is_array()) config_error("machines", "expected a list");
        for (std::size_t i = 0; i < j["machines"].size(); ++i) {
            const json& m = j["machines"][i];
            const std::string path = "machines[" + std::to_string(i) + "]";
            if (!m.is_object()) config_error(path, "expected an object");
            MachineSpec spec;
            if (!m.contains("id") || !m["id"].is_string()) config_error(path + ".id", "required string");
            spec.id = m["id"].get<std::string>();
            if (!m.contains("confusion")) config_error(path + ".confusion", "required");
            spec.confusion = matrix_at(m["confusion"], k, path + ".confusion");
            if (m.contains("shared_error_weight")) {
                spec.shared_error_weight = number_at(m["shared_error_weight"], path + ".shared_error_weight");
            }
            if (m.contains("confidence_sharpness")) {
                spec.confidence_sharpness = number_at(m["confidence_sharpness"], path + ".confidence_sharpness");
            }
            if (m.contains("kind")) {
                const std::string kind = m["kind"].is_string() ? m["kind"].get<std::string>() : "";
                if (kind == "soft") spec.kind = PredictionKind::Soft;
                else if (kind == "hard") spec.kind = PredictionKind::Hard;
                else config_error(path + ".kind", "must be soft|hard");
            }
            if (m.contains("group")) {
                if (!m["group"].is_string()) config_error(path + ".group", "expected a string");
                spec.group = m["group"].get<std::string>();
            }
            cfg.machines.push_back(std::move(spec));
        }
    }
    if (j.contains("humans")) {
        if (!j["humans"].is_array()) config_error("humans", "expected a list");
        for (std::size_t i = 0; i < j["humans"].size(); ++i) {
            const json& h = j["humans"][i];
            const std::string path = "humans[" + std::to_string(i) + "]";
            if (!h.is_object()) config_error(path, "expected an object");
            HumanSpec spec;
            if (!h.contains("id") || !h["id"].is_string()) config_error(path + ".id", "required string");
            spec.id = h["id"].get<std::string>();
            if (!h.contains("confusion")) config_error(path + ".confusion", "required");
            spec.confusion = matrix_at(h["confusion"], k, path + ".confusion");
            if (h.contains("time_model")) {
                const json& t = h["time_model"];
                if (!t.is_object() || !t.contains("mean_easy") || !t.contains("mean_hard")) {
                    config_error(path + ".time_model", "needs mean_easy and mean_hard");
                }
                spec.time_model = TimeModel{number_at(t["mean_easy"], path + ".time_model.mean_easy"),
                                            number_at(t["mean_hard"], path + ".time_model.mean_hard")};
            }
            cfg.humans.push_back(std::move(spec));
        }
    }
    cfg.validate();
    return cfg;
}

PopulationConfig load_population_config(const std::filesystem::path& path) {
    return parse_population_config(read_file(path), path.string());
}

EvalFrame generate(const PopulationConfig& config) {
    config.validate();
    const std::size_t k = config.num_classes();
    const std::size_t n = config.n_samples;

    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = sample_id(i, n);

    RandomStream truth_rng(config.seed, "truth");
    RandomStream shared_rng(config.seed, "shared");
    std::vector<int> truth(n);
    std::vector<double> shared_u(n);
    for (std::size_t i = 0; i < n; ++i) truth[i] = static_cast<int>(truth_rng.categorical(config.class_prior));
    for (std::size_t i = 0; i < n; ++i) shared_u[i] = shared_rng.uniform();

    auto row = [k](const std::vector<double>& m, int y) {
        return std::span<const double>(m).subspan(static_cast<std::size_t>(y) * k, k);
    };

    std::vector<std::uint8_t> hard(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<std::size_t>(truth[i]);
        double reference = 1.0;
        if (config.shared_confusion) {
            reference = (*config.shared_confusion)[y * k + y];
        } else if (!config.machines.empty()) {
            reference = 0.0;
            for (const auto& m : config.machines) reference += m.confusion[y * k + y];
            reference /= static_cast<double>(config.machines.size());
        }
        hard[i] = shared_u[i] >= reference;
    }

    std::vector<PredictionSet> machines;
    for (const auto& spec : config.machines) {
        RandomStream rng(config.seed, "machine:" + spec.id);
        const std::vector<double>& shared = config.shared_confusion ? *config.shared_confusion : spec.confusion;
        std::vector<std::pair<std::string, int>> hard_rows;
        std::vector<std::pair<std::string, std::vector<double>>> soft_rows;
        for (std::size_t i = 0; i < n; ++i) {
            const double mix = rng.uniform();
            const double u_own = rng.uniform();
            const double v = rng.uniform();
            const int label = mix < spec.shared_error_weight ? draw_label(row(shared, truth[i]), truth[i], shared_u[i])
                                                             : draw_label(row(spec.confusion, truth[i]), truth[i], u_own);
            if (spec.kind == PredictionKind::Hard) {
                hard_rows.emplace_back(ids[i], label);
                continue;
            }
            const double s = spec.confidence_sharpness;
            double g = label == truth[i] ? std::pow(v, 1.0 / s) : std::pow(v, s);
            g = std::clamp(g, 1e-6, 1.0);
            const double kd = static_cast<double>(k);
            const double c = 1.0 / kd + (1.0 - 1.0 / kd) * g;
            std::vector<double> probs(k, (1.0 - c) / (kd - 1.0));
            probs[static_cast<std::size_t>(label)] = c;
            soft_rows.emplace_back(ids[i], std::move(probs));
        }
        PredictionSet set = spec.kind == PredictionKind::Hard
                                ? PredictionSet::hard(spec.id, k, std::move(hard_rows), "synth")
                                : PredictionSet::soft(spec.id, k, std::move(soft_rows), "synth");
        set.group = spec.group;
        machines.push_back(std::move(set));
    }

    std::vector<AnnotationSet> humans;
    for (const auto& spec : config.humans) {
        RandomStream rng(config.seed, "human:" + spec.id);
        std::vector<AnnotationSet::Row> rows;
        rows.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            const double w = rng.uniform();
            AnnotationSet::Row r{ids[i], draw_label(row(spec.confusion, truth[i]), truth[i], u), std::nullopt};
            if (spec.time_model) {
                const double mean = hard[i] ? spec.time_model->mean_hard : spec.time_model->mean_easy;
                r.time_seconds = -mean * std::log1p(-w);
            }
            rows.push_back(std::move(r));
        }
        humans.push_back(AnnotationSet::make(spec.id, k, std::move(rows), "synth"));
    }

    std::vector<std::pair<std::string, int>> truth_rows;
    for (std::size_t i = 0; i < n; ++i) truth_rows.emplace_back(ids[i], truth[i]);
    return build_frame(LabelTable::make(std::move(truth_rows), k, "synth truth"), std::move(machines),
                       std::move(humans), LabelSpace(config.class_names));
}

std::vector<double> expected_confusion(const PopulationConfig& config, std::string_view classifier_id) {
    for (const auto& m : config.machines) {
        if (m.id != classifier_id) continue;
        if (!config.shared_confusion) return m.confusion;
        std::vector<double> out(m.confusion.size());
        const double rho = m.shared_error_weight;
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = rho * (*config.shared_confusion)[c] + (1.0 - rho) * m.confusion[c];
        }
        return out;
    }
    for (const auto& h : config.humans) {
        if (h.id == classifier_id) return h.confusion;
    }
    throw Error(ErrorCode::UnknownId, "no classifier '" + std::string(classifier_id) + "' in population config");
}

std::vector<std::string> write_frame_files(const EvalFrame& frame, const std::filesystem::path& out_dir) {
    std::map<std::string, std::string> files;
    std::vector<std::string> order{"classes.txt", "truth.csv"};
    files["classes.txt"] = format_label_space(frame.label_space());
    LabelTable truth{frame.sample_ids(), std::vector<int>(frame.truth().begin(), frame.truth().end())};
    files["truth.csv"] = format_truth(truth);

    json run;
    run["classes"] = "classes.txt";
    run["truth"] = "truth.csv";
    run["predictions"] = json::array();
    run["annotations"] = json::array();
    for (const auto& m : frame.machines()) {
        const std::string name = "predictions_" + m.classifier_id + ".csv";
        files[name] = format_predictions(m);
        order.push_back(name);
        json entry{{"path", name}, {"id", m.classifier_id}};
        if (!m.group.empty()) entry["group"] = m.group;
        run["predictions"].push_back(std::move(entry));
    }
    for (const auto& h : frame.humans()) {
        const std::string name = "annotations_" + h.annotator_id + ".csv";
        files[name] = format_annotations(h);
        order.push_back(name);
        run["annotations"].push_back(json{{"path", name}, {"id", h.annotator_id}});
    }
    files["config.json"] = run.dump(2) + "\n";
    order.push_back("config.json");
    write_files_atomic(out_dir, files);
    return order;
}

}  // namespace hmdiff
