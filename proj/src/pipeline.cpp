#include "forage/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "forage/csv.hpp"
#include "forage/errors.hpp"
#include "forage/foraging.hpp"
#include "forage/hash.hpp"
#include "forage/projection.hpp"
#include "forage/stats.hpp"
#include "forage/version.hpp"

namespace forage {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string out_path(const RunConfig& cfg, const char* name) {
    return (fs::path(cfg.output_dir) / name).string();
}

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw IoError("missing artifact " + path + "; run `forage " + producer + "` first");
    }
}

class Timer {
public:
    Timer(const RunConfig& cfg, const char* key) : cfg_(cfg), key_(key) {}
    ~Timer() {
        const auto elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
        try {
            const std::string path = out_path(cfg_, artifact::timings);
            json j = json::object();
            if (fs::exists(path)) {
                std::ifstream in(path, std::ios::binary);
                try {
                    in >> j;
                } catch (const json::exception&) {
                    j = json::object();
                }
            }
            j[key_] = elapsed;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            out << j.dump(2) << '\n';
        } catch (...) {
            // Timing is best-effort; never mask the command's own outcome.
        }
    }

private:
    using Clock = std::chrono::steady_clock;
    const RunConfig& cfg_;
    const char* key_;
    Clock::time_point start_ = Clock::now();
};

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string sci4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4e", v);
    return buf;
}

ordered_json regression_to_json(const RegressionResult& r, const std::string& sampler) {
    ordered_json j;
    j["sampler"] = sampler;
    j["n"] = r.n;
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    j["slope_se"] = r.slope_se;
    j["t_stat"] = r.t_stat;
    j["p_value"] = r.p_value;
    j["r_squared"] = r.r_squared;
    return j;
}

void write_json_file(const ordered_json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("short write: " + path);
}

ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    try {
        ordered_json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
}

void flatten_into(const ordered_json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            flatten_into(value, prefix.empty() ? key : prefix + "." + key, rows);
        }
    } else if (j.is_array()) {
        std::size_t idx = 0;
        for (const auto& value : j) {
            flatten_into(value, prefix + "." + std::to_string(idx), rows);
            ++idx;
        }
    } else if (j.is_string()) {
        rows.emplace_back(prefix, j.get<std::string>());
    } else if (j.is_null()) {
        rows.emplace_back(prefix, "");
    } else if (j.is_boolean()) {
        rows.emplace_back(prefix, j.get<bool>() ? "true" : "false");
    } else if (j.is_number_float()) {
        rows.emplace_back(prefix, csv::format_double(j.get<double>()));
    } else {
        rows.emplace_back(prefix, j.dump());
    }
}

// Reads the three analysis artifacts, verifies they all carry the current
// config hash, and writes the report in the configured format.
void assemble_report(const RunConfig& cfg) {
    const std::string expected = config_hash(cfg);
    const std::string reg_path = out_path(cfg, artifact::regression);
    const std::string profile_path = out_path(cfg, artifact::profile);
    const std::string patch_path = out_path(cfg, artifact::patch_leaving);
    for (const auto& path : {reg_path, profile_path, patch_path}) {
        require_artifact(path, "analyze");
        const ordered_json meta = read_meta(path);
        const std::string found = meta.at("config_hash").get<std::string>();
        if (found != expected) {
            throw ValidationError("report refuses to mix artifacts: " + path +
                                  " was produced under config hash " + found +
                                  " but the current config hashes to " + expected);
        }
    }

    const ordered_json reg = read_json_file(reg_path);
    const SwitchProfile profile = load_switch_profile_csv(profile_path);
    const PatchLeavingStat patch = load_patch_leaving_json(patch_path);

    ordered_json report;
    report["version"] = kVersion;
    report["config_hash"] = expected;
    report["config"] = config_echo(cfg);
    ordered_json inputs = ordered_json::object();
    for (const auto& path : {reg_path, profile_path, patch_path}) {
        inputs[fs::path(path).filename().string()] = {{"path", path}, {"sha256", sha256_file(path)}};
    }
    report["inputs"] = inputs;

    ordered_json reg_block = reg;
    reg_block["rendered"] = {{"slope", fixed4(reg.at("slope").get<double>())},
                             {"intercept", fixed4(reg.at("intercept").get<double>())},
                             {"p_value", sci4(reg.at("p_value").get<double>())}};
    report["regressions"] = ordered_json::object();
    report["regressions"][reg.at("sampler").get<std::string>()] = reg_block;

    ordered_json profile_rows = ordered_json::array();
    for (std::size_t slot = 0; slot < profile.mean_ratio.size(); ++slot) {
        ordered_json row;
        row["relative_position"] = profile_position(slot, profile.radius);
        if (profile.count[slot] > 0) {
            row["mean_irt_ratio"] = profile.mean_ratio[slot];
        } else {
            row["mean_irt_ratio"] = nullptr;
        }
        row["n"] = profile.count[slot];
        profile_rows.push_back(row);
    }
    report["switch_profile"] = profile_rows;
    report["patch_leaving"] = {{"mean_last_irt", patch.mean_last_irt},
                               {"mean_global_irt", patch.mean_global_irt},
                               {"ratio", patch.ratio},
                               {"paired_mean_difference", patch.paired_mean_difference}};

    const std::string report_path = out_path(cfg, report_filename(cfg).c_str());
    if (cfg.report_format == "json") {
        write_json_file(report, report_path);
    } else {
        std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + report_path);
        csv::write_row(out, {"key", "value"});
        std::vector<std::pair<std::string, std::string>> rows;
        flatten_into(report, "", rows);
        for (const auto& [key, value] : rows) csv::write_row(out, {key, value});
        if (!out) throw IoError("short write: " + report_path);
    }
    write_meta(cfg, report_path, {reg_path, profile_path, patch_path});
}

}  // namespace

std::string report_filename(const RunConfig& cfg) {
    return cfg.report_format == "csv" ? "report.csv" : "report.json";
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

void write_meta(const RunConfig& cfg, const std::string& artifact_path,
                const std::vector<std::string>& input_paths) {
    ordered_json meta;
    meta["config_hash"] = config_hash(cfg);
    ordered_json inputs = ordered_json::array();
    for (const auto& path : input_paths) {
        inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    }
    meta["inputs"] = inputs;
    meta["version"] = kVersion;
    write_json_file(meta, artifact_path + ".meta.json");
}

ordered_json read_meta(const std::string& artifact_path) {
    const std::string path = artifact_path + ".meta.json";
    if (!fs::exists(path)) throw IoError("missing provenance sidecar: " + path);
    return read_json_file(path);
}

void cmd_embed(const RunConfig& cfg) {
    validate_run_config(cfg);
    fs::create_directories(cfg.output_dir);
    Timer timer(cfg, "embed");

    const Vocabulary vocab = load_vocabulary(cfg.vocabulary_path);
    EmbeddingMatrix E;
    std::vector<std::string> meta_inputs = {cfg.vocabulary_path};
    if (!cfg.embeddings_file.empty()) {
        E = load_embeddings(cfg.embeddings_file, vocab);
        meta_inputs.push_back(cfg.embeddings_file);
    } else {
        std::vector<std::string> texts;
        texts.reserve(vocab.size());
        for (const auto& item : vocab.items) texts.push_back(compose_text(item, cfg.text_mode));
        EmbeddingServiceConfig service = cfg.service;
        if (service.api_key.empty()) {
            if (const char* key = std::getenv("EMBED_API_KEY")) service.api_key = key;
        }
        E = fetch_embeddings(service, texts, cfg.cache_dir);
    }
    const std::string path = out_path(cfg, artifact::embeddings);
    save_embeddings(E, path);
    write_meta(cfg, path, meta_inputs);
}

void cmd_simulate(const RunConfig& cfg) {
    validate_run_config(cfg);
    fs::create_directories(cfg.output_dir);
    Timer timer(cfg, "simulate");

    const Vocabulary vocab = load_vocabulary(cfg.vocabulary_path);
    const std::string embeddings_path = out_path(cfg, artifact::embeddings);
    require_artifact(embeddings_path, "embed");
    const EmbeddingMatrix E = load_embeddings(embeddings_path, vocab);
    const SimilarityMatrix S = cosine_similarity_matrix(E);
    const std::vector<WalkTrace> traces = simulate_walks(S, vocab, cfg.sampler);
    const std::string path = out_path(cfg, artifact::traces);
    save_traces(traces, path);
    write_meta(cfg, path, {cfg.vocabulary_path, embeddings_path});
}

void cmd_analyze(const RunConfig& cfg) {
    validate_run_config(cfg);
    fs::create_directories(cfg.output_dir);
    Timer timer(cfg, "analyze");

    const Vocabulary vocab = load_vocabulary(cfg.vocabulary_path);
    const std::string traces_path = out_path(cfg, artifact::traces);
    require_artifact(traces_path, "simulate");
    const std::vector<WalkTrace> traces = load_traces(traces_path);

    std::vector<FluencyTrace> fts;
    std::vector<SwitchAnnotation> anns;
    fts.reserve(traces.size());
    anns.reserve(traces.size());
    for (const auto& t : traces) {
        fts.push_back(fluency_trace(t));
        anns.push_back(detect_switches(fts.back(), vocab));
    }

    SwitchProfile profile;
    try {
        profile = switch_profile(fts, anns, cfg.window);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(e.what()) +
                              " (every unique sequence stayed in one category; widen the "
                              "vocabulary, raise the temperature, or lengthen the walks)");
    }
    const std::string profile_path = out_path(cfg, artifact::profile);
    save_switch_profile_csv(profile, profile_path);
    write_meta(cfg, profile_path, {traces_path});

    const PatchLeavingStat patch = patch_leaving_stat(fts, anns);
    const std::string patch_path = out_path(cfg, artifact::patch_leaving);
    save_patch_leaving_json(patch, patch_path);
    write_meta(cfg, patch_path, {traces_path});

    const DeviationData dev = deviation_points(fts, anns);
    const std::string dev_path = out_path(cfg, artifact::deviation);
    save_deviation_csv(dev, dev_path);
    write_meta(cfg, dev_path, {traces_path});

    std::vector<std::pair<double, double>> points;
    points.reserve(dev.points.size());
    for (const auto& pt : dev.points) {
        points.emplace_back(static_cast<double>(pt.x_unique), pt.y_abs_dev);
    }
    const RegressionResult reg = ols_regression(points);
    const std::string reg_path = out_path(cfg, artifact::regression);
    ordered_json reg_json = regression_to_json(reg, to_string(cfg.sampler.sampler));
    reg_json["skipped_walks"] = dev.skipped_walks;
    write_json_file(reg_json, reg_path);
    write_meta(cfg, reg_path, {dev_path});

    assemble_report(cfg);
}

void cmd_project(const RunConfig& cfg) {
    validate_run_config(cfg);
    fs::create_directories(cfg.output_dir);
    Timer timer(cfg, "project");

    const Vocabulary vocab = load_vocabulary(cfg.vocabulary_path);
    const std::string embeddings_path = out_path(cfg, artifact::embeddings);
    require_artifact(embeddings_path, "embed");
    const EmbeddingMatrix E = load_embeddings(embeddings_path, vocab);
    const ProjectedPoints pts = tsne(E, cfg.tsne);

    const std::string csv_path = out_path(cfg, artifact::tsne_csv);
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + csv_path);
        csv::write_row(out, {"id", "name", "x", "y"});
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            csv::write_row(out, {std::to_string(vocab.items[i].id), vocab.items[i].name,
                                 csv::format_double(pts.coords(i, 0)),
                                 csv::format_double(pts.coords(i, 1))});
        }
        if (!out) throw IoError("short write: " + csv_path);
    }
    write_meta(cfg, csv_path, {embeddings_path});

    ordered_json sidecar;
    sidecar["config"] = {{"perplexity", cfg.tsne.perplexity},
                         {"iterations", cfg.tsne.iterations},
                         {"learning_rate", cfg.tsne.learning_rate},
                         {"momentum_initial", cfg.tsne.momentum_initial},
                         {"momentum_final", cfg.tsne.momentum_final},
                         {"momentum_switch_iter", cfg.tsne.momentum_switch_iter},
                         {"exaggeration_factor", cfg.tsne.exaggeration_factor},
                         {"exaggeration_duration", cfg.tsne.exaggeration_duration},
                         {"seed", cfg.tsne.seed},
                         {"distance", cfg.tsne.cosine_distance ? "cosine" : "squared_euclidean"}};
    sidecar["final_kl"] = pts.kl;
    write_json_file(sidecar, out_path(cfg, artifact::tsne_sidecar));
}

void cmd_report(const RunConfig& cfg) {
    validate_run_config(cfg);
    fs::create_directories(cfg.output_dir);
    Timer timer(cfg, "report");
    assemble_report(cfg);
}

}  // namespace forage
