#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "forage/config.hpp"

namespace forage {

// Artifact filenames inside the run directory (RunConfig::output_dir).
namespace artifact {
inline constexpr const char* embeddings = "embeddings.jsonl";
inline constexpr const char* traces = "traces.jsonl";
inline constexpr const char* profile = "profile.csv";
inline constexpr const char* deviation = "deviation.csv";
inline constexpr const char* patch_leaving = "patch_leaving.json";
inline constexpr const char* regression = "regression.json";
inline constexpr const char* tsne_csv = "tsne.csv";
inline constexpr const char* tsne_sidecar = "tsne.json";
inline constexpr const char* timings = "timings.json";
}  // namespace artifact

std::string report_filename(const RunConfig& cfg);  // report.json or report.csv

// Every artifact gets a <name>.meta.json sidecar: config hash, input paths
// with content hashes, software version. No timestamps: run directories must
// be byte-identical across reruns (wall-clock goes to timings.json only).
void write_meta(const RunConfig& cfg, const std::string& artifact_path,
                const std::vector<std::string>& input_paths);
nlohmann::ordered_json read_meta(const std::string& artifact_path);
std::string sha256_file(const std::string& path);

void cmd_embed(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_analyze(const RunConfig& cfg);
void cmd_project(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace forage
