#pragma once

#include <string>

#include <json.hpp>

#include "forage/embedding.hpp"
#include "forage/projection.hpp"
#include "forage/samplers.hpp"
#include "forage/vocabulary.hpp"

namespace forage {

struct RunConfig {
    std::string vocabulary_path;
    // Exactly one embeddings source: a JSONL file, or a service endpoint.
    std::string embeddings_file;
    EmbeddingServiceConfig service;  // active when service.endpoint nonempty
    std::string cache_dir = "embed_cache";
    TextMode text_mode = TextMode::name_only;
    SamplerConfig sampler;
    int window = 5;  // switch-profile radius R
    TsneConfig tsne;
    std::string output_dir;
    std::string report_format = "json";  // json | csv
};

// Flat `key = value` file with `#` comments; keys match the CLI flag names.
RunConfig load_run_config(const std::string& path);

// Shared by the file parser and the CLI override flags.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

void validate_run_config(const RunConfig& cfg);

// Echo of every reproducibility-relevant field; never contains the API key.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

// SHA-256 over the canonical serialization of the semantic fields (sources,
// text mode, sampler, window, t-SNE, report format). Operational knobs such
// as output_dir, cache_dir, and retry settings do not affect artifact
// content and are excluded.
std::string config_hash(const RunConfig& cfg);

}  // namespace forage
