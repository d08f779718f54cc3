#include "forage/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>

#include "forage/csv.hpp"
#include "forage/errors.hpp"
#include "forage/hash.hpp"

namespace forage {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ValidationError("config key '" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

std::uint64_t parse_uint64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ValidationError("config key '" + key + "' expects an unsigned integer, got '" + value +
                              "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        return csv::parse_double(value);
    } catch (const ValidationError&) {
        throw ValidationError("config key '" + key + "' expects a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ValidationError("config key '" + key + "' expects true or false, got '" + value + "'");
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "vocabulary") {
        cfg.vocabulary_path = value;
    } else if (key == "embeddings_file") {
        cfg.embeddings_file = value;
    } else if (key == "endpoint") {
        cfg.service.endpoint = value;
    } else if (key == "model") {
        cfg.service.model = value;
    } else if (key == "batch_size") {
        cfg.service.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "timeout_s") {
        cfg.service.timeout_s = parse_real(key, value);
    } else if (key == "max_attempts") {
        cfg.service.max_attempts = static_cast<int>(parse_int(key, value));
    } else if (key == "retry_base_delay_ms") {
        cfg.service.retry_base_delay_ms = static_cast<int>(parse_int(key, value));
    } else if (key == "max_concurrency") {
        cfg.service.max_concurrency = static_cast<int>(parse_int(key, value));
    } else if (key == "cache_dir") {
        cfg.cache_dir = value;
    } else if (key == "text_mode") {
        cfg.text_mode = parse_text_mode(value);
    } else if (key == "temperature") {
        cfg.sampler.temperature = parse_real(key, value);
    } else if (key == "steps") {
        cfg.sampler.steps = static_cast<int>(parse_int(key, value));
    } else if (key == "walks") {
        cfg.sampler.walks = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
        cfg.sampler.master_seed = parse_uint64(key, value);
    } else if (key == "sampler") {
        cfg.sampler.sampler = parse_sampler_kind(value);
    } else if (key == "proposal") {
        cfg.sampler.proposal = parse_proposal_kind(value);
    } else if (key == "lambda") {
        cfg.sampler.lambda = parse_real(key, value);
    } else if (key == "epsilon") {
        cfg.sampler.epsilon = parse_real(key, value);
    } else if (key == "window") {
        cfg.window = static_cast<int>(parse_int(key, value));
    } else if (key == "tsne_perplexity") {
        cfg.tsne.perplexity = parse_real(key, value);
    } else if (key == "tsne_iterations") {
        cfg.tsne.iterations = static_cast<int>(parse_int(key, value));
    } else if (key == "tsne_learning_rate") {
        cfg.tsne.learning_rate = parse_real(key, value);
    } else if (key == "tsne_seed") {
        cfg.tsne.seed = parse_uint64(key, value);
    } else if (key == "tsne_cosine_distance") {
        cfg.tsne.cosine_distance = parse_bool(key, value);
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "report_format") {
        if (value != "json" && value != "csv") {
            throw ValidationError("report_format must be json or csv, got '" + value + "'");
        }
        cfg.report_format = value;
    } else if (key == "api_key") {
        throw ValidationError("api_key must not appear in config files; set EMBED_API_KEY instead");
    } else {
        throw ValidationError("unknown config key: '" + key + "'");
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  " is not 'key = value': " + stripped);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(line_no) + " has an empty key");
        }
        try {
            apply_config_entry(cfg, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.vocabulary_path.empty()) throw ValidationError("config: vocabulary path is required");
    if (!fs::exists(cfg.vocabulary_path)) {
        throw ValidationError("config: vocabulary file does not exist: " + cfg.vocabulary_path);
    }
    const bool file_mode = !cfg.embeddings_file.empty();
    const bool service_mode = !cfg.service.endpoint.empty();
    if (file_mode == service_mode) {
        throw ValidationError(
            "config: exactly one embeddings source required (embeddings_file or endpoint)");
    }
    if (file_mode && !fs::exists(cfg.embeddings_file)) {
        throw ValidationError("config: embeddings file does not exist: " + cfg.embeddings_file);
    }
    if (service_mode) validate_service_config(cfg.service);
    validate_sampler_config(cfg.sampler);
    if (cfg.window < 1) throw ValidationError("config: window must be >= 1");
    if (!(cfg.tsne.perplexity > 0.0)) throw ValidationError("config: tsne_perplexity must be positive");
    if (cfg.tsne.iterations < 1) throw ValidationError("config: tsne_iterations must be >= 1");
    if (!(cfg.tsne.learning_rate > 0.0)) {
        throw ValidationError("config: tsne_learning_rate must be positive");
    }
    if (cfg.output_dir.empty()) throw ValidationError("config: output_dir is required");
    if (cfg.report_format != "json" && cfg.report_format != "csv") {
        throw ValidationError("config: report_format must be json or csv");
    }
}

namespace {

ordered_json semantic_fields(const RunConfig& cfg) {
    ordered_json j;
    j["vocabulary"] = cfg.vocabulary_path;
    if (!cfg.embeddings_file.empty()) {
        j["embeddings_source"] = {{"file", cfg.embeddings_file}};
    } else {
        j["embeddings_source"] = {{"endpoint", cfg.service.endpoint}, {"model", cfg.service.model}};
    }
    j["text_mode"] = to_string(cfg.text_mode);
    j["temperature"] = cfg.sampler.temperature;
    j["steps"] = cfg.sampler.steps;
    j["walks"] = cfg.sampler.walks;
    j["seed"] = cfg.sampler.master_seed;
    j["sampler"] = to_string(cfg.sampler.sampler);
    j["proposal"] = to_string(cfg.sampler.proposal);
    j["lambda"] = cfg.sampler.lambda;
    j["epsilon"] = cfg.sampler.epsilon;
    j["window"] = cfg.window;
    j["tsne"] = {{"perplexity", cfg.tsne.perplexity},
                 {"iterations", cfg.tsne.iterations},
                 {"learning_rate", cfg.tsne.learning_rate},
                 {"momentum_initial", cfg.tsne.momentum_initial},
                 {"momentum_final", cfg.tsne.momentum_final},
                 {"momentum_switch_iter", cfg.tsne.momentum_switch_iter},
                 {"exaggeration_factor", cfg.tsne.exaggeration_factor},
                 {"exaggeration_duration", cfg.tsne.exaggeration_duration},
                 {"seed", cfg.tsne.seed},
                 {"cosine_distance", cfg.tsne.cosine_distance}};
    j["report_format"] = cfg.report_format;
    return j;
}

}  // namespace

ordered_json config_echo(const RunConfig& cfg) {
    ordered_json j = semantic_fields(cfg);
    j["output_dir"] = cfg.output_dir;
    j["cache_dir"] = cfg.cache_dir;
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    return sha256_hex(semantic_fields(cfg).dump());
}

}  // namespace forage
