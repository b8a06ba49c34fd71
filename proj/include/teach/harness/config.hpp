#pragma once

#include "teach/teacher.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace teach {

struct RunConfig {
    std::string env = "maze";         // "maze" or "point"
    std::string layout = "u-corridor";  // builtin name or path to a layout file
    TeacherConfig teacher;
    long total_steps = 400000;
    std::uint64_t seed = 0;
    double lr = 1e-3;
    int batch = 1024;
    int eval_every = 50;     // episodes
    int eval_episodes = 20;
    std::string output_dir = "runs/default";

    int hidden_width = 256;
    int hidden_layers = 2;
    double gamma = 0.98;
    double noise_scale = 0.2;
    double random_action_prob = 0.3;
    double polyak = 0.95;
    long warmup_steps = 1000;
    int update_every = 2;
    int her_k = 4;
    int buffer_episodes = 10000;
    bool dump_curriculum = false;
};

/// Parses `key = value` lines; `#` starts a comment. Omitted keys keep their
/// defaults. Errors name the key and line.
RunConfig parse_config(std::string_view text);

/// Reads and parses a file. A relative `layout` path is resolved against
/// the config file's directory.
RunConfig load_config(const std::filesystem::path& path);

/// Cross-field checks; throws ConfigError.
void validate(const RunConfig& config);

/// Canonical `key = value` rendering that parse_config reads back.
std::string format_config(const RunConfig& config);

}  // namespace teach
