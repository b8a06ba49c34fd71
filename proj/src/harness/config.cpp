#include "teach/harness/config.hpp"

#include "teach/goal_mdp.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace teach {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Thrown by value parsers; the caller attaches key and line.
struct BadValue {
    std::string reason;
};

template <typename T>
T parse_number(std::string_view v) {
    T out{};
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw BadValue{"cannot parse '" + std::string(v) + "'"};
    return out;
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

template <typename T>
std::function<void(RunConfig&, std::string_view)> integer(T RunConfig::*field, T min) {
    return [field, min](RunConfig& c, std::string_view v) {
        const T x = parse_number<T>(v);
        if (x < min) throw BadValue{"must be >= " + std::to_string(min)};
        c.*field = x;
    };
}

template <typename T>
std::function<void(RunConfig&, std::string_view)> teacher_integer(T TeacherConfig::*field, T min) {
    return [field, min](RunConfig& c, std::string_view v) {
        const T x = parse_number<T>(v);
        if (x < min) throw BadValue{"must be >= " + std::to_string(min)};
        c.teacher.*field = x;
    };
}

std::function<void(RunConfig&, std::string_view)> real(double RunConfig::*field, double lo, double hi,
                                                       bool hi_inclusive, bool lo_inclusive = true) {
    return [=](RunConfig& c, std::string_view v) {
        const double x = parse_number<double>(v);
        const bool lo_ok = lo_inclusive ? x >= lo : x > lo;
        const bool hi_ok = hi_inclusive ? x <= hi : x < hi;
        if (!lo_ok || !hi_ok) {
            std::ostringstream msg;
            msg << "must lie in " << (lo_inclusive ? '[' : '(') << lo << ", " << hi
                << (hi_inclusive ? ']' : ')');
            throw BadValue{msg.str()};
        }
        c.*field = x;
    };
}

const std::map<std::string, std::function<void(RunConfig&, std::string_view)>, std::less<>>& setters() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    static const std::map<std::string, std::function<void(RunConfig&, std::string_view)>, std::less<>> table = {
        {"env",
         [](RunConfig& c, std::string_view v) {
             if (v != "maze" && v != "point") throw BadValue{"expected maze or point"};
             c.env = std::string(v);
         }},
        {"layout", [](RunConfig& c, std::string_view v) {
             if (v.empty()) throw BadValue{"empty layout"};
             c.layout = std::string(v);
         }},
        {"total_steps", integer(&RunConfig::total_steps, 1L)},
        {"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>(v); }},
        {"lr", real(&RunConfig::lr, 0.0, inf, false, false)},
        {"batch", integer(&RunConfig::batch, 1)},
        {"eval_every", integer(&RunConfig::eval_every, 1)},
        {"eval_episodes", integer(&RunConfig::eval_episodes, 1)},
        {"out", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); }},
        {"hidden_width", integer(&RunConfig::hidden_width, 1)},
        {"hidden_layers", integer(&RunConfig::hidden_layers, 1)},
        {"gamma", real(&RunConfig::gamma, 0.0, 1.0, false)},
        {"noise", real(&RunConfig::noise_scale, 0.0, inf, false)},
        {"random_action_prob", real(&RunConfig::random_action_prob, 0.0, 1.0, true)},
        {"polyak", real(&RunConfig::polyak, 0.0, 1.0, true)},
        {"warmup", integer(&RunConfig::warmup_steps, 0L)},
        {"update_every", integer(&RunConfig::update_every, 1)},
        {"her_k", integer(&RunConfig::her_k, 0)},
        {"buffer_episodes", integer(&RunConfig::buffer_episodes, 1)},
        {"teacher.method",
         [](RunConfig& c, std::string_view v) {
             auto m = parse_teacher_method(v);
             if (!m) throw BadValue{"unknown teacher method '" + std::string(v) + "'"};
             c.teacher.method = *m;
         }},
        {"teacher.window", teacher_integer(&TeacherConfig::window, 2)},
        {"teacher.delta", teacher_integer(&TeacherConfig::interplay, 1)},
        {"teacher.goals", teacher_integer(&TeacherConfig::goal_count, 1)},
        {"teacher.probes", teacher_integer(&TeacherConfig::probe_count, 1)},
        {"teacher.ensemble", teacher_integer(&TeacherConfig::ensemble_size, 2)},
        {"teacher.dump", [](RunConfig& c, std::string_view v) { c.dump_curriculum = parse_bool(v); }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto& table = setters();
        const auto it = table.find(key);
        if (it == table.end())
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        try {
            it->second(config, value);
        } catch (const BadValue& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + std::string(key) + ": " + e.reason);
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig config;
    try {
        config = parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (config.env == "maze" && !is_builtin_layout(config.layout)) {
        std::filesystem::path layout(config.layout);
        if (layout.is_relative()) config.layout = (path.parent_path() / layout).lexically_normal().string();
    }
    return config;
}

void validate(const RunConfig& c) {
    constexpr long episode_length = 50;
    if (c.total_steps < episode_length)
        throw ConfigError("total_steps must cover at least one episode (" + std::to_string(episode_length) +
                          " steps)");
    validate(c.teacher);
}

std::string format_config(const RunConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "env = " << c.env << '\n'
        << "layout = " << c.layout << '\n'
        << "total_steps = " << c.total_steps << '\n'
        << "seed = " << c.seed << '\n'
        << "lr = " << c.lr << '\n'
        << "batch = " << c.batch << '\n'
        << "eval_every = " << c.eval_every << '\n'
        << "eval_episodes = " << c.eval_episodes << '\n'
        << "out = " << c.output_dir << '\n'
        << "hidden_width = " << c.hidden_width << '\n'
        << "hidden_layers = " << c.hidden_layers << '\n'
        << "gamma = " << c.gamma << '\n'
        << "noise = " << c.noise_scale << '\n'
        << "random_action_prob = " << c.random_action_prob << '\n'
        << "polyak = " << c.polyak << '\n'
        << "warmup = " << c.warmup_steps << '\n'
        << "update_every = " << c.update_every << '\n'
        << "her_k = " << c.her_k << '\n'
        << "buffer_episodes = " << c.buffer_episodes << '\n'
        << "teacher.method = " << to_string(c.teacher.method) << '\n'
        << "teacher.window = " << c.teacher.window << '\n'
        << "teacher.delta = " << c.teacher.interplay << '\n'
        << "teacher.goals = " << c.teacher.goal_count << '\n'
        << "teacher.probes = " << c.teacher.probe_count << '\n'
        << "teacher.ensemble = " << c.teacher.ensemble_size << '\n'
        << "teacher.dump = " << (c.dump_curriculum ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace teach
