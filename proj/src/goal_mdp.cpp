#include "teach/goal_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace teach {

namespace {

constexpr std::string_view kOpenLayout =
    "........\n"
    "........\n"
    "........\n"
    "...S....\n"
    "........\n"
    "........\n"
    "........\n"
    "........\n";

constexpr std::string_view kUCorridorLayout =
    "..........\n"
    "..........\n"
    "..######..\n"
    "..######..\n"
    "..######..\n"
    "..######..\n"
    "..######..\n"
    "..######..\n"
    "S.######..\n";

constexpr std::string_view kSpiralLayout =
    "S........\n"
    ".#######.\n"
    ".#.....#.\n"
    ".#.###.#.\n"
    ".#.#...#.\n"
    ".#.#####.\n"
    ".#.......\n"
    ".########\n"
    ".........\n";

}  // namespace

void validate(const MultiGoalSpec& spec) {
    if (spec.state_dim < 1 || spec.action_dim < 1 || spec.goal_dim < 1)
        throw ContractError("MultiGoalSpec: dimensions must be positive");
    if (spec.episode_length < 1) throw ContractError("MultiGoalSpec: episode length must be >= 1");
    if (!(spec.gamma >= 0.0 && spec.gamma < 1.0))
        throw ContractError("MultiGoalSpec: gamma must lie in [0, 1)");
    if (!(spec.epsilon > 0.0)) throw ContractError("MultiGoalSpec: epsilon must be positive");
    if (spec.state_low.size() != spec.state_dim || spec.state_high.size() != spec.state_dim)
        throw ContractError("MultiGoalSpec: state bounds do not match state_dim");
}

double reward(const Eigen::Ref<const Vec>& achieved, const Eigen::Ref<const Vec>& desired,
              double epsilon) {
    if (achieved.size() != desired.size())
        throw ContractError("reward: achieved goal has dimension " +
                            std::to_string(achieved.size()) + ", desired goal " +
                            std::to_string(desired.size()));
    if (!(epsilon > 0.0)) throw ContractError("reward: epsilon must be positive");
    return (achieved - desired).norm() < epsilon ? 0.0 : -1.0;
}

Cell MazeSpec::cell_of(const Point2& pos) const {
    const int col = std::clamp(static_cast<int>(std::floor(pos.x())), 0, width - 1);
    const int row = std::clamp(static_cast<int>(std::floor(pos.y())), 0, height - 1);
    return {col, row};
}

std::vector<Cell> MazeSpec::free_cells() const {
    std::vector<Cell> cells;
    for (int row = 0; row < height; ++row)
        for (int col = 0; col < width; ++col)
            if (!blocked.contains(Cell{col, row})) cells.push_back({col, row});
    return cells;
}

void validate(const MazeSpec& maze) {
    if (maze.width < 1 || maze.height < 1) throw ConfigError("maze: empty grid");
    if (!maze.in_bounds(maze.start)) throw ConfigError("maze: start cell out of bounds");
    if (maze.blocked.contains(maze.start)) throw ConfigError("maze: start cell is blocked");
    if (maze.free_cells().size() < 2)
        throw ConfigError("maze: needs at least one free cell besides the start");
    if (!(maze.v_max > 0.0)) throw ConfigError("maze: v_max must be positive");
    if (!(maze.epsilon > 0.0)) throw ConfigError("maze: epsilon must be positive");
}

Point2 maze_step(const MazeSpec& maze, const Point2& pos, const Point2& action) {
    if (!action.allFinite()) return pos;
    Point2 displacement = action;
    const double norm = displacement.norm();
    if (norm > maze.v_max) displacement *= maze.v_max / norm;
    Point2 candidate = pos + displacement;
    candidate.x() = std::clamp(candidate.x(), 0.0, static_cast<double>(maze.width));
    candidate.y() = std::clamp(candidate.y(), 0.0, static_cast<double>(maze.height));
    return maze.blocked.contains(maze.cell_of(candidate)) ? pos : candidate;
}

std::vector<Vec> sample_goal_space(const MazeSpec& maze, int count, Rng& rng) {
    if (count < 1) throw ContractError("sample_goal_space: count must be >= 1");
    const auto cells = maze.free_cells();
    if (cells.empty()) throw ConfigError("sample_goal_space: maze has no free cells");
    std::vector<Vec> goals;
    goals.reserve(count);
    for (int i = 0; i < count; ++i) {
        const Cell c = cells[uniform_index(rng, cells.size())];
        Vec g(2);
        g << c.col + uniform_real(rng), c.row + uniform_real(rng);
        goals.push_back(std::move(g));
    }
    return goals;
}

MazeSpec load_maze_layout(std::string_view text) {
    std::vector<std::string> rows;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        rows.push_back(std::move(line));
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty()) throw ParseError(1, 1, "empty maze layout");

    MazeSpec maze;
    maze.width = static_cast<int>(rows.front().size());
    maze.height = static_cast<int>(rows.size());
    bool have_start = false;
    for (int r = 0; r < maze.height; ++r) {
        const auto& row = rows[r];
        if (static_cast<int>(row.size()) != maze.width)
            throw ParseError(r + 1, static_cast<int>(std::min<std::size_t>(row.size(), maze.width)) + 1,
                             "ragged row: expected " + std::to_string(maze.width) +
                                 " columns, found " + std::to_string(row.size()));
        for (int c = 0; c < maze.width; ++c) {
            switch (row[c]) {
                case '#':
                    maze.blocked.insert({c, r});
                    break;
                case '.':
                    break;
                case 'S':
                    if (have_start) throw ParseError(r + 1, c + 1, "multiple start cells");
                    have_start = true;
                    maze.start = {c, r};
                    break;
                default:
                    throw ParseError(r + 1, c + 1,
                                     std::string("unknown layout character '") + row[c] + "'");
            }
        }
    }
    if (!have_start) throw ParseError(1, 1, "no start cell 'S'");
    if (maze.free_cells().size() < 2)
        throw ParseError(1, 1, "layout needs at least one free cell besides the start");
    return maze;
}

MazeSpec load_maze_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open maze layout '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_maze_layout(buf.str());
    } catch (const ParseError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

bool is_builtin_layout(std::string_view name) {
    return name == "open" || name == "u-corridor" || name == "spiral";
}

std::string builtin_layout_text(std::string_view name) {
    if (name == "open") return std::string(kOpenLayout);
    if (name == "u-corridor") return std::string(kUCorridorLayout);
    if (name == "spiral") return std::string(kSpiralLayout);
    throw ConfigError("unknown builtin layout '" + std::string(name) + "'");
}

MazeEnv::MazeEnv(MazeSpec maze, int episode_length, double gamma) : maze_(std::move(maze)) {
    validate(maze_);
    spec_.state_dim = 2;
    spec_.action_dim = 2;
    spec_.goal_dim = 2;
    spec_.episode_length = episode_length;
    spec_.gamma = gamma;
    spec_.epsilon = maze_.epsilon;
    spec_.state_low = Vec::Zero(2);
    spec_.state_high = Vec(2);
    spec_.state_high << maze_.width, maze_.height;
    validate(spec_);
    pos_ = maze_.center_of(maze_.start);
    goal_ = Vec::Zero(2);
}

Vec MazeEnv::reset(const Vec& goal) {
    if (goal.size() != 2) throw ContractError("MazeEnv::reset: goal must be 2-D");
    goal_ = goal;
    clock_ = 0;
    pos_ = maze_.center_of(maze_.start);
    return pos_;
}

StepResult MazeEnv::step(const Vec& action) {
    if (action.size() != 2) throw ContractError("MazeEnv::step: action must be 2-D");
    pos_ = maze_step(maze_, pos_, Point2(action(0), action(1)));
    ++clock_;
    StepResult out;
    out.next_state = pos_;
    out.achieved_goal = pos_;
    out.reward = reward(out.achieved_goal, goal_, spec_.epsilon);
    return out;
}

std::vector<Vec> MazeEnv::sample_goal_space(int count, Rng& rng) const {
    return teach::sample_goal_space(maze_, count, rng);
}

Vec MazeEnv::start_state() const { return maze_.center_of(maze_.start); }

PointReachEnv::PointReachEnv(double max_step, double epsilon, int episode_length, double gamma)
    : max_step_(max_step) {
    spec_.epsilon = epsilon;
    spec_.episode_length = episode_length;
    spec_.gamma = gamma;
    spec_.state_low = Vec::Constant(2, -1.0);
    spec_.state_high = Vec::Constant(2, 1.0);
    validate(spec_);
    if (!(max_step_ > 0.0)) throw ContractError("PointReachEnv: max_step must be positive");
    pos_ = Point2::Zero();
    goal_ = Vec::Zero(2);
}

Vec PointReachEnv::reset(const Vec& goal) {
    if (goal.size() != 2) throw ContractError("PointReachEnv::reset: goal must be 2-D");
    goal_ = goal;
    clock_ = 0;
    pos_ = Point2::Zero();
    return pos_;
}

StepResult PointReachEnv::step(const Vec& action) {
    if (action.size() != 2) throw ContractError("PointReachEnv::step: action must be 2-D");
    if (action.allFinite()) {
        Point2 d = max_step_ * Point2(action(0), action(1));
        const double norm = d.norm();
        if (norm > max_step_) d *= max_step_ / norm;
        pos_ = (pos_ + d).cwiseMax(-1.0).cwiseMin(1.0);
    }
    ++clock_;
    StepResult out;
    out.next_state = pos_;
    out.achieved_goal = pos_;
    out.reward = reward(out.achieved_goal, goal_, spec_.epsilon);
    return out;
}

std::vector<Vec> PointReachEnv::sample_goal_space(int count, Rng& rng) const {
    if (count < 1) throw ContractError("sample_goal_space: count must be >= 1");
    std::vector<Vec> goals;
    goals.reserve(count);
    for (int i = 0; i < count; ++i) {
        Vec g(2);
        g << uniform_real(rng, -1.0, 1.0), uniform_real(rng, -1.0, 1.0);
        goals.push_back(std::move(g));
    }
    return goals;
}

}  // namespace teach
