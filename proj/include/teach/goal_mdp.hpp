#pragma once

#include "teach/common.hpp"

#include <Eigen/Core>

#include <compare>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace teach {

/// Dimensions and episode constants of a multi-goal task.
///
/// `state_low`/`state_high` bound the observation box; goals live in the
/// same box for every environment shipped here (the achieved goal is the
/// agent position).
struct MultiGoalSpec {
    int state_dim = 2;
    int action_dim = 2;
    int goal_dim = 2;
    int episode_length = 50;
    double gamma = 0.98;
    double epsilon = 0.5;
    Vec state_low;
    Vec state_high;
};

void validate(const MultiGoalSpec& spec);

struct GoalConditionedTransition {
    Vec state;
    Vec action;
    double reward = -1.0;
    Vec next_state;
    Vec achieved_goal;
    Vec desired_goal;
};

/// Column-per-sample batch of transitions, the layout the networks consume.
struct TransitionBatch {
    Mat states;
    Mat actions;
    Mat next_states;
    Mat achieved_goals;
    Mat desired_goals;
    Vec rewards;

    Eigen::Index size() const { return rewards.size(); }
};

/// Sparse binary reward: 0 when strictly inside the epsilon ball, -1 otherwise.
double reward(const Eigen::Ref<const Vec>& achieved, const Eigen::Ref<const Vec>& desired,
              double epsilon);

struct Cell {
    int col = 0;
    int row = 0;
    auto operator<=>(const Cell&) const = default;
};

using Point2 = Eigen::Vector2d;

struct MazeSpec {
    int width = 0;
    int height = 0;
    std::set<Cell> blocked;
    Cell start;
    double v_max = 1.0;
    double epsilon = 0.5;

    bool in_bounds(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < width && c.row < height; }
    bool is_free(Cell c) const { return in_bounds(c) && !blocked.contains(c); }
    /// Cell containing a (clamped) continuous position. The far boundary
    /// belongs to the last cell.
    Cell cell_of(const Point2& pos) const;
    Point2 center_of(Cell c) const { return {c.col + 0.5, c.row + 0.5}; }
    std::vector<Cell> free_cells() const;
};

/// Throws ConfigError when the maze breaks its invariants.
void validate(const MazeSpec& maze);

/// One maze transition: rescale the displacement to norm <= v_max, clamp to
/// the maze box, and reject the whole step if it lands in a blocked cell.
Point2 maze_step(const MazeSpec& maze, const Point2& pos, const Point2& action);

/// N positions uniform over the free area of the maze.
std::vector<Vec> sample_goal_space(const MazeSpec& maze, int count, Rng& rng);

/// Parses '#' (block), '.' (free), 'S' (start, exactly one). Row 0 is the
/// first line; column 0 the first character.
MazeSpec load_maze_layout(std::string_view text);
MazeSpec load_maze_file(const std::filesystem::path& path);

/// Hand-authored layouts: "open", "u-corridor", "spiral".
std::string builtin_layout_text(std::string_view name);
bool is_builtin_layout(std::string_view name);

struct StepResult {
    Vec next_state;
    Vec achieved_goal;
    double reward = -1.0;
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual const MultiGoalSpec& spec() const = 0;
    virtual Vec reset(const Vec& goal) = 0;
    virtual StepResult step(const Vec& action) = 0;
    virtual std::vector<Vec> sample_goal_space(int count, Rng& rng) const = 0;
    virtual Vec start_state() const = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;

    const Vec& desired_goal() const { return goal_; }
    int elapsed_steps() const { return clock_; }

protected:
    Vec goal_;
    int clock_ = 0;
};

class MazeEnv final : public Environment {
public:
    explicit MazeEnv(MazeSpec maze, int episode_length = 50, double gamma = 0.98);

    const MultiGoalSpec& spec() const override { return spec_; }
    const MazeSpec& maze() const { return maze_; }
    Vec reset(const Vec& goal) override;
    StepResult step(const Vec& action) override;
    std::vector<Vec> sample_goal_space(int count, Rng& rng) const override;
    Vec start_state() const override;
    std::unique_ptr<Environment> clone() const override { return std::make_unique<MazeEnv>(*this); }

private:
    MazeSpec maze_;
    MultiGoalSpec spec_;
    Point2 pos_;
};

/// Point in [-1,1]^2 starting at the origin. Actions in [-1,1]^2 are scaled
/// by `max_step` and clipped to norm `max_step`.
class PointReachEnv final : public Environment {
public:
    explicit PointReachEnv(double max_step = 0.1, double epsilon = 0.05, int episode_length = 50,
                           double gamma = 0.98);

    const MultiGoalSpec& spec() const override { return spec_; }
    Vec reset(const Vec& goal) override;
    StepResult step(const Vec& action) override;
    std::vector<Vec> sample_goal_space(int count, Rng& rng) const override;
    Vec start_state() const override { return Vec::Zero(2); }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<PointReachEnv>(*this);
    }

private:
    double max_step_;
    MultiGoalSpec spec_;
    Point2 pos_;
};

}  // namespace teach
