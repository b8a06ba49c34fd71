#pragma once

#include "teach/agent.hpp"
#include "teach/teacher.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace teach {

// Binary layout (all integers u32 little-endian, reals f64 little-endian):
//   "TEACHCK1" | version | tensor count |
//   per tensor: name length | UTF-8 name | rank | dims... | data (row-major)
inline constexpr char kCheckpointMagic[8] = {'T', 'E', 'A', 'C', 'H', 'C', 'K', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NamedTensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<double> data;
};

std::vector<std::uint8_t> encode_tensors(const std::vector<NamedTensor>& tensors,
                                         std::uint32_t version = kCheckpointVersion);
std::vector<NamedTensor> decode_tensors(const std::vector<std::uint8_t>& bytes);

struct Checkpoint {
    AgentState agent;
    TeacherSnapshot teacher;
    std::optional<CriticEnsemble> ensemble;
};

std::vector<NamedTensor> checkpoint_tensors(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_tensors(const std::vector<NamedTensor>& tensors);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace teach
