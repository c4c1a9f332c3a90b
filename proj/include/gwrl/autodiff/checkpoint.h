#ifndef GWRL_AUTODIFF_CHECKPOINT_H_
#define GWRL_AUTODIFF_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "gwrl/autodiff/param_store.h"

namespace gwrl::ad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout, all integers little-endian:
//   u32 version
//   u64 parameter count
//   per parameter:
//     u32 name length, name bytes (UTF-8)
//     u32 rank, u64 extent * rank
//     f64 value * product(extents)
// The store seed is not part of the file; loading keeps the caller's seed.

std::string SerializeParams(const ParamStore& store);
ParamStore DeserializeParams(const std::string& bytes, std::uint64_t seed = 0);

void SaveCheckpoint(const ParamStore& store, const std::filesystem::path& path);
ParamStore LoadCheckpoint(const std::filesystem::path& path, std::uint64_t seed = 0);

/// Copies every parameter of `src` into the same-named slot of `dst`. Both
/// stores must hold exactly the same names and shapes.
void AssignParams(ParamStore& dst, const ParamStore& src);

}  // namespace gwrl::ad

#endif  // GWRL_AUTODIFF_CHECKPOINT_H_
