#pragma once

#include "mcem/approx/adam.hpp"
#include "mcem/approx/param_store.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mcem::approx {

// Checkpoint framing, little-endian throughout:
//   "MCEM" | u32 version | u64 tensor count |
//   per tensor: u32 name length | name bytes | u32 rank | u64 dims[rank] | f64 data (row-major)

inline constexpr char kMagic[4] = {'M', 'C', 'E', 'M'};
inline constexpr std::uint32_t kFormatVersion = 1;

using NamedTensor = std::pair<std::string, Mat>;
using TensorList = std::vector<NamedTensor>;

void write_tensors(std::ostream& out, const TensorList& tensors);
/// Reads a whole tensor list; throws LoadError on bad magic, version mismatch or truncation.
TensorList read_tensors(std::istream& in);

void save_tensors(const std::filesystem::path& path, const TensorList& tensors);
TensorList load_tensors(const std::filesystem::path& path);

/// Appends every value tensor of `store` under `prefix`.
void append_params(TensorList& out, const ParamStore& store, const std::string& prefix = "");
/// Copies tensors named `prefix + name` into `store`. Every store tensor must be present with
/// a matching shape; nothing is written unless all of them are.
void assign_params(ParamStore& store, const TensorList& tensors, const std::string& prefix = "");

void append_optim(TensorList& out, const OptimState& opt, const std::string& prefix);
void assign_optim(OptimState& opt, const TensorList& tensors, const std::string& prefix);

const Mat* find_tensor(const TensorList& tensors, const std::string& name);

}  // namespace mcem::approx
