#include "mcem/approx/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace mcem::approx {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(static_cast<double>(value));
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw LoadError("checkpoint truncated");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_tensors(std::ostream& out, const TensorList& tensors) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, tensors.size());
  for (const auto& [name, m] : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, 2);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) put_le<double>(out, m(i, j));
    }
  }
}

TensorList read_tensors(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw LoadError("bad magic bytes (not an MCEM checkpoint)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw LoadError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(in);
  TensorList out;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto len = get_le<std::uint32_t>(in);
    if (len > (1u << 20)) throw LoadError("implausible tensor name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw LoadError("checkpoint truncated");
    const auto rank = get_le<std::uint32_t>(in);
    if (rank > 2) throw LoadError("tensor '" + name + "' has unsupported rank " + std::to_string(rank));
    std::uint64_t dims[2] = {1, 1};
    for (std::uint32_t d = 0; d < rank; ++d) dims[d] = get_le<std::uint64_t>(in);
    if (dims[0] * dims[1] > (std::uint64_t{1} << 32)) throw LoadError("implausible tensor size");
    Mat m(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = get_le<double>(in);
    }
    out.emplace_back(std::move(name), std::move(m));
  }
  return out;
}

void save_tensors(const std::filesystem::path& path, const TensorList& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_tensors(out, tensors);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

TensorList load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  return read_tensors(in);
}

void append_params(TensorList& out, const ParamStore& store, const std::string& prefix) {
  for (const auto& [name, e] : store.entries()) out.emplace_back(prefix + name, e.value);
}

const Mat* find_tensor(const TensorList& tensors, const std::string& name) {
  for (const auto& [n, m] : tensors) {
    if (n == name) return &m;
  }
  return nullptr;
}

void assign_params(ParamStore& store, const TensorList& tensors, const std::string& prefix) {
  std::map<std::string, const Mat*> index;
  for (const auto& [n, m] : tensors) index[n] = &m;
  std::vector<std::pair<Mat*, const Mat*>> plan;
  for (auto& [name, e] : store.entries()) {
    auto it = index.find(prefix + name);
    if (it == index.end()) throw LoadError("checkpoint lacks tensor '" + prefix + name + "'");
    if (it->second->rows() != e.value.rows() || it->second->cols() != e.value.cols()) {
      throw LoadError("checkpoint tensor '" + prefix + name + "' has an incompatible shape");
    }
    plan.emplace_back(&e.value, it->second);
  }
  for (auto& [dst, src] : plan) *dst = *src;
}

void append_optim(TensorList& out, const OptimState& opt, const std::string& prefix) {
  Mat meta(1, 5);
  meta << opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon, static_cast<Scalar>(opt.steps);
  out.emplace_back(prefix + "#meta", meta);
  for (const auto& [name, m] : opt.first_moment) out.emplace_back(prefix + "m/" + name, m);
  for (const auto& [name, v] : opt.second_moment) out.emplace_back(prefix + "v/" + name, v);
}

void assign_optim(OptimState& opt, const TensorList& tensors, const std::string& prefix) {
  const Mat* meta = find_tensor(tensors, prefix + "#meta");
  if (!meta || meta->size() != 5) throw LoadError("checkpoint lacks optimizer state '" + prefix + "'");
  OptimState fresh;
  fresh.learning_rate = (*meta)(0);
  fresh.beta1 = (*meta)(1);
  fresh.beta2 = (*meta)(2);
  fresh.epsilon = (*meta)(3);
  fresh.steps = static_cast<std::int64_t>((*meta)(4));
  const std::string m_prefix = prefix + "m/";
  const std::string v_prefix = prefix + "v/";
  for (const auto& [n, m] : tensors) {
    if (n.rfind(m_prefix, 0) == 0) fresh.first_moment[n.substr(m_prefix.size())] = m;
    if (n.rfind(v_prefix, 0) == 0) fresh.second_moment[n.substr(v_prefix.size())] = m;
  }
  opt = std::move(fresh);
}

}  // namespace mcem::approx
