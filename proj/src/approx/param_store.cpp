#include "mcem/approx/param_store.hpp"

#include <cstring>

namespace mcem::approx {

Mat& ParamStore::add(const std::string& name, Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("parameter '" + name + "' must have positive shape");
  }
  auto it = entries_.find(name);
  if (it != entries_.end()) {
    if (it->second.value.rows() != rows || it->second.value.cols() != cols) {
      throw ConfigError("parameter '" + name + "' re-added with a different shape");
    }
    return it->second.value;
  }
  Entry& e = entries_[name];
  e.value = Mat::Zero(rows, cols);
  e.grad = Mat::Zero(rows, cols);
  return e.value;
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

const ParamStore::Entry& ParamStore::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

Mat& ParamStore::value(const std::string& name) { return at(name).value; }
const Mat& ParamStore::value(const std::string& name) const { return at(name).value; }
Mat& ParamStore::grad(const std::string& name) { return at(name).grad; }
const Mat& ParamStore::grad(const std::string& name) const { return at(name).grad; }

void ParamStore::zero_grad() {
  for (auto& [_, e] : entries_) e.grad.setZero();
}

bool ParamStore::all_finite() const {
  for (const auto& [_, e] : entries_) {
    if (!e.value.allFinite()) return false;
  }
  return true;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

Index ParamStore::num_scalars() const {
  Index n = 0;
  for (const auto& [_, e] : entries_) n += e.value.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.entries_.size() != entries_.size()) {
    throw UsageError("copy_values_from: stores have different tensor sets");
  }
  for (auto& [name, e] : entries_) {
    const Mat& src = other.value(name);
    if (src.rows() != e.value.rows() || src.cols() != e.value.cols()) {
      throw UsageError("copy_values_from: shape mismatch for '" + name + "'");
    }
    e.value = src;
  }
}

Vec ParamStore::flat_values() const {
  Vec out(num_scalars());
  Index off = 0;
  for (const auto& [_, e] : entries_) {
    out.segment(off, e.value.size()) = e.value.reshaped();
    off += e.value.size();
  }
  return out;
}

Vec ParamStore::flat_grads() const {
  Vec out(num_scalars());
  Index off = 0;
  for (const auto& [_, e] : entries_) {
    out.segment(off, e.grad.size()) = e.grad.reshaped();
    off += e.grad.size();
  }
  return out;
}

void ParamStore::set_flat_values(const Vec& flat) {
  if (flat.size() != num_scalars()) throw UsageError("set_flat_values: size mismatch");
  Index off = 0;
  for (auto& [_, e] : entries_) {
    e.value.reshaped() = flat.segment(off, e.value.size());
    off += e.value.size();
  }
}

bool identical(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size()) return false;
  auto ia = a.entries().begin();
  auto ib = b.entries().begin();
  for (; ia != a.entries().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    const Mat& va = ia->second.value;
    const Mat& vb = ib->second.value;
    if (va.rows() != vb.rows() || va.cols() != vb.cols()) return false;
    if (std::memcmp(va.data(), vb.data(), sizeof(Scalar) * static_cast<std::size_t>(va.size())) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace mcem::approx
