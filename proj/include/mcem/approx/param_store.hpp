#pragma once

#include "mcem/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace mcem::approx {

/// Named parameter tensors with same-shaped gradient accumulators.
///
/// Entries are kept in name order so that iteration, serialization and
/// initialization are deterministic.
class ParamStore {
 public:
  struct Entry {
    Mat value;
    Mat grad;
  };

  /// Adds a zero-valued tensor. Re-adding an existing name with the same shape is a no-op.
  Mat& add(const std::string& name, Index rows, Index cols);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Mat& value(const std::string& name);
  const Mat& value(const std::string& name) const;
  Mat& grad(const std::string& name);
  const Mat& grad(const std::string& name) const;

  void zero_grad();
  bool all_finite() const;

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  Index num_scalars() const;

  /// Overwrites values of every tensor from `other` (target-network sync). Shapes must match.
  void copy_values_from(const ParamStore& other);

  /// Flattens values (name order, column-major within a tensor).
  Vec flat_values() const;
  Vec flat_grads() const;
  void set_flat_values(const Vec& flat);

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::int64_t step_count = 0;

 private:
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;

  std::map<std::string, Entry> entries_;
};

/// Bitwise equality of names, shapes and values.
bool identical(const ParamStore& a, const ParamStore& b);

}  // namespace mcem::approx
