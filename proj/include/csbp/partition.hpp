#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace csbp {

// Partition of [n] (or of N when the last block is infinite) into integer intervals.
class ConsecutivePartition {
 public:
  using Size = std::uint64_t;

  ConsecutivePartition() = default;
  explicit ConsecutivePartition(std::vector<Size> sizes, bool infinite_tail = false);

  static ConsecutivePartition singletons(Size n);
  static ConsecutivePartition parse(const std::string& text);

  const std::vector<Size>& sizes() const { return sizes_; }
  Size block_count() const { return sizes_.size() + (infinite_tail_ ? 1 : 0); }
  // sum of the finite sizes; the infinite block, when present, is not counted
  Size finite_ground() const { return ground_; }
  bool infinite_tail() const { return infinite_tail_; }
  // size of block j, counted from 1; the infinite block is reported as 0
  Size block_size(Size j) const;

  std::string to_string() const;

  bool operator==(const ConsecutivePartition& o) const = default;

 private:
  std::vector<Size> sizes_;
  bool infinite_tail_ = false;
  Size ground_ = 0;
};

struct MergeEvent {
  std::uint64_t j;  // first merged block, 1-based
  std::uint64_t k;  // number of merged blocks (ignored for boundary events)
  bool boundary;    // merge blocks j..m

  bool operator==(const MergeEvent& o) const = default;
};

ConsecutivePartition coag(const ConsecutivePartition& c, const ConsecutivePartition& d);
ConsecutivePartition restrict_to(const ConsecutivePartition& c, ConsecutivePartition::Size k);
double distance(const ConsecutivePartition& c, const ConsecutivePartition& d);
ConsecutivePartition apply_merge(const ConsecutivePartition& c, const MergeEvent& e);
// the partition of [m] that coag composes with to realize e on m blocks
ConsecutivePartition merge_pattern(std::uint64_t m, const MergeEvent& e);

}  // namespace csbp
