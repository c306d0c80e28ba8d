#include "csbp/partition.hpp"

#include <algorithm>
#include <sstream>

#include "csbp/errors.hpp"

namespace csbp {

ConsecutivePartition::ConsecutivePartition(std::vector<Size> sizes, bool infinite_tail)
    : sizes_(std::move(sizes)), infinite_tail_(infinite_tail) {
  for (Size s : sizes_) {
    require(s > 0, "block sizes must be positive");
    ground_ += s;
  }
}

ConsecutivePartition ConsecutivePartition::singletons(Size n) { return ConsecutivePartition(std::vector<Size>(n, 1)); }

ConsecutivePartition::Size ConsecutivePartition::block_size(Size j) const {
  if (j >= 1 && j <= sizes_.size()) return sizes_[j - 1];
  if (infinite_tail_ && j == sizes_.size() + 1) return 0;
  throw RangeError("block index out of range");
}

std::string ConsecutivePartition::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (i) os << ',';
    os << sizes_[i];
  }
  if (infinite_tail_) os << (sizes_.empty() ? "" : ",") << "inf";
  os << ']';
  return os.str();
}

ConsecutivePartition ConsecutivePartition::parse(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw DomainError("partition text must look like [s1,s2,...]");
  s = s.substr(1, s.size() - 2);
  std::vector<Size> sizes;
  bool inf = false;
  std::stringstream ss(s);
  std::string tok;
  while (!s.empty() && std::getline(ss, tok, ',')) {
    if (inf) throw DomainError("infinite block must be last");
    if (tok == "inf") {
      inf = true;
      continue;
    }
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit)) throw DomainError("bad block size '" + tok + "'");
    sizes.push_back(std::stoull(tok));
  }
  return ConsecutivePartition(std::move(sizes), inf);
}

ConsecutivePartition coag(const ConsecutivePartition& c, const ConsecutivePartition& d) {
  const auto m = c.block_count();
  if (!d.infinite_tail()) require(m <= d.finite_ground(), "coag needs #C <= ground size of D");
  std::vector<ConsecutivePartition::Size> out;
  bool inf = false;
  std::uint64_t next = 0;
  auto take = [&](std::uint64_t count) {
    ConsecutivePartition::Size sum = 0;
    for (std::uint64_t i = 0; i < count && next < m; ++i, ++next) {
      if (c.infinite_tail() && next == c.sizes().size()) {
        inf = true;
      } else {
        sum += c.sizes()[next];
      }
    }
    if (inf) return;
    out.push_back(sum);
  };
  for (auto s : d.sizes()) {
    if (next >= m || inf) break;
    take(s);
  }
  if (d.infinite_tail() && next < m && !inf) take(m - next);
  return ConsecutivePartition(std::move(out), inf);
}

ConsecutivePartition restrict_to(const ConsecutivePartition& c, ConsecutivePartition::Size k) {
  if (!c.infinite_tail()) require(k <= c.finite_ground(), "restriction beyond the ground set");
  std::vector<ConsecutivePartition::Size> out;
  ConsecutivePartition::Size used = 0;
  for (auto s : c.sizes()) {
    if (used >= k) break;
    out.push_back(std::min(s, k - used));
    used += out.back();
  }
  if (used < k) out.push_back(k - used);
  return ConsecutivePartition(std::move(out));
}

double distance(const ConsecutivePartition& c, const ConsecutivePartition& d) {
  require(c.infinite_tail() == d.infinite_tail() && (c.infinite_tail() || c.finite_ground() == d.finite_ground()),
          "distance needs partitions of the same ground set");
  // restrictions to [n] agree iff the block ends below n agree
  std::size_t i = 0, j = 0;
  ConsecutivePartition::Size ec = 0, ed = 0;
  const auto& a = c.sizes();
  const auto& b = d.sizes();
  while (true) {
    bool more_a = i < a.size();
    bool more_b = j < b.size();
    if (!more_a && !more_b) return 0.0;
    ConsecutivePartition::Size na = more_a ? ec + a[i] : 0;
    ConsecutivePartition::Size nb = more_b ? ed + b[j] : 0;
    if (more_a && more_b && na == nb) {
      ec = na;
      ed = nb;
      ++i;
      ++j;
      continue;
    }
    ConsecutivePartition::Size first;
    if (!more_a) first = nb;
    else if (!more_b) first = na;
    else first = std::min(na, nb);
    // a trailing end at the common ground size is not a disagreement
    if (!c.infinite_tail() && first == c.finite_ground()) return 0.0;
    return 1.0 / double(first);
  }
}

ConsecutivePartition merge_pattern(std::uint64_t m, const MergeEvent& e) {
  require(e.j >= 1, "merge index must be >= 1");
  std::vector<ConsecutivePartition::Size> d;
  if (e.boundary) {
    require(e.j < m, "boundary merge needs j < m");
    d.assign(e.j - 1, 1);
    d.push_back(m - e.j + 1);
  } else {
    require(e.k >= 2 && e.j + e.k - 1 <= m, "interior merge needs k >= 2 and j + k - 1 <= m");
    d.assign(e.j - 1, 1);
    d.push_back(e.k);
    d.insert(d.end(), m - (e.j + e.k - 1), 1);
  }
  return ConsecutivePartition(std::move(d));
}

ConsecutivePartition apply_merge(const ConsecutivePartition& c, const MergeEvent& e) {
  require(!c.infinite_tail(), "apply_merge needs a finite partition");
  const auto m = c.block_count();
  auto sizes = c.sizes();
  std::uint64_t first = e.j - 1;
  std::uint64_t last;
  if (e.boundary) {
    require(e.j >= 1 && e.j < m, "boundary merge needs 1 <= j < m");
    last = m - 1;
  } else {
    require(e.j >= 1 && e.k >= 2 && e.j + e.k - 1 <= m, "interior merge needs k >= 2 and j + k - 1 <= m");
    last = first + e.k - 1;
  }
  ConsecutivePartition::Size sum = 0;
  for (auto i = first; i <= last; ++i) sum += sizes[i];
  sizes[first] = sum;
  sizes.erase(sizes.begin() + first + 1, sizes.begin() + last + 1);
  return ConsecutivePartition(std::move(sizes));
}

}  // namespace csbp
