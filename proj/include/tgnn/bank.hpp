#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

namespace tgnn {

// One anchor: a labeled graph's embeddings in both spaces, stored as plain
// value arrays. Nothing here participates in differentiation, so no gradient
// can ever reach a stored anchor.
struct BankEntry {
  std::int64_t graph_id = -1;
  std::vector<double> z;  // message passing space
  std::vector<double> w;  // kernel space
};

// Fixed-capacity FIFO queue of anchors.
class MemoryBank {
 public:
  explicit MemoryBank(size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("memory bank: capacity must be >= 1");
  }

  void push(BankEntry entry) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(entry));
  }

  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const BankEntry& at(size_t i) const { return entries_[i]; }
  const std::deque<BankEntry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

 private:
  size_t capacity_;
  std::deque<BankEntry> entries_;
};

}  // namespace tgnn
