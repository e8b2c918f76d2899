#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace loopybp {

/// Max-priority queue over dense integer ids with O(log n) insert, update,
/// remove and pop. Ties break toward the entry inserted (or reprioritized)
/// earliest, so replacing an entry sends it to the back of its priority
/// class. Ids must be < the capacity given at construction and appear at
/// most once.
class IndexedPriorityQueue {
 public:
  explicit IndexedPriorityQueue(std::int32_t capacity)
      : priority_(capacity, 0.0), seq_(capacity, 0), pos_(capacity, -1) {}

  bool empty() const { return heap_.empty(); }
  std::int32_t size() const { return static_cast<std::int32_t>(heap_.size()); }
  bool contains(std::int32_t id) const { return pos_[id] >= 0; }
  double priority_of(std::int32_t id) const {
    assert(contains(id));
    return priority_[id];
  }

  void insert(std::int32_t id, double priority) {
    assert(!contains(id));
    priority_[id] = priority;
    seq_[id] = next_seq_++;
    pos_[id] = static_cast<std::int32_t>(heap_.size());
    heap_.push_back(id);
    sift_up(pos_[id]);
  }

  /// Reassigns the priority of a queued id with a fresh tie-break sequence
  /// number, equivalent to remove + insert.
  void update(std::int32_t id, double priority) {
    assert(contains(id));
    priority_[id] = priority;
    seq_[id] = next_seq_++;
    sift_up(pos_[id]);
    sift_down(pos_[id]);
  }

  /// insert() if absent, update() otherwise.
  void replace(std::int32_t id, double priority) {
    if (contains(id))
      update(id, priority);
    else
      insert(id, priority);
  }

  void remove(std::int32_t id) {
    assert(contains(id));
    const std::int32_t at = pos_[id];
    const std::int32_t last = static_cast<std::int32_t>(heap_.size()) - 1;
    swap_nodes(at, last);
    heap_.pop_back();
    pos_[id] = -1;
    if (at <= last - 1) {
      sift_up(at);
      sift_down(at);
    }
  }

  std::int32_t peek() const {
    assert(!empty());
    return heap_[0];
  }
  double peek_priority() const { return priority_[peek()]; }

  std::int32_t pop() {
    const std::int32_t id = peek();
    remove(id);
    return id;
  }

 private:
  bool higher(std::int32_t a, std::int32_t b) const {
    if (priority_[a] != priority_[b]) return priority_[a] > priority_[b];
    return seq_[a] < seq_[b];
  }

  void swap_nodes(std::int32_t i, std::int32_t j) {
    if (i == j) return;
    std::swap(heap_[i], heap_[j]);
    pos_[heap_[i]] = i;
    pos_[heap_[j]] = j;
  }

  void sift_up(std::int32_t i) {
    while (i > 0) {
      const std::int32_t parent = (i - 1) / 2;
      if (!higher(heap_[i], heap_[parent])) break;
      swap_nodes(i, parent);
      i = parent;
    }
  }

  void sift_down(std::int32_t i) {
    const auto n = static_cast<std::int32_t>(heap_.size());
    for (;;) {
      std::int32_t best = i;
      const std::int32_t l = 2 * i + 1, r = 2 * i + 2;
      if (l < n && higher(heap_[l], heap_[best])) best = l;
      if (r < n && higher(heap_[r], heap_[best])) best = r;
      if (best == i) return;
      swap_nodes(i, best);
      i = best;
    }
  }

  std::vector<double> priority_;
  std::vector<std::uint64_t> seq_;
  std::vector<std::int32_t> pos_;
  std::vector<std::int32_t> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace loopybp
