#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace moran {

// Exchangeable population state: one entry per occupied fitness level.
// Entries are kept sorted by level, counts are always >= 1 and sum to the
// (fixed) population size. An optional tag overlay marks a sub-lineage;
// 0 <= tagged <= count per level.
class LevelHistogram {
 public:
  struct Entry {
    std::int64_t level = 0;
    std::int64_t count = 0;
    std::int64_t tagged = 0;
  };

  LevelHistogram() = default;

  static LevelHistogram single_level(std::int64_t n, std::int64_t level = 0);
  static LevelHistogram from_levels(
      std::span<const std::pair<std::int64_t, std::int64_t>> level_counts);

  std::span<const Entry> entries() const { return entries_; }
  std::int64_t total() const { return total_; }
  bool empty() const { return entries_.empty(); }

  std::int64_t count_at(std::int64_t level) const;
  std::int64_t tagged_at(std::int64_t level) const;

  std::int64_t max_level() const;
  std::int64_t min_level() const;

  bool tagging_active() const { return tagging_; }
  std::int64_t tagged_total() const;

  // Activates the tag overlay with `count` tagged individuals at `level`,
  // replacing any previous overlay.
  void activate_tags(std::int64_t level, std::int64_t count);
  void clear_tags();

  // Moves one individual from `from` to `to`. `remove_tagged` says whether
  // the removed individual carried a tag; `add_tagged` whether the one added
  // at `to` does. Tag flags are ignored while the overlay is inactive.
  void move_one(std::int64_t from, std::int64_t to, bool remove_tagged,
                bool add_tagged);

  // JSON text {"t": ..., "levels": [[level, count], ...]} sorted by level.
  std::string snapshot_json(double t) const;

  // Validates all invariants; throws std::logic_error on violation.
  void check_valid() const;

  bool operator==(const LevelHistogram&) const = default;

 private:
  std::vector<Entry>::iterator find(std::int64_t level);
  std::vector<Entry>::const_iterator find(std::int64_t level) const;

  std::vector<Entry> entries_;
  std::int64_t total_ = 0;
  bool tagging_ = false;
};

}  // namespace moran
