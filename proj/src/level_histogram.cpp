#include "moran/level_histogram.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace moran {

LevelHistogram LevelHistogram::single_level(std::int64_t n, std::int64_t level) {
  if (n <= 0) throw std::invalid_argument("histogram: population must be positive");
  LevelHistogram h;
  h.entries_.push_back({level, n, 0});
  h.total_ = n;
  return h;
}

LevelHistogram LevelHistogram::from_levels(
    std::span<const std::pair<std::int64_t, std::int64_t>> level_counts) {
  LevelHistogram h;
  for (const auto& [level, count] : level_counts) {
    if (count <= 0) throw std::invalid_argument("histogram: counts must be >= 1");
    h.entries_.push_back({level, count, 0});
    h.total_ += count;
  }
  std::sort(h.entries_.begin(), h.entries_.end(),
            [](const Entry& a, const Entry& b) { return a.level < b.level; });
  for (std::size_t i = 1; i < h.entries_.size(); ++i)
    if (h.entries_[i].level == h.entries_[i - 1].level)
      throw std::invalid_argument("histogram: duplicate level");
  if (h.entries_.empty()) throw std::invalid_argument("histogram: empty");
  return h;
}

std::vector<LevelHistogram::Entry>::iterator LevelHistogram::find(std::int64_t level) {
  return std::lower_bound(
      entries_.begin(), entries_.end(), level,
      [](const Entry& e, std::int64_t l) { return e.level < l; });
}

std::vector<LevelHistogram::Entry>::const_iterator LevelHistogram::find(
    std::int64_t level) const {
  return std::lower_bound(
      entries_.begin(), entries_.end(), level,
      [](const Entry& e, std::int64_t l) { return e.level < l; });
}

std::int64_t LevelHistogram::count_at(std::int64_t level) const {
  auto it = find(level);
  return (it != entries_.end() && it->level == level) ? it->count : 0;
}

std::int64_t LevelHistogram::tagged_at(std::int64_t level) const {
  auto it = find(level);
  return (it != entries_.end() && it->level == level) ? it->tagged : 0;
}

std::int64_t LevelHistogram::max_level() const {
  if (entries_.empty()) throw std::logic_error("histogram: empty");
  return entries_.back().level;
}

std::int64_t LevelHistogram::min_level() const {
  if (entries_.empty()) throw std::logic_error("histogram: empty");
  return entries_.front().level;
}

std::int64_t LevelHistogram::tagged_total() const {
  std::int64_t t = 0;
  for (const auto& e : entries_) t += e.tagged;
  return t;
}

void LevelHistogram::activate_tags(std::int64_t level, std::int64_t count) {
  auto it = find(level);
  if (it == entries_.end() || it->level != level)
    throw std::invalid_argument("activate_tags: level not occupied");
  if (count < 0 || count > it->count)
    throw std::invalid_argument("activate_tags: count exceeds occupancy");
  for (auto& e : entries_) e.tagged = 0;
  it->tagged = count;
  tagging_ = true;
}

void LevelHistogram::clear_tags() {
  for (auto& e : entries_) e.tagged = 0;
  tagging_ = false;
}

void LevelHistogram::move_one(std::int64_t from, std::int64_t to,
                              bool remove_tagged, bool add_tagged) {
  auto src = find(from);
  if (src == entries_.end() || src->level != from || src->count == 0)
    throw std::logic_error("move_one: source level unoccupied");
  if (remove_tagged && src->tagged == 0)
    throw std::logic_error("move_one: no tag to remove");

  src->count -= 1;
  if (tagging_ && remove_tagged) src->tagged -= 1;
  if (src->tagged > src->count) src->tagged = src->count;
  if (src->count == 0) entries_.erase(src);

  auto dst = find(to);
  if (dst != entries_.end() && dst->level == to) {
    dst->count += 1;
    if (tagging_ && add_tagged) dst->tagged += 1;
  } else {
    entries_.insert(dst, {to, 1, (tagging_ && add_tagged) ? std::int64_t{1} : 0});
  }
}

std::string LevelHistogram::snapshot_json(double t) const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  std::string out = "{\"t\": ";
  out += buf;
  out += ", \"levels\": [";
  bool first = true;
  for (const auto& e : entries_) {
    if (!first) out += ", ";
    first = false;
    std::snprintf(buf, sizeof(buf), "[%lld, %lld]",
                  static_cast<long long>(e.level),
                  static_cast<long long>(e.count));
    out += buf;
  }
  out += "]}";
  return out;
}

void LevelHistogram::check_valid() const {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.count < 1) throw std::logic_error("histogram: empty level stored");
    if (e.tagged < 0 || e.tagged > e.count)
      throw std::logic_error("histogram: tag overlay out of range");
    if (i > 0 && entries_[i - 1].level >= e.level)
      throw std::logic_error("histogram: levels not strictly sorted");
    sum += e.count;
  }
  if (sum != total_) throw std::logic_error("histogram: total mismatch");
}

}  // namespace moran
