#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string_view>
#include <vector>

#include "onebit/query.hpp"

namespace onebit {

enum class Phase : std::uint8_t { Localization = 0, Refinement = 1, Baseline = 2 };

inline std::string_view phase_name(Phase p) {
  constexpr std::string_view names[] = {"localization", "refinement", "baseline"};
  return names[static_cast<std::size_t>(p)];
}

/// Accounting label attached to every query: phase, refinement region and batch.
struct Tag {
  Phase phase = Phase::Localization;
  int region = 0;  // 0 outside refinement
  int batch = -1;  // -1 outside refinement
};

struct TranscriptEntry {
  Phase phase;
  Query query;
  bool bit;
};

/// Interaction history. Counters are always kept; (query, bit) entries are
/// stored only when recording is enabled. Raw samples never appear here.
class Transcript {
 public:
  explicit Transcript(bool record_entries = false) : recording_(record_entries) {}

  void add(const Tag& tag, std::uint64_t m) {
    phase_counts_[static_cast<std::size_t>(tag.phase)] += m;
    total_ += m;
    if (tag.region != 0) region_counts_[tag.region] += m;
    if (tag.batch >= 0) {
      const auto b = static_cast<std::size_t>(tag.batch);
      if (batch_counts_.size() <= b) batch_counts_.resize(b + 1, 0);
      batch_counts_[b] += m;
    }
  }

  void record(const Tag& tag, const Query& q, bool bit) {
    add(tag, 1);
    if (recording_) entries_.push_back({tag.phase, q, bit});
  }

  [[nodiscard]] bool recording() const noexcept { return recording_; }
  [[nodiscard]] std::uint64_t total() const noexcept { return total_; }
  [[nodiscard]] std::uint64_t phase_count(Phase p) const noexcept {
    return phase_counts_[static_cast<std::size_t>(p)];
  }
  [[nodiscard]] std::uint64_t region_count(int region) const {
    auto it = region_counts_.find(region);
    return it == region_counts_.end() ? 0 : it->second;
  }
  [[nodiscard]] const std::map<int, std::uint64_t>& region_counts() const noexcept {
    return region_counts_;
  }
  [[nodiscard]] const std::vector<std::uint64_t>& batch_counts() const noexcept {
    return batch_counts_;
  }
  [[nodiscard]] const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }

  /// CSV with header `phase,query_kind,param1,param2,bit`.
  void write_csv(std::ostream& os) const {
    const auto old_precision = os.precision(17);
    os << "phase,query_kind,param1,param2,bit\n";
    for (const auto& e : entries_) {
      const auto [p1, p2] = query_params(e.query);
      os << phase_name(e.phase) << ',' << kind_name(e.query) << ',' << p1 << ',' << p2 << ','
         << (e.bit ? 1 : 0) << '\n';
    }
    os.precision(old_precision);
  }

 private:
  bool recording_;
  std::uint64_t total_ = 0;
  std::array<std::uint64_t, 3> phase_counts_{};
  std::map<int, std::uint64_t> region_counts_;
  std::vector<std::uint64_t> batch_counts_;
  std::vector<TranscriptEntry> entries_;
};

}  // namespace onebit
