#pragma once

#include <span>
#include <string>
#include <vector>

#include "adgen/ingest.hpp"

namespace adgen {

struct TimedText {
  double timestamp_s = 0.0;
  std::string text;
  bool operator==(const TimedText&) const = default;
};

struct ContextEntry {
  enum class Kind { subtitle, previous_ad };
  Kind kind = Kind::subtitle;
  double timestamp_s = 0.0;
  std::string text;
};

struct ContextWindow {
  std::vector<Subtitle> subtitles;
  std::vector<TimedText> previous_ads;
  int T = 0;

  bool empty() const { return subtitles.empty() && previous_ads.empty(); }
  // Subtitles and previous ADs merged by time; subtitles first on ties.
  std::vector<ContextEntry> entries() const;
};

// Subtitles with t0 <= start_s < current_start_s, where t0 is the T-th AD
// timestamp before current_start_s (unbounded when fewer exist).
std::vector<Subtitle> select_subtitle_window(std::span<const Subtitle> subtitles,
                                             std::span<const double> ad_timestamps,
                                             double current_start_s, int T = 100);

// The `limit` latest ADs strictly before current_start_s, oldest first.
std::vector<TimedText> select_prev_ads(std::span<const TimedText> generated_ads,
                                       double current_start_s, int limit);

ContextWindow build_context(std::vector<Subtitle> subtitles,
                            std::vector<TimedText> previous_ads, int T = 0);

}  // namespace adgen
