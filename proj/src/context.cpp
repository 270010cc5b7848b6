#include "adgen/context.hpp"

#include <algorithm>
#include <limits>

#include "adgen/error.hpp"

namespace adgen {

std::vector<Subtitle> select_subtitle_window(std::span<const Subtitle> subtitles,
                                             std::span<const double> ad_timestamps,
                                             double current_start_s, int T) {
  if (T < 0) throw PreconditionError("context length T must be >= 0");
  if (T == 0) return {};
  if (!std::is_sorted(ad_timestamps.begin(), ad_timestamps.end())) {
    throw PreconditionError("AD timestamps must be sorted");
  }
  const auto prior_end =
      std::lower_bound(ad_timestamps.begin(), ad_timestamps.end(), current_start_s);
  const auto prior = static_cast<std::size_t>(prior_end - ad_timestamps.begin());
  const double t0 = prior >= static_cast<std::size_t>(T)
                        ? ad_timestamps[prior - static_cast<std::size_t>(T)]
                        : -std::numeric_limits<double>::infinity();

  std::vector<Subtitle> out;
  for (const auto& s : subtitles) {
    if (s.start_s >= t0 && s.start_s < current_start_s) out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Subtitle& a, const Subtitle& b) { return a.start_s < b.start_s; });
  return out;
}

std::vector<TimedText> select_prev_ads(std::span<const TimedText> generated_ads,
                                       double current_start_s, int limit) {
  std::vector<TimedText> prior;
  for (const auto& ad : generated_ads) {
    if (ad.timestamp_s < current_start_s) prior.push_back(ad);
  }
  std::stable_sort(prior.begin(), prior.end(), [](const TimedText& a, const TimedText& b) {
    return a.timestamp_s < b.timestamp_s;
  });
  const auto keep = static_cast<std::size_t>(std::max(limit, 0));
  if (prior.size() > keep) prior.erase(prior.begin(), prior.end() - static_cast<std::ptrdiff_t>(keep));
  return prior;
}

ContextWindow build_context(std::vector<Subtitle> subtitles, std::vector<TimedText> previous_ads,
                            int T) {
  std::stable_sort(subtitles.begin(), subtitles.end(),
                   [](const Subtitle& a, const Subtitle& b) { return a.start_s < b.start_s; });
  std::stable_sort(previous_ads.begin(), previous_ads.end(),
                   [](const TimedText& a, const TimedText& b) { return a.timestamp_s < b.timestamp_s; });
  return {std::move(subtitles), std::move(previous_ads), T};
}

std::vector<ContextEntry> ContextWindow::entries() const {
  std::vector<ContextEntry> out;
  out.reserve(subtitles.size() + previous_ads.size());
  for (const auto& s : subtitles) out.push_back({ContextEntry::Kind::subtitle, s.start_s, s.text});
  for (const auto& a : previous_ads) {
    out.push_back({ContextEntry::Kind::previous_ad, a.timestamp_s, a.text});
  }
  std::stable_sort(out.begin(), out.end(), [](const ContextEntry& a, const ContextEntry& b) {
    return a.timestamp_s < b.timestamp_s;
  });
  return out;
}

}  // namespace adgen
