#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "adgen/generation.hpp"

namespace adgen {

// Content-addressed store of generated ADs keyed by prompt hash:
// <dir>/<hash[0:2]>/<hash>.json. Writes go through a temp file and rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  // Missing or unreadable entries are misses; corrupt ones also log a warning.
  std::optional<ADOutput> lookup(const std::string& prompt_hash) const;
  void store(const ADOutput& output) const;
  std::filesystem::path entry_path(const std::string& prompt_hash) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace adgen
