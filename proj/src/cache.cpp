#include "adgen/cache.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "adgen/error.hpp"

namespace adgen {

namespace fs = std::filesystem;

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ResponseCache::entry_path(const std::string& prompt_hash) const {
  if (prompt_hash.size() < 2) throw PreconditionError("cache: prompt hash too short");
  return dir_ / prompt_hash.substr(0, 2) / (prompt_hash + ".json");
}

std::optional<ADOutput> ResponseCache::lookup(const std::string& prompt_hash) const {
  const auto path = entry_path(prompt_hash);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    auto out = ad_output_from_json(buf.str());
    if (out.prompt_hash != prompt_hash) throw InputError("prompt hash mismatch");
    return out;
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring corrupt cache entry " << path.string() << ": " << e.what()
              << "\n";
    return std::nullopt;
  }
}

void ResponseCache::store(const ADOutput& output) const {
  const auto path = entry_path(output.prompt_hash);
  fs::create_directories(path.parent_path());
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
  const auto tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cache: cannot write " + tmp.string());
    out << to_json_line(output) << "\n";
  }
  fs::rename(tmp, path);
}

}  // namespace adgen
