#include "advforge/prompt_library.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "advforge/core.h"

#ifndef ADVFORGE_DEFAULT_ASSET_DIR
#define ADVFORGE_DEFAULT_ASSET_DIR "assets"
#endif

namespace advforge {

std::filesystem::path default_asset_dir() {
  if (const char* env = std::getenv("ADVFORGE_ASSET_DIR"); env && *env) return env;
  return ADVFORGE_DEFAULT_ASSET_DIR;
}

std::filesystem::path default_prompt_dir() { return default_asset_dir() / "prompts"; }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PromptLibrary::PromptLibrary(std::filesystem::path root) : root_(std::move(root)) {}

void PromptLibrary::add(std::string id, std::string text) {
  std::lock_guard lock(mu_);
  cache_[std::move(id)] = std::move(text);
}

bool PromptLibrary::contains(std::string_view id) const { return find(id).has_value(); }

std::optional<std::string> PromptLibrary::find(std::string_view id) const {
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  const std::filesystem::path path = root_ / (std::string(id) + ".txt");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  std::string text = read_text_file(path);
  cache_.emplace(std::string(id), text);
  return text;
}

std::string PromptLibrary::get(std::string_view id) const {
  if (auto text = find(id)) return *std::move(text);
  throw Error(ErrorCode::kIo,
              "missing asset '" + std::string(id) + "' under " + root_.string());
}

std::string render_template(
    std::string_view tpl, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    const std::size_t open = tpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(i));
      break;
    }
    const std::size_t close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tpl.substr(i));
      break;
    }
    out.append(tpl.substr(i, open - i));
    const std::string_view name = tpl.substr(open + 2, close - open - 2);
    bool replaced = false;
    for (const auto& [key, value] : vars) {
      if (key == name) {
        out.append(value);
        replaced = true;
        break;
      }
    }
    if (!replaced) out.append(tpl.substr(open, close + 2 - open));
    i = close + 2;
  }
  return out;
}

}  // namespace advforge
