// Editable text assets (prompt templates and lexicons) resolved by relative id.

#ifndef ADVFORGE_PROMPT_LIBRARY_H_
#define ADVFORGE_PROMPT_LIBRARY_H_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace advforge {

// Directory holding the bundled assets. Honors ADVFORGE_ASSET_DIR, falling
// back to the source tree location baked in at build time.
std::filesystem::path default_asset_dir();

// Prompt templates live under <asset dir>/prompts.
std::filesystem::path default_prompt_dir();

// Loads "<root>/<id>.txt" on first use. Templates registered in memory with
// add() take precedence over files.
class PromptLibrary {
 public:
  explicit PromptLibrary(std::filesystem::path root = default_prompt_dir());

  const std::filesystem::path& root() const { return root_; }

  void add(std::string id, std::string text);
  bool contains(std::string_view id) const;
  std::optional<std::string> find(std::string_view id) const;
  // Throws kIo when the asset is missing.
  std::string get(std::string_view id) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::string, std::less<>> cache_;
};

// Replaces every "{{name}}" with its value. Unknown placeholders are left.
std::string render_template(
    std::string_view tpl, const std::vector<std::pair<std::string, std::string>>& vars);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace advforge

#endif  // ADVFORGE_PROMPT_LIBRARY_H_
