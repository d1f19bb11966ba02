#ifndef ADVFORGE_TESTS_TEST_UTIL_H_
#define ADVFORGE_TESTS_TEST_UTIL_H_

#include <sys/wait.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <chrono>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <system_error>

#include "advforge/core.h"

namespace advforge::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("advforge-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline EvalSample dialogue(std::string id, std::string context, std::string response,
                           std::optional<std::string> reference = std::nullopt) {
  EvalSample s;
  s.id = std::move(id);
  s.task = TaskKind::kDialogue;
  s.context = std::move(context);
  s.response = std::move(response);
  s.reference = std::move(reference);
  return s;
}

inline EvalSample question(std::string id, std::string context, std::string response,
                           std::string answer) {
  EvalSample s;
  s.id = std::move(id);
  s.task = TaskKind::kQuestionEval;
  s.context = std::move(context);
  s.response = std::move(response);
  s.answer = std::move(answer);
  return s;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;  // stdout only
};

// Runs a shell command and captures its stdout.
inline CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace advforge::testing

#endif  // ADVFORGE_TESTS_TEST_UTIL_H_
