#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tmq {

// %.17g: round-trips every double.
std::string format_double(double v);

// Joins already-formatted cells; quotes cells containing ',', '"' or newlines.
std::string csv_row(const std::vector<std::string>& cells);

// All artifact writes of a run go through here. Names are plain relative
// paths; anything resolving outside the root is refused.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path resolve(const std::string& name) const;

  void write_text(const std::string& name, const std::string& content);
  void write_binary(const std::string& name, const void* data, std::size_t bytes);

  // Names written so far, in order.
  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

}  // namespace tmq
