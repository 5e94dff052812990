#include "tmq/io.hpp"

#include <cstdio>
#include <fstream>

#include "tmq/errors.hpp"

namespace tmq {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n\r") == std::string::npos) {
      out += c;
      continue;
    }
    out += '"';
    for (char ch : c) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  out += '\n';
  return out;
}

OutputDir::OutputDir(std::filesystem::path root) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw Error("cannot create output directory " + root.string() + ": " + ec.message());
  root_ = std::filesystem::weakly_canonical(root);
}

std::filesystem::path OutputDir::resolve(const std::string& name) const {
  const std::filesystem::path rel(name);
  if (name.empty() || rel.is_absolute() || rel.has_root_name())
    throw Error("artifact name '" + name + "' must be a relative path");
  const auto full = std::filesystem::weakly_canonical(root_ / rel);
  const auto back = full.lexically_relative(root_);
  if (back.empty() || *back.begin() == "..")
    throw Error("artifact '" + name + "' would be written outside " + root_.string());
  return full;
}

void OutputDir::write_text(const std::string& name, const std::string& content) {
  write_binary(name, content.data(), content.size());
}

void OutputDir::write_binary(const std::string& name, const void* data, std::size_t bytes) {
  const auto path = resolve(name);
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw Error("write failed for " + path.string());
  written_.push_back(name);
}

}  // namespace tmq
