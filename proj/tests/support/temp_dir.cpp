#include "support/temp_dir.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace grembed::test {

TempDir::TempDir() {
  auto base = std::filesystem::temp_directory_path() / "grembed_test_XXXXXX";
  std::string buf = base.string();
  if (!::mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed for " + buf);
  path_ = buf;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

} // namespace grembed::test
