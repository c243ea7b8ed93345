#include "sparsedoa/textio.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace sparsedoa {

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buffer, end);
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  const auto tmp = dir / (path.filename().string() + ".tmp-" +
                          std::to_string(::getpid()) + "-" +
                          std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.good())
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out.good()) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " onto " + path.string() +
                             ": " + ec.message());
  }
}

}  // namespace sparsedoa
