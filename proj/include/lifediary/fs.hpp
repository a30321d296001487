#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lifediary/errors.hpp"

namespace lifediary {

inline std::string read_text_file(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingFileError("file not found: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFileError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lifediary
