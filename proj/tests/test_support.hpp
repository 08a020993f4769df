#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#ifndef MSCE_TEST_DATA_DIR
#error "MSCE_TEST_DATA_DIR must point at tests/data"
#endif

namespace msce::test {

inline nlohmann::json load_json(const std::string& name) {
  std::ifstream in(std::filesystem::path(MSCE_TEST_DATA_DIR) / name);
  if (!in) throw std::runtime_error("missing test data file " + name);
  return nlohmann::json::parse(in);
}

}  // namespace msce::test
