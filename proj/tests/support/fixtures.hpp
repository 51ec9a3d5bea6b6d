#pragma once

#include <filesystem>
#include <string>

#include "staccato/sfa.hpp"
#include "staccato/store.hpp"

namespace staccato::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(STACCATO_FIXTURES) / name;
}

inline Sfa load_fixture(const std::string& name) { return parse_sfa(read_file(fixture_path(name))); }

// A fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace staccato::testing
