#pragma once

// Binary matrix container shared by the CLI commands.
//
// Layout (little-endian):
//   8 bytes   magic "HYPOCTL\0"
//   u32       format version (1)
//   u32       metadata length L, then L bytes of "key=value\n" lines
//   u32       array count
//   per array: u32 name length, name bytes, u64 rows, u64 cols,
//              rows * cols f64 values in row-major order

#include <map>
#include <string>
#include <vector>

#include "matkernel.hpp"

namespace hypoctl {

struct NamedArray {
  std::string name;
  Matrix values;
};

struct Container {
  std::map<std::string, std::string> metadata;
  std::vector<NamedArray> arrays;

  const Matrix& array(const std::string& name) const;
  bool has(const std::string& name) const;
  void add(std::string name, Matrix values);
};

std::string encode_container(const Container& c);
Container decode_container(const std::string& bytes);

/// Writes through a temporary file and renames it into place.
void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

/// Differences between expected and stored metadata over the expected keys,
/// one "key: stored=..., expected=..." line each.
std::vector<std::string> metadata_diff(
    const std::map<std::string, std::string>& stored,
    const std::map<std::string, std::string>& expected);

}  // namespace hypoctl
