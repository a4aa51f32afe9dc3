#pragma once

#include <stdexcept>
#include <string>

namespace vvae {

// Shape/width/divisibility violations.
struct shape_error : std::runtime_error {
  explicit shape_error(const std::string& m) : std::runtime_error(m) {}
};

// Bad user-supplied data: files, ranges, parameters.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& m) : std::runtime_error(m) {}
};

// Checkpoint/config incompatibilities.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& m) : std::runtime_error(m) {}
};

// Filesystem failures.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace vvae
