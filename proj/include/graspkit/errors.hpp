#pragma once

#include <stdexcept>
#include <string>

namespace grasp {

struct DegenerateNormal : std::runtime_error {
  explicit DegenerateNormal(const std::string& what) : std::runtime_error(what) {}
};

struct NonWatertightMesh : std::runtime_error {
  explicit NonWatertightMesh(const std::string& what) : std::runtime_error(what) {}
};

struct NotEnoughWrenches : std::runtime_error {
  explicit NotEnoughWrenches(const std::string& what) : std::runtime_error(what) {}
};

struct TooManyWrenches : std::runtime_error {
  explicit TooManyWrenches(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientSamples : std::runtime_error {
  explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularDirections : std::runtime_error {
  explicit SingularDirections(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace grasp
