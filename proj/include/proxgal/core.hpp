#pragma once
// Shared basic types and error handling.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace proxgal {

// Point in physical coordinates; y component unused for 1D meshes.
using Pt = std::array<double, 2>;
using Vec = Eigen::VectorXd;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PROXGAL_REQUIRE(cond, msg)                 \
  do {                                             \
    if (!(cond)) throw ::proxgal::Error(msg);      \
  } while (0)

inline double dist(const Pt& a, const Pt& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

// FNV-1a content hash, used in report manifests.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);

}  // namespace proxgal
