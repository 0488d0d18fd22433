/**
 * @file Errors.hpp
 * @brief Error taxonomy: configuration, geometry, solver, and I/O failures
 *        are distinct so the CLI can map them to exit codes.
 */
#ifndef EFRAC_ERRORS_HPP
#define EFRAC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace efrac {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace efrac

#endif
