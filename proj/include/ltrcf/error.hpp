#pragma once

#include <stdexcept>
#include <string>

namespace ltrcf {

/// Broad failure classes. The CLI maps each to its own exit status.
enum class error_kind {
  invalid_argument = 10,
  malformed_record = 11,
  schema_mismatch = 12,
  config_invalid = 13,
  degenerate = 14,
  calibration_failure = 15,
  no_oob_trees = 16,
  io = 17,
  before_entry = 18,
};

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

inline error invalid_argument(const std::string& what) { return {error_kind::invalid_argument, what}; }
inline error malformed_record(const std::string& what) { return {error_kind::malformed_record, what}; }
inline error schema_mismatch(const std::string& what) { return {error_kind::schema_mismatch, what}; }
inline error config_invalid(const std::string& what) { return {error_kind::config_invalid, what}; }
inline error before_entry(const std::string& what) { return {error_kind::before_entry, what}; }
inline error degenerate(const std::string& what) { return {error_kind::degenerate, what}; }
inline error calibration_failure(const std::string& what) { return {error_kind::calibration_failure, what}; }
inline error no_oob_trees(const std::string& what) { return {error_kind::no_oob_trees, what}; }
inline error io_error(const std::string& what) { return {error_kind::io, what}; }

}  // namespace ltrcf
