#pragma once

#include <stdexcept>
#include <string>

namespace urlbench {

/// Thrown for filesystem and socket-level failures. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A structurally invalid row in a CSV/TSV input. Carries the 1-based line.
class MalformedRowError : public std::runtime_error {
 public:
  MalformedRowError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

/// Bad configuration: unknown key, unparsable value, missing required path.
/// CLI exit code 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss. CLI exit code 4.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

class EmptyCorpusError : public std::runtime_error {
 public:
  explicit EmptyCorpusError(const std::string& what) : std::runtime_error(what) {}
};

class EmptyCalibrationError : public std::runtime_error {
 public:
  explicit EmptyCalibrationError(const std::string& what) : std::runtime_error(what) {}
};

/// Metric inputs need at least one positive and one negative sample.
class DegenerateLabelsError : public std::runtime_error {
 public:
  explicit DegenerateLabelsError(const std::string& what) : std::runtime_error(what) {}
};

/// The latency bench needs at least 50 URLs.
class InsufficientUrlsError : public std::runtime_error {
 public:
  explicit InsufficientUrlsError(const std::string& what) : std::runtime_error(what) {}
};

class VersionMismatchError : public std::runtime_error {
 public:
  explicit VersionMismatchError(const std::string& what) : std::runtime_error(what) {}
};

class ChecksumMismatchError : public std::runtime_error {
 public:
  explicit ChecksumMismatchError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace urlbench
