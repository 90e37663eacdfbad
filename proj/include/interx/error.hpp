#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace interx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A design or Gram matrix is numerically singular.
class RankDeficient : public Error {
 public:
  explicit RankDeficient(double condition, std::optional<std::string> unit = std::nullopt,
                         const std::string& what = "rank-deficient matrix");

  double condition() const noexcept { return condition_; }
  const std::optional<std::string>& unit() const noexcept { return unit_; }

 private:
  double condition_;
  std::optional<std::string> unit_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// CSV ingestion errors.
class DataError : public Error {
 public:
  using Error::Error;
};

class MissingColumn : public DataError {
 public:
  explicit MissingColumn(const std::string& column);
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class UnbalancedPanel : public DataError {
 public:
  UnbalancedPanel(const std::string& unit, std::size_t expected, std::size_t found);
  const std::string& unit() const noexcept { return unit_; }

 private:
  std::string unit_;
};

class NonConstantH : public DataError {
 public:
  NonConstantH(const std::string& unit, const std::string& column);
  const std::string& unit() const noexcept { return unit_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::string unit_;
  std::string column_;
};

class NonFiniteValue : public DataError {
 public:
  NonFiniteValue(std::size_t row, const std::string& column);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class MissingWeights : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NoConstantColumn : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ZeroDegreesOfFreedom : public Error {
 public:
  explicit ZeroDegreesOfFreedom(const std::string& unit);
  const std::string& unit() const noexcept { return unit_; }

 private:
  std::string unit_;
};

class TooFewClusters : public Error {
 public:
  using Error::Error;
};

class DegenerateResample : public Error {
 public:
  using Error::Error;
};

/// Invalid simulator or experiment configuration; `field` is a dotted path.
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(const std::string& field, const std::string& reason);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ScenarioUnsupported : public Error {
 public:
  using Error::Error;
};

class ExperimentAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace interx
