#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pathloss {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input files and configuration.
class FormatError : public Error { using Error::Error; };
class UnsupportedResolutionError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class EmptyInputError : public Error { using Error::Error; };

// Raster queries.
class OutOfCoverageError : public Error { using Error::Error; };
class NodataError : public Error { using Error::Error; };

// Geometry and profiles.
class InvalidWidthError : public Error { using Error::Error; };
class DegenerateLinkError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class DegenerateProfileError : public Error { using Error::Error; };

class ExtractionError : public Error {
 public:
  ExtractionError(std::uint64_t link_id, const std::string& reason)
      : Error("link " + std::to_string(link_id) + ": " + reason), link_id_(link_id) {}
  std::uint64_t link_id() const { return link_id_; }

 private:
  std::uint64_t link_id_;
};

// Features, splits, models.
class DomainError : public Error { using Error::Error; };
class UndefinedAngleError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

}  // namespace pathloss
