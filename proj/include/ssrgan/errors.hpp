#pragma once

#include <stdexcept>
#include <string>

namespace ssrgan {

/// Shape or extent violation (mismatched operands, collapsed output, ...).
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside its documented range (corruption level, resize target, ...).
struct ValueError : std::runtime_error {
    explicit ValueError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid model or run configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable, truncated or unsupported image file.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure (missing file, unwritable path, short read).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed checkpoint: bad magic, version, directory entry or payload CRC.
struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite loss or gradient; the run aborts with a diagnostic.
struct TrainingDivergenceError : std::runtime_error {
    explicit TrainingDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// API misuse that is not a shape problem (e.g. backward from a non-scalar).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

} // namespace ssrgan
