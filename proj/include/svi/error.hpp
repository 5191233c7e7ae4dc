#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace svi {

/// Raised when a file or directory cannot be read or written. Carries the
/// offending path so callers can report it verbatim.
class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(what + ": " + path.string()), path_(path) {}

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Raised by configuration validation. Lists every offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::vector<std::string> keys, const std::string& what)
        : std::invalid_argument(what), keys_(std::move(keys)) {}
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}

    const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
    std::vector<std::string> keys_;
};

}  // namespace svi
