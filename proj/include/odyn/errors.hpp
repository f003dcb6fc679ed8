#ifndef ODYN_ERRORS_HPP
#define ODYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace odyn {

/// A model parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A malformed or inconsistent run configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace odyn

#endif // ODYN_ERRORS_HPP
