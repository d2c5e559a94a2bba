#pragma once

#include <stdexcept>
#include <string>

namespace pbit {

// Error classes map onto distinct CLI exit codes.
struct ConfigError : std::runtime_error {
	explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
	explicit DataError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace pbit
