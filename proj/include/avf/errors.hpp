#pragma once

#include <stdexcept>
#include <string>

namespace avf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// invalid input or configuration (CLI exit code 1)
struct InputError : Error {
    using Error::Error;
};

struct OverstrainError : InputError { using InputError::InputError; };
struct ProtocolError : InputError { using InputError::InputError; };
struct DomainError : InputError { using InputError::InputError; };
struct PreconditionError : InputError { using InputError::InputError; };
struct UnknownPresetError : InputError { using InputError::InputError; };
struct EmptyTraceError : InputError { using InputError::InputError; };
struct DegenerateGroupError : InputError { using InputError::InputError; };
struct IoError : InputError { using InputError::InputError; };

// errors that carry a dotted key path into the config document
struct KeyedError : InputError {
    KeyedError(std::string path, const std::string& msg)
        : InputError(path + ": " + msg), key_path(std::move(path)) {}
    std::string key_path;
};
struct ConfigError : KeyedError { using KeyedError::KeyedError; };
struct ParseError : KeyedError { using KeyedError::KeyedError; };
struct ValidationError : KeyedError { using KeyedError::KeyedError; };

// numerical failures (CLI exit code 2)
struct SolverError : Error {
    using Error::Error;
};
struct ConvergenceError : SolverError { using SolverError::SolverError; };
struct NoProgressError : SolverError { using SolverError::SolverError; };
struct InfeasibleError : SolverError { using SolverError::SolverError; };

} // namespace avf
