#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rotip {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidCommand : public Error
{
public:
    using Error::Error;
};

/// Contact point is no longer within tolerance of one of the two bodies.
class StaleContact : public Error
{
public:
    using Error::Error;
};

class GridMismatch : public Error
{
public:
    using Error::Error;
};

class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

class NoContact : public Error
{
public:
    using Error::Error;
};

class NotGrasped : public Error
{
public:
    using Error::Error;
};

class NoFabric : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error
{
public:
    ValidationError(std::string path, const std::string& message)
        : Error(path + ": " + message), path_(std::move(path))
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Wraps an error raised while executing the command at `command_index`.
class SimulationError : public Error
{
public:
    SimulationError(std::size_t command_index, const std::string& message)
        : Error("command " + std::to_string(command_index) + ": " + message), index_(command_index)
    {
    }
    std::size_t command_index() const { return index_; }

private:
    std::size_t index_;
};

} // namespace rotip
