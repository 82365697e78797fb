#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vblob {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed configuration or snapshot; carries the offending line (0 if unknown) and field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::string field = {})
        : std::runtime_error(what), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// Input that is well formed but degenerate (empty support, zero field).
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state produced during time integration.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::size_t index, std::size_t step, const std::string& what_kind = "blob")
        : std::runtime_error("blow-up detected: " + what_kind + " " + std::to_string(index) +
                             " non-finite at step " + std::to_string(step)),
          index_(index), step_(step) {}

    std::size_t index() const noexcept { return index_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t index_;
    std::size_t step_;
};

}  // namespace vblob
