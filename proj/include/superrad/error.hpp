#pragma once

#include <stdexcept>
#include <string>

namespace superrad {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable code (e.g. "NegativeRate", "DimensionCap") that the CLI
/// copies verbatim into its error record.
class Error : public std::runtime_error
{
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), m_kind(std::move(kind))
    {
    }

    const std::string& kind() const noexcept { return m_kind; }

private:
    std::string m_kind;
};

}  // namespace superrad
