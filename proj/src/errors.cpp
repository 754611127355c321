#include "cxlag/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace cxlag {

SyntaxError::SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string &found)
    : Error(fmt::format("syntax error at offset {}: expected one of {{{}}}, found {}", position,
                        fmt::join(expected, ", "), found)),
      position_(position), expected_(std::move(expected))
{
}

UnknownFunction::UnknownFunction(std::string name)
    : Error(fmt::format("unknown function '{}'", name)), name_(std::move(name))
{
}

UnboundSymbol::UnboundSymbol(std::string name)
    : Error(fmt::format("unbound symbol '{}'", name)), name_(std::move(name))
{
}

SchemaError::SchemaError(std::string field, const std::string &problem)
    : Error(fmt::format("scenario field '{}': {}", field, problem)), field_(std::move(field))
{
}

} // namespace cxlag
