#include "svshrink/errors.hpp"

namespace svshrink {

ParseError::ParseError(const std::string& what, std::size_t line)
    : ContractError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

DegenerateSpectrumError::DegenerateSpectrumError(const std::string& what, std::ptrdiff_t first,
                                                 std::ptrdiff_t second)
    : NumericalError(what), first_(first), second_(second) {}

}  // namespace svshrink
