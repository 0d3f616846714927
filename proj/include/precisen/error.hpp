#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace precisen {

enum class ErrorKind {
    invalid_assumption,
    degenerate_outcome,
    collinearity,
    insufficient_rows,
    shape,
    configuration,
    not_psd,
    underdetermined,
    inconsistent_evidence,
    ingestion,
    validation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `module()` names the component that
/// raised it so the CLI can print module-qualified messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

} // namespace precisen
