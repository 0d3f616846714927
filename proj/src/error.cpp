#include "precisen/error.hpp"

namespace precisen {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_assumption: return "invalid-assumption";
    case ErrorKind::degenerate_outcome: return "degenerate-outcome";
    case ErrorKind::collinearity: return "collinearity";
    case ErrorKind::insufficient_rows: return "insufficient-rows";
    case ErrorKind::shape: return "shape";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::not_psd: return "not-psd";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::inconsistent_evidence: return "inconsistent-evidence";
    case ErrorKind::ingestion: return "ingestion";
    case ErrorKind::validation: return "validation";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + message), kind_(kind), module_(std::move(module)) {}

} // namespace precisen
