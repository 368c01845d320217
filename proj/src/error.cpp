#include "chromafix/error.hpp"

namespace chromafix {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Bounds: return "out of bounds";
    case ErrorKind::Size: return "size error";
    case ErrorKind::InsufficientKeypoints: return "insufficient keypoints";
    case ErrorKind::InsufficientMatches: return "insufficient matches";
    case ErrorKind::DegenerateNeighbourhood: return "degenerate neighbourhood";
    case ErrorKind::DegenerateFit: return "degenerate fit";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Parse: return "parse error";
    }
    return "error";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, const std::string& stage)
{
    std::string out;
    if (!stage.empty()) {
        out += stage;
        out += ": ";
    }
    out += to_string(kind);
    if (!message.empty()) {
        out += ": ";
        out += message;
    }
    return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::string stage)
    : std::runtime_error(compose(kind, message, stage)), kind_(kind), detail_(message), stage_(std::move(stage))
{
}

bool Error::is_pipeline_failure() const noexcept
{
    switch (kind_) {
    case ErrorKind::InsufficientKeypoints:
    case ErrorKind::InsufficientMatches:
    case ErrorKind::DegenerateNeighbourhood:
    case ErrorKind::DegenerateFit:
    case ErrorKind::InsufficientData:
    case ErrorKind::Size:
    case ErrorKind::Bounds:
        return true;
    default:
        return false;
    }
}

}  // namespace chromafix
