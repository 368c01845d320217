#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chromafix {

enum class ErrorKind {
    Io,
    Format,
    InsufficientData,
    Bounds,
    Size,
    InsufficientKeypoints,
    InsufficientMatches,
    DegenerateNeighbourhood,
    DegenerateFit,
    Validation,
    Parse,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library. `kind` drives CLI exit codes;
// `stage` is filled in by the pipeline when an error crosses a stage boundary.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string stage = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }
    const std::string& detail() const noexcept { return detail_; }

    Error with_stage(std::string stage) const { return Error(kind_, detail_, std::move(stage)); }

    // True for failures of the correction algorithm itself, as opposed to
    // bad input files, bad arguments or bad configuration.
    bool is_pipeline_failure() const noexcept;

private:
    ErrorKind kind_;
    std::string detail_;
    std::string stage_;
};

}  // namespace chromafix
