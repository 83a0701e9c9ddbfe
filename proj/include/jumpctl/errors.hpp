#pragma once

#include <stdexcept>
#include <string>

namespace jumpctl {

// State left the representable range during a simulation (blow-up or bad
// parameters).
struct NonFiniteState : std::runtime_error {
    explicit NonFiniteState(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyBundle : std::runtime_error {
    explicit EmptyBundle(const std::string& what) : std::runtime_error(what) {}
};

// A listed drift breakpoint is removable (one-sided limits agree).
struct ZeroJump : std::runtime_error {
    explicit ZeroJump(const std::string& what) : std::runtime_error(what) {}
};

struct NoValidC : std::runtime_error {
    explicit NoValidC(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

// A path is missing the stored driving-noise records needed by an evaluator.
struct MissingNoise : std::runtime_error {
    explicit MissingNoise(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficient : std::runtime_error {
    explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    ParseError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
    int line;
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& violated)
        : std::runtime_error("config violates invariant: " + violated) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jumpctl
