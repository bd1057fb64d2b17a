#pragma once

#include <stdexcept>
#include <string>

namespace dualprobe {

// Every failure the library reports carries one of these codes so callers
// (and the CLI exit-code mapping) can tell failure classes apart without
// parsing message text.
enum class errc {
    io,                    // sink/source failure
    bad_magic,             // container does not start with the expected magic
    unknown_version,       // container version not supported
    truncated,             // payload ends before the declared length
    count_mismatch,        // payload length disagrees with the header
    bad_header,            // header document unparseable or missing fields
    invalid_value,         // non-finite value where finite is required
    validation,            // input violates a documented invariant
    config,                // missing/inconsistent configuration
    capacity,              // requested dimensions exceed the memory budget
    length,                // sequence would exceed the model context
    construction,          // infeasible dimensions for a constructed model
    degenerate_threshold,  // top-k would vacuously select everything
    undefined_proportion,  // proportion of an empty target set
    empty_report,          // aggregate over zero valid pairs
    undefined_correlation, // correlation of a constant series
    transport,             // translator client transport failure (retryable)
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

inline const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::io: return "io error";
        case errc::bad_magic: return "bad magic";
        case errc::unknown_version: return "unknown version";
        case errc::truncated: return "truncated payload";
        case errc::count_mismatch: return "count mismatch";
        case errc::bad_header: return "bad header";
        case errc::invalid_value: return "invalid value";
        case errc::validation: return "validation error";
        case errc::config: return "configuration error";
        case errc::capacity: return "capacity error";
        case errc::length: return "length error";
        case errc::construction: return "construction error";
        case errc::degenerate_threshold: return "degenerate threshold";
        case errc::undefined_proportion: return "undefined proportion";
        case errc::empty_report: return "empty report";
        case errc::undefined_correlation: return "undefined correlation";
        case errc::transport: return "transport error";
    }
    return "error";
}

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace dualprobe
