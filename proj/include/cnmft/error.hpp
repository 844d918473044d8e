#pragma once

#include <stdexcept>
#include <string>

namespace cnmft {

/// Error categories surfaced by the toolkit. Each failure mode named in a
/// module contract maps to one value so callers (and tests) can dispatch on
/// the condition rather than on message text.
enum class Errc {
    file_unreadable,
    unsupported_encoding,
    empty_audio,
    clip_too_short,
    shape_mismatch,
    negative_entry,
    bad_argument,
    bad_format,
    truncated_file,
    version_mismatch,
    config_mismatch,
    out_of_range,
    missing_note,
    duplicate_note,
    untrainable_note,
    unmatched_files,
    io_failure,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace cnmft
