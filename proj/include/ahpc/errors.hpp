#pragma once

#include <stdexcept>
#include <string>

namespace ahpc {

// Stable machine-greppable error codes. The CLI prints them as
// "ahpc: error: E_XXX: message" and exits nonzero.
enum class Errc {
    io,
    format,
    args,
    bad_magic,
    bad_version,
    digest_mismatch,
    truncated,
    short_input,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace ahpc
