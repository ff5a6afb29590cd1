#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quotus {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

constexpr Timestamp kSecondsPerDay = 86400;

/// Bad input: malformed records, invalid parameters, broken references.
/// The CLI maps this to exit status 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pipeline stage invoked before the stage it depends on.
class MissingStageError : public InputError {
public:
    explicit MissingStageError(std::string stage)
        : InputError("requires: " + stage), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Half-open token range [begin, end).
struct TokenSpan {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    std::int64_t length() const { return end > begin ? end - begin : 0; }
    bool operator==(const TokenSpan&) const = default;
    auto operator<=>(const TokenSpan&) const = default;
};

inline std::int64_t overlap(const TokenSpan& a, const TokenSpan& b) {
    const auto lo = std::max(a.begin, b.begin);
    const auto hi = std::min(a.end, b.end);
    return hi > lo ? hi - lo : 0;
}

/// Collects non-fatal conditions. Passing nullptr where a Diagnostics* is
/// accepted discards them.
struct Diagnostics {
    std::vector<std::string> warnings;
    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline void warn(Diagnostics* diag, std::string msg) {
    if (diag) diag->warn(std::move(msg));
}

/// ISO-8601 instant ("2013-05-01T14:30:00Z", "2013-05-01T14:30:00+02:00",
/// "2013-05-01T14:30:00", "2013-05-01"). Missing offset means UTC.
Timestamp parse_iso8601(const std::string& text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

}  // namespace quotus
