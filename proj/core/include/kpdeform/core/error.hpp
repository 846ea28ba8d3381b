#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpd {

// Every failure the library reports carries one of these codes so callers
// (and the CLI exit-code mapping) can branch without parsing messages.
enum class Errc {
  kBadMagic,
  kTruncated,
  kInvariantViolation,
  kKTooLarge,
  kShapeMismatch,
  kNonFinite,
  kEmptyGroup,
  kKinkProximity,
  kTooFewKeypoints,
  kPlacementFailure,
  kNoPositives,
  kMissingCheckpoint,
  kIo,
  kConfig,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace kpd
