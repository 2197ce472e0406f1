// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtlocr {

enum class Errc {
  kUnsupportedFormat,
  kCorruptImage,
  kEmptyLine,
  kEmptyCorpus,
  kUnknownChar,
  kUnknownLabel,
  kShapeMismatch,
  kInfeasibleTarget,
  kStaleCache,
  kTooFewSamples,
  kCodecCoverage,
  kIoFailure,
  kBadMagic,
  kUnsupportedVersion,
  kChecksumMismatch,
  kEmptyDataset,
  kNoLinesFound,
  kDigestMismatch,
  kMalformedManifest,
  kInvalidConfig,
  kInvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the library. The code is what callers branch
/// on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rtlocr
