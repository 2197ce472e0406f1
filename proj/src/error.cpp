// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/error.hpp"

namespace rtlocr {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kCorruptImage: return "CorruptImage";
    case Errc::kEmptyLine: return "EmptyLine";
    case Errc::kEmptyCorpus: return "EmptyCorpus";
    case Errc::kUnknownChar: return "UnknownChar";
    case Errc::kUnknownLabel: return "UnknownLabel";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kInfeasibleTarget: return "InfeasibleTarget";
    case Errc::kStaleCache: return "StaleCache";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kCodecCoverage: return "CodecCoverage";
    case Errc::kIoFailure: return "IoFailure";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kUnsupportedVersion: return "UnsupportedVersion";
    case Errc::kChecksumMismatch: return "ChecksumMismatch";
    case Errc::kEmptyDataset: return "EmptyDataset";
    case Errc::kNoLinesFound: return "NoLinesFound";
    case Errc::kDigestMismatch: return "DigestMismatch";
    case Errc::kMalformedManifest: return "MalformedManifest";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace rtlocr
