// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mrv {

enum class Errc {
  // imaging
  RegionOutOfBounds,
  InvalidAlpha,
  CorruptStream,
  // geometry
  DegenerateConfiguration,
  PointAtInfinity,
  SingularHomography,
  // motion
  InvalidDistance,
  NotAwaiting,
  // segmentation
  EmptyReferenceMask,
  UnknownFrame,
  SegmenterFailure,
  // verification
  DimensionMismatch,
  EmptyUnion,
  FrameTooSmall,
  ZeroVariance,
  ZeroVector,
  // metrics
  LengthMismatch,
  EmptyInput,
  UndefinedRate,
  TooFewPoints,
  // dataset
  InstanceNotInImage,
  UnshiftableInstance,
  InsufficientSources,
  ManifestCorrupt,
  MissingFile,
  ChecksumMismatch,
  // protocol
  BadMagic,
  UnsupportedVersion,
  UnknownType,
  TruncatedPayload,
  OutOfOrder,
  ConnectionLost,
  Timeout,
  // config / io
  ConfigInvalid,
  IoFailure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::RegionOutOfBounds: return "RegionOutOfBounds";
    case Errc::InvalidAlpha: return "InvalidAlpha";
    case Errc::CorruptStream: return "CorruptStream";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::PointAtInfinity: return "PointAtInfinity";
    case Errc::SingularHomography: return "SingularHomography";
    case Errc::InvalidDistance: return "InvalidDistance";
    case Errc::NotAwaiting: return "NotAwaiting";
    case Errc::EmptyReferenceMask: return "EmptyReferenceMask";
    case Errc::UnknownFrame: return "UnknownFrame";
    case Errc::SegmenterFailure: return "SegmenterFailure";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyUnion: return "EmptyUnion";
    case Errc::FrameTooSmall: return "FrameTooSmall";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UndefinedRate: return "UndefinedRate";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::InstanceNotInImage: return "InstanceNotInImage";
    case Errc::UnshiftableInstance: return "UnshiftableInstance";
    case Errc::InsufficientSources: return "InsufficientSources";
    case Errc::ManifestCorrupt: return "ManifestCorrupt";
    case Errc::MissingFile: return "MissingFile";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::UnknownType: return "UnknownType";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::OutOfOrder: return "OutOfOrder";
    case Errc::ConnectionLost: return "ConnectionLost";
    case Errc::Timeout: return "Timeout";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace mrv
