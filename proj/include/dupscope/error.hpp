#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dupscope {

enum class Errc {
  // imagecore
  MalformedImage,
  UnsupportedFormat,
  ZeroDimension,
  NonPositiveSigma,
  SingularHomography,
  // histogram
  UnnormalizedHistogram,
  // features
  ImageTooSmall,
  PatchOutOfBounds,
  MissingOrientation,
  // matching
  EmptyDescriptorSet,
  NoMatches,
  // geometry
  DegenerateConfiguration,
  InsufficientPoints,
  InsufficientMatches,
  NoConsensus,
  EmptyMask,
  // augment
  InvalidSpec,
  EmptySourceDir,
  UndecodableSource,
  // cnn
  ShapeMismatch,
  LengthMismatch,
  EmptyDataset,
  UnreadablePair,
  BadCheckpoint,
  InvalidConfig,
  // retrieval
  CorpusNotFound,
  UndecodableQuery,
  EmptySet,
  MissingPoint,
  InvalidCounts,
  InvalidArgument,
  // ingest
  SourceUnreachable,
  MalformedFeedRecord,
  FetchFailed,
  StoreWriteError,
  MissingMetadata,
  HashMismatch,
  OrphanImage,
  // analytics
  EmptyPostSet,
  // generic
  IoError,
};

constexpr std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::MalformedImage: return "MalformedImage";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::ZeroDimension: return "ZeroDimension";
    case Errc::NonPositiveSigma: return "NonPositiveSigma";
    case Errc::SingularHomography: return "SingularHomography";
    case Errc::UnnormalizedHistogram: return "UnnormalizedHistogram";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::PatchOutOfBounds: return "PatchOutOfBounds";
    case Errc::MissingOrientation: return "MissingOrientation";
    case Errc::EmptyDescriptorSet: return "EmptyDescriptorSet";
    case Errc::NoMatches: return "NoMatches";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::InsufficientMatches: return "InsufficientMatches";
    case Errc::NoConsensus: return "NoConsensus";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::EmptySourceDir: return "EmptySourceDir";
    case Errc::UndecodableSource: return "UndecodableSource";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::UnreadablePair: return "UnreadablePair";
    case Errc::BadCheckpoint: return "BadCheckpoint";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::CorpusNotFound: return "CorpusNotFound";
    case Errc::UndecodableQuery: return "UndecodableQuery";
    case Errc::EmptySet: return "EmptySet";
    case Errc::MissingPoint: return "MissingPoint";
    case Errc::InvalidCounts: return "InvalidCounts";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SourceUnreachable: return "SourceUnreachable";
    case Errc::MalformedFeedRecord: return "MalformedFeedRecord";
    case Errc::FetchFailed: return "FetchFailed";
    case Errc::StoreWriteError: return "StoreWriteError";
    case Errc::MissingMetadata: return "MissingMetadata";
    case Errc::HashMismatch: return "HashMismatch";
    case Errc::OrphanImage: return "OrphanImage";
    case Errc::EmptyPostSet: return "EmptyPostSet";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace dupscope
