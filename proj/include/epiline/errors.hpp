#pragma once

#include <stdexcept>
#include <string>

namespace epiline {

#define EPILINE_DEFINE_ERROR(Name, default_msg)                          \
  struct Name : std::runtime_error {                                     \
    Name() : std::runtime_error(default_msg) {}                          \
    explicit Name(const std::string& m) : std::runtime_error(m) {}       \
  }

// geometry
EPILINE_DEFINE_ERROR(CoincidentPoints, "coincident points");
EPILINE_DEFINE_ERROR(IdenticalLines, "identical lines");
EPILINE_DEFINE_ERROR(InfinitePoint, "point at infinity");
EPILINE_DEFINE_ERROR(DegeneratePencil, "degenerate pencil");
EPILINE_DEFINE_ERROR(RankDeficientSystem, "rank deficient constraint system");
EPILINE_DEFINE_ERROR(EmptyMatches, "empty match list");
EPILINE_DEFINE_ERROR(OutOfFrame, "line misses the central vertical segment");

// barcode
EPILINE_DEFINE_ERROR(ConstantBarcode, "constant barcode has no correlation");
EPILINE_DEFINE_ERROR(FormatError, "malformed input");

// matching
EPILINE_DEFINE_ERROR(InsufficientCandidates, "fewer than 2 candidate line pairs");
EPILINE_DEFINE_ERROR(NoThirdFrame, "no qualifying third frame");

// calibrate
EPILINE_DEFINE_ERROR(DegenerateHypothesis, "near-parallel hypothesis lines");
EPILINE_DEFINE_ERROR(EmptyFrame, "frame without detections");
EPILINE_DEFINE_ERROR(NoBarcodeSignal, "all barcode correlations undefined");
EPILINE_DEFINE_ERROR(ValidationStarved, "too few informative validation lines");
EPILINE_DEFINE_ERROR(NoValidModel, "every RANSAC iteration degenerate");

// refine
EPILINE_DEFINE_ERROR(SingularNormalEquations, "normal equations singular");
EPILINE_DEFINE_ERROR(NoFiniteVertex, "all line pairs parallel");
EPILINE_DEFINE_ERROR(TraversalOverflow, "arrangement traversal exceeded n^2 visits");

// planar
EPILINE_DEFINE_ERROR(InsufficientLines, "need at least 2 matched lines");

// sim / cli
EPILINE_DEFINE_ERROR(ConfigError, "invalid scene configuration");
EPILINE_DEFINE_ERROR(SyncError, "track lengths differ");

#undef EPILINE_DEFINE_ERROR

}  // namespace epiline
