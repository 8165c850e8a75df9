// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#ifndef FLESPEECH_COMMON_ERROR_H_
#define FLESPEECH_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace flespeech {

// Base class for all contract violations raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FLESPEECH_DEFINE_ERROR(NAME)                       \
  class NAME : public Error {                              \
   public:                                                 \
    explicit NAME(const std::string& msg) : Error(msg) {}  \
  }

FLESPEECH_DEFINE_ERROR(EmptyAudioError);
FLESPEECH_DEFINE_ERROR(SampleRateMismatchError);
FLESPEECH_DEFINE_ERROR(TooFewFramesError);
FLESPEECH_DEFINE_ERROR(DimensionMismatchError);
FLESPEECH_DEFINE_ERROR(EmptyTextError);
FLESPEECH_DEFINE_ERROR(StageMismatchError);
FLESPEECH_DEFINE_ERROR(LengthAlignmentError);
FLESPEECH_DEFINE_ERROR(NonFiniteStateError);
FLESPEECH_DEFINE_ERROR(EmptyCaptionError);
FLESPEECH_DEFINE_ERROR(ClientUnavailableError);
FLESPEECH_DEFINE_ERROR(AllVisualInputsMissingError);
FLESPEECH_DEFINE_ERROR(EmptySequenceError);
FLESPEECH_DEFINE_ERROR(StageModelMissingError);
FLESPEECH_DEFINE_ERROR(MissingScoreError);
FLESPEECH_DEFINE_ERROR(NoVoicedFramesError);
FLESPEECH_DEFINE_ERROR(TooFewValuesError);
FLESPEECH_DEFINE_ERROR(MissingBoundsError);
FLESPEECH_DEFINE_ERROR(MissingSynonymError);
FLESPEECH_DEFINE_ERROR(MissingCheckpointError);
FLESPEECH_DEFINE_ERROR(StepOutOfRangeError);
FLESPEECH_DEFINE_ERROR(ZeroNormError);
FLESPEECH_DEFINE_ERROR(EmptyManifestError);
FLESPEECH_DEFINE_ERROR(EmptyInputError);
FLESPEECH_DEFINE_ERROR(TranscriptUnavailableError);
FLESPEECH_DEFINE_ERROR(IoError);

#undef FLESPEECH_DEFINE_ERROR

// Raised by the synthesis pipeline; names the stage that failed.
class PartialFailureError : public Error {
 public:
  PartialFailureError(const std::string& stage, const std::string& msg)
      : Error("stage '" + stage + "' failed: " + msg), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace flespeech

#endif  // FLESPEECH_COMMON_ERROR_H_
