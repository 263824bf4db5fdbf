#pragma once

#include <stdexcept>
#include <string>

namespace georeg {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define GEOREG_DEFINE_ERROR(name)                                    \
    struct name : Error {                                            \
        explicit name(const std::string& msg = #name) : Error(msg) {} \
    }

GEOREG_DEFINE_ERROR(EmptyCloud);
GEOREG_DEFINE_ERROR(EmptyResult);
GEOREG_DEFINE_ERROR(EmptyImage);
GEOREG_DEFINE_ERROR(EmptyInput);
GEOREG_DEFINE_ERROR(NoLabels);
GEOREG_DEFINE_ERROR(TooFewPoints);
GEOREG_DEFINE_ERROR(TooFewSamples);
GEOREG_DEFINE_ERROR(AllFiltered);
GEOREG_DEFINE_ERROR(DegeneratePair);
GEOREG_DEFINE_ERROR(DegenerateSegment);
GEOREG_DEFINE_ERROR(InsufficientKeypoints);
GEOREG_DEFINE_ERROR(NoViableCandidate);
GEOREG_DEFINE_ERROR(NoPairs);
GEOREG_DEFINE_ERROR(NoMatches);
GEOREG_DEFINE_ERROR(SingularSystem);
GEOREG_DEFINE_ERROR(NoGroundFound);
GEOREG_DEFINE_ERROR(NoOverlap);
GEOREG_DEFINE_ERROR(ZeroVariance);
GEOREG_DEFINE_ERROR(InvalidSpec);
GEOREG_DEFINE_ERROR(ParseError);
GEOREG_DEFINE_ERROR(MissingProperty);
GEOREG_DEFINE_ERROR(UnsupportedFormat);
GEOREG_DEFINE_ERROR(IoError);
GEOREG_DEFINE_ERROR(ConfigError);
GEOREG_DEFINE_ERROR(StageError);

#undef GEOREG_DEFINE_ERROR

}  // namespace georeg
