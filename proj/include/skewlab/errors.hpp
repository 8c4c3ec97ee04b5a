#pragma once

#include <stdexcept>
#include <string>

namespace skewlab {

// Every failure mode surfaced by the library maps to one named error so the
// CLI can report a stable machine-readable code.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define SKEWLAB_DEFINE_ERROR(Name)                              \
    class Name : public Error {                                 \
    public:                                                     \
        explicit Name(const std::string& what = #Name)          \
            : Error(#Name, what) {}                             \
    }

SKEWLAB_DEFINE_ERROR(ConfigInvalid);
SKEWLAB_DEFINE_ERROR(DegenerateParameter);
SKEWLAB_DEFINE_ERROR(NonHyperbolicMatrix);
SKEWLAB_DEFINE_ERROR(InsufficientWord);
SKEWLAB_DEFINE_ERROR(PrecisionExhausted);
SKEWLAB_DEFINE_ERROR(GapTooSmall);
SKEWLAB_DEFINE_ERROR(LatticeSearchFailed);
SKEWLAB_DEFINE_ERROR(InvalidSpecification);
SKEWLAB_DEFINE_ERROR(GridTooCoarse);
SKEWLAB_DEFINE_ERROR(DegenerateFit);
SKEWLAB_DEFINE_ERROR(ScheduleInfeasible);
SKEWLAB_DEFINE_ERROR(EmptyDeviationSet);
SKEWLAB_DEFINE_ERROR(OscillationNotCertified);

#undef SKEWLAB_DEFINE_ERROR

} // namespace skewlab
