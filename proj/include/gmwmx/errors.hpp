#ifndef GMWMX_ERRORS_HPP
#define GMWMX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gmwmx {

/// Base class for all library errors. `kind()` is stable and used by the CLI
/// to map failures onto exit codes (usage=1, data=2, numerical=3).
class Error : public std::runtime_error {
public:
    enum class Kind { Usage, Data, Numerical };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

#define GMWMX_DEFINE_ERROR(Name, ErrKind)                                       \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string& msg)                                   \
            : Error(Error::Kind::ErrKind, std::string(#Name) + ": " + msg) {}   \
    }

// noise_models
GMWMX_DEFINE_ERROR(NonStationaryComponentPresent, Numerical);
GMWMX_DEFINE_ERROR(FactorizationFailure, Numerical);
// missingness
GMWMX_DEFINE_ERROR(DegenerateChain, Data);
GMWMX_DEFINE_ERROR(AllMissing, Data);
// wavelet
GMWMX_DEFINE_ERROR(SeriesTooShort, Data);
GMWMX_DEFINE_ERROR(ScaleBudgetExceeded, Usage);
// theo_wv
GMWMX_DEFINE_ERROR(OracleSizeExceeded, Usage);
GMWMX_DEFINE_ERROR(InsufficientLags, Usage);
GMWMX_DEFINE_ERROR(RankDeficientDesign, Numerical);
// wv_cov
GMWMX_DEFINE_ERROR(CapExceeded, Usage);
// estimator
GMWMX_DEFINE_ERROR(SingularMaskedDesign, Numerical);
GMWMX_DEFINE_ERROR(Unidentifiable, Usage);
// cli_io
GMWMX_DEFINE_ERROR(ParseError, Data);
GMWMX_DEFINE_ERROR(NonMonotoneEpochs, Data);
GMWMX_DEFINE_ERROR(DuplicateEpoch, Data);
GMWMX_DEFINE_ERROR(IoError, Data);

#undef GMWMX_DEFINE_ERROR

} // namespace gmwmx

#endif
