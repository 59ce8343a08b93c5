#pragma once

#include <stdexcept>
#include <string>

namespace kh {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define KH_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& what) : Error(what) {}      \
    }

KH_DEFINE_ERROR(NonConvergence);
KH_DEFINE_ERROR(InvalidTolerance);
KH_DEFINE_ERROR(KOutOfRange);
KH_DEFINE_ERROR(DimensionMismatch);
KH_DEFINE_ERROR(DimensionOutOfRange);
KH_DEFINE_ERROR(UnsupportedK);
KH_DEFINE_ERROR(BudgetZero);
KH_DEFINE_ERROR(TOutOfRange);
KH_DEFINE_ERROR(InvalidSpec);
KH_DEFINE_ERROR(NonFiniteValue);
KH_DEFINE_ERROR(EpsilonTooSmall);
KH_DEFINE_ERROR(GridTooSmall);
KH_DEFINE_ERROR(BoundaryViolation);
KH_DEFINE_ERROR(NonpositiveRadius);
KH_DEFINE_ERROR(PhiOutOfDomain);
KH_DEFINE_ERROR(BallOutOfDomain);
KH_DEFINE_ERROR(NotKConvex);
KH_DEFINE_ERROR(KTooSmall);
KH_DEFINE_ERROR(QOutOfRange);
KH_DEFINE_ERROR(ConfigInvalid);

#undef KH_DEFINE_ERROR

} // namespace kh
