#pragma once

#include <stdexcept>
#include <string>

namespace padicl {

// Base of every library error. `tag()` is a stable machine-readable name used by
// the CLI report and the exit-code mapping.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& what)
        : std::runtime_error(tag + ": " + what), tag_(std::move(tag)) {}
    const std::string& tag() const noexcept { return tag_; }

private:
    std::string tag_;
};

#define PADICL_ERROR(Name)                                                     \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    };

// padic
PADICL_ERROR(NotOrdinary)
PADICL_ERROR(PrecisionExhausted)
PADICL_ERROR(Overflow)
// funfield
PADICL_ERROR(BadReduction)
PADICL_ERROR(NotImplementedMinimalization)
PADICL_ERROR(SupersingularInTower)
PADICL_ERROR(PrecisionTooLow)
PADICL_ERROR(OverrideMismatch)
// rayclass
PADICL_ERROR(NotCoprime)
PADICL_ERROR(IncompatibleLevels)
// lfun
PADICL_ERROR(DegreeMismatch)
PADICL_ERROR(FEViolation)
PADICL_ERROR(ConductorMismatch)
// iwasawa
PADICL_ERROR(NotGaloisStable)
PADICL_ERROR(NotSurjective)
PADICL_ERROR(NotPlain)
PADICL_ERROR(ZeroInput)
// plfun
PADICL_ERROR(UnboundedDenominator)
PADICL_ERROR(NotDivisible)
PADICL_ERROR(NoSignWorks)
PADICL_ERROR(SpecializationMismatch)
PADICL_ERROR(OrderTooLow)
PADICL_ERROR(LeadingMismatch)
PADICL_ERROR(IdentityViolation)
PADICL_ERROR(ConstantFieldMismatch)
// cli
PADICL_ERROR(ConfigError)

#undef PADICL_ERROR

} // namespace padicl
