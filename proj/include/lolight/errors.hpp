#pragma once

#include <stdexcept>
#include <string>

namespace lolight {

// Error taxonomy of the library. Everything derives from Error so callers
// (notably the CLI) can map failures onto exit codes in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input is structurally wrong (bad JSON, violated invariant, unknown key).
struct MalformedInput : Error {
    using Error::Error;
};

// Small-divisor solver hit an exactly resonant frequency (rational slope).
struct ResonantFrequency : Error {
    using Error::Error;
};

// Slope lacks a Diophantine certificate, or a declared slope produced a
// divisor below the declared safety bound eps_div.
struct NonDiophantineSlope : Error {
    using Error::Error;
};

struct NonzeroMean : Error {
    using Error::Error;
};

struct DegreeOverflow : Error {
    using Error::Error;
};

struct NotInNormalForm : Error {
    using Error::Error;
};

struct NonConstantL : Error {
    using Error::Error;
};

struct NonUnimodular : Error {
    using Error::Error;
};

struct NotLatticeNormalizing : Error {
    using Error::Error;
};

struct SingularMetric : Error {
    using Error::Error;
};

struct CertificateMissing : Error {
    using Error::Error;
};

struct IncompatibleNormalForm : Error {
    using Error::Error;
};

struct SearchBoundExceeded : Error {
    using Error::Error;
};

struct PositivityLoss : Error {
    using Error::Error;
};

struct VerificationFailed : Error {
    using Error::Error;
};

// A symbolic map composition left the representable class. This indicates a
// pipeline bug, not bad user input.
struct UnrepresentableComposition : Error {
    using Error::Error;
};

} // namespace lolight
