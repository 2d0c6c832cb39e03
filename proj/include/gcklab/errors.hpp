#pragma once

#include <stdexcept>
#include <string>

namespace gck {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input point falls outside the declared chart domain.
struct DomainError : Error {
    using Error::Error;
};

// Gram-Schmidt hit a (near-)dependent vector; message names the index.
struct DegenerateFrameError : Error {
    explicit DegenerateFrameError(int index, double pivot)
        : Error("degenerate frame: vector " + std::to_string(index) +
                " is linearly dependent (pivot " + std::to_string(pivot) + ")"),
          index(index) {}
    int index;
};

// Cholesky failed; message names the failing leading minor.
struct NotSpdError : Error {
    explicit NotSpdError(int minor_index)
        : Error("matrix is not positive definite: leading minor " +
                std::to_string(minor_index) + " is not positive"),
          minor_index(minor_index) {}
    int minor_index;
};

struct UncalibratedConventionError : Error {
    UncalibratedConventionError()
        : Error("Lee convention not calibrated: run calibrate() or supply "
                "an explicit (sign, scale) pair") {}
};

// The conformal factor carries no Lee data (gradient vanishes everywhere).
struct CalibrationDegenerateError : Error {
    using Error::Error;
};

struct DegenerateImmersionError : Error {
    using Error::Error;
};

// Declared base/fiber split does not produce a warped-product metric.
struct NotWarpedProductError : Error {
    using Error::Error;
};

// The fiber distribution fails the pointwise-slant uniformity test.
struct NotPointwiseSlantError : Error {
    using Error::Error;
};

// Slant value too close to 0 or pi/2 for csc/cot-weighted quantities.
struct ImproperPointError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gck
