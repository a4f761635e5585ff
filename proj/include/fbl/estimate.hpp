#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbl/core.hpp"

namespace fbl {

enum class Method {
    exact_vertices,   // finite maximum over enumerated extreme points
    exact_signs,      // sign-pattern formula, p = 1
    exact_singular,   // top singular value / exact norm on l2
    search_lower,     // certified lower bound from a feasible witness
    structural_upper  // upper bound from a structural inequality
};

inline const char* to_string(Method m) {
    switch (m) {
        case Method::exact_vertices: return "exact_vertices";
        case Method::exact_signs: return "exact_signs";
        case Method::exact_singular: return "exact_singular";
        case Method::search_lower: return "search_lower";
        case Method::structural_upper: return "structural_upper";
    }
    return "?";
}

/// A certified interval [lower, upper] with whatever witness data the method
/// that produced it can offer. upper may be +inf when no bound is known.
struct NormEstimate {
    double lower = 0.0;
    double upper = kInf;
    Method method = Method::search_lower;

    std::optional<Vec> witness_point;              // maximizing ball point
    std::optional<std::vector<int>> witness_signs; // maximizing sign pattern
    std::optional<Func> witness_functional;        // maximizing dual functional
    std::optional<std::vector<Func>> witness_tuple;// maximizing witness tuple

    bool exact() const {
        return method == Method::exact_vertices || method == Method::exact_signs ||
               method == Method::exact_singular;
    }
};

/// Signals lower > upper in a combined estimate: an implementation bug,
/// not a math failure.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace fbl
