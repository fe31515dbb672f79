// Copyright 2026 The rfimdi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfimdi {

/// Deviation coefficient sqrt(2 ln(1/x)).
inline double f_of(double x) {
    if (!(x > 0)) throw std::domain_error("f_of: argument must be positive");
    return std::sqrt(2 * std::log(1 / x));
}

/// Interval on the expected total N<M> given the observed total N M^.
struct BoundedObservable {
    double observed_total = 0;
    double lower = 0;
    double upper = 0;
    double epsilon = 0;
};

/// Asymmetric: upper uses f((eps/2)^4/16), lower uses f((eps/2)^(3/2)).
/// Symmetric uses f(eps/2) on both sides (sensitivity studies only).
enum class ChernoffVariant { Asymmetric, Symmetric };

/// Multipliers of sqrt(X) on the (lower, upper) side.
struct ChernoffCoefficients {
    double lower;
    double upper;
};

inline ChernoffCoefficients chernoff_coefficients(double epsilon,
                                                  ChernoffVariant variant = ChernoffVariant::Asymmetric) {
    if (!(epsilon > 0 && epsilon < 1)) throw std::domain_error("chernoff: epsilon must lie in (0,1)");
    double h = epsilon / 2;
    if (variant == ChernoffVariant::Symmetric) return {f_of(h), f_of(h)};
    // log form: h^4/16 underflows for eps below ~1e-77.
    double upper = std::sqrt(2 * (std::log(16.0) - 4 * std::log(h)));
    double lower = std::sqrt(2 * (-1.5 * std::log(h)));
    return {lower, upper};
}

inline BoundedObservable chernoff_interval(double observed_total, double epsilon,
                                           ChernoffVariant variant = ChernoffVariant::Asymmetric) {
    if (!(observed_total >= 0)) throw std::domain_error("chernoff: observed total must be non-negative");
    auto k = chernoff_coefficients(epsilon, variant);
    double root = std::sqrt(observed_total);
    BoundedObservable out;
    out.observed_total = observed_total;
    out.epsilon = epsilon;
    out.upper = observed_total + k.upper * root;
    out.lower = std::max(0.0, observed_total - k.lower * root);
    return out;
}

}  // namespace rfimdi
