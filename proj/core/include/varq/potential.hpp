#pragma once

#include <string>
#include <vector>

#include "varq/numerics.hpp"

namespace varq {

/// A potential with its first derivative. `confining` is false for the flat
/// catalog entries whose confinement comes only from the grid walls.
struct Potential {
    std::string name = "free";
    ScalarFunction value;
    ScalarFunction derivative;
    bool confining = false;

    double operator()(double q) const { return value(q); }
    Potential shifted(double s) const;
};

Potential free_potential();
/// k q^2 / 2
Potential harmonic_potential(double k);
/// lambda q^4
Potential quartic_potential(double lambda);
/// sum_j c_j q^j
Potential polynomial_potential(std::vector<double> coefficients);
/// Zero inside the grid; walls are the grid ends.
Potential box_potential();

}  // namespace varq
