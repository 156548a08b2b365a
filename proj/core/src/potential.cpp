#include "varq/potential.hpp"

#include <cmath>
#include <utility>

namespace varq {

Potential Potential::shifted(double s) const {
    Potential out = *this;
    out.value = [v = value, s](double q) { return v(q) + s; };
    return out;
}

Potential free_potential() {
    return {"free", [](double) { return 0.0; }, [](double) { return 0.0; }, false};
}

Potential harmonic_potential(double k) {
    return {"harmonic", [k](double q) { return 0.5 * k * q * q; }, [k](double q) { return k * q; },
            k > 0.0};
}

Potential quartic_potential(double lambda) {
    return {"quartic", [lambda](double q) { return lambda * q * q * q * q; },
            [lambda](double q) { return 4.0 * lambda * q * q * q; }, lambda > 0.0};
}

Potential polynomial_potential(std::vector<double> coefficients) {
    std::vector<double> deriv;
    for (std::size_t j = 1; j < coefficients.size(); ++j)
        deriv.push_back(static_cast<double>(j) * coefficients[j]);
    auto horner = [](const std::vector<double>& c, double q) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * q + *it;
        return acc;
    };
    // Confining when the leading nonzero coefficient has even degree and is positive.
    bool confining = false;
    for (std::size_t j = coefficients.size(); j-- > 1;) {
        if (coefficients[j] != 0.0) {
            confining = (j % 2 == 0) && coefficients[j] > 0.0;
            break;
        }
    }
    return {"polynomial", [c = coefficients, horner](double q) { return horner(c, q); },
            [d = std::move(deriv), horner](double q) { return horner(d, q); }, confining};
}

Potential box_potential() {
    Potential p = free_potential();
    p.name = "box";
    return p;
}

}  // namespace varq
