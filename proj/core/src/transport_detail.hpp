#pragma once

#include <cstddef>
#include <vector>

#include "varq/mechanics.hpp"

namespace varq::detail {

/// (S[i+1] - S[i]) / (h m) at face i + 1/2.
RealVector face_velocity(const Grid1D& grid, const RealVector& S, const NaturalSystemSpec& spec);

/// Index of the face with the largest |v| dt / h and that value.
std::pair<std::size_t, double> max_courant(const RealVector& face_v, double dt, double h);

/// Conservative upwind update with zero flux through both ends.
RealVector upwind_transport(const RealVector& rho, const RealVector& face_v, double dt, double h);

/// Godunov numerical Hamiltonian of p^2 / 2m at every node.
RealVector godunov_kinetic_field(const Grid1D& grid, const RealVector& S,
                                 const NaturalSystemSpec& spec);

/// Central first derivative, one-sided at the ends.
RealVector central_gradient(const RealVector& f, double h);

}  // namespace varq::detail
