#pragma once

#include <cstddef>
#include <vector>

namespace spikebayes {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// n-point Gauss-Legendre rule mapped onto [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// n-point Gauss-Hermite rule for expectations under N(0, 1); weights sum to 1.
QuadratureRule gauss_hermite_normal(std::size_t n);

}  // namespace spikebayes
