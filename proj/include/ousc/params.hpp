#pragma once

#include <cmath>

namespace ousc {

// Problem constants: dX = theta (mu - b R - X) dt + eta dW, discount rho,
// proportional intervention cost K on |dR|.
struct ModelParams {
    double theta = 1.0;
    double mu = 0.0;
    double b = 0.5;
    double eta = 0.5;
    double rho = 0.5;
    double cost_k = 0.1;

    void validate() const;

    double nu() const { return rho / theta; }
    // sqrt(2 theta) / eta: the argument scale of the cylinder functions
    double c() const { return std::sqrt(2.0 * theta) / eta; }
    // stationary standard deviation of the uncontrolled OU
    double stat_sd() const { return eta / std::sqrt(2.0 * theta); }

    bool operator==(const ModelParams&) const = default;
};

inline double mu_bar(const ModelParams& p, double r) { return p.mu - p.b * r; }

}  // namespace ousc
