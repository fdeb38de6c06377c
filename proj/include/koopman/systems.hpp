#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "koopman/empirical.hpp"

namespace koopman {

namespace system {

// x+ = A x
struct Linear {
    Eigen::MatrixXd A;
};

// x+ = sum_k coefficients[k] x^k, scalar state.
struct ScalarPoly {
    std::vector<double> coefficients;
};

// x1' = x2, x2' = mu (1 - x1^2) x2 - x1, one RK4 step of size dt per map application.
struct VanDerPol {
    double mu = 1.0;
    double dt = 0.01;
};

// x'' + delta x' + alpha x + beta x^3 = 0, one RK4 step of size dt.
struct Duffing {
    double alpha = -1.0;
    double beta = 1.0;
    double delta = 0.5;
    double dt = 0.01;
};

// x+ = rho R(theta) x in the plane.
struct Rotation {
    double rho = 1.0;
    double theta = 0.0;
};

}  // namespace system

namespace output {

struct FullState {};

// y = C x
struct LinearMap {
    Eigen::MatrixXd C;
};

// y_j = x[index_j]^power_j
struct ComponentPowers {
    std::vector<std::pair<std::size_t, unsigned>> terms;
};

struct Custom {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;
    std::size_t dim = 0;
};

}  // namespace output

using SystemKind = std::variant<system::Linear, system::ScalarPoly, system::VanDerPol, system::Duffing, system::Rotation>;
using OutputMap = std::variant<output::FullState, output::LinearMap, output::ComponentPowers, output::Custom>;

struct ReferenceSystem {
    SystemKind kind;
    OutputMap output = output::FullState{};
};

std::size_t state_dim(const ReferenceSystem& sys);
std::size_t output_dim(const ReferenceSystem& sys);

// Throws ConfigurationError on invalid parameters.
void validate(const ReferenceSystem& sys);

// One application of the map S. Throws DivergenceError if the result is not finite.
Eigen::VectorXd step(const ReferenceSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd observe(const ReferenceSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& x);

// Initial states drawn uniformly from the box [lower, upper].
struct RandomInitialStates {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::size_t count = 1;
};

using InitialStates = std::variant<std::vector<Eigen::VectorXd>, RandomInitialStates>;

std::vector<Eigen::VectorXd> draw_initial_states(const RandomInitialStates& box, std::uint64_t seed);

struct SimulationResult {
    SnapshotSet snapshots;
    std::vector<std::string> warnings;
};

// Consecutive pairs from each trajectory, trajectories concatenated in order.
// Y and Y+ are filled through the output map. A trajectory that diverges is cut
// at the last finite state and a warning is recorded.
SimulationResult generate_snapshots(const ReferenceSystem& sys, const InitialStates& initial,
                                    std::size_t steps_per_trajectory, std::uint64_t seed = 0);

}  // namespace koopman
