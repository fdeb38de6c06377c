#include "koopman/systems.hpp"

#include <cmath>
#include <random>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <class Field>
Eigen::Vector2d rk4(const Field& f, const Eigen::Vector2d& x, double h) {
    const Eigen::Vector2d k1 = f(x);
    const Eigen::Vector2d k2 = f(x + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(x + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::size_t state_dim(const ReferenceSystem& sys) {
    return std::visit(Overloaded{
                          [](const system::Linear& s) { return static_cast<std::size_t>(s.A.rows()); },
                          [](const system::ScalarPoly&) { return std::size_t{1}; },
                          [](const auto&) { return std::size_t{2}; },
                      },
                      sys.kind);
}

std::size_t output_dim(const ReferenceSystem& sys) {
    return std::visit(Overloaded{
                          [&](const output::FullState&) { return state_dim(sys); },
                          [](const output::LinearMap& o) { return static_cast<std::size_t>(o.C.rows()); },
                          [](const output::ComponentPowers& o) { return o.terms.size(); },
                          [](const output::Custom& o) { return o.dim; },
                      },
                      sys.output);
}

void validate(const ReferenceSystem& sys) {
    std::visit(Overloaded{
                   [](const system::Linear& s) {
                       if (s.A.rows() == 0 || s.A.rows() != s.A.cols())
                           throw ConfigurationError("linear system matrix must be square and non-empty");
                       if (!s.A.allFinite()) throw ConfigurationError("linear system matrix is not finite");
                   },
                   [](const system::ScalarPoly& s) {
                       if (s.coefficients.empty()) throw ConfigurationError("scalar polynomial needs coefficients");
                   },
                   [](const system::VanDerPol& s) {
                       if (!(s.dt > 0.0)) throw ConfigurationError("van der Pol dt must be positive");
                   },
                   [](const system::Duffing& s) {
                       if (!(s.dt > 0.0)) throw ConfigurationError("Duffing dt must be positive");
                   },
                   [](const system::Rotation& s) {
                       if (!std::isfinite(s.rho) || !std::isfinite(s.theta))
                           throw ConfigurationError("rotation parameters must be finite");
                   },
               },
               sys.kind);
    const std::size_t n = state_dim(sys);
    std::visit(Overloaded{
                   [](const output::FullState&) {},
                   [&](const output::LinearMap& o) {
                       if (static_cast<std::size_t>(o.C.cols()) != n || o.C.rows() == 0)
                           throw ConfigurationError("output matrix C must have one column per state");
                   },
                   [&](const output::ComponentPowers& o) {
                       if (o.terms.empty()) throw ConfigurationError("component-power output needs terms");
                       for (const auto& [index, power] : o.terms)
                           if (index >= n) throw ConfigurationError("component-power index out of range");
                   },
                   [](const output::Custom& o) {
                       if (!o.fn || o.dim == 0) throw ConfigurationError("custom output map needs a function");
                   },
               },
               sys.output);
}

Eigen::VectorXd step(const ReferenceSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (static_cast<std::size_t>(x.size()) != state_dim(sys))
        throw InputShapeError("state has length " + std::to_string(x.size()) + ", system expects " +
                              std::to_string(state_dim(sys)));
    if (!x.allFinite()) throw DivergenceError("state is not finite");
    Eigen::VectorXd next = std::visit(
        Overloaded{
            [&](const system::Linear& s) -> Eigen::VectorXd { return s.A * x; },
            [&](const system::ScalarPoly& s) -> Eigen::VectorXd {
                // Horner
                double acc = 0.0;
                for (auto it = s.coefficients.rbegin(); it != s.coefficients.rend(); ++it) acc = acc * x[0] + *it;
                return Eigen::VectorXd::Constant(1, acc);
            },
            [&](const system::VanDerPol& s) -> Eigen::VectorXd {
                auto f = [&](const Eigen::Vector2d& z) {
                    return Eigen::Vector2d(z[1], s.mu * (1.0 - z[0] * z[0]) * z[1] - z[0]);
                };
                return rk4(f, Eigen::Vector2d(x[0], x[1]), s.dt);
            },
            [&](const system::Duffing& s) -> Eigen::VectorXd {
                auto f = [&](const Eigen::Vector2d& z) {
                    return Eigen::Vector2d(z[1], -s.delta * z[1] - s.alpha * z[0] - s.beta * z[0] * z[0] * z[0]);
                };
                return rk4(f, Eigen::Vector2d(x[0], x[1]), s.dt);
            },
            [&](const system::Rotation& s) -> Eigen::VectorXd {
                const double c = std::cos(s.theta), sn = std::sin(s.theta);
                return Eigen::Vector2d(s.rho * (c * x[0] - sn * x[1]), s.rho * (sn * x[0] + c * x[1]));
            },
        },
        sys.kind);
    if (!next.allFinite()) throw DivergenceError("trajectory left the finite range");
    return next;
}

Eigen::VectorXd observe(const ReferenceSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return std::visit(Overloaded{
                          [&](const output::FullState&) -> Eigen::VectorXd { return x; },
                          [&](const output::LinearMap& o) -> Eigen::VectorXd { return o.C * x; },
                          [&](const output::ComponentPowers& o) -> Eigen::VectorXd {
                              Eigen::VectorXd y(static_cast<Eigen::Index>(o.terms.size()));
                              for (std::size_t j = 0; j < o.terms.size(); ++j) {
                                  const auto& [index, power] = o.terms[j];
                                  double v = 1.0;
                                  for (unsigned e = 0; e < power; ++e) v *= x[static_cast<Eigen::Index>(index)];
                                  y[static_cast<Eigen::Index>(j)] = v;
                              }
                              return y;
                          },
                          [&](const output::Custom& o) -> Eigen::VectorXd {
                              Eigen::VectorXd y = o.fn(x);
                              if (static_cast<std::size_t>(y.size()) != o.dim)
                                  throw InputShapeError("custom output map returned the wrong length");
                              return y;
                          },
                      },
                      sys.output);
}

std::vector<Eigen::VectorXd> draw_initial_states(const RandomInitialStates& box, std::uint64_t seed) {
    if (box.lower.size() != box.upper.size() || box.lower.size() == 0)
        throw ConfigurationError("initial-state box bounds must have equal, positive length");
    if (((box.upper - box.lower).array() < 0.0).any())
        throw ConfigurationError("initial-state box has upper < lower");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::VectorXd> out;
    out.reserve(box.count);
    for (std::size_t i = 0; i < box.count; ++i) {
        Eigen::VectorXd x(box.lower.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = box.lower[j] + (box.upper[j] - box.lower[j]) * unit(rng);
        out.push_back(std::move(x));
    }
    return out;
}

SimulationResult generate_snapshots(const ReferenceSystem& sys, const InitialStates& initial,
                                    std::size_t steps_per_trajectory, std::uint64_t seed) {
    validate(sys);
    if (steps_per_trajectory < 1) throw ConfigurationError("steps per trajectory must be at least 1");
    const std::vector<Eigen::VectorXd> starts = std::visit(
        Overloaded{
            [](const std::vector<Eigen::VectorXd>& v) { return v; },
            [&](const RandomInitialStates& box) { return draw_initial_states(box, seed); },
        },
        initial);
    if (starts.empty()) throw ConfigurationError("no initial states given");

    const auto n = static_cast<Eigen::Index>(state_dim(sys));
    const auto p = static_cast<Eigen::Index>(output_dim(sys));
    std::vector<Eigen::VectorXd> xs, xps;
    std::vector<std::string> warnings;
    for (std::size_t t = 0; t < starts.size(); ++t) {
        if (starts[t].size() != n)
            throw InputShapeError("initial state " + std::to_string(t) + " has the wrong dimension");
        Eigen::VectorXd x = starts[t];
        for (std::size_t k = 0; k < steps_per_trajectory; ++k) {
            Eigen::VectorXd next;
            try {
                next = step(sys, x);
            } catch (const DivergenceError&) {
                warnings.push_back("trajectory " + std::to_string(t) + " diverged after " + std::to_string(k) +
                                   " steps; truncated");
                break;
            }
            xs.push_back(x);
            xps.push_back(next);
            x = std::move(next);
        }
    }
    if (xs.empty()) throw DivergenceError("every trajectory diverged before its first step");

    const auto m = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd X(m, n), Xp(m, n), Y(m, p), Yp(m, p);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        X.row(k) = xs[idx].transpose();
        Xp.row(k) = xps[idx].transpose();
        Y.row(k) = observe(sys, xs[idx]).transpose();
        Yp.row(k) = observe(sys, xps[idx]).transpose();
    }
    return SimulationResult{SnapshotSet(std::move(X), std::move(Xp), std::move(Y), std::move(Yp)),
                            std::move(warnings)};
}

}  // namespace koopman
