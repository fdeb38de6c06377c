#pragma once

#include <optional>

#include "koopman/dictionary.hpp"
#include "koopman/empirical.hpp"
#include "koopman/solver.hpp"
#include "koopman/spectral.hpp"

namespace koopman {

struct FitOptions {
    // Used for the output weights W.
    RegularizerSpec regularizer = regularizer::Pseudoinverse{};
    // Used for K. Defaults to `regularizer`; a tikhonov output regularizer maps to
    // the same Q with a zero prior, since its W0 describes outputs, not operator columns.
    std::optional<RegularizerSpec> operator_regularizer;
    bool compute_modes = true;
};

RegularizerSpec default_operator_regularizer(const RegularizerSpec& output_regularizer);

// Gram assembly, K and W solves, and eigendecomposition. Data without outputs is
// fit with the full state as output (Y = X, Y+ = X+).
KoopmanModel fit(const Dictionary& dict, const SnapshotSet& data, const FitOptions& options = {});

// The data actually used for fitting: `data` itself, or full-state outputs when Y is absent.
SnapshotSet with_default_outputs(const SnapshotSet& data);

}  // namespace koopman
