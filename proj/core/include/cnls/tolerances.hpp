#pragma once

// Named tolerances shared by the library, the CLI validator and the tests.

namespace cnls::tol {

// Spectral core
inline constexpr double kDerivativeSech = 1e-10;
inline constexpr double kQuadratureSech = 1e-12;
inline constexpr double kParsevalRoundTrip = 1e-12;
inline constexpr double kPolyaSzegoPerStep = 1.0;  // eps_grid = C * h with this C

// Model
inline constexpr double kClosedFormEnergy = 1e-9;
inline constexpr double kClosedFormResidual = 1e-10;
inline constexpr double kGradientFiniteDifference = 1e-6;
inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kSymmetryEnergy = 1e-12;

// Ground states
inline constexpr double kProjectionRelative = 1e-12;
inline constexpr double kPhaseConstancy = 1e-6;
inline constexpr double kPositivityFloor = 1e-10;  // relative to max |Phi_j|
inline constexpr double kLambdaOracle = 1e-5;
inline constexpr double kOmegaOracle = 1e-6;
inline constexpr double kProfileOracle = 1e-5;
inline constexpr double kSweepResidual = 1e-8;

// Evolution
inline constexpr double kMassDriftPerStep = 1e-12;
inline constexpr double kMassDrift = 1e-11;
inline constexpr double kEnergyDrift = 1e-8;
inline constexpr double kSplittingOrderLow = 1.8;
inline constexpr double kSplittingOrderHigh = 2.2;
inline constexpr double kTimeReversal = 1e-7;
inline constexpr int kNanGuardEvery = 100;

// Stability
inline constexpr double kOrbitalIdentity = 1e-12;
inline constexpr double kOrbitalSymmetry = 1e-10;
inline constexpr double kDefaultEpsOverDelta = 20.0;
inline constexpr double kStabilityBoundOverDelta = 10.0;
inline constexpr double kUnperturbedDistance = 1e-6;

// Rearrangement suite
inline constexpr double kRearrangedEnergySlack = 1e-6;
inline constexpr double kThreeQuarterSlack = 1e-3;

// Concentration
inline constexpr double kGammaCompact = 0.999;

}  // namespace cnls::tol
