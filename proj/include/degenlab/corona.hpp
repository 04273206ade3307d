#pragma once
// Corona (stopping-time) decompositions driven by the oscillation of ln w,
// the associated martingale square function and packing estimates, sawtooth
// regions, and the test-function stopping construction with its calibrated
// thresholds.

#include "degenlab/operators.hpp"
#include "degenlab/weights.hpp"

#include <string>
#include <vector>

namespace degen {

// Stopping thresholds; calibration order: sigma3 first (test-function gap),
// then sigma5, sigma4, then sigma6 (stopping mass), then sigma_w, sigma1,
// sigma2 (oscillation / direction / level-set widths).
struct StoppingParams {
  double sigma_w = 1.0;   // ln w oscillation stopping threshold
  double sigma1 = 0.5;    // direction closeness for the restricted multiplier
  double sigma2 = 0.5;    // width of the ln w level sets in (tau) sectioning
  double sigma3 = 0.05;   // test function smoothing scale (fraction of l(Q))
  double sigma4 = 8.0;    // 1/sigma4 = average size stopping bound
  double sigma5 = 0.25;   // lower bound in the transversality stopping test
  double sigma6 = 0.0;    // guaranteed good mass fraction (output of calibrate)
  int tau_steps = 8;      // tau net resolution over one reverse-Jensen span
  int nu_steps = 16;      // direction net resolution
  std::string to_json() const;
};

// One stopping tree: for each generation, the maximal subcubes where the
// dyadic average of ln w has moved by more than sigma_w.
struct CoronaDecomposition {
  DyadicCube root;
  double sigma_w = 1.0;
  // generations[j] = j-th generation stopping cubes (generation 0 = {root})
  std::vector<std::vector<DyadicCube>> generations;
  // all stopping cubes of generation >= 1 in scan order, with their stopping
  // parents (the top cube whose oscillation test they failed)
  std::vector<DyadicCube> all_stopping;
  std::vector<DyadicCube> stopping_parent;

  double packing_ratio(const WeightModel& wm) const;  // sum w(R) / w(root)
  std::string to_json() const;
};

// Maximal-cube stopping construction on the cached dyadic levels of wm
// (bounded by wm.depth()).
CoronaDecomposition corona_decompose(const WeightModel& wm, const DyadicCube& root,
                                     double sigma_w, int max_depth);

// Martingale square function of b = ln w relative to the stopping tree:
// S(b)(x)^2 = sum over stopping cubes R containing x of |b_R - b_{R'}|^2,
// R' the stopping parent.  Returned on the cells of level `depth`.
Vec square_function_S(const WeightModel& wm, const CoronaDecomposition& cd, int depth);

// Sawtooth region over Q: the Carleson box minus the boxes of the stopping
// cubes; represented by the exact set of Whitney tiles (arc, level) it contains.
struct SawtoothRegion {
  DyadicCube top;
  std::vector<DyadicCube> tiles;  // tile = dyadic arc Q', t range (l(Q')/2, l(Q')]
};
SawtoothRegion sawtooth(const DyadicCube& top, const std::vector<DyadicCube>& stopped,
                        int max_depth);

// Test function for a root arc and unit section xi in C^2:
//   f = (I + (sigma3 l(Q))^2 (DB)^2)^{-1} (1_Q xi)
// plus diagnostics: the average gap |E_Q(f) - xi| and the norm ratio
// ||f||^2 / w(Q).
struct TestFunctionResult {
  VecC f;           // 2n grid field
  VecC aux;         // sigma3 l(Q) * DB f
  double avg_gap = 0.0;
  double norm_ratio = 0.0;
};
TestFunctionResult test_function(const SpectralCalculus& calc, const WeightModel& wm,
                                 const DyadicCube& q, const cplx xi[2], double sigma3);

// Mixed-measure cube average of a 2-component field: perp against w dx,
// parallel against dx.
void mixed_average(const VecC& f, const Vec& w, double h, const DyadicCube& q,
                   cplx out[2]);

// Stopping construction for a test function: maximal subcubes where either the
// average grows past 1/sigma4 or the transversality with the section matrix
//   S = diag( avg_Q1 w * exp(-tau - avg_Q1 ln w), 1 )
// degenerates below sigma5.  Returns the bad cubes and the stopped mass ratio.
struct StoppingResult {
  std::vector<DyadicCube> bad;
  double mass_ratio = 0.0;   // sum w(bad)/w(Q1)
  double gap = 0.0;          // |E_Q1(f) - xi|
};
StoppingResult stopping_tau_xi(const SpectralCalculus& calc, const WeightModel& wm,
                               const DyadicCube& q1, const cplx xi[2], double tau,
                               const StoppingParams& sp, int max_depth);

// Calibrate the thresholds on an ensemble of weights: bisect sigma3 until the
// measured average gap clears the reverse-Jensen margin, then fix sigma4,
// sigma5 and read off the guaranteed good-mass fraction sigma6.
StoppingParams calibrate(const std::vector<WeightModel>& ensemble, int n_grid,
                         int max_depth, std::uint64_t seed);

}  // namespace degen
