#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "subord/quadrature.hpp"

namespace subord {

/// Parameters for f(r) = (1/2 pi) int e^{-i lambda r} Phi(lambda) d lambda.
///
/// Lengths are measured in the symbol's own scale 1/lambda_half, where
/// lambda_half is the first frequency past the peak with |Phi| < peak / 2.
/// The window [-L/2, L/2) has L = 2 r_max / lambda_half. With
/// window_from_rise, a symbol that starts below half its peak uses the rising
/// crossing instead when it is lower; that long window keeps the slow tail of
/// the signal at the cost of frequency reach. The grid has the
/// fewest points (at least grid_size) that reach the frequency where |Phi|
/// stays below decay_floor * peak, or max_grid_size when that frequency is
/// out of reach. Both rules scale with the symbol, so
/// theta psi at t and psi at theta t get identical grids. The transform is
/// taken along Im lambda = damping / L, which damps periodic images by
/// e^{-damping}.
struct InversionParams {
  std::size_t grid_size = std::size_t{1} << 18;
  std::size_t max_grid_size = std::size_t{1} << 22;
  double r_max = 64.0;
  double decay_floor = 1e-10;
  double damping = 25.0;
  int filter_order = 16;
  /// Recompute at twice the grid with the same lambda_max and compare.
  bool check_aliasing = true;
  double aliasing_tol = 1e-6;
  /// Edge decay |Phi(lambda_max)| / peak above this is NonDecayingSymbol.
  double max_edge_decay = 0.5;
  bool window_from_rise = false;

  void validate() const;
};

/// Samples f(r_j), r_j = (j - N/2) dr, j = 0..N-1.
struct InvertedSignal {
  double dr = 0.0;
  double lambda_max = 0.0;
  double contour = 0.0;       // Im lambda of the integration line
  double edge_decay = 0.0;    // |Phi(lambda_max)| / peak
  bool floor_reached = false;
  double imag_residue = 0.0;  // max |Im| / max |Re| before undamping
  double aliasing_error = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double r(std::size_t j) const {
    return (static_cast<double>(j) - 0.5 * static_cast<double>(values.size())) * dr;
  }
  std::size_t origin() const { return values.size() / 2; }
};

/// `symbol` must accept lambda with Im lambda >= 0 (the transform of a
/// function supported on r >= 0 continues analytically there) and satisfy
/// symbol(-conj(lambda)) = conj(symbol(lambda)).
InvertedSignal invert_fourier(const std::function<cplx(cplx)>& symbol,
                              const InversionParams& params = {});

struct SymbolScale {
  double peak = 0.0;
  double lambda_half = 0.0;
  double lambda_floor = 0.0;  // 0 when the floor is not reached below 2^100
  double lambda_rise = 0.0;   // first crossing of peak / 2 from below; 0 if |Phi(0)| is large
};

/// Log scan of |Phi| on lambda = 2^{k/4}, crossings refined by bisection.
SymbolScale symbol_scale(const std::function<double(double)>& magnitude, double floor);

}  // namespace subord
