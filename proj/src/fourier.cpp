#include "subord/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "subord/error.hpp"

namespace subord {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw Error(ErrorCode::GridTooCoarse, "cannot allocate FFT buffer");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

void forward_fft(fftw_complex* buf, std::size_t n) {
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::size_t next_pow2(double x) {
  std::size_t n = 1;
  while (static_cast<double>(n) < x && n < (std::size_t{1} << 40)) n <<= 1;
  return n;
}

struct RawTransform {
  std::vector<double> values;
  double imag_residue = 0.0;
};

RawTransform transform(const std::function<cplx(cplx)>& symbol, std::size_t n, double lambda_max,
                       double c, const InversionParams& p) {
  const double dl = 2.0 * lambda_max / static_cast<double>(n);
  const double dr = std::numbers::pi / lambda_max;
  const double strength = -std::log(std::numeric_limits<double>::epsilon());
  FftwBuffer buf(n);
  const std::size_t half = n / 2;
  auto put = [&](std::size_t k, cplx v) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    buf.data[k][0] = sign * v.real();
    buf.data[k][1] = sign * v.imag();
  };
  for (std::size_t k = half; k < n; ++k) {
    const double lam = (static_cast<double>(k) - static_cast<double>(half)) * dl;
    const double eta = lam / lambda_max;
    const double filter = std::exp(-strength * std::pow(eta, p.filter_order));
    const cplx v = symbol(cplx(lam, c)) * filter;
    put(k, v);
  }
  // Mirror: lambda -> -lambda gives the conjugate.
  for (std::size_t k = half + 1; k < n; ++k) {
    const std::size_t m = n - k;  // index of -lambda
    const double sk = (k % 2 == 0) ? 1.0 : -1.0;
    const double sm = (m % 2 == 0) ? 1.0 : -1.0;
    buf.data[m][0] = sm * sk * buf.data[k][0];
    buf.data[m][1] = -sm * sk * buf.data[k][1];
  }
  put(0, symbol(cplx(-lambda_max, c)) * std::exp(-strength));
  forward_fft(buf.data, n);

  RawTransform out;
  out.values.resize(n);
  const double scale = dl / (2.0 * std::numbers::pi);
  double max_re = 0.0;
  double max_im = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    const double re = sign * scale * buf.data[j][0];
    const double im = sign * scale * buf.data[j][1];
    max_re = std::max(max_re, std::abs(re));
    max_im = std::max(max_im, std::abs(im));
    const double r = (static_cast<double>(j) - static_cast<double>(half)) * dr;
    out.values[j] = re * std::exp(c * r);
  }
  out.imag_residue = max_re > 0.0 ? max_im / max_re : 0.0;
  return out;
}

}  // namespace

void InversionParams::validate() const {
  const bool pow2 = grid_size >= 1024 && (grid_size & (grid_size - 1)) == 0;
  if (!pow2 || max_grid_size < grid_size || !(r_max > 0.0) || !(decay_floor > 0.0) ||
      !(damping >= 0.0) || filter_order < 2) {
    throw Error(ErrorCode::ParameterOutOfRange, "invalid inversion parameters");
  }
}

SymbolScale symbol_scale(const std::function<double(double)>& magnitude, double floor) {
  // Scan upwards from 2^-30; stop after two octaves below the floor.
  std::vector<double> lam = {0.0};
  std::vector<double> mag = {magnitude(0.0)};
  double top = mag.front();
  std::size_t arg_top = 0;
  int quiet = 0;
  for (int k = -120; k <= 400 && quiet < 8; ++k) {
    lam.push_back(std::exp2(k / 4.0));
    mag.push_back(magnitude(lam.back()));
    if (mag.back() > top) {
      top = mag.back();
      arg_top = mag.size() - 1;
    }
    quiet = mag.back() < floor * top ? quiet + 1 : 0;
  }
  SymbolScale out;
  out.peak = top;
  if (!(top > 0.0) || !std::isfinite(top)) return out;
  auto refine = [&](std::size_t i, double level) {
    if (i == 0) return lam[1];
    double lo = std::log(std::max(lam[i - 1], lam[1]));
    double hi = std::log(lam[i]);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (magnitude(std::exp(mid)) < level ? hi : lo) = mid;
    }
    return std::exp(hi);
  };
  for (std::size_t i = arg_top + 1; i < mag.size(); ++i) {
    if (mag[i] < 0.5 * top) {
      out.lambda_half = refine(i, 0.5 * top);
      break;
    }
  }
  // Symbols vanishing at 0 (F = psi e^{t psi}) peak at an interior frequency;
  // their rise sets the long length scale of the signal.
  if (arg_top > 1 && mag[1] < 0.5 * top) {
    std::size_t i = 1;
    while (mag[i] < 0.5 * top) ++i;
    double lo = std::log(lam[i - 1]);
    double hi = std::log(lam[i]);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (magnitude(std::exp(mid)) < 0.5 * top ? lo : hi) = mid;
    }
    out.lambda_rise = std::exp(hi);
  }
  if (quiet >= 8) {
    const double level = floor * top;
    std::size_t first = mag.size() - 1;
    while (first > arg_top + 1 && mag[first - 1] < level) --first;
    out.lambda_floor = refine(first, level);
  }
  return out;
}

InvertedSignal invert_fourier(const std::function<cplx(cplx)>& symbol,
                              const InversionParams& p) {
  p.validate();
  auto magnitude = [&symbol](double l) { return std::abs(symbol(cplx(l, 0.0))); };
  const SymbolScale scale = symbol_scale(magnitude, p.decay_floor);
  if (!(scale.peak > 0.0) || !std::isfinite(scale.peak)) {
    throw Error(ErrorCode::NonDecayingSymbol, "symbol vanishes or is not finite");
  }
  if (!(scale.lambda_half > 0.0)) {
    throw Error(ErrorCode::NonDecayingSymbol, "|symbol| never drops to half its peak");
  }

  InvertedSignal out;
  const double scale_low =
      p.window_from_rise && scale.lambda_rise > 0.0 ? std::min(scale.lambda_rise, scale.lambda_half) : scale.lambda_half;
  const double length = 2.0 * p.r_max / scale_low;
  std::size_t n = p.max_grid_size;
  if (scale.lambda_floor > 0.0) {
    n = std::clamp(next_pow2(length * scale.lambda_floor / std::numbers::pi), p.grid_size,
                   p.max_grid_size);
  }
  out.lambda_max = std::numbers::pi * static_cast<double>(n) / length;
  out.floor_reached = scale.lambda_floor > 0.0 && out.lambda_max >= scale.lambda_floor;
  out.edge_decay = magnitude(out.lambda_max) / scale.peak;
  if (out.edge_decay > p.max_edge_decay) {
    throw Error(ErrorCode::NonDecayingSymbol,
                "|symbol| at the grid edge is " + std::to_string(out.edge_decay) + " of its peak");
  }

  out.dr = length / static_cast<double>(n);
  out.contour = p.damping / length;
  auto raw = transform(symbol, n, out.lambda_max, out.contour, p);
  out.values = std::move(raw.values);
  out.imag_residue = raw.imag_residue;

  if (p.check_aliasing) {
    const std::size_t n2 = 2 * n;
    const double c2 = p.damping / (2.0 * length);
    auto twice = transform(symbol, n2, out.lambda_max, c2, p);
    // Compare on [L/1024, L/4): both grids share r_j there. Cells next to the
    // origin carry the filtered truncation error, which is not aliasing.
    double top = 0.0;
    double diff = 0.0;
    const std::size_t origin = n / 2;
    const std::size_t origin2 = n2 / 2;
    for (std::size_t j = n / 1024; j < n / 4; ++j) {
      const double a = out.values[origin + j];
      const double b = twice.values[origin2 + j];
      top = std::max(top, std::abs(b));
      diff = std::max(diff, std::abs(a - b));
    }
    out.aliasing_error = top > 0.0 ? diff / top : 0.0;
    if (out.aliasing_error > p.aliasing_tol) {
      throw Error(ErrorCode::GridTooCoarse, "doubling the grid changes the result by " +
                                                std::to_string(out.aliasing_error) +
                                                " of the peak");
    }
  }
  return out;
}

}  // namespace subord
