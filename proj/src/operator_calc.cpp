#include "subord/operator_calc.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "subord/criteria.hpp"
#include "subord/error.hpp"
#include "subord/levy_quadrature.hpp"
#include "subord/subordination.hpp"

namespace subord {

namespace {

constexpr double kFarField = 1e12;

// sup over u = U 2^j of ||e^{uA} - limit||, in coefficient max-norm.
std::function<double(double)> semigroup_deviation(const MatrixGenerator& gen, Vec limit) {
  return [&gen, limit = std::move(limit)](double U) {
    double dev = 0.0;
    double u = U;
    for (int j = 0; j <= 16; ++j, u *= 2.0) {
      dev = std::max(dev, (gen.coeffs_of_semigroup(u) - limit).cwiseAbs().maxCoeff());
    }
    return dev;
  };
}

CMat expm(const CMat& m) { return m.exp(); }

Vec flatten(const CMat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

cplx expm1(cplx z) {
  const double s = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * s * s,
          std::exp(z.real()) * std::sin(z.imag())};
}

// First row of e^{uA} for A = (N - I)/h: Poisson weights of mean u/h.
Vec poisson_row(Eigen::Index n, double x) {
  Vec c(n);
  double p = std::exp(-x);
  for (Eigen::Index k = 0; k < n; ++k) {
    c(k) = p;
    p *= x / static_cast<double>(k + 1);
  }
  return c;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int j = 0; j < count; ++j) {
    g[j] = lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1));
  }
  return g;
}

double condition_number(const CMat& v) {
  Eigen::JacobiSVD<CMat> svd(v);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

double op_norm(const CMat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

MatrixGenerator MatrixGenerator::dense(CMat a, std::string tag) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::ParameterOutOfRange, "generator must be a non-empty square matrix");
  }
  if (!a.allFinite()) throw Error(ErrorCode::ParameterOutOfRange, "generator has non-finite entries");
  MatrixGenerator g;
  g.kind_ = Kind::Dense;
  g.n_ = a.rows();
  g.a_ = std::move(a);
  g.tag_ = std::move(tag);
  Eigen::ComplexEigenSolver<CMat> es(g.a_);
  if (es.info() == Eigen::Success) {
    g.eigvals_ = es.eigenvalues();
    if (condition_number(es.eigenvectors()) <= 1e6) g.eigvecs_ = es.eigenvectors();
  }
  const CMat comm = g.a_ * g.a_.adjoint() - g.a_.adjoint() * g.a_;
  const bool normal = comm.norm() <= 1e-12 * std::max(1.0, g.a_.squaredNorm());
  if (normal && g.eigvals_.size() > 0 && g.eigvals_.real().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::NotBounded, "normal generator with an eigenvalue in Re > 0");
  }
  g.certify_bound();
  return g;
}

MatrixGenerator MatrixGenerator::diagonal(Eigen::VectorXcd eigenvalues, std::string tag) {
  if (eigenvalues.size() == 0) throw Error(ErrorCode::ParameterOutOfRange, "empty spectrum");
  if (eigenvalues.real().maxCoeff() > 0.0) {
    throw Error(ErrorCode::NotBounded, "diagonal generator with an eigenvalue in Re > 0");
  }
  MatrixGenerator g;
  g.kind_ = Kind::Diagonal;
  g.n_ = eigenvalues.size();
  g.a_ = eigenvalues.asDiagonal();
  g.eigvals_ = std::move(eigenvalues);
  g.tag_ = std::move(tag);
  g.bound_ = 1.0;
  return g;
}

MatrixGenerator MatrixGenerator::from_eigenbasis(const CMat& v, const Eigen::VectorXcd& eigenvalues,
                                                 std::string tag) {
  if (v.rows() != v.cols() || v.rows() != eigenvalues.size()) {
    throw Error(ErrorCode::ParameterOutOfRange, "eigenbasis and spectrum sizes differ");
  }
  const double cond = condition_number(v);
  if (!(cond <= 1e6)) throw Error(ErrorCode::IllConditionedEigenbasis, "cond(V) exceeds 1e6");
  MatrixGenerator g;
  g.kind_ = Kind::Dense;
  g.n_ = v.rows();
  g.a_ = v * eigenvalues.asDiagonal() * v.inverse();
  g.eigvals_ = eigenvalues;
  g.eigvecs_ = v;
  g.tag_ = std::move(tag);
  g.certify_bound();
  return g;
}

MatrixGenerator MatrixGenerator::shift(Eigen::Index n, double h) {
  if (n < 1 || !(h > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "shift needs n >= 1, h > 0");
  MatrixGenerator g;
  g.kind_ = Kind::ShiftToeplitz;
  g.n_ = n;
  g.h_ = h;
  g.a_ = CMat::Identity(n, n) * (-1.0 / h);
  for (Eigen::Index k = 0; k + 1 < n; ++k) g.a_(k, k + 1) = 1.0 / h;
  g.eigvals_ = Eigen::VectorXcd::Constant(n, -1.0 / h);
  std::ostringstream tag;
  tag << "shift(n=" << n << ",h=" << h << ")";
  g.tag_ = tag.str();
  g.certify_bound();
  return g;
}

void MatrixGenerator::certify_bound() {
  double sup = 1.0;
  std::vector<double> norms;
  for (double u : log_grid(1e-3, 1e3, kind_ == Kind::ShiftToeplitz ? 25 : 61)) {
    norms.push_back(op_norm(assemble(coeffs_of_semigroup(u))));
    sup = std::max(sup, norms.back());
  }
  if (kind_ == Kind::ShiftToeplitz) {
    if (sup > 1.0 + 1e-10) throw Error(ErrorCode::NotBounded, "shift surrogate is not a contraction");
    bound_ = 1.0;
    return;
  }
  // Growth over the last decade of the sample grid means no bound holds.
  const double last = norms.back();
  const double decade_back = norms[norms.size() - 11];
  if (!std::isfinite(sup) || sup > 1e8 || (last > 1.0 && last > 1.5 * decade_back)) {
    throw Error(ErrorCode::NotBounded, "sampled ||e^{uA}|| grows");
  }
  bound_ = sup;
}

Eigen::Index MatrixGenerator::coeff_dim() const {
  return kind_ == Kind::Dense ? n_ * n_ : n_;
}

Vec MatrixGenerator::coeffs_of_semigroup(double u) const {
  switch (kind_) {
    case Kind::Diagonal: return (u * eigvals_).array().exp().matrix();
    case Kind::ShiftToeplitz: return poisson_row(n_, u / *h_);
    case Kind::Dense: break;
  }
  return flatten(expm(u * a_));
}

Vec MatrixGenerator::coeffs_of_phi(double u) const {
  if (u == 0.0) return coeffs_of_generator();
  switch (kind_) {
    case Kind::Diagonal: {
      Vec c(n_);
      for (Eigen::Index k = 0; k < n_; ++k) c(k) = expm1(u * eigvals_(k)) / u;
      return c;
    }
    case Kind::ShiftToeplitz: {
      const double x = u / *h_;
      Vec c = poisson_row(n_, x) / u;
      c(0) = std::expm1(-x) / u;
      return c;
    }
    case Kind::Dense: break;
  }
  if (u * a_.norm() > 1.0) return flatten(CMat((expm(u * a_) - CMat::Identity(n_, n_)) / u));
  // exp([[uA, A], [0, 0]]) carries phi_1(uA) A = (e^{uA} - I)/u in its corner.
  CMat big = CMat::Zero(2 * n_, 2 * n_);
  big.topLeftCorner(n_, n_) = u * a_;
  big.topRightCorner(n_, n_) = a_;
  return flatten(CMat(expm(big).topRightCorner(n_, n_)));
}

Vec MatrixGenerator::coeffs_of_identity() const {
  switch (kind_) {
    case Kind::Diagonal: return Vec::Ones(n_);
    case Kind::ShiftToeplitz: {
      Vec c = Vec::Zero(n_);
      c(0) = 1.0;
      return c;
    }
    case Kind::Dense: break;
  }
  return flatten(CMat::Identity(n_, n_));
}

Vec MatrixGenerator::coeffs_of_generator() const {
  switch (kind_) {
    case Kind::Diagonal: return eigvals_;
    case Kind::ShiftToeplitz: {
      Vec c = Vec::Zero(n_);
      c(0) = -1.0 / *h_;
      if (n_ > 1) c(1) = 1.0 / *h_;
      return c;
    }
    case Kind::Dense: break;
  }
  return flatten(a_);
}

CMat MatrixGenerator::assemble(const Vec& c) const {
  switch (kind_) {
    case Kind::Diagonal: return c.asDiagonal();
    case Kind::ShiftToeplitz: {
      CMat m = CMat::Zero(n_, n_);
      for (Eigen::Index k = 0; k < n_; ++k) {
        for (Eigen::Index i = 0; i + k < n_; ++i) m(i, i + k) = c(k);
      }
      return m;
    }
    case Kind::Dense: break;
  }
  return Eigen::Map<const CMat>(c.data(), n_, n_);
}

CMat semigroup_at(const MatrixGenerator& gen, double u) {
  if (!(u >= 0.0)) throw Error(ErrorCode::DomainError, "semigroup needs u >= 0");
  return gen.assemble(gen.coeffs_of_semigroup(u));
}

CMat apply_psi_generator(const BernsteinFunction& psi, const MatrixGenerator& gen,
                         const QuadratureSpec& spec) {
  const LevyMeasure& rho = psi.levy();
  Vec total = rho.atom_at_zero * gen.coeffs_of_generator();
  if (rho.has_density()) {
    Integrand g;
    g.dim = gen.coeff_dim();
    g.value = [&gen](double u) { return gen.coeffs_of_phi(u); };
    g.at_zero = gen.coeffs_of_generator();
    g.at_infinity = gen.coeffs_of_semigroup(kFarField) - gen.coeffs_of_identity();
    g.tail_deviation = semigroup_deviation(gen, gen.coeffs_of_semigroup(kFarField));
    // The drift term is already in total.
    LevyMeasure ac = rho;
    ac.atom_at_zero = 0.0;
    total += levy_integral(g, ac, spec).value;
  }
  return gen.assemble(total);
}

namespace {

// Trapezoid sum of e^{r_k A} w_k over a uniform grid r_k = r0 + k dr.
Vec grid_sum(const MatrixGenerator& gen, double r0, double dr, std::size_t count,
             const std::function<double(std::size_t)>& weight) {
  Vec total = Vec::Zero(gen.coeff_dim());
  if (gen.kind() == MatrixGenerator::Kind::Dense) {
    const Eigen::Index n = gen.size();
    const CMat step = expm(dr * gen.matrix());
    CMat e = expm(r0 * gen.matrix());
    CMat acc = CMat::Zero(n, n);
    for (std::size_t k = 0; k < count; ++k) {
      const double w = weight(k);
      if (w != 0.0) acc += w * e;
      e = e * step;
    }
    return flatten(acc);
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double w = weight(k);
    if (w != 0.0) total += w * gen.coeffs_of_semigroup(r0 + static_cast<double>(k) * dr);
  }
  return total;
}

}  // namespace

CMat subordinate_at(const BernsteinFunction& psi, const MatrixGenerator& gen, double t,
                    const InversionParams& params, const QuadratureSpec& spec) {
  if (!(t > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t must be positive");
  const SubordinationMeasure nu = subordination_measure(psi, t, params);
  Vec total = Vec::Zero(gen.coeff_dim());
  for (const auto& [loc, mass] : nu.atoms()) total += mass * gen.coeffs_of_semigroup(loc);
  if (nu.has_density()) {
    if (nu.repr() == SubordinationMeasure::Repr::GridDensity) {
      const auto& f = nu.grid_values();
      const double dr = nu.grid_step();
      total += grid_sum(gen, 0.0, dr, f.size(), [&](std::size_t k) {
        const double end = (k == 0 || k + 1 == f.size()) ? 0.5 : 1.0;
        return end * dr * f[k];
      });
    } else {
      Integrand g;
      g.dim = gen.coeff_dim();
      g.value = [&gen](double u) { return gen.coeffs_of_semigroup(u); };
      g.at_zero = gen.coeffs_of_identity();
      g.at_infinity = gen.coeffs_of_semigroup(kFarField);
      g.tail_deviation = semigroup_deviation(gen, g.at_infinity);
      MeasureView view = nu.view();
      view.atoms.clear();
      total += integrate_measure(g, view, spec).value;
    }
  }
  return gen.assemble(total);
}

CMat spectral_oracle(const BernsteinFunction& psi, const MatrixGenerator& gen, double t,
                     SpectralMode mode, double max_condition) {
  if (!(t >= 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "t must be >= 0");
  const Eigen::Index n = gen.size();
  CMat v = CMat::Identity(n, n);
  if (gen.kind() != MatrixGenerator::Kind::Diagonal) {
    if (!gen.eigenvectors()) {
      throw Error(ErrorCode::IllConditionedEigenbasis, "no usable eigenbasis for " + gen.family_tag());
    }
    v = *gen.eigenvectors();
    if (!(condition_number(v) <= max_condition)) {
      throw Error(ErrorCode::IllConditionedEigenbasis, "cond(V) exceeds the limit");
    }
  }
  Eigen::VectorXcd phi(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cplx z = gen.eigenvalues()(k);
    if (z.real() > 0.0) z = {0.0, z.imag()};  // roundoff from the eigensolver
    const cplx p = psi(z);
    switch (mode) {
      case SpectralMode::Psi: phi(k) = p; break;
      case SpectralMode::Semigroup: phi(k) = std::exp(t * p); break;
      case SpectralMode::Product: phi(k) = p * std::exp(t * p); break;
    }
  }
  if (gen.kind() == MatrixGenerator::Kind::Diagonal) return phi.asDiagonal();
  return v * phi.asDiagonal() * v.inverse();
}

CMat h_t_by_fourier(const BernsteinFunction& psi, const MatrixGenerator& gen, double t,
                    const InversionParams& params) {
  InversionParams long_window = params;
  long_window.window_from_rise = true;
  const InvertedSignal b = fourier_density(psi, t, long_window);
  // The band-limited b_t leaks across r = 0; pairing it with a smooth test
  // function that equals e^{rA} on r >= 0 keeps the sum spectrally accurate.
  const double norm_a = std::max(op_norm(gen.matrix()), 1e-300);
  const double delta = std::min(512.0 * b.dr, 1.0 / norm_a);
  auto smooth_step = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double c = std::exp(-1.0 / (1.0 - x));
    return a / (a + c);
  };
  std::size_t first = b.origin();
  while (first > 0 && b.r(first - 1) > -delta) --first;
  const std::size_t count = b.size() - first;
  const Vec sum = grid_sum(gen, b.r(first), b.dr, count, [&](std::size_t k) {
    const double r = b.r(first + k);
    const double chi = r >= 0.0 ? 1.0 : smooth_step(1.0 + r / delta);
    return b.dr * chi * b.values[first + k];
  });
  return gen.assemble(sum);
}

double multiplication_rule_residual(const BernsteinFunction& psi, const MatrixGenerator& gen,
                                    double t, const QuadratureSpec& spec,
                                    const InversionParams& params) {
  const CMat lhs = apply_psi_generator(psi, gen, spec) * subordinate_at(psi, gen, t, params, spec);
  CMat ref;
  if (gen.diagonalizable()) {
    try {
      ref = spectral_oracle(psi, gen, t, SpectralMode::Product);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IllConditionedEigenbasis) throw;
    }
  }
  if (ref.size() == 0) ref = h_t_by_fourier(psi, gen, t, params);
  return op_norm(lhs - ref);
}

MatrixGenerator discrete_shift_generator(Eigen::Index n, double h) {
  return MatrixGenerator::shift(n, h);
}

MatrixGenerator random_diagonalizable(Eigen::Index n, std::uint64_t seed, double lambda_min,
                                      double lambda_max, double max_condition) {
  if (n < 1 || !(lambda_min <= lambda_max) || lambda_max > 0.0 || !(max_condition >= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "bad random generator parameters");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  auto orthogonal = [&] {
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) m(i, j) = gauss(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ());
  };
  const Eigen::MatrixXd q1 = orthogonal();
  const Eigen::MatrixXd q2 = orthogonal();
  Eigen::VectorXd sigma(n);
  for (Eigen::Index k = 0; k < n; ++k) sigma(k) = 1.0 + (max_condition - 1.0) * unit(rng);
  Eigen::VectorXcd lambda(n);
  for (Eigen::Index k = 0; k < n; ++k) lambda(k) = lambda_min + (lambda_max - lambda_min) * unit(rng);
  const CMat v = (q1 * sigma.asDiagonal() * q2).cast<cplx>();
  std::ostringstream tag;
  tag << "random(n=" << n << ",seed=" << seed << ")";
  return MatrixGenerator::from_eigenbasis(v, lambda, tag.str());
}

MatrixGenerator load_generator_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::string cell = line.substr(pos, end - pos);
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cell = b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::ConfigParseError, path + ": bad number '" + cell + "'");
      }
      row.push_back(v);
      pos = end + 1;
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw Error(ErrorCode::ConfigParseError, path + ": empty matrix");
  CMat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != 2 * n) {
      throw Error(ErrorCode::ConfigParseError, path + ": expected 2n interleaved columns");
    }
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {rows[i][2 * j], rows[i][2 * j + 1]};
  }
  return MatrixGenerator::dense(std::move(a), path);
}

ProbeResult property_Y_probe(const BernsteinFunction& psi, const std::vector<MatrixGenerator>& family,
                             const std::vector<double>& t_grid, const InversionParams& params,
                             const QuadratureSpec& spec) {
  if (family.empty()) throw Error(ErrorCode::ParameterOutOfRange, "empty generator family");
  if (t_grid.empty()) throw Error(ErrorCode::ParameterOutOfRange, "empty t grid");
  ProbeResult out;
  out.member_values.assign(family.size(), std::vector<double>(t_grid.size(), 0.0));
  for (std::size_t m = 0; m < family.size(); ++m) {
    const CMat p = apply_psi_generator(psi, family[m], spec);
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      const double t = t_grid[j];
      out.member_values[m][j] = t * op_norm(p * subordinate_at(psi, family[m], t, params, spec));
    }
  }
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    ProbeRow row{t_grid[j], 0.0, 0};
    for (std::size_t m = 0; m < family.size(); ++m) {
      if (out.member_values[m][j] > row.sup_value) {
        row.sup_value = out.member_values[m][j];
        row.argmax = m;
      }
    }
    out.rows.push_back(row);
    if (row.sup_value > 0.0) {
      xs.push_back(std::log(row.t));
      ys.push_back(std::log(row.sup_value));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k] / n, my += ys[k] / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
      syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx > 0.0) {
      out.slope = sxy / sxx;
      out.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    }
  }
  return out;
}

}  // namespace subord
