#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subord/bernstein.hpp"
#include "subord/fourier.hpp"
#include "subord/quadrature.hpp"

namespace subord {

using CMat = Eigen::MatrixXcd;

/// Square matrix A generating a bounded semigroup, ||e^{uA}|| <= M.
///
/// Three storage kinds share one interface through coefficient vectors:
/// Dense keeps all n^2 entries, Diagonal keeps the eigenvalues, and
/// ShiftToeplitz keeps the first row of an upper-triangular Toeplitz matrix
/// (every function of (N - I)/h has that form).
class MatrixGenerator {
 public:
  enum class Kind { Dense, Diagonal, ShiftToeplitz };

  static MatrixGenerator dense(CMat a, std::string tag = "dense");
  static MatrixGenerator diagonal(Eigen::VectorXcd eigenvalues, std::string tag = "diag");
  /// A = V diag(lambda) V^{-1}, keeping the eigenbasis.
  static MatrixGenerator from_eigenbasis(const CMat& v, const Eigen::VectorXcd& eigenvalues,
                                         std::string tag = "eigenbasis");
  /// A = (N - I)/h with N the unit superdiagonal.
  static MatrixGenerator shift(Eigen::Index n, double h);

  Kind kind() const { return kind_; }
  Eigen::Index size() const { return n_; }
  const CMat& matrix() const { return a_; }
  double bound() const { return bound_; }
  const std::string& family_tag() const { return tag_; }
  std::optional<double> shift_step() const { return h_; }

  bool diagonalizable() const { return kind_ == Kind::Diagonal || eigvecs_.has_value(); }
  const std::optional<CMat>& eigenvectors() const { return eigvecs_; }
  const Eigen::VectorXcd& eigenvalues() const { return eigvals_; }

  Eigen::Index coeff_dim() const;
  Vec coeffs_of_semigroup(double u) const;  // e^{uA}
  Vec coeffs_of_phi(double u) const;        // (e^{uA} - I)/u, A at u = 0
  Vec coeffs_of_identity() const;
  Vec coeffs_of_generator() const;
  CMat assemble(const Vec& coeffs) const;

 private:
  MatrixGenerator() = default;
  void certify_bound();

  Kind kind_ = Kind::Dense;
  Eigen::Index n_ = 0;
  CMat a_;
  Eigen::VectorXcd eigvals_;
  std::optional<CMat> eigvecs_;
  std::optional<double> h_;
  double bound_ = 1.0;
  std::string tag_;
};

/// Operator 2-norm (largest singular value).
double op_norm(const CMat& m);

CMat semigroup_at(const MatrixGenerator& gen, double u);

/// a0 A + int (e^{uA} - I) u^{-1} drho_ac(u).
CMat apply_psi_generator(const BernsteinFunction& psi, const MatrixGenerator& gen,
                         const QuadratureSpec& spec = {});

/// g_t(A) = int e^{uA} d nu_t(u).
CMat subordinate_at(const BernsteinFunction& psi, const MatrixGenerator& gen, double t,
                    const InversionParams& params = {}, const QuadratureSpec& spec = {});

enum class SpectralMode { Psi, Semigroup, Product };

/// V diag(phi(lambda_i)) V^{-1} with phi = psi, e^{t psi} or psi e^{t psi}.
CMat spectral_oracle(const BernsteinFunction& psi, const MatrixGenerator& gen, double t,
                     SpectralMode mode, double max_condition = 1e6);

/// h_t(A) = int e^{uA} b_t(u) du, b_t the inverse transform of psi e^{t psi}.
CMat h_t_by_fourier(const BernsteinFunction& psi, const MatrixGenerator& gen, double t,
                    const InversionParams& params = {});

/// ||psi(A) g_t(A) - h_t(A)||_2; h_t from the spectral oracle when the
/// eigenbasis is usable, from the Fourier route otherwise.
double multiplication_rule_residual(const BernsteinFunction& psi, const MatrixGenerator& gen,
                                    double t, const QuadratureSpec& spec = {},
                                    const InversionParams& params = {});

MatrixGenerator discrete_shift_generator(Eigen::Index n, double h);

/// V = Q1 diag(sigma) Q2 with sigma in [1, max_condition], real spectrum in
/// [lambda_min, lambda_max]. Deterministic for a given seed.
MatrixGenerator random_diagonalizable(Eigen::Index n, std::uint64_t seed, double lambda_min = -5.0,
                                      double lambda_max = -0.1, double max_condition = 10.0);

/// Dense complex matrix from CSV rows of interleaved real, imag columns.
MatrixGenerator load_generator_csv(const std::string& path);

struct ProbeRow {
  double t = 0.0;
  double sup_value = 0.0;
  std::size_t argmax = 0;
};

struct ProbeResult {
  std::vector<ProbeRow> rows;
  std::vector<std::vector<double>> member_values;  // [member][t index]
  double slope = 0.0;
  double r2 = 0.0;
};

/// For each t, max over the family of t ||psi(A_n) g_t(A_n)||_2.
ProbeResult property_Y_probe(const BernsteinFunction& psi, const std::vector<MatrixGenerator>& family,
                             const std::vector<double>& t_grid, const InversionParams& params = {},
                             const QuadratureSpec& spec = {});

}  // namespace subord
