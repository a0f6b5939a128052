#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coxkern {

enum class KernelKind { uniform, epanechnikov, triangular, quartic, tabulated };

/// Symmetric probability density with compact support [-b, b].
///
/// Carries the constants the estimators need: the squared integral, the
/// bandwidth constant gamma_f = E|r1 - r2| - 2 E|r| (always negative), and
/// the self-overlap (autoconvolution) used by the bias correction. Built-in
/// kernels use closed forms; tabulated kernels use composite Gauss-Legendre
/// quadrature split at the table knots. Immutable once constructed.
class Kernel {
 public:
  static Kernel uniform();
  static Kernel epanechnikov();
  static Kernel triangular();
  static Kernel quartic();

  /// "uniform", "epanechnikov", "triangular" or "quartic" (case-insensitive).
  static Kernel by_name(std::string_view name);

  /// Piecewise-linear density through (u, f) pairs. The table must be
  /// symmetric about 0 and integrate to 1 within 1e-3; it is symmetrized and
  /// renormalized to unit mass exactly.
  static Kernel from_table(std::vector<double> u, std::vector<double> f,
                           std::string name = "tabulated");

  /// Two-column whitespace-separated text file; '#' starts a comment.
  static Kernel load_table(const std::filesystem::path& path);

  KernelKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double support() const noexcept { return b_; }

  double density(double u) const noexcept;
  double operator()(double u) const noexcept { return density(u); }

  /// f_h(t, s) = f((s - t) / h) / h.
  double eval_scaled(double t, double s, double h) const;

  double squared_integral() const noexcept { return squared_integral_; }
  double mean_abs() const noexcept { return mean_abs_; }
  double mean_abs_difference() const noexcept { return mean_abs_difference_; }
  double gamma_f() const noexcept { return mean_abs_difference_ - 2.0 * mean_abs_; }

  /// Integral of f(r + x) f(r) dr, i.e. the density of r1 - r2 at x.
  double autoconvolution(double x) const noexcept;

  /// Double integral of |t + (r - m) h| f(r) f(m) dr dm, for t >= 0.
  double abs_moment_integral(double t, double h) const;

  /// Points where the density is not smooth, including -b and b.
  std::span<const double> knots() const noexcept { return knots_; }

 private:
  struct Table {
    std::vector<double> u;
    std::vector<double> f;
  };

  Kernel(KernelKind kind, std::string name, double b,
         std::shared_ptr<const Table> table);

  void compute_constants();

  KernelKind kind_;
  std::string name_;
  double b_;
  std::shared_ptr<const Table> table_;
  std::vector<double> knots_;
  double squared_integral_ = 0.0;
  double mean_abs_ = 0.0;
  double mean_abs_difference_ = 0.0;
};

/// Quadrature routes for the kernel constants. Used directly for tabulated
/// kernels; for the built-ins they serve as the independent check on the
/// closed forms.
namespace kernel_quadrature {
double mass(const Kernel& k);
double squared_integral(const Kernel& k);
double mean_abs(const Kernel& k);
double mean_abs_difference(const Kernel& k);
double autoconvolution(const Kernel& k, double x);
double abs_moment_integral(const Kernel& k, double t, double h);
}  // namespace kernel_quadrature

}  // namespace coxkern
