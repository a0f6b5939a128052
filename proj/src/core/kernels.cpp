#include "kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "quadrature.hpp"

namespace coxkern {

namespace {

// Horner evaluation, coefficients in ascending powers.
template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double acc = 0.0;
  for (std::size_t i = N; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double interpolate(const std::vector<double>& u, const std::vector<double>& f, double x) {
  if (x < u.front() || x > u.back()) return 0.0;
  const auto it = std::upper_bound(u.begin(), u.end(), x);
  if (it == u.end()) return f.back();
  const std::size_t hi = static_cast<std::size_t>(it - u.begin());
  if (hi == 0) return f.front();
  const std::size_t lo = hi - 1;
  const double w = (x - u[lo]) / (u[hi] - u[lo]);
  return f[lo] + w * (f[hi] - f[lo]);
}

}  // namespace

Kernel::Kernel(KernelKind kind, std::string name, double b,
               std::shared_ptr<const Table> table)
    : kind_(kind), name_(std::move(name)), b_(b), table_(std::move(table)) {
  if (table_) {
    knots_ = table_->u;
  } else {
    knots_ = {-b_, 0.0, b_};
  }
  compute_constants();
}

Kernel Kernel::uniform() { return Kernel(KernelKind::uniform, "uniform", 1.0, nullptr); }
Kernel Kernel::epanechnikov() {
  return Kernel(KernelKind::epanechnikov, "epanechnikov", 1.0, nullptr);
}
Kernel Kernel::triangular() {
  return Kernel(KernelKind::triangular, "triangular", 1.0, nullptr);
}
Kernel Kernel::quartic() { return Kernel(KernelKind::quartic, "quartic", 1.0, nullptr); }

Kernel Kernel::by_name(std::string_view name) {
  const std::string key = lowercase(name);
  if (key == "uniform") return uniform();
  if (key == "epanechnikov" || key == "epan") return epanechnikov();
  if (key == "triangular") return triangular();
  if (key == "quartic" || key == "biweight") return quartic();
  fail(ErrorCode::invalid_argument, "unknown kernel '" + std::string(name) +
                                        "' (expected uniform, epanechnikov, triangular or quartic)");
}

Kernel Kernel::from_table(std::vector<double> u, std::vector<double> f, std::string name) {
  if (u.size() != f.size() || u.size() < 3) {
    fail(ErrorCode::invalid_argument, "kernel table needs at least 3 (u, f) pairs");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(f[i])) {
      fail(ErrorCode::invalid_argument, "kernel table contains a non-finite value");
    }
    if (f[i] < 0.0) fail(ErrorCode::invalid_argument, "kernel table has a negative density value");
    if (i > 0 && !(u[i] > u[i - 1])) {
      fail(ErrorCode::invalid_argument, "kernel table abscissae must be strictly increasing");
    }
  }
  const double b = std::max(-u.front(), u.back());
  if (!(b > 0.0)) fail(ErrorCode::invalid_argument, "kernel table has empty support");
  const double fmax = *std::max_element(f.begin(), f.end());
  if (!(fmax > 0.0)) fail(ErrorCode::invalid_argument, "kernel table is identically zero");
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (std::abs(u[i] + u[j]) > 1e-9 * b) {
      fail(ErrorCode::invalid_argument, "kernel table abscissae are not symmetric about 0");
    }
    if (std::abs(f[i] - f[j]) > 1e-6 * fmax) {
      fail(ErrorCode::invalid_argument, "kernel table is not symmetric: f(u) != f(-u)");
    }
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double uu = 0.5 * (u[j] - u[i]);
    const double ff = 0.5 * (f[i] + f[j]);
    u[i] = -uu;
    u[j] = uu;
    f[i] = f[j] = ff;
  }
  if (n % 2 == 1) u[n / 2] = 0.0;

  double mass = 0.0;
  for (std::size_t i = 1; i < n; ++i) mass += 0.5 * (f[i] + f[i - 1]) * (u[i] - u[i - 1]);
  if (std::abs(mass - 1.0) > 1e-3) {
    std::ostringstream msg;
    msg << "kernel table integrates to " << mass << ", expected 1";
    fail(ErrorCode::invalid_argument, msg.str());
  }
  for (double& v : f) v /= mass;

  auto table = std::make_shared<Table>(Table{std::move(u), std::move(f)});
  return Kernel(KernelKind::tabulated, std::move(name), b, std::move(table));
}

Kernel Kernel::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open kernel table " + path.string());
  std::vector<double> u, f;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double a, c;
    if (!(fields >> a)) continue;
    if (!(fields >> c)) {
      fail(ErrorCode::invalid_argument,
           path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    u.push_back(a);
    f.push_back(c);
  }
  return from_table(std::move(u), std::move(f), path.stem().string());
}

double Kernel::density(double u) const noexcept {
  const double a = std::abs(u);
  if (a > b_) return 0.0;
  switch (kind_) {
    case KernelKind::uniform:
      return 0.5;
    case KernelKind::epanechnikov:
      return 0.75 * (1.0 - a * a);
    case KernelKind::triangular:
      return 1.0 - a;
    case KernelKind::quartic: {
      const double w = 1.0 - a * a;
      return 0.9375 * w * w;
    }
    case KernelKind::tabulated:
      return interpolate(table_->u, table_->f, u);
  }
  return 0.0;
}

double Kernel::eval_scaled(double t, double s, double h) const {
  if (!(h > 0.0)) fail(ErrorCode::invalid_bandwidth, "bandwidth must be positive");
  return density((s - t) / h) / h;
}

void Kernel::compute_constants() {
  switch (kind_) {
    case KernelKind::uniform:
      squared_integral_ = 0.5;
      mean_abs_ = 0.5;
      mean_abs_difference_ = 2.0 / 3.0;
      break;
    case KernelKind::epanechnikov:
      squared_integral_ = 0.6;
      mean_abs_ = 3.0 / 8.0;
      mean_abs_difference_ = 18.0 / 35.0;
      break;
    case KernelKind::triangular:
      squared_integral_ = 2.0 / 3.0;
      mean_abs_ = 1.0 / 3.0;
      mean_abs_difference_ = 7.0 / 15.0;
      break;
    case KernelKind::quartic:
      squared_integral_ = 5.0 / 7.0;
      mean_abs_ = 5.0 / 16.0;
      mean_abs_difference_ = 100.0 / 231.0;
      break;
    case KernelKind::tabulated:
      squared_integral_ = kernel_quadrature::squared_integral(*this);
      mean_abs_ = kernel_quadrature::mean_abs(*this);
      mean_abs_difference_ = kernel_quadrature::mean_abs_difference(*this);
      break;
  }
}

double Kernel::autoconvolution(double x) const noexcept {
  const double a = std::abs(x);
  if (a >= 2.0 * b_) return 0.0;
  switch (kind_) {
    case KernelKind::uniform:
      return 0.25 * (2.0 - a);
    case KernelKind::epanechnikov: {
      const double d = 2.0 - a;
      return 3.0 * d * d * d * (a * a + 6.0 * a + 4.0) / 160.0;
    }
    case KernelKind::triangular:
      if (a <= 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
      return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
    case KernelKind::quartic: {
      const double d = 2.0 - a;
      const double d2 = d * d;
      static constexpr double c[] = {16.0, 40.0, 36.0, 10.0, 1.0};
      return 5.0 * d2 * d2 * d * poly(c, a) / 3584.0;
    }
    case KernelKind::tabulated:
      return kernel_quadrature::autoconvolution(*this, a);
  }
  return 0.0;
}

double Kernel::abs_moment_integral(double t, double h) const {
  if (!(h > 0.0)) fail(ErrorCode::invalid_bandwidth, "bandwidth must be positive");
  if (t < 0.0) fail(ErrorCode::invalid_argument, "abs_moment_integral requires t >= 0");
  const double x = t / h;
  if (x >= 2.0 * b_) return t;
  double e = 0.0;  // E|x + r1 - r2| for unit bandwidth
  switch (kind_) {
    case KernelKind::uniform: {
      static constexpr double c[] = {8.0, 0.0, 6.0, -1.0};
      e = poly(c, x) / 12.0;
      break;
    }
    case KernelKind::epanechnikov: {
      static constexpr double c[] = {576.0, 0.0, 672.0, 0.0, -140.0, 42.0, 0.0, -1.0};
      e = poly(c, x) / 1120.0;
      break;
    }
    case KernelKind::triangular:
      if (x <= 1.0) {
        static constexpr double c[] = {7.0 / 15.0, 0.0, 2.0 / 3.0, 0.0, -1.0 / 6.0, 1.0 / 20.0};
        e = poly(c, x);
      } else {
        static constexpr double c[] = {32.0, -20.0, 80.0, -40.0, 10.0, -1.0};
        e = poly(c, x) / 60.0;
      }
      break;
    case KernelKind::quartic: {
      static constexpr double c[] = {51200.0, 0.0,     84480.0, 0.0,   -21120.0, 0.0,
                                     7392.0,  -2640.0, 0.0,     110.0, 0.0,      -3.0};
      e = poly(c, x) / 118272.0;
      break;
    }
    case KernelKind::tabulated:
      return kernel_quadrature::abs_moment_integral(*this, t, h);
  }
  return h * e;
}

namespace kernel_quadrature {

namespace {

std::vector<double> sorted_unique(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  return out;
}

std::vector<double> clip(const std::vector<double>& pts, double lo, double hi) {
  std::vector<double> out{lo};
  for (double p : pts) {
    if (p > lo && p < hi) out.push_back(p);
  }
  out.push_back(hi);
  return out;
}

}  // namespace

double mass(const Kernel& k) {
  return quad::piecewise([&](double u) { return k.density(u); }, k.knots());
}

double squared_integral(const Kernel& k) {
  return quad::piecewise(
      [&](double u) {
        const double f = k.density(u);
        return f * f;
      },
      k.knots());
}

double mean_abs(const Kernel& k) {
  const auto pts = clip(std::vector<double>(k.knots().begin(), k.knots().end()), 0.0, k.support());
  return 2.0 * quad::piecewise([&](double u) { return u * k.density(u); }, pts);
}

// E|r1 - r2| = 2 * integral of F (1 - F), with F the kernel CDF.
double mean_abs_difference(const Kernel& k) {
  const auto knots = k.knots();
  std::vector<double> cdf_at_knot(knots.size(), 0.0);
  auto f = [&](double u) { return k.density(u); };
  for (std::size_t i = 1; i < knots.size(); ++i) {
    cdf_at_knot[i] = cdf_at_knot[i - 1] + quad::gauss_legendre(f, knots[i - 1], knots[i]);
  }
  double total = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double lo = knots[i - 1];
    const double base = cdf_at_knot[i - 1];
    total += quad::gauss_legendre(
        [&](double x) {
          const double cdf = base + quad::gauss_legendre(f, lo, x);
          return cdf * (1.0 - cdf);
        },
        lo, knots[i]);
  }
  return 2.0 * total;
}

double autoconvolution(const Kernel& k, double x) {
  const double b = k.support();
  const double a = std::abs(x);
  if (a >= 2.0 * b) return 0.0;
  const double lo = -b;
  const double hi = b - a;
  std::vector<double> pts;
  for (double kn : k.knots()) {
    pts.push_back(kn);
    pts.push_back(kn - a);
  }
  const auto breaks = clip(sorted_unique(std::move(pts), 1e-14 * b), lo, hi);
  return quad::piecewise([&](double r) { return k.density(r + a) * k.density(r); }, breaks);
}

double abs_moment_integral(const Kernel& k, double t, double h) {
  if (!(h > 0.0)) fail(ErrorCode::invalid_bandwidth, "bandwidth must be positive");
  const double b = k.support();
  const double x = t / h;
  if (x >= 2.0 * b) return t;
  // E|x + D| = x + 2 * integral_x^{2b} (u - x) g(u) du, g the density of D.
  std::vector<double> diffs;
  const auto knots = k.knots();
  for (double p : knots) {
    for (double q : knots) {
      const double d = p - q;
      if (d >= 0.0) diffs.push_back(d);
    }
  }
  const auto breaks = clip(sorted_unique(std::move(diffs), 1e-14 * b), x, 2.0 * b);
  const double tail = quad::piecewise(
      [&](double u) { return (u - x) * autoconvolution(k, u); }, breaks);
  return h * (x + 2.0 * tail);
}

}  // namespace kernel_quadrature

}  // namespace coxkern
