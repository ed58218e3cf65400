#include "ecoevo/reproduction.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "ecoevo/errors.hpp"

namespace ecoevo {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Parent masses p_i = w_i q_i under trapezoid weights.
std::vector<double> parent_masses(std::span<const double> q, const Grid1D& grid) {
  std::vector<double> p(q.begin(), q.end());
  const double h = grid.spacing();
  for (auto& v : p) v *= h;
  p.front() *= 0.5;
  p.back() *= 0.5;
  return p;
}

std::size_t next_smooth_size(std::size_t n) {
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2u, 3u, 5u}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return m;
  }
}

ReproductionResult finish(const DensityState& q, std::vector<double> raw) {
  const double mass = trapezoid(raw, q.grid);
  ReproductionResult out{DensityState(q.grid, raw, q.time, DensityKind::normalized), std::move(raw),
                         1.0 - mass, false};
  normalize_in_place(out.offspring.values, out.offspring.grid);
  out.boundary_warning = out.leaked_mass > kBoundaryLeakThreshold;
  return out;
}

}  // namespace

SegregationKernel::SegregationKernel(double epsilon)
    : epsilon_(epsilon), normalizer_(0.0) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("segregation kernel needs epsilon > 0, got " + std::to_string(epsilon));
  }
  normalizer_ = 1.0 / (epsilon * std::sqrt(std::numbers::pi));
}

double SegregationKernel::operator()(double x) const noexcept {
  const double u = x / epsilon_;
  return normalizer_ * std::exp(-u * u);
}

double SegregationKernel::moment(int order) const noexcept {
  if (order < 0 || order % 2 != 0) return order == 0 ? 1.0 : 0.0;
  // E[Z^{2m}] = (2m-1)!! (eps^2/2)^m
  double value = 1.0;
  for (int j = order - 1; j > 0; j -= 2) value *= j;
  return value * std::pow(variance(), order / 2);
}

MidpointDensity midpoint_density(const DensityState& q) {
  require_normalized(q);
  const std::size_t n = q.grid.size();
  const auto p = parent_masses(q.values, q.grid);
  const Grid1D fine = q.grid.refined();
  std::vector<double> a(2 * n - 1, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < a.size(); ++m) {
    const std::size_t lo = m >= n ? m - (n - 1) : 0;
    const std::size_t hi = std::min(m, n - 1);
    double s = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) s += p[i] * p[m - i];
    a[m] = s;
  }
  // a_m is the mass at fine node m; density = mass / fine spacing, ends carry half weight.
  const double inv_h = 1.0 / fine.spacing();
  for (std::size_t m = 0; m < a.size(); ++m) a[m] *= inv_h;
  a.front() *= 2.0;
  a.back() *= 2.0;
  return MidpointDensity{fine, std::move(a)};
}

ReproductionResult reproduce_reference(const DensityState& q, const SegregationKernel& kernel) {
  require_normalized(q);
  const auto& grid = q.grid;
  const std::size_t n = grid.size();
  const auto p = parent_masses(q.values, grid);
  const auto x = grid.nodes();
  const double cut = kernel.truncation_radius();
  std::vector<double> raw(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] == 0.0) continue;
      double inner = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = x[k] - 0.5 * (x[i] + x[j]);
        if (std::abs(d) > cut) continue;
        inner += p[j] * kernel(d);
      }
      sum += p[i] * inner;
    }
    raw[k] = sum;
  }
  return finish(q, std::move(raw));
}

namespace {

// Kernel sampled at half-spacing offsets d*h/2 for |d| <= 2N-2 (index d + 2N-2).
std::vector<double> half_step_kernel_table(const Grid1D& grid, const SegregationKernel& kernel,
                                           bool truncate) {
  const std::size_t n = grid.size();
  const std::size_t reach = 2 * n - 2;
  const double half_h = 0.5 * grid.spacing();
  std::vector<double> table(2 * reach + 1, 0.0);
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double d = (static_cast<double>(j) - static_cast<double>(reach)) * half_h;
    if (truncate && std::abs(d) > kernel.truncation_radius()) continue;
    table[j] = kernel(d);
  }
  return table;
}

void direct_kernel(std::span<const double> q, const Grid1D& grid, const std::vector<double>& table,
                   std::span<double> raw) {
  const std::size_t n = grid.size();
  const auto p = parent_masses(q, grid);
  std::vector<double> a(2 * n - 1, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < a.size(); ++m) {
    const std::size_t lo = m >= n ? m - (n - 1) : 0;
    const std::size_t hi = std::min(m, n - 1);
    double s = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) s += p[i] * p[m - i];
    a[m] = s;
  }
  const std::size_t reach = 2 * n - 2;
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    // offset index of (2k - m) is 2k - m + reach
    for (std::size_t m = 0; m < a.size(); ++m) s += a[m] * table[2 * k + reach - m];
    raw[k] = s;
  }
}

}  // namespace

ReproductionResult reproduce_direct(const DensityState& q, const SegregationKernel& kernel) {
  require_normalized(q);
  const auto table = half_step_kernel_table(q.grid, kernel, true);
  std::vector<double> raw(q.grid.size(), 0.0);
  direct_kernel(q.values, q.grid, table, raw);
  return finish(q, std::move(raw));
}

struct FastReproducer::Impl {
  Grid1D grid;
  std::size_t size;
  double* real_buf = nullptr;
  fftw_complex* spec_buf = nullptr;
  std::vector<std::complex<double>> kernel_spectrum;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Impl(const Grid1D& g, std::size_t m) : grid(g), size(m) {}
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real_buf);
    fftw_free(spec_buf);
  }
};

FastReproducer::FastReproducer(const Grid1D& grid, const SegregationKernel& kernel,
                               std::size_t transform_size) {
  const std::size_t needed = minimum_transform_size(grid.size());
  if (transform_size != 0 && transform_size < needed) {
    throw ConfigError("FFT length " + std::to_string(transform_size) +
                      " is too short for wrap-free convolution on " + std::to_string(grid.size()) +
                      " nodes (need >= " + std::to_string(needed) + ")");
  }
  const std::size_t m = transform_size != 0 ? transform_size : next_smooth_size(needed);
  impl_ = std::make_unique<Impl>(grid, m);
  const std::size_t n_spec = m / 2 + 1;
  {
    std::lock_guard lock(planner_mutex());
    impl_->real_buf = fftw_alloc_real(m);
    impl_->spec_buf = fftw_alloc_complex(n_spec);
    // FFTW_ESTIMATE keeps the plan (and hence the rounding) identical across runs.
    impl_->forward = fftw_plan_dft_r2c_1d(static_cast<int>(m), impl_->real_buf, impl_->spec_buf,
                                          FFTW_ESTIMATE);
    impl_->backward = fftw_plan_dft_c2r_1d(static_cast<int>(m), impl_->spec_buf, impl_->real_buf,
                                           FFTW_ESTIMATE);
  }
  if (!impl_->forward || !impl_->backward) throw NumericalError("FFTW planning failed");

  // Wrapped kernel: offsets 0..R at the front, -R..-1 at the back.
  const std::size_t n = grid.size();
  const std::size_t reach = 2 * n - 2;
  const auto table = half_step_kernel_table(grid, kernel, false);
  std::fill(impl_->real_buf, impl_->real_buf + m, 0.0);
  for (std::size_t d = 0; d <= reach; ++d) impl_->real_buf[d] = table[reach + d];
  for (std::size_t d = 1; d <= reach; ++d) impl_->real_buf[m - d] = table[reach - d];
  fftw_execute(impl_->forward);
  impl_->kernel_spectrum.resize(n_spec);
  for (std::size_t j = 0; j < n_spec; ++j) {
    impl_->kernel_spectrum[j] = {impl_->spec_buf[j][0], impl_->spec_buf[j][1]};
  }
}

FastReproducer::~FastReproducer() = default;
FastReproducer::FastReproducer(FastReproducer&&) noexcept = default;
FastReproducer& FastReproducer::operator=(FastReproducer&&) noexcept = default;

std::size_t FastReproducer::transform_size() const noexcept { return impl_->size; }

double FastReproducer::apply(std::span<const double> q, std::span<double> raw) {
  const auto& grid = impl_->grid;
  const std::size_t n = grid.size();
  if (q.size() != n || raw.size() != n) throw ContractError("FastReproducer: size mismatch");
  const std::size_t m = impl_->size;
  const auto p = parent_masses(q, grid);
  std::fill(impl_->real_buf, impl_->real_buf + m, 0.0);
  std::copy(p.begin(), p.end(), impl_->real_buf);
  fftw_execute_dft_r2c(impl_->forward, impl_->real_buf, impl_->spec_buf);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < impl_->kernel_spectrum.size(); ++j) {
    const std::complex<double> z{impl_->spec_buf[j][0], impl_->spec_buf[j][1]};
    const auto c = z * z * impl_->kernel_spectrum[j] * scale;
    impl_->spec_buf[j][0] = c.real();
    impl_->spec_buf[j][1] = c.imag();
  }
  fftw_execute_dft_c2r(impl_->backward, impl_->spec_buf, impl_->real_buf);
  // The exact result is nonnegative; negatives are transform round-off.
  for (std::size_t k = 0; k < n; ++k) raw[k] = std::max(impl_->real_buf[2 * k], 0.0);
  return 1.0 - trapezoid(raw, grid);
}

ReproductionResult FastReproducer::apply(const DensityState& q) {
  require_normalized(q);
  std::vector<double> raw(q.grid.size(), 0.0);
  apply(q.values, raw);
  return finish(q, std::move(raw));
}

ReproductionResult reproduce_fast(const DensityState& q, const SegregationKernel& kernel) {
  FastReproducer fast(q.grid, kernel);
  return fast.apply(q);
}

Reproducer::Reproducer(const Grid1D& grid, const SegregationKernel& kernel,
                       ReproductionMethod method)
    : grid_(grid), kernel_(kernel), method_(method) {
  if (method == ReproductionMethod::fft) fast_ = std::make_unique<FastReproducer>(grid, kernel);
}

double Reproducer::apply(std::span<const double> q, std::span<double> raw) {
  switch (method_) {
    case ReproductionMethod::fft:
      return fast_->apply(q, raw);
    case ReproductionMethod::direct: {
      static thread_local std::vector<double> table;
      table = half_step_kernel_table(grid_, kernel_, true);
      direct_kernel(q, grid_, table, raw);
      return 1.0 - trapezoid(raw, grid_);
    }
    case ReproductionMethod::reference: {
      DensityState state(grid_, std::vector<double>(q.begin(), q.end()), 0.0,
                         DensityKind::normalized);
      auto r = reproduce_reference(state, kernel_);
      std::copy(r.raw.begin(), r.raw.end(), raw.begin());
      return r.leaked_mass;
    }
  }
  return 0.0;
}

DensityState reproduce_unnormalized(const DensityState& n, const SegregationKernel& kernel,
                                    ReproductionMethod method) {
  const double rho = trapezoid(n);
  if (!(rho > 0.0)) {
    throw DegenerateStateError("reproduce_unnormalized: population mass " + std::to_string(rho));
  }
  DensityState q = normalize(n);
  std::vector<double> raw(n.grid.size(), 0.0);
  Reproducer(n.grid, kernel, method).apply(q.values, raw);
  for (double& v : raw) v *= rho;
  return DensityState(n.grid, std::move(raw), n.time, DensityKind::population);
}

namespace {
double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

double reproduced_even_central_moment(int k, double epsilon, std::span<const double> central) {
  if (k < 1 || central.size() < static_cast<std::size_t>(2 * k + 1)) {
    throw ContractError("reproduced_even_central_moment needs central moments up to order 2k");
  }
  const SegregationKernel kernel(epsilon);
  auto M = [&](int j) { return central[static_cast<std::size_t>(j)]; };
  double total = 2.0 / std::pow(4.0, k) * M(2 * k);
  for (int l = 0; l < k; ++l) {
    double inner = 0.0;
    for (int j = 0; j <= 2 * l; ++j) inner += binomial(2 * l, j) * M(2 * l - j) * M(j);
    total += kernel.moment(2 * (k - l)) * binomial(2 * k, 2 * l) / std::pow(4.0, l) * inner;
  }
  for (int j = 2; j <= 2 * k - 2; ++j) {
    total += binomial(2 * k, j) / std::pow(4.0, k) * M(2 * k - j) * M(j);
  }
  return total;
}

}  // namespace ecoevo
