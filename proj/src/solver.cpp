#include "vcrit/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "vcrit/errors.hpp"
#include "vcrit/norms.hpp"
#include "vcrit/slf.hpp"

namespace vcrit {

namespace {

void axpy(SpectralVector& y, double a, const SpectralVector& x) {
  for (int c = 0; c < 3; ++c) {
    for (std::size_t s = 0; s < y[c].size(); ++s) y[c][s] += a * x[c][s];
  }
}

bool finite(const SpectralVector& v) {
  for (const auto& c : v) {
    for (const auto& z : c) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

}  // namespace

SpectralSolver::SpectralSolver(const GridSpec& grid, double viscosity, SolverOptions options)
    : ops_(grid), nu_(viscosity), opt_(options) {
  if (!(viscosity >= 0.0)) throw ParameterError("solver: viscosity must be non-negative");
  if (!(opt_.cfl > 0.0)) throw ParameterError("solver: cfl must be positive");
  if (!(opt_.dt_max > 0.0)) throw ParameterError("solver: dt_max must be positive");
}

SimState SpectralSolver::make_state(const VectorField3D& omega, double time) {
  if (!(omega.grid() == grid())) throw ParameterError("solver: field grid does not match");
  if (!omega.all_finite()) throw NumericError("solver: non-finite initial vorticity");
  SimState s;
  s.time = time;
  s.omega_hat = ops_.to_spectral(omega);
  ops_.project_solenoidal(s.omega_hat);
  return s;
}

SpectralVector SpectralSolver::nonlinear(const SpectralVector& omega_hat) {
  const VectorField3D u = ops_.to_physical(ops_.velocity_from_vorticity(omega_hat));
  const VectorField3D w = ops_.to_physical(omega_hat);
  VectorField3D uxw(grid());
  for (std::size_t i = 0; i < grid().cells(); ++i) uxw.set(i, cross(u.at(i), w.at(i)));
  SpectralVector out = ops_.curl(ops_.to_spectral(uxw));
  if (opt_.dealias) {
    ops_.dealias(out);
  } else {
    for (std::size_t s = 0; s < ops_.spectral_size(); ++s) {
      if (ops_.nyquist(s)) out[0][s] = out[1][s] = out[2][s] = 0.0;
    }
  }
  return out;
}

SpectralVector SpectralSolver::rhs(const SpectralVector& omega_hat) {
  SpectralVector out = nonlinear(omega_hat);
  if (opt_.viscous == ViscousTreatment::Explicit && nu_ > 0.0) {
    for (int c = 0; c < 3; ++c) {
      for (std::size_t s = 0; s < ops_.spectral_size(); ++s) {
        out[c][s] -= nu_ * ops_.k2(s) * omega_hat[c][s];
      }
    }
  }
  return out;
}

void SpectralSolver::apply_decay(SpectralVector& v, double dt) const {
  if (nu_ == 0.0 || opt_.viscous == ViscousTreatment::Explicit) return;
  for (std::size_t s = 0; s < ops_.spectral_size(); ++s) {
    const double e = std::exp(-nu_ * ops_.k2(s) * dt);
    for (int c = 0; c < 3; ++c) v[c][s] *= e;
  }
}

SimState SpectralSolver::step(const SimState& state, double dt) {
  // Integrating-factor RK4; with an explicit viscous term apply_decay is the identity and
  // this reduces to classical RK4 on rhs().
  const SpectralVector& w = state.omega_hat;
  const double h2 = 0.5 * dt;

  const SpectralVector k1 = rhs(w);

  SpectralVector a = w;
  axpy(a, h2, k1);
  apply_decay(a, h2);
  const SpectralVector k2 = rhs(a);

  SpectralVector b = w;
  apply_decay(b, h2);
  axpy(b, h2, k2);
  const SpectralVector k3 = rhs(b);

  SpectralVector c = w;
  apply_decay(c, h2);
  axpy(c, dt, k3);
  apply_decay(c, h2);
  const SpectralVector k4 = rhs(c);

  // w_{n+1} = E w + dt/6 (E k1 + 2 E_h (k2 + k3) + k4)
  SpectralVector next = w;
  axpy(next, dt / 6.0, k1);
  apply_decay(next, h2);
  axpy(next, dt / 3.0, k2);
  axpy(next, dt / 3.0, k3);
  apply_decay(next, h2);
  axpy(next, dt / 6.0, k4);

  if (!finite(next)) {
    std::ostringstream msg;
    msg << "solver: non-finite vorticity after step dt=" << dt << " at t=" << state.time;
    throw InstabilityError(msg.str(), dt);
  }
  return SimState{state.time + dt, std::move(next)};
}

double SpectralSolver::cfl_dt(const SimState& state) {
  const double h = grid().spacing();
  const double umax = linf_norm(velocity(state));
  double dt = opt_.dt_max;
  if (umax > std::numeric_limits<double>::min()) dt = std::fmin(dt, opt_.cfl * h / umax);
  if (opt_.viscous == ViscousTreatment::Explicit && nu_ > 0.0) {
    dt = std::fmin(dt, h * h / (6.0 * nu_));
  }
  return dt;
}

VectorField3D SpectralSolver::vorticity(const SimState& state) {
  return ops_.to_physical(state.omega_hat);
}

VectorField3D SpectralSolver::velocity(const SimState& state) {
  return ops_.to_physical(ops_.velocity_from_vorticity(state.omega_hat));
}

Diagnostics SpectralSolver::diagnostics(const SimState& state) {
  const VectorField3D w = vorticity(state);
  const VectorField3D u = velocity(state);
  Diagnostics d;
  d.energy = half_square_integral(u);
  d.enstrophy = half_square_integral(w);
  double hel = 0.0;
  for (std::size_t i = 0; i < w.data().size(); ++i) hel += u.data()[i] * w.data()[i];
  d.helicity = hel * grid().cell_volume();
  d.omega_linf = linf_norm(w);
  d.omega_l1 = l1_norm(w);
  return d;
}

SpectralSolver::EnstrophyBudget SpectralSolver::enstrophy_budget(const SimState& state) {
  EnstrophyBudget out;
  const VectorField3D w = vorticity(state);
  out.enstrophy = half_square_integral(w);

  const SpectralVector u_hat = ops_.velocity_from_vorticity(state.omega_hat);
  // grad[i][j] = d u_i / d x_j
  std::array<std::array<std::vector<double>, 3>, 3> grad;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) grad[i][j] = ops_.to_physical(ops_.derivative(u_hat[i], j));
  }
  double prod = 0.0;
  for (std::size_t p = 0; p < grid().cells(); ++p) {
    const Vec3 wp = w.at(p);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) prod += wp[i] * grad[i][j][p] * wp[j];
    }
  }
  out.production = prod * grid().cell_volume();

  // Parseval over the half spectrum: interior kx planes count twice.
  const double n3 = static_cast<double>(grid().cells());
  double pal = 0.0;
  for (std::size_t s = 0; s < ops_.spectral_size(); ++s) {
    const auto m = ops_.integer_wavenumber(s);
    const double weight = (m[0] == 0 || 2 * m[0] == static_cast<int>(grid().n())) ? 1.0 : 2.0;
    const auto k = ops_.wavevector(s);
    const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    for (int c = 0; c < 3; ++c) pal += weight * kk * std::norm(state.omega_hat[c][s]);
  }
  out.palinstrophy = 0.5 * pal / n3 * grid().cell_volume();
  return out;
}

void Timeline::append(Snapshot s) {
  if (!snaps_.empty() && !(s.time > snaps_.back().time)) {
    throw ParameterError("timeline: snapshot times must be strictly increasing");
  }
  snaps_.push_back(std::move(s));
}

std::string snapshot_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "field_%05zu.slf", index);
  return buf;
}

Timeline evolve(SpectralSolver& solver, const VectorField3D& initial, const RunConfig& cfg) {
  if (!(cfg.snapshot_interval > 0.0)) throw ParameterError("evolve: snapshot_interval must be > 0");
  if (cfg.t_final < cfg.t_start) throw ParameterError("evolve: t_final precedes t_start");

  Timeline timeline;
  SimState state = solver.make_state(initial, cfg.t_start);
  std::size_t steps = 0;

  auto record = [&](std::size_t index) {
    Snapshot snap;
    snap.time = state.time;
    snap.steps = steps;
    snap.diagnostics = solver.diagnostics(state);
    if (cfg.store_fields || cfg.output_dir) {
      VectorField3D w = solver.vorticity(state);
      if (cfg.output_dir) {
        snap.file = *cfg.output_dir / snapshot_file_name(index);
        slf::write_field(*snap.file, w);
      }
      if (cfg.store_fields) snap.field = std::move(w);
    }
    timeline.append(std::move(snap));
  };

  const double interval = cfg.snapshot_interval;
  std::size_t index = static_cast<std::size_t>(std::llround(cfg.t_start / interval));
  record(index);
  const double w0 = timeline.snapshots().front().diagnostics.omega_linf;
  const double eps = 1e-12 * std::fmax(1.0, std::fabs(cfg.t_final));

  while (state.time < cfg.t_final - eps) {
    const double next_mark = static_cast<double>(index + 1) * interval;
    const bool to_mark = next_mark < cfg.t_final - eps;
    const double target = to_mark ? next_mark : cfg.t_final;
    try {
      while (state.time < target - eps) {
        const double remaining = target - state.time;
        const double dt_cfl = solver.cfl_dt(state);
        const double nsteps = std::ceil(remaining / dt_cfl);
        state = solver.step(state, remaining / nsteps);
        ++steps;
      }
    } catch (const InstabilityError& e) {
      timeline.failure = e.what();
      return timeline;
    }
    state.time = target;
    ++index;
    record(index);
    if (cfg.stop_at_growth > 0.0 &&
        timeline.snapshots().back().diagnostics.omega_linf >= cfg.stop_at_growth * w0) {
      break;
    }
  }
  return timeline;
}

void write_diagnostics_csv(const std::filesystem::path& path, const Timeline& timeline) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t,energy,enstrophy,helicity,omega_linf,omega_l1\n";
  out << std::setprecision(17);
  for (const auto& s : timeline.snapshots()) {
    const auto& d = s.diagnostics;
    out << s.time << ',' << d.energy << ',' << d.enstrophy << ',' << d.helicity << ','
        << d.omega_linf << ',' << d.omega_l1 << '\n';
  }
}

}  // namespace vcrit
