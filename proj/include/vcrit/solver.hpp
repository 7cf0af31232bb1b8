#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vcrit/field.hpp"
#include "vcrit/spectral.hpp"

namespace vcrit {

enum class ViscousTreatment { IntegratingFactor, Explicit };

struct SolverOptions {
  double cfl = 0.5;
  bool dealias = true;
  ViscousTreatment viscous = ViscousTreatment::IntegratingFactor;
  /// Upper bound on the step; also the step returned when the flow is at rest.
  double dt_max = 0.1;
};

/// Spectral vorticity state of a run.
struct SimState {
  double time = 0.0;
  SpectralVector omega_hat;
};

/// Scalar record attached to every snapshot.
struct Diagnostics {
  double energy = 0.0;     ///< (1/2) sum |u|^2 dV
  double enstrophy = 0.0;  ///< (1/2) sum |w|^2 dV
  double helicity = 0.0;
  double omega_linf = 0.0;
  double omega_l1 = 0.0;
};

/// Pseudo-spectral RK4 integrator for dw/dt = curl(u x w) + nu lap w on the periodic box.
class SpectralSolver {
 public:
  SpectralSolver(const GridSpec& grid, double viscosity, SolverOptions options = {});

  const GridSpec& grid() const noexcept { return ops_.grid(); }
  double viscosity() const noexcept { return nu_; }
  const SolverOptions& options() const noexcept { return opt_; }

  /// Projects `omega` onto solenoidal, mean-free fields and wraps it as a state.
  SimState make_state(const VectorField3D& omega, double time = 0.0);

  /// One RK4 step. Throws InstabilityError if the result is not finite. Negative dt is
  /// allowed for inviscid runs (time reversal checks).
  SimState step(const SimState& state, double dt);

  /// C * h / max|u| (max-norm), capped by dt_max; combined with h^2 / (6 nu) when the
  /// viscous term is explicit.
  double cfl_dt(const SimState& state);

  VectorField3D vorticity(const SimState& state);
  VectorField3D velocity(const SimState& state);
  Diagnostics diagnostics(const SimState& state);

  /// Spectral right-hand side of the vorticity equation (nonlinear part, plus the
  /// viscous term when it is treated explicitly).
  SpectralVector rhs(const SpectralVector& omega_hat);

  /// Enstrophy production sum w . S w dV and palinstrophy (1/2) sum |grad w|^2 dV.
  struct EnstrophyBudget {
    double enstrophy = 0.0;
    double production = 0.0;
    double palinstrophy = 0.0;
  };
  EnstrophyBudget enstrophy_budget(const SimState& state);

 private:
  SpectralVector nonlinear(const SpectralVector& omega_hat);
  void apply_decay(SpectralVector& v, double dt) const;

  SpectralOps ops_;
  double nu_;
  SolverOptions opt_;
};

/// Run configuration for evolve().
struct RunConfig {
  double t_start = 0.0;
  double t_final = 1.0;
  double snapshot_interval = 0.1;
  bool store_fields = true;
  /// When set, every stored snapshot is also written as SLF1 into this directory.
  std::optional<std::filesystem::path> output_dir;
  /// Stop early once omega_linf exceeds this multiple of its initial value (0 disables).
  double stop_at_growth = 0.0;
};

struct Snapshot {
  double time = 0.0;
  Diagnostics diagnostics;
  std::optional<VectorField3D> field;
  std::optional<std::filesystem::path> file;
  std::size_t steps = 0;  ///< steps taken since the start of the run
};

/// Append-only ordered list of snapshots (strictly increasing times).
class Timeline {
 public:
  void append(Snapshot s);
  const std::vector<Snapshot>& snapshots() const noexcept { return snaps_; }
  std::size_t size() const noexcept { return snaps_.size(); }
  bool empty() const noexcept { return snaps_.empty(); }

  /// Set when integration stopped on an instability; the snapshots up to it are kept.
  std::optional<std::string> failure;

 private:
  std::vector<Snapshot> snaps_;
};

/// File name used for snapshot j when fields are persisted.
std::string snapshot_file_name(std::size_t index);

/// Integrates from `initial` to cfg.t_final, recording a snapshot every snapshot_interval.
Timeline evolve(SpectralSolver& solver, const VectorField3D& initial, const RunConfig& cfg);

/// CSV with columns t, energy, enstrophy, helicity, omega_linf, omega_l1.
void write_diagnostics_csv(const std::filesystem::path& path, const Timeline& timeline);

}  // namespace vcrit
