#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "certilab/certify.hpp"
#include "certilab/sensing.hpp"
#include "certilab/signals.hpp"

namespace certilab {

enum class MeasurementKind { gaussian, tomo_binary, tomo_perturbed, tomo_real };

MeasurementKind measurement_kind_by_name(const std::string& s);
std::string measurement_kind_name(MeasurementKind k);

struct PhaseConfig {
  std::string objective = "f1";        // CLI case name (f1 ... f6-2d)
  ValueClass value_class = ValueClass::real;
  SignalStructure structure = SignalStructure::sparse;
  int n = 100;                          // ambient dimension; image side for 2d
  std::vector<double> rho_grid;         // default 0.05:0.05:0.95
  std::vector<int> m_grid;              // measurements; angle counts for tomo
  int trials = 10;
  MeasurementKind kind = MeasurementKind::gaussian;
  std::uint64_t master_seed = 0;
  CertifyMethod certifier = CertifyMethod::epsilon_lp;
  double eps = 1e-8;
  double feas_tol = 1e-8;
  // Statistical-dimension overlay: samples per tau evaluation and signal
  // draws averaged per rho (Monte-Carlo cases only).
  int statdim_samples = 10000;
  int statdim_signal_draws = 3;
  bool with_statdim = true;
  int threads = 0;                      // 0 => CERTILAB_THREADS or hardware

  void validate() const;
  static PhaseConfig from_json_file(const std::string& path);
  static PhaseConfig from_json_text(const std::string& text);
};

struct PhaseCell {
  double rho = 0.0;
  int m_requested = 0;       // grid value (angle count for tomo)
  double m_actual = 0.0;     // mean effective row count over trials
  int trials = 0;
  int successes = 0;
  int indeterminates = 0;
};

struct PhaseDiagram {
  PhaseConfig config;
  std::vector<PhaseCell> cells;          // rho-major, then m, fixed order
  std::vector<double> statdim_curve;     // one J* per rho grid entry
  double wall_seconds = 0.0;

  const PhaseCell& cell(int rho_idx, int m_idx) const;
};

// Per-cell seeds are mix_seed(master, rho_idx, m_idx, trial_idx), so any
// cell can be reproduced in isolation and cells can run on any schedule
// with results identical to the sequential order.
PhaseDiagram run_phase_experiment(const PhaseConfig& config);

// CSV columns: rho,m,trials,successes,indeterminates,statdim (m is the
// recorded effective measurement count).
void write_csv(const PhaseDiagram& diagram, const std::string& path);
PhaseDiagram read_csv_diagram(const std::string& path);  // counts only

// One pixel per cell, gray = round(255*successes/trials), rho ascending on
// x, m ascending upward.  `binary_format` selects P5 over P2.  The overlay
// variant writes a second image with the statdim curve burned in at gray
// 128.
void write_pgm(const PhaseDiagram& diagram, const std::string& path,
               bool binary_format = false);
void write_pgm_overlay(const PhaseDiagram& diagram, const std::string& path,
                       bool binary_format = false);

int phase_worker_count(int requested);  // applies CERTILAB_THREADS cap

}  // namespace certilab
