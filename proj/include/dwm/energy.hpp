#pragma once

#include <string>
#include <vector>

#include "dwm/dynamics.hpp"

namespace dwm {

// Order-k energies of one slice:
//   e_k(phi) = s^2 |D^k pi|^2 + |D^k Dphi|^2,
//   e_k(psi) = s^2 (D^k chi, D^k chi) + (D^{k+1} psi, D^{k+1} psi),
// contracted with G(phi) and a^{-2} per derivative slot, integrated with
// a^{n-1} dx^{n-1}.  F_map sums k <= r, F_spin sums k <= r-1 plus ||psi||_L2^2.
struct EnergyReport {
  std::vector<real> e_map;   // k = 0..r
  std::vector<real> e_spin;  // k = 0..r-1
  real psi_l2 = 0.0;         // ||psi||_{L2}^2
  real f_map = 0.0;
  real f_spin = 0.0;
  real f_total = 0.0;
};

EnergyReport total_energy(const Model& M, const FieldState& st);

struct GronwallResult {
  real c_hat = 0.0;      // empirical rate fitted on the first tenth of the run
  real phi_total = 0.0;  // Phi(T)
  real max_ratio = 0.0;  // max_t F(t) / (F(0) e^{c_hat Phi(t)})
  std::string verdict = "pass";  // pass | fail | outside_hypotheses | not_applicable
  bool sinv_divergent = false;
};

// times/phis/F are samples along one run, phis[j] = Phi(times[j]).
GronwallResult gronwall_check(const WarpedSpacetime& st, const std::vector<real>& times,
                              const std::vector<real>& phis, const std::vector<real>& F,
                              real T);

}  // namespace dwm
