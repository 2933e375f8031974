#pragma once

#include <vector>

#include "qedn/path_search.hpp"

namespace qedn {

/// BBM92 link parameters. Defaults are the evaluation settings.
struct QkdParams {
  double brightness_per_pair = 3.75e7;  // counts/s per channel pair
  double coincidence_window_s = 1e-9;
  double eta_tcc = 0.761;
  double e_pol = 0.005;
  double dark_count_cps = 300.0;  // per user
  double user_loss_db = 2.0;
  double f_ec = 1.1;

  /// Throws Error(Invalid) when a field is out of range.
  void validate() const;
};

struct LinkBudget {
  double loss_i_db = 0.0;
  double loss_j_db = 0.0;
  int n_pairs = 1;
};

struct Coincidences {
  double cc_true = 0.0;
  double cc_acc = 0.0;
  double cc_meas = 0.0;
  double cc_err = 0.0;
};

/// 10^(-db/10).
double efficiency_from_db(double db);

double singles(double brightness, double eta, double dark_cps);
Coincidences coincidences(double brightness, double eta_i, double eta_j, const QkdParams& p);
/// Throws Error(Undefined) when nothing is measured.
double qber(double cc_err, double cc_meas);
/// Throws Error(Invalid) outside [0, 1].
double binary_entropy(double x);

/// Asymptotic rate in counts/s, never negative.
double secure_key_rate(const LinkBudget& budget, const QkdParams& p);
/// Rate for an explicit total brightness instead of a pair count.
double secure_key_rate_at(double loss_i_db, double loss_j_db, double brightness, const QkdParams& p);

/// Pair count in [1, n_max] with the highest rate; ties keep the smaller.
int optimal_channel_count(double loss_i_db, double loss_j_db, const QkdParams& p, int n_max);
int optimal_channel_count(const PathRecord& sp_i, const PathRecord& sp_j, const QkdParams& p, int n_max);

struct RatePoint {
  double brightness = 0.0;
  double rate_cps = 0.0;
};

std::vector<RatePoint> rate_curve(double loss_i_db, double loss_j_db, const QkdParams& p,
                                  const std::vector<double>& brightness);

/// `points` brightness values spaced logarithmically over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace qedn
