#include "qedn/key_rate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qedn/error.hpp"

namespace qedn {

void QkdParams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::Invalid, what); };
  if (!(brightness_per_pair >= 0.0)) bad("brightness must be non-negative");
  if (!(coincidence_window_s >= 0.0)) bad("coincidence window must be non-negative");
  if (!(eta_tcc >= 0.0 && eta_tcc <= 1.0)) bad("eta_tcc must lie in [0, 1]");
  if (!(e_pol >= 0.0 && e_pol < 0.5)) bad("e_pol must lie in [0, 0.5)");
  if (!(dark_count_cps >= 0.0)) bad("dark count rate must be non-negative");
  if (!(user_loss_db >= 0.0)) bad("user loss must be non-negative");
  if (!(f_ec >= 0.0)) bad("f_ec must be non-negative");
}

double efficiency_from_db(double db) { return std::pow(10.0, -db / 10.0); }

double singles(double brightness, double eta, double dark_cps) { return brightness * eta + dark_cps; }

Coincidences coincidences(double brightness, double eta_i, double eta_j, const QkdParams& p) {
  Coincidences c;
  const double s_i = singles(brightness, eta_i, p.dark_count_cps);
  const double s_j = singles(brightness, eta_j, p.dark_count_cps);
  c.cc_true = brightness * (eta_i * eta_j);
  c.cc_acc = s_i * s_j * p.coincidence_window_s;
  c.cc_meas = p.eta_tcc * c.cc_true + c.cc_acc;
  c.cc_err = p.eta_tcc * c.cc_true * p.e_pol + c.cc_acc / 2.0;
  return c;
}

double qber(double cc_err, double cc_meas) {
  if (!(cc_meas > 0.0)) throw Error(ErrorKind::Undefined, "QBER is undefined without coincidences");
  return cc_err / cc_meas;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::Invalid, "entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double secure_key_rate_at(double loss_i_db, double loss_j_db, double brightness, const QkdParams& p) {
  const double eta_i = efficiency_from_db(loss_i_db + p.user_loss_db);
  const double eta_j = efficiency_from_db(loss_j_db + p.user_loss_db);
  const Coincidences c = coincidences(brightness, eta_i, eta_j, p);
  if (!(c.cc_meas > 0.0)) return 0.0;
  const double h = binary_entropy(qber(c.cc_err, c.cc_meas));
  return std::max(0.0, 0.5 * c.cc_meas * (1.0 - p.f_ec * h - h));
}

double secure_key_rate(const LinkBudget& budget, const QkdParams& p) {
  return secure_key_rate_at(budget.loss_i_db, budget.loss_j_db, budget.n_pairs * p.brightness_per_pair, p);
}

int optimal_channel_count(double loss_i_db, double loss_j_db, const QkdParams& p, int n_max) {
  int best = 1;
  double best_rate = -1.0;
  for (int n = 1; n <= std::max(1, n_max); ++n) {
    const double r = secure_key_rate(LinkBudget{loss_i_db, loss_j_db, n}, p);
    if (r > best_rate) {
      best_rate = r;
      best = n;
    }
  }
  return best;
}

int optimal_channel_count(const PathRecord& sp_i, const PathRecord& sp_j, const QkdParams& p, int n_max) {
  if (!sp_i.loss.finite() || !sp_j.loss.finite()) throw Error(ErrorKind::Invalid, "path loss must be finite");
  return optimal_channel_count(sp_i.loss.value(), sp_j.loss.value(), p, n_max);
}

std::vector<RatePoint> rate_curve(double loss_i_db, double loss_j_db, const QkdParams& p,
                                  const std::vector<double>& brightness) {
  std::vector<RatePoint> out;
  out.reserve(brightness.size());
  for (double b : brightness) out.push_back(RatePoint{b, secure_key_rate_at(loss_i_db, loss_j_db, b, p)});
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw Error(ErrorKind::Invalid, "log grid needs 0 < lo < hi, >= 2 points");
  std::vector<double> out;
  const double a = std::log10(lo);
  const double step = (std::log10(hi) - a) / (points - 1);
  for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, a + step * i));
  return out;
}

}  // namespace qedn
