#include <gtest/gtest.h>

#include <cmath>

#include "qedn/error.hpp"
#include "qedn/key_rate.hpp"
#include "support.hpp"

using namespace qedn;

namespace {

double rel(double got, double want) { return std::fabs(got - want) / want; }

}  // namespace

TEST(Singles, Examples) {
  EXPECT_DOUBLE_EQ(singles(0.0, 0.3, 300.0), 300.0);
  EXPECT_DOUBLE_EQ(singles(3.75e7, 1.0, 0.0), 3.75e7);
  const double want = 3.75e7 * std::pow(10.0, -1.39) + 300.0;
  EXPECT_DOUBLE_EQ(singles(3.75e7, std::pow(10.0, -1.39), 300.0), want);
  EXPECT_LT(rel(want, 1.527e6), 1e-3);
}

TEST(Coincidences, ZeroBrightnessAndWindow) {
  QkdParams p;
  const Coincidences c = coincidences(0.0, 0.1, 0.2, p);
  EXPECT_DOUBLE_EQ(c.cc_true, 0.0);
  EXPECT_DOUBLE_EQ(c.cc_acc, 300.0 * 300.0 * 1e-9);
  EXPECT_DOUBLE_EQ(c.cc_meas, c.cc_acc);
  EXPECT_DOUBLE_EQ(c.cc_err, c.cc_acc / 2);
  p.coincidence_window_s = 0.0;
  EXPECT_DOUBLE_EQ(coincidences(3.75e7, 0.1, 0.2, p).cc_acc, 0.0);
}

TEST(Coincidences, CaseFiveBudget) {
  const QkdParams p;
  const double ei = efficiency_from_db(19.6 + 2.0);
  const double ej = efficiency_from_db(21.0 + 2.0);
  const Coincidences c = coincidences(3.75e7, ei, ej, p);
  // Hand evaluation of the coincidence model.
  const double si = 3.75e7 * ei + 300.0;
  const double sj = 3.75e7 * ej + 300.0;
  const double acc = si * sj * 1e-9;
  const double meas = 0.761 * 3.75e7 * ei * ej + acc;
  EXPECT_NEAR(c.cc_meas, meas, 1e-9 * meas);
  EXPECT_LT(rel(c.cc_meas, 1.04e3), 0.01);
  const double er = qber(c.cc_err, c.cc_meas);
  EXPECT_NEAR(er, 0.028, 0.001);
}

TEST(Qber, Limits) {
  EXPECT_DOUBLE_EQ(qber(5.0, 10.0), 0.5);
  EXPECT_DOUBLE_EQ(qber(0.0, 10.0), 0.0);
  try {
    qber(0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undefined);
  }
}

TEST(BinaryEntropy, Values) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), 0.4999, 1e-4);
  try {
    binary_entropy(1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Invalid);
  }
}

TEST(SecureKeyRate, TableValues) {
  const QkdParams p;
  EXPECT_LT(rel(secure_key_rate({19.6, 21.0, 1}, p), 316.581), 0.02);
  EXPECT_LT(rel(secure_key_rate({11.9, 17.8, 2}, p), 5398.8), 0.02);
  EXPECT_LT(rel(secure_key_rate({11.9, 17.8, 1}, p), 3897.2), 0.02);
}

TEST(SecureKeyRate, MatchesIndependentArithmetic) {
  const QkdParams p;
  for (double la : {0.0, 5.0, 12.5, 20.0, 31.0}) {
    for (double lb : {1.0, 9.0, 17.8, 25.0}) {
      for (int n = 1; n <= 4; ++n) {
        const double want = testkit::OracleRates::rate(la, lb, n, p);
        const double got = secure_key_rate({la, lb, n}, p);
        EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, want)) << la << " " << lb << " " << n;
      }
    }
  }
}

TEST(SecureKeyRate, ClampedAtZero) {
  QkdParams p;
  p.e_pol = 0.3;
  EXPECT_EQ(secure_key_rate({10.0, 10.0, 1}, p), 0.0);
  EXPECT_EQ(secure_key_rate({60.0, 60.0, 1}, QkdParams{}), 0.0);
}

TEST(SecureKeyRate, SymmetricInLosses) {
  const QkdParams p;
  for (double la = 0.0; la <= 30.0; la += 3.5) {
    for (double lb = 0.0; lb <= 30.0; lb += 4.25) {
      EXPECT_DOUBLE_EQ(secure_key_rate({la, lb, 2}, p), secure_key_rate({lb, la, 2}, p));
    }
  }
}

TEST(SecureKeyRate, QberBoundedByHalf) {
  const QkdParams p;
  for (double b : log_grid(1e3, 1e11, 40)) {
    const Coincidences c = coincidences(b, efficiency_from_db(20.0), efficiency_from_db(15.0), p);
    const double e = qber(c.cc_err, c.cc_meas);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 0.5);
  }
}

TEST(OptimalChannelCount, SweepAndCap) {
  const QkdParams p;
  for (double la : {0.0, 8.0, 11.9, 19.6, 25.0}) {
    for (double lb : {0.0, 10.0, 17.8, 21.0}) {
      EXPECT_EQ(optimal_channel_count(la, lb, p, 4), testkit::OracleRates::omega(la, lb, p, 4));
      EXPECT_EQ(optimal_channel_count(la, lb, p, 1), 1);
    }
  }
  EXPECT_EQ(optimal_channel_count(11.9, 17.8, p, 4), 2);
  // Accidentals grow with the square of the brightness, so the optimum
  // stays small even without loss.
  EXPECT_LE(optimal_channel_count(0.0, 0.0, p, 4), 2);
}

TEST(RateCurve, RisesThenFallsAndIsUnimodal) {
  const QkdParams p;
  const auto grid = log_grid(1e5, 1e10, 200);
  ASSERT_EQ(grid.size(), 200u);
  EXPECT_DOUBLE_EQ(grid.front(), 1e5);
  EXPECT_NEAR(grid.back(), 1e10, 1e-3);
  for (double la = 10.0; la <= 30.0; la += 5.0) {
    for (double lb = 10.0; lb <= 30.0; lb += 5.0) {
      const auto curve = rate_curve(la, lb, p, grid);
      std::size_t best = 0;
      int peaks = 0;
      for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].rate_cps > curve[best].rate_cps) best = i;
        const bool left = i == 0 || curve[i].rate_cps > curve[i - 1].rate_cps;
        const bool right = i + 1 == curve.size() || curve[i].rate_cps > curve[i + 1].rate_cps;
        if (left && right && curve[i].rate_cps > 0.0) ++peaks;
      }
      EXPECT_EQ(peaks, 1) << la << " " << lb;
      EXPECT_GT(best, 0u);
      EXPECT_LT(best, curve.size() - 1);
      for (std::size_t i = best + 1; i < curve.size(); ++i) EXPECT_LE(curve[i].rate_cps, curve[i - 1].rate_cps);
    }
  }
  EXPECT_LT(secure_key_rate_at(10.0, 10.0, 1e-3, p), 1e-6);
}

TEST(QkdParams, Validation) {
  QkdParams p;
  EXPECT_NO_THROW(p.validate());
  p.eta_tcc = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = QkdParams{};
  p.e_pol = 0.5;
  EXPECT_THROW(p.validate(), Error);
  p = QkdParams{};
  p.dark_count_cps = -1;
  EXPECT_THROW(p.validate(), Error);
}
