#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "aoi/chain_model.hpp"
#include "aoi/freshness.hpp"
#include "aoi/rng.hpp"
#include "aoi/timeseries.hpp"
#include "test_util.hpp"

using namespace aoi;

namespace {

// sample a trajectory of the symmetric binary chain
std::vector<int> sample_chain(Rng& rng, double flip, std::size_t n) {
  std::vector<int> v(n);
  v[0] = rng.next_double() < 0.5 ? 0 : 1;
  for (std::size_t i = 1; i < n; ++i) v[i] = rng.next_double() < flip ? 1 - v[i - 1] : v[i - 1];
  return v;
}

// dataset with Y_t = V_{t-d}: labels w[t], per-slot features w[t+d]
TimeSeriesDataset delayed_dataset(Rng& rng, double flip, int d, std::size_t n) {
  auto w = sample_chain(rng, flip, n + static_cast<std::size_t>(d));
  std::vector<std::string> labels(n), feats(n);
  for (std::size_t t = 0; t < n; ++t) {
    labels[t] = std::to_string(w[t]);
    feats[t] = std::to_string(w[t + static_cast<std::size_t>(d)]);
  }
  return TimeSeriesDataset(std::move(labels), std::move(feats), 1);
}

double binary_entropy_nats(double q) {
  double h = 0.0;
  if (q > 0.0) h -= q * std::log(q);
  if (q < 1.0) h -= (1.0 - q) * std::log(1.0 - q);
  return h;
}

Distribution theta_point_mass(int support_max, int at) {
  std::vector<double> m(static_cast<std::size_t>(support_max) + 1, 0.0);
  m[static_cast<std::size_t>(at)] = 1.0;
  return Distribution(Alphabet::integers(static_cast<std::size_t>(support_max) + 1), std::move(m));
}

}  // namespace

TEST_CASE("delayed system curve dips to exactly zero at the delay") {
  MarkovChainModel model = MarkovChainModel::symmetric_binary(0.1, 2);
  for (const auto& loss : testutil::all_losses()) {
    FreshnessCurve c = freshness_curve(model, loss, 6);
    CHECK(c.value(2) == doctest::Approx(0.0).epsilon(1e-15));
    // decreasing up to d, increasing after (delayed causal system)
    CHECK(c.value(0) > c.value(1));
    CHECK(c.value(1) > c.value(2));
    CHECK(c.value(3) > c.value(2));
    CHECK(c.value(4) >= c.value(3) - 1e-12);
  }
}

TEST_CASE("iid features carry information only at lag zero") {
  // rows equal to the stationary law make V_t i.i.d.
  MarkovChainModel iid({{0.3, 0.7}, {0.3, 0.7}}, 0);
  for (const auto& loss : testutil::all_losses()) {
    FreshnessCurve c = freshness_curve(iid, loss, 4);
    CHECK(c.value(0) == doctest::Approx(0.0).epsilon(1e-12));
    double h = l_entropy(testutil::dist({0.3, 0.7}), loss);
    for (int theta = 1; theta <= 4; ++theta) CHECK(c.value(theta) == doctest::Approx(h).epsilon(1e-9));
  }
}

TEST_CASE("symmetric markov chain log-loss curve matches the k-step flip law") {
  const double flip = 0.1;
  MarkovChainModel model = MarkovChainModel::symmetric_binary(flip, 0);
  FreshnessCurve c = freshness_curve(model, LossFunction::log_loss(), 12);
  for (int theta = 0; theta <= 12; ++theta) {
    double q = 0.5 * (1.0 - std::pow(1.0 - 2.0 * flip, theta));
    CHECK(c.value(theta) == doctest::Approx(binary_entropy_nats(q)).epsilon(1e-10));
    if (theta > 0) CHECK(c.value(theta) >= c.value(theta - 1) - 1e-12);
  }
  CHECK(c.value(12) < std::log(2.0) + 1e-9);
  CHECK(std::log(2.0) - c.value(12) < 0.02);
}

TEST_CASE("markov curves are nondecreasing for all losses") {
  MarkovChainModel model({{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.25, 0.25, 0.5}}, 0);
  for (const auto& loss : testutil::all_losses()) {
    FreshnessCurve c = freshness_curve(model, loss, 8);
    for (int theta = 1; theta <= 8; ++theta) CHECK(c.value(theta) >= c.value(theta - 1) - 1e-12);
  }
}

TEST_CASE("monotone decomposition on chain models") {
  SUBCASE("markov chain: g2 vanishes") {
    MarkovChainModel model = MarkovChainModel::symmetric_binary(0.2, 0);
    for (const auto& loss : testutil::all_losses()) {
      auto dec = monotone_decomposition(model, loss, 6);
      for (int theta = 0; theta <= 6; ++theta) {
        CHECK(std::abs(dec.g2.value(theta)) < 1e-9);
        CHECK(dec.g1.value(theta) - dec.g2.value(theta) ==
              doctest::Approx(dec.direct.value(theta)).epsilon(1e-9));
      }
    }
  }
  SUBCASE("empty sums at theta = 0") {
    MarkovChainModel model = MarkovChainModel::symmetric_binary(0.3, 1);
    auto dec = monotone_decomposition(model, LossFunction::brier(), 4);
    CHECK(dec.g2.value(0) == 0.0);
    CHECK(dec.g1.value(0) == doctest::Approx(dec.direct.value(0)).epsilon(1e-12));
  }
  SUBCASE("delayed system: g2 strictly positive from theta = 1") {
    MarkovChainModel model = MarkovChainModel::symmetric_binary(0.1, 2);
    auto dec = monotone_decomposition(model, LossFunction::log_loss(), 5);
    for (int theta = 1; theta <= 5; ++theta) CHECK(dec.g2.value(theta) > 1e-6);
    for (int theta = 0; theta <= 5; ++theta)
      CHECK(dec.g1.value(theta) - dec.g2.value(theta) ==
            doctest::Approx(dec.direct.value(theta)).epsilon(1e-9));
  }
  SUBCASE("g1 and g2 are nondecreasing") {
    Rng rng(41);
    for (int trial = 0; trial < 5; ++trial) {
      // random 3-state chain, random delay
      std::vector<std::vector<double>> rows;
      for (int i = 0; i < 3; ++i) rows.push_back(testutil::random_mass(rng, 3, 0.05));
      MarkovChainModel model(rows, trial % 3);
      auto dec = monotone_decomposition(model, LossFunction::log_loss(), 5);
      for (int theta = 1; theta <= 5; ++theta) {
        CHECK(dec.g1.value(theta) >= dec.g1.value(theta - 1) - 1e-12);
        CHECK(dec.g2.value(theta) >= dec.g2.value(theta - 1) - 1e-12);
      }
    }
  }
}

TEST_CASE("decomposition identity holds on empirical data") {
  Rng rng(43);
  TimeSeriesDataset data = delayed_dataset(rng, 0.15, 2, 4000);
  for (const auto& loss : testutil::all_losses()) {
    auto dec = monotone_decomposition(data, loss, 4);
    for (int theta = 0; theta <= 4; ++theta)
      CHECK(dec.g1.value(theta) - dec.g2.value(theta) ==
            doctest::Approx(dec.direct.value(theta)).epsilon(1e-9));
  }
}

TEST_CASE("empirical curve approaches the analytic one") {
  Rng rng(47);
  const double flip = 0.2;
  TimeSeriesDataset data = delayed_dataset(rng, flip, 0, 60000);
  MarkovChainModel model = MarkovChainModel::symmetric_binary(flip, 0);
  FreshnessCurve emp = freshness_curve(data, LossFunction::log_loss(), 3);
  FreshnessCurve exact = freshness_curve(model, LossFunction::log_loss(), 3);
  for (int theta = 0; theta <= 3; ++theta)
    CHECK(std::abs(emp.value(theta) - exact.value(theta)) < 0.02);
}

TEST_CASE("empirical delayed system hits zero exactly at the delay") {
  Rng rng(53);
  TimeSeriesDataset data = delayed_dataset(rng, 0.1, 2, 3000);
  FreshnessCurve c = freshness_curve(data, LossFunction::zero_one(), 4);
  CHECK(c.value(2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(c.value(0) > 0.05);
}

TEST_CASE("cross-entropy curve against an identical training set") {
  Rng rng(59);
  TimeSeriesDataset data = delayed_dataset(rng, 0.25, 1, 2000);
  FreshnessCurve cross = freshness_curve(data, data, LossFunction::brier(), 3);
  FreshnessCurve direct = freshness_curve(data, LossFunction::brier(), 3);
  for (int theta = 0; theta <= 3; ++theta)
    CHECK(cross.value(theta) == doctest::Approx(direct.value(theta)).epsilon(1e-12));
}

TEST_CASE("insufficient data names the offending theta") {
  TimeSeriesDataset tiny({"0", "1", "0"}, {"1", "0", "1"}, 1);
  CHECK_THROWS_WITH_AS(freshness_curve(tiny, LossFunction::zero_one(), 3), doctest::Contains("theta=3"),
                       input_error);
}

TEST_CASE("cross-entropy curve rejects unseen inference features") {
  // the training set never observes feature symbol 2
  TimeSeriesDataset train({"0", "1", "0", "1", "0", "1"}, {"0", "1", "0", "1", "0", "1"}, 1);
  TimeSeriesDataset infer({"0", "1", "0", "1", "0", "1"}, {"0", "1", "2", "1", "0", "2"}, 1);
  CHECK_THROWS_AS(freshness_curve(infer, train, LossFunction::zero_one(), 1), computation_error);
}

TEST_CASE("random theta averaging and stochastic order") {
  MarkovChainModel model = MarkovChainModel::symmetric_binary(0.1, 0);
  FreshnessCurve monotone = freshness_curve(model, LossFunction::log_loss(), 5);

  SUBCASE("equal distributions give equal averages") {
    auto th = theta_point_mass(5, 2);
    auto r = stochastic_order_check(monotone, th, th);
    CHECK(r.h1 == doctest::Approx(r.h2).epsilon(1e-15));
    CHECK(r.ordered);
  }
  SUBCASE("point masses on a monotone curve are ordered") {
    auto r = stochastic_order_check(monotone, theta_point_mass(5, 1), theta_point_mass(5, 3));
    CHECK(r.h1 <= r.h2 + 1e-12);
    CHECK(r.ordered);
    CHECK(r.h1 == doctest::Approx(monotone.value(1)).epsilon(1e-12));
    CHECK(r.h2 == doctest::Approx(monotone.value(3)).epsilon(1e-12));
  }
  SUBCASE("non-monotonic curve can break the ordering") {
    MarkovChainModel delayed = MarkovChainModel::symmetric_binary(0.1, 2);
    FreshnessCurve dip = freshness_curve(delayed, LossFunction::log_loss(), 5);
    auto r = stochastic_order_check(dip, theta_point_mass(5, 0), theta_point_mass(5, 2));
    CHECK_FALSE(r.ordered);
    CHECK(r.h1 > r.h2);
  }
  SUBCASE("mixture weights follow the averaging formula") {
    Distribution th(Alphabet::integers(6), {0.25, 0.5, 0.25, 0.0, 0.0, 0.0});
    double expect = 0.25 * monotone.value(0) + 0.5 * monotone.value(1) + 0.25 * monotone.value(2);
    CHECK(expected_under_theta(monotone, th) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("violated precondition is rejected") {
    CHECK_THROWS_AS(stochastic_order_check(monotone, theta_point_mass(5, 4), theta_point_mass(5, 1)),
                    input_error);
  }
  SUBCASE("support beyond the curve is rejected") {
    auto th7 = Distribution(Alphabet::integers(8), {0, 0, 0, 0, 0, 0, 0, 1.0});
    CHECK_THROWS_AS(expected_under_theta(monotone, th7), input_error);
  }
}

TEST_CASE("time-series csv loading") {
  const char* path = "ts_test_tmp.csv";
  {
    std::ofstream f(path);
    f << "t,y,v1,v2\n";
    f << "0,1,0,3\n1,0,1,2\n2,1,1,1\n3,0,0,0\n";
  }
  TimeSeriesDataset ds = TimeSeriesDataset::from_csv(path, 2);
  CHECK(ds.length() == 4);
  CHECK(ds.window_symbol(1) == "1;2|0;3");
  std::remove(path);

  {
    std::ofstream f(path);
    f << "t,y,v1\n0,1,0\n2,0,1\n";
  }
  CHECK_THROWS_WITH_AS(TimeSeriesDataset::from_csv(path, 1), doctest::Contains("contiguous"), input_error);
  std::remove(path);

  CHECK_THROWS_AS(TimeSeriesDataset::from_csv("does_not_exist.csv", 1), input_error);
}
