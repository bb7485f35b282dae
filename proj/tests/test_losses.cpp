// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "pesfkd/losses.hpp"
#include "pesfkd/parameter_set.hpp"
#include "support.hpp"

using namespace pesfkd;
using testing_support::one_hot;
using testing_support::random_matrix;
using M = Tensor<double>;

namespace {

M row(std::vector<double> v) {
  const std::size_t k = v.size();
  return M({1, k}, std::move(v));
}

// Direct evaluation of tau^2 * mean_i sum_j p_t log(p_t / p_s).
double kl_oracle(const M& zs, const M& zt, double tau) {
  const std::size_t n = zs.shape()[0], k = zs.shape()[1];
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> pt(k), ps(k);
    double st = 0, ss = 0;
    for (std::size_t j = 0; j < k; ++j) {
      pt[j] = std::exp(zt.at(i, j) / tau);
      ps[j] = std::exp(zs.at(i, j) / tau);
      st += pt[j];
      ss += ps[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double a = pt[j] / st, b = ps[j] / ss;
      total += a * std::log(a / b);
    }
  }
  return tau * tau * total / double(n);
}

double ce_oracle(const M& y, const M& z) {
  const std::size_t n = z.shape()[0], k = z.shape()[1];
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(z.at(i, j));
    for (std::size_t j = 0; j < k; ++j) total -= y.at(i, j) * (z.at(i, j) - std::log(s));
  }
  return total / double(n);
}

}  // namespace

TEST_CASE("tempered softmax examples") {
  const auto u = tempered_softmax(row({0, 0, 0}), 3.7);
  for (double p : u.probs.data()) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));
  const auto a = tempered_softmax(row({1, 0}), 1.0);
  CHECK(a.probs.at(0, 0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(a.probs.at(0, 1) == doctest::Approx(0.2689).epsilon(1e-4));
  const auto b = tempered_softmax(row({2, 0}), 2.0);
  CHECK(b.probs.at(0, 0) == doctest::Approx(a.probs.at(0, 0)).epsilon(1e-15));
  CHECK(b.tau == 2.0);
  CHECK_THROWS_AS(tempered_softmax(row({1, 0}), 0.0), ParameterError);
  CHECK_THROWS_AS(tempered_softmax(row({1, 0}), -1.0), ParameterError);
}

TEST_CASE("tempered softmax rows sum to one") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto z = random_matrix(rng, 4, 1 + rng() % 10, -50, 50);
    const double tau = 0.2 + double(rng() % 100) / 10.0;
    const auto pd = tempered_softmax(z, tau);
    const auto pf = tempered_softmax(Tensor<float>(z.shape(), std::vector<float>(z.data().begin(), z.data().end())),
                                     tau);
    for (std::size_t i = 0; i < 4; ++i) {
      double sd = 0, sf = 0;
      for (std::size_t j = 0; j < z.shape()[1]; ++j) {
        CHECK(pd.probs.at(i, j) >= 0.0);
        sd += pd.probs.at(i, j);
        sf += double(pf.probs.at(i, j));
      }
      CHECK(std::abs(sd - 1.0) < 1e-12);
      CHECK(std::abs(sf - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("larger temperature flattens the distribution") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto z = random_matrix(rng, 1, 6, -5, 5);
    double prev = 2.0;
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const auto st = tempered_softmax(z, tau);
      const auto p = st.probs.data();
      const double top = *std::max_element(p.begin(), p.end());
      CHECK(top < prev);
      prev = top;
    }
  }
}

TEST_CASE("cross entropy examples") {
  const auto y = row({1, 0});
  const auto perfect = SoftTarget<double>::from_probabilities(row({1, 0}));
  CHECK(cross_entropy(y, perfect).item() <= 1e-11);
  CHECK(cross_entropy(y, SoftTarget<double>::from_probabilities(row({0.5, 0.5}))).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  for (std::size_t k : {2, 3, 7, 10, 100}) {
    const auto yk = one_hot(std::vector<int>{0, int(k - 1)}, k);
    const auto p = tempered_softmax(M::zeros({2, k}), 1.0);
    CHECK(std::abs(cross_entropy(yk, p).item() - std::log(double(k))) < 1e-9);
  }
  // Zero probability under a true label hits the floor instead of infinity.
  const double floored = cross_entropy(row({0, 1}), perfect).item();
  CHECK(std::isfinite(floored));
  CHECK(floored == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
  CHECK_THROWS_AS(cross_entropy(row({0.5, 0.2}), perfect), ContractError);
  CHECK_THROWS_AS(cross_entropy(M({1, 3}, {1, 0, 0}), perfect), DimensionError);
}

TEST_CASE("cross entropy agrees with a direct evaluation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_matrix(rng, 8, 5, -4, 4);
    const auto y = one_hot(testing_support::random_labels(rng, 8, 5), 5);
    CHECK(cross_entropy(y, tempered_softmax(z, 1.0)).item() == doctest::Approx(ce_oracle(y, z)).epsilon(1e-12));
  }
}

TEST_CASE("label smoothing") {
  const auto y = one_hot(std::vector<int>{0, 2}, 4);
  const auto same = label_smooth(y, 0.0);
  CHECK(std::equal(same.data().begin(), same.data().end(), y.data().begin()));
  const auto uniform = label_smooth(y, 1.0);
  for (double v : uniform.data()) CHECK(v == 0.25);
  const auto s = label_smooth(row({1, 0}), 0.1);
  CHECK(s.at(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(s.at(0, 1) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS(label_smooth(y, -0.1), ParameterError);
  CHECK_THROWS_AS(label_smooth(y, 1.5), ParameterError);
  for (double a : {0.0, 0.05, 0.3, 0.9}) {
    const auto t = label_smooth(y, a);
    for (std::size_t j = 1; j < 4; ++j) CHECK(t.at(0, 0) - t.at(0, j) == doctest::Approx(1 - a).epsilon(1e-14));
  }
}

TEST_CASE("distillation KL") {
  CHECK(kd_kl_loss(row({0, 0}), row({2, 0}), 2.0).item() == doctest::Approx(0.4438).epsilon(1e-3 / 0.4438));
  CHECK(std::abs(kd_kl_loss(row({0, 0}), row({2, 0}), 2.0).item() - kl_oracle(row({0, 0}), row({2, 0}), 2.0)) <
        1e-14);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    // Range kept small enough that no probability reaches the 1e-12 floor.
    const auto zs = random_matrix(rng, 5, 4, -10, 10);
    const auto zt = random_matrix(rng, 5, 4, -10, 10);
    const double tau = 1.0 + double(trial % 8);
    const double v = kd_kl_loss(zs, zt, tau).item();
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx(kl_oracle(zs, zt, tau)).epsilon(1e-10));
    CHECK(std::abs(kd_kl_loss(zs, zs, tau).item()) < 1e-12);
    // A per-row shift leaves the tempered distribution unchanged.
    CHECK(std::abs(kd_kl_loss(zs, add(zs, M::scalar(3.0)), tau).item()) < 1e-12);
  }
  CHECK_THROWS_AS(kd_kl_loss(M::zeros({2, 3}), M::zeros({2, 4}), 1.0), DimensionError);
}

TEST_CASE("composite losses") {
  const auto zs = row({0, 0});
  const auto zt = row({2, 0});
  const auto y = row({1, 0});
  const double kl = kd_kl_loss(zs, zt, 2.0).item();
  const double ce = cross_entropy(y, tempered_softmax(zs, 1.0)).item();
  CHECK(student_loss(zs, zt, y, {0.0, 0.5, 0.0}, 2.0).item() == doctest::Approx(ce).epsilon(1e-14));
  CHECK(student_loss(zs, zt, y, {1.0, 0.5, 0.0}, 2.0).item() == doctest::Approx(kl).epsilon(1e-14));
  CHECK(student_loss(zs, zt, y, {0.9, 0.5, 0.0}, 2.0).item() == doctest::Approx(0.4687).epsilon(1e-3));

  const double ce_t = cross_entropy(y, tempered_softmax(zt, 1.0)).item();
  CHECK(teacher_loss(zt, zs, y, {0.9, 1.0, 0.0}, 2.0, false).item() == doctest::Approx(ce_t).epsilon(1e-14));
  CHECK(teacher_loss(zt, zs, y, {0.9, 0.0, 0.0}, 2.0, false).item() == 0.0);
  CHECK(teacher_loss(zt, zt, y, {0.9, 0.5, 0.0}, 2.0, true).item() == doctest::Approx(0.5 * ce_t).epsilon(1e-14));
  CHECK(teacher_loss(zt, zs, y, {0.9, 0.5, 0.0}, 2.0, true).item() ==
        doctest::Approx(0.5 * ce_t + 0.9 * kl).epsilon(1e-14));

  LossWeights bad{1.5, 0.5, 0.0};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  CHECK_THROWS_AS((LossWeights{0.5, -1.0, 0.0}.validate()), ParameterError);
  CHECK_THROWS_AS((LossWeights{0.5, 0.5, 2.0}.validate()), ParameterError);
}

TEST_CASE("gradient routing between student and teacher") {
  std::mt19937_64 rng(1);
  auto zs = random_matrix(rng, 3, 4, -2, 2, true);
  auto zt = random_matrix(rng, 3, 4, -2, 2, true);
  const auto y = one_hot(std::vector<int>{0, 1, 3}, 4);
  student_loss(zs, zt, y, {0.9, 0.5, 0.0}, 4.0).backward();
  CHECK(zs.has_grad());
  CHECK_FALSE(zt.has_grad());
  zs.drop_grad();
  teacher_loss(zt, zs, y, {0.9, 0.5, 0.0}, 4.0, true).backward();
  CHECK(zt.has_grad());
  CHECK_FALSE(zs.has_grad());
  zt.drop_grad();
  kd_kl_loss(zs, zt, 4.0).backward();
  CHECK(zs.has_grad());
  CHECK(zt.has_grad());
  zs.drop_grad();
  zt.drop_grad();
  kd_kl_loss(zs, zt, 4.0, true).backward();
  CHECK(zs.has_grad());
  CHECK_FALSE(zt.has_grad());
}

TEST_CASE("loss gradients match finite differences") {
  using Fn = std::function<M(const ParameterSet<double>&)>;
  const LossWeights w{0.9, 0.5, 0.1};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    ParameterSet<double> p;
    p.add("zs", random_matrix(rng, 4, 5, -3, 3));
    p.add("zt", random_matrix(rng, 4, 5, -3, 3));
    const auto y = one_hot(testing_support::random_labels(rng, 4, 5), 5);
    const auto ys = label_smooth(y, 0.2);
    // Detached inputs are frozen for the check: their analytic gradient is
    // zero by construction while the finite difference is not.
    const std::pair<Fn, const char*> cases[] = {
        {[&](const auto& ps) { return cross_entropy(ys, tempered_softmax(ps.get("zs"), 1.0)); }, "zt"},
        {[&](const auto& ps) { return kd_kl_loss(ps.get("zs"), ps.get("zt"), 4.0); }, ""},
        {[&](const auto& ps) { return student_loss(ps.get("zs"), ps.get("zt"), y, w, 4.0); }, "zt"},
        {[&](const auto& ps) { return teacher_loss(ps.get("zt"), ps.get("zs"), y, w, 4.0, true); }, "zs"},
        {[&](const auto& ps) { return teacher_loss(ps.get("zt"), ps.get("zs"), y, w, 4.0, false); }, "zs"},
    };
    for (const auto& [f, frozen] : cases) {
      p.set_frozen([&](std::string_view n) { return n == frozen; });
      CHECK(grad_check<double>(f, p, 1e-5) < 1e-5);
    }
  }
}
