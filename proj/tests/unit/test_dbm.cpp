#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "rmt/dbm.hpp"
#include "rmt/errors.hpp"
#include "rmt/semicircle.hpp"

using namespace rmt;

TEST_CASE("expected variance interpolates between start and equilibrium") {
  CHECK(expected_variance(0.3, 0.0, 10) == 0.3);
  CHECK(expected_variance(0.3, 1e9, 10) == doctest::Approx(0.1));
  CHECK(expected_variance(0.0, std::log(2.0), 4) == doctest::Approx(0.125));
}

TEST_CASE("OU endpoint edge cases") {
  RngStream s = derive_stream(1, 0);
  const HermitianMatrix h0 = rigid_start(8, SymmetryClass::symmetric);
  CHECK(ou_endpoint(h0, 0.0, s).real() == h0.real());
  CHECK_THROWS_AS(ou_endpoint(h0, -0.1, s), DomainError);
  CHECK_THROWS_AS(ou_step(h0, -1.0, h0), DomainError);
}

TEST_CASE("rigid start sits on the classical locations") {
  const auto gamma = classical_locations(50);
  for (auto s : {SymmetryClass::symmetric, SymmetryClass::hermitian}) {
    const auto ev = eigenvalues_of(rigid_start(50, s));
    for (int j = 0; j < 50; ++j) CHECK(ev[j] == doctest::Approx(gamma[j]).epsilon(1e-14));
  }
}

TEST_CASE("ou_step and euler_step formulas") {
  RealMatrix a = RealMatrix::Identity(2, 2);
  RealMatrix b = RealMatrix::Ones(2, 2);
  const HermitianMatrix h(a), noise(b);
  const auto o = ou_step(h, 0.2, noise);
  CHECK(o.real()(0, 0) == doctest::Approx(std::exp(-0.1) + std::sqrt(1 - std::exp(-0.2))));
  CHECK(o.real()(0, 1) == doctest::Approx(std::sqrt(1 - std::exp(-0.2))));
  const auto e = euler_step(h, 0.2, noise);
  CHECK(e.real()(0, 0) == doctest::Approx(0.9 + std::sqrt(0.2)));
}

TEST_CASE("property: exact OU second moments match e^-t s2 + (1 - e^-t)/N") {
  const int n = 24;
  for (auto s : {SymmetryClass::symmetric, SymmetryClass::hermitian}) {
    const HermitianMatrix h0 = rigid_start(n, s);
    const RealMatrix second = h0.to_complex().cwiseAbs2();
    for (double t : {0.01, 0.3, 2.0}) {
      std::vector<HermitianMatrix> samples;
      for (std::uint32_t k = 0; k < 300; ++k) {
        RngStream stream = derive_stream(17, stream_index(1, k));
        samples.push_back(ou_endpoint(h0, t, stream));
      }
      const VarianceCheck v = variance_interpolation(second, t, samples);
      CAPTURE(t);
      CHECK(v.within(4.0));
    }
  }
}

TEST_CASE("Euler path agrees with the exact transition in second moment") {
  // Euler with dt = 0.01 up to t = 1 has O(dt) bias in the variance, far below
  // the Monte Carlo error of 400 samples at N = 16.
  const int n = 16;
  auto profile = std::make_shared<const VarianceProfile>(flat_profile(n));
  const WignerSample start(rigid_start(n, SymmetryClass::symmetric), profile, Provenance{});
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.01 * k);
  std::vector<HermitianMatrix> euler_end, exact_end;
  for (std::uint32_t k = 0; k < 400; ++k) {
    RngStream a = derive_stream(3, stream_index(1, k));
    RngStream b = derive_stream(3, stream_index(2, k));
    const auto path = ou_path(start, grid, a, PathMode::euler);
    CHECK(path.size() == grid.size());
    euler_end.push_back(path.back().h);
    exact_end.push_back(ou_path(start, grid, b, PathMode::exact_ou).back().h);
  }
  const RealMatrix second = start.h().to_complex().cwiseAbs2();
  CHECK(variance_interpolation(second, 1.0, euler_end).within(4.0));
  CHECK(variance_interpolation(second, 1.0, exact_end).within(4.0));

  RngStream c = derive_stream(3, 0);
  const std::vector<double> bad_start{0.1, 0.2};
  const std::vector<double> not_increasing{0.0, 0.2, 0.2};
  CHECK_THROWS_AS(ou_path(start, bad_start, c), DomainError);
  CHECK_THROWS_AS(ou_path(start, not_increasing, c), DomainError);
}

TEST_CASE("unfolded gaps of the classical locations are close to 1") {
  const int n = 2000;
  const auto gamma = classical_locations(n);
  const GapSample g = gap_distribution(gamma, GapWindow{0.0, 1.0});
  REQUIRE(g.gaps.size() > 500);
  for (double gap : g.gaps) CHECK(gap == doctest::Approx(1.0).epsilon(2e-3));

  std::vector<double> few(gamma.begin(), gamma.begin() + 40);
  CHECK_THROWS_AS(gap_distribution(few, GapWindow{0.0, 1.0}), SampleSizeError);
}

TEST_CASE("equispaced spectrum with known density gives exact unfolded gaps") {
  // N points with spacing d at energy 0 unfold to d N rho_sc(0) = d N / pi.
  const int n = 400;
  std::vector<double> eigs;
  const double d = 1e-3;
  for (int k = 0; k < n; ++k) eigs.push_back((k - n / 2) * d);
  const GapSample g = gap_distribution(eigs, GapWindow{0.0, 0.1}, 10);
  for (double gap : g.gaps) CHECK(gap == doctest::Approx(d * n * rho_sc(0.0)).epsilon(0.02));
}

TEST_CASE("relaxation curve is independent of the thread count") {
  const int n = 128;
  const auto ref = equilibrium_gaps(n, SymmetryClass::symmetric, 6, GapWindow{}, 5, 1);
  const auto ref3 = equilibrium_gaps(n, SymmetryClass::symmetric, 6, GapWindow{}, 5, 3);
  CHECK(ref == ref3);
  const HermitianMatrix h0 = rigid_start(n, SymmetryClass::symmetric);
  const std::vector<double> times{0.0, 1.0 / n, 1.0};
  RelaxationOptions opt;
  opt.samples = 6;
  opt.seed = 5;
  opt.threads = 1;
  const auto c1 = relaxation_curve([h0](std::uint64_t) { return h0; }, times, ref, opt);
  opt.threads = 3;
  const auto c3 = relaxation_curve([h0](std::uint64_t) { return h0; }, times, ref, opt);
  REQUIRE(c1.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(c1[k].ks.statistic == c3[k].ks.statistic);
    CHECK(c1[k].gaps_per_sample == c3[k].gaps_per_sample);
  }
  CHECK(c1[0].ks.statistic > c1[2].ks.statistic);
}

TEST_CASE("long flow forgets the initial matrix") {
  const int n = 10;
  const HermitianMatrix big(RealMatrix(1000.0 * RealMatrix::Identity(n, n)));
  const HermitianMatrix zero(RealMatrix(RealMatrix::Zero(n, n)));
  RngStream a = derive_stream(6, 0);
  RngStream b = derive_stream(6, 0);
  const auto ha = ou_endpoint(big, 50.0, a);
  const auto hb = ou_endpoint(zero, 50.0, b);
  CHECK((ha.real() - hb.real()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("a window with no eigenvalues is an error") {
  const auto gamma = classical_locations(400);
  CHECK_THROWS_AS(gap_distribution(gamma, GapWindow{4.0, 0.5}), SampleSizeError);
}
