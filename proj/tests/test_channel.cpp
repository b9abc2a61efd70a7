#include <doctest.h>

#include <cmath>
#include <vector>

#include "coopmimo/channel.hpp"
#include "coopmimo/errors.hpp"
#include "support.hpp"

using namespace coopmimo;

TEST_CASE("frame bookkeeping") {
  FrameConfig c;
  CHECK(c.columns_through(0) == 31);
  CHECK(c.columns_through(4) == 431);
  CHECK(c.total_columns() == 531);
  CHECK(c.block_offset(1) == 31);
  CHECK(c.block_offset(3) == 231);
  CHECK_FALSE(c.cooperative(1, Scheme::proposed));
  CHECK(c.cooperative(2, Scheme::proposed));
  CHECK_FALSE(c.cooperative(5, Scheme::baseline));
  CHECK(c.effective_length(5, Scheme::baseline) == 431);
  CHECK(c.effective_length(5, Scheme::proposed) == 331);
  CHECK(c.effective_length(1, Scheme::proposed) == 31);
  c.backhaul_delay = 6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zadoff-chu pilot correlations") {
  const double P = 0.2;
  PilotBook book(31, P, {10, 10, 10, 31});
  CHECK(book.max_correlation_error() < 1e-9);
  const auto a = book.pilot(0, 0);
  const auto b = book.pilot(1, 3);
  CHECK(std::abs(a.dot(a)) == doctest::Approx(31 * P).epsilon(1e-12));
  CHECK(std::abs(a.dot(b)) / 31 == doctest::Approx(P / std::sqrt(31.0)).epsilon(1e-9));
  CHECK(std::abs(a.dot(book.pilot(0, 1))) < 1e-9 * 31 * P);
  CHECK_THROWS_AS(PilotBook(32, P, {1}), ConfigError);
  CHECK_THROWS_AS(PilotBook(7, P, std::vector<std::size_t>(7, 1)), ConfigError);
  CHECK(is_prime(31));
  CHECK_FALSE(is_prime(33));
}

TEST_CASE("19-cell pilot book with full cells stays exact") {
  PilotBook book(31, 0.19952623149688797, std::vector<std::size_t>(19, 31));
  CHECK(book.max_correlation_error() < 1e-9);
}

TEST_CASE("channel column power concentrates at rho") {
  const auto layout = build_hex_layout(500, 0);
  auto drop = testing::fixed_drop(layout, {{100, 0}, {200, 0}});
  drop.rho(0, 0) = 1.0;
  drop.rho(1, 0) = 0.0;
  FrameConfig c = testing::small_frame(10000);
  const auto book = build_pilot_book(c, drop);
  const auto r = sample_channels(c, drop, book, 1);
  CHECK(r.channels.col(0).squaredNorm() / 10000 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(r.channels.col(1).norm() == 0.0);
}

TEST_CASE("channel variance ratio") {
  const auto layout = build_hex_layout(500, 0);
  auto drop = testing::fixed_drop(layout, {{100, 0}, {200, 0}});
  drop.rho(0, 0) = 4.0;
  drop.rho(1, 0) = 1.0;
  FrameConfig c = testing::small_frame(4);
  const auto book = build_pilot_book(c, drop);
  double pa = 0;
  double pb = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto r = sample_channels(c, drop, book, 100 + s);
    pa += r.channels.col(0).squaredNorm();
    pb += r.channels.col(1).squaredNorm();
  }
  CHECK(pa / pb == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("symbols: pilots first, then Gaussian data of power P") {
  const auto layout = build_hex_layout(500, 1);
  const auto drop = testing::fixed_drop(layout, {{100, 0}, {-100, 50}, {900, 0}});
  FrameConfig c = testing::small_frame(4);
  c.block_lengths = {20000};
  const auto book = build_pilot_book(c, drop);
  const auto r = sample_channels(c, drop, book, 2);
  CHECK((r.symbols.row(1).head(11) - book.pilot(0, 1)).norm() == 0.0);
  CHECK((r.symbols.row(2).head(11) - book.pilot(drop.users[2].cell, 0)).norm() == 0.0);
  const double p = r.symbols.row(0).tail(20000).squaredNorm() / 20000;
  CHECK(p == doctest::Approx(c.transmit_power).epsilon(0.03));
}

TEST_CASE("received signal") {
  const auto layout = build_hex_layout(500, 1);
  const auto drop = testing::fixed_drop(layout, {{100, 0}, {900, 0}});
  FrameConfig c = testing::small_frame(6);
  const auto book = build_pilot_book(c, drop);
  auto r = sample_channels(c, drop, book, 3);

  SUBCASE("no noise, one user gives h x exactly") {
    auto quiet = r;
    quiet.noise.setZero();
    const std::vector<std::size_t> one{0};
    const CMatrix y = received_signal(quiet, c, 0, 2, one);
    CHECK((y - quiet.channels.col(0) * quiet.symbols.row(0).head(31)).norm() == 0.0);
  }
  SUBCASE("additivity across users") {
    const std::vector<std::size_t> a{0};
    const std::vector<std::size_t> b{1};
    const CMatrix all = received_signal(r, c, 1, 3);
    const CMatrix sum = received_signal(r, c, 1, 3, a) + received_signal(r, c, 1, 3, b) - r.noise.middleCols(11, 30);
    CHECK(testing::rel_err(sum, all) < 1e-13);
  }
  SUBCASE("zero transmit signal leaves noise of variance sigma^2") {
    FrameConfig big = c;
    big.antennas = 100;
    big.block_lengths = {1000};
    auto rr = sample_channels(big, drop, build_pilot_book(big, drop), 4);
    rr.symbols.setZero();
    const CMatrix y = received_signal(rr, big, 0, 1);
    CHECK(y.squaredNorm() / static_cast<double>(y.size()) == doctest::Approx(big.noise_power).epsilon(0.05));
  }
  CHECK_THROWS_AS(received_signal(r, c, 2, 1), ConfigError);
  CHECK_THROWS_AS(received_signal(r, c, 0, 4), ConfigError);
}

TEST_CASE("sampling is deterministic under a seed") {
  const auto layout = build_hex_layout(500, 1);
  const auto drop = testing::fixed_drop(layout, {{100, 0}, {900, 0}});
  FrameConfig c = testing::small_frame(6);
  const auto book = build_pilot_book(c, drop);
  const auto a = sample_channels(c, drop, book, 77);
  const auto b = sample_channels(c, drop, book, 77);
  CHECK(a.channels == b.channels);
  CHECK(a.symbols == b.symbols);
  CHECK(a.noise == b.noise);
}
