#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sastro/datadriven.hpp"

using namespace sastro;

TEST_CASE("one-column data is ranked by value") {
  MatrixXd data(3, 1);
  data << 3, 1, 2;
  const auto map = build_discrete_map(data);
  CHECK(map.order == std::vector<Eigen::Index>{1, 2, 0});
  CHECK(map.endpoint(0) == 0.0);
  CHECK(map.endpoint(2) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ties keep input order") {
  MatrixXd data(5, 1);
  data << 2, 1, 2, 1, 0;
  const auto map = build_discrete_map(data);
  CHECK(map.order == std::vector<Eigen::Index>{4, 1, 3, 0, 2});
}

TEST_CASE("points on a line") {
  MatrixXd data(6, 2);
  for (int i = 0; i < 6; ++i) data.row(i) << i - 2.5, 2.0 * (i - 2.5);
  const auto map = build_discrete_map(data);
  CHECK(map.loading[0] == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(map.loading[1] == doctest::Approx(2.0 / std::sqrt(5.0)));
  for (int j = 0; j < 6; ++j) CHECK(map.order[static_cast<std::size_t>(j)] == j);
}

TEST_CASE("rank selection") {
  MatrixXd data(4, 1);
  data << 0, 1, 2, 3;
  const auto map = build_discrete_map(data);
  CHECK(map.rank_for(0.6) == 2);
  CHECK(map.rank_for(1.0) == 3);
  CHECK(map.rank_for(0.25) == 1);
  CHECK(map.rank_for(1e-12) == 0);
  CHECK_THROWS_AS(map.rank_for(0.0), std::domain_error);
  CHECK_THROWS_AS(map.rank_for(1.5), std::domain_error);
}

TEST_CASE("each row is drawn with frequency 1/n") {
  MatrixXd data(10, 2);
  for (int i = 0; i < 10; ++i) data.row(i) << std::sin(i), i;
  const auto map = build_discrete_map(data);
  KeyedStream s(5);
  const int draws = 100000;
  std::vector<int> counts(10, 0);
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(map.row_for(s.uniform()))];
  const double sd = std::sqrt(0.1 * 0.9 / draws);
  for (int c : counts) CHECK(std::abs(c / double(draws) - 0.1) < 4 * sd);

  KeyedStream t(6);
  const MatrixXd rows = sample_discrete(map, 50, t);
  CHECK(rows.rows() == 50);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    bool found = false;
    for (Eigen::Index r = 0; r < data.rows(); ++r) found = found || rows.row(i) == data.row(r);
    CHECK(found);
  }
  CHECK_THROWS(sample_discrete(map, 0, t));
}

TEST_CASE("power iteration matches a dense eigensolver") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd data(50, 5);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = z(gen) * (1.0 + 0.7 * static_cast<double>(j));
    }
    const auto map = build_discrete_map(data);
    const MatrixXd centered = data.rowwise() - data.colwise().mean();
    const MatrixXd cov = centered.transpose() * centered / 49.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    const VectorXd ref = eig.eigenvectors().col(4);
    CHECK(std::abs(ref.dot(map.loading)) >= 1.0 - 1e-8);
    CHECK(map.loading.norm() == doctest::Approx(1.0));

    VectorXd ref_signed = ref;
    Eigen::Index big = 0;
    ref.cwiseAbs().maxCoeff(&big);
    if (ref[big] < 0) ref_signed = -ref;
    const VectorXd scores = centered * ref_signed;
    for (std::size_t j = 1; j < map.order.size(); ++j) {
      CHECK(scores[map.order[j - 1]] <= scores[map.order[j]] + 1e-9);
    }
  }
}

TEST_CASE("degenerate data is rejected") {
  CHECK_THROWS_AS(build_discrete_map(MatrixXd::Ones(1, 3)), std::invalid_argument);
  CHECK_THROWS_AS(build_discrete_map(MatrixXd::Ones(4, 3)), std::invalid_argument);
  CHECK_THROWS_AS(leading_eigenvector(MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("discrete estimate") {
  MatrixXd data(4, 1);
  data << 1, 2, 3, 4;
  const auto map = build_discrete_map(data);
  const Oracle oracle = [](const VectorXd& theta, const VectorXd& x) { return theta[0] * x[0]; };
  const VectorXd theta = VectorXd::Constant(1, 2.0);
  const std::vector<double> u{0.1, 0.3, 0.6, 0.9};
  const auto e = estimate_discrete(theta, oracle, map, u);
  CHECK(e.mean == doctest::Approx(5.0));
  CHECK(e.variance == doctest::Approx(20.0 / 3.0));
  KeyedStream s(1);
  CHECK_THROWS_AS(estimate_discrete(theta, oracle, map, 1, s), InsufficientSamples);

  KeyedStream a(9), b(9);
  const auto ea = estimate_discrete(theta, oracle, map, 64, a);
  const auto eb = estimate_discrete(theta, oracle, map, 64, b);
  CHECK(ea.mean == eb.mean);
}

TEST_CASE("delimited reader") {
  std::istringstream csv("a,b\n1,2\n\n3,4.5\n");
  const MatrixXd m = read_delimited(csv);
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 4.5);

  std::istringstream spaced("1 2 3\n4  5 6\r\n");
  CHECK(read_delimited(spaced).cols() == 3);
  std::istringstream semi("1;2\n3;4\n");
  CHECK(read_delimited(semi)(1, 0) == 3.0);

  std::istringstream ragged("1,2\n3,4\n5\n");
  try {
    read_delimited(ragged);
    FAIL("expected MalformedData");
  } catch (const MalformedData& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream junk("x,y\n1,2\n1,abc\n");
  try {
    read_delimited(junk);
    FAIL("expected MalformedData");
  } catch (const MalformedData& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream empty("x,y\n");
  CHECK_THROWS_AS(read_delimited(empty), MalformedData);
  CHECK_THROWS(read_delimited_file("/nonexistent/file.csv"));
}
