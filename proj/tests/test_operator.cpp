#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "specband/operator.hpp"
#include "test_support.hpp"

using namespace specband;

TEST(Operator, Construction) {
  const JacobiOperator lap({1.0}, {0.0});
  EXPECT_EQ(lap.period(), 1u);
  EXPECT_FALSE(lap.reduction_notice());

  const JacobiOperator ssh({1.0, 2.0}, {0.0, 0.0});
  EXPECT_EQ(ssh.period(), 2u);
  EXPECT_DOUBLE_EQ(ssh.a_at(3), 1.0);
  EXPECT_DOUBLE_EQ(ssh.a_at(4), 2.0);
}

TEST(Operator, ReducesToMinimalPeriod) {
  const JacobiOperator J({1.0, 1.0}, {3.0, 3.0});
  EXPECT_EQ(J.period(), 1u);
  ASSERT_TRUE(J.reduction_notice());

  const JacobiOperator K({1.0, 2.0, 1.0, 2.0, 1.0, 2.0}, {0.0, 1.0, 0.0, 1.0, 0.0, 1.0});
  EXPECT_EQ(K.period(), 2u);
}

TEST(Operator, Errors) {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::RangeTooSmall;
  };
  EXPECT_EQ(code_of([] { JacobiOperator({}, {}); }), ErrorCode::EmptyCoefficients);
  EXPECT_EQ(code_of([] { JacobiOperator({1.0, 0.0}, {0.0, 0.0}); }), ErrorCode::NonPositiveHopping);
  EXPECT_EQ(code_of([] { JacobiOperator({1.0, -2.0}, {0.0, 0.0}); }), ErrorCode::NonPositiveHopping);
  EXPECT_EQ(code_of([] { JacobiOperator({1.0, 2.0}, {0.0}); }), ErrorCode::LengthMismatch);
}

TEST(Operator, Apply) {
  const auto lap = fixtures::laplacian();
  const auto v = apply(lap, FiniteState::delta(1));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.values[0], cplx(0.0));
  EXPECT_EQ(v.values[1], cplx(1.0));

  const auto w = apply(fixtures::ssh(), FiniteState::delta(2));
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w.values[0], cplx(1.0));
  EXPECT_EQ(w.values[1], cplx(0.0));
  EXPECT_EQ(w.values[2], cplx(2.0));

  EXPECT_EQ(apply(lap, FiniteState(4)).l2_norm(), 0.0);
  EXPECT_TRUE(apply(lap, FiniteState{}).empty());
}

TEST(Operator, ApplyIsSymmetric) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (std::size_t q : {1u, 2u, 3u, 4u}) {
    const auto J = fixtures::random_operator(q, rng);
    FiniteState v(12), w(12);
    for (std::size_t i = 0; i < 10; ++i) {
      v.values[i] = {g(rng), g(rng)};
      w.values[i] = {g(rng), g(rng)};
    }
    const cplx lhs = inner(w, apply(J, v));
    const cplx rhs = inner(apply(J, w), v);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12);
  }
}

TEST(Operator, TruncationMatchesApply) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const std::size_t N = 9;
  for (std::size_t q : {1u, 2u, 3u}) {
    const auto J = fixtures::random_operator(q, rng);
    const auto M = truncate(J, N);
    FiniteState v(N - 1);
    Eigen::VectorXd ve = Eigen::VectorXd::Zero(N);
    for (std::size_t i = 0; i + 1 < N; ++i) {
      const double val = g(rng);
      v.values[i] = val;
      ve(static_cast<Eigen::Index>(i)) = val;
    }
    const auto Jv = apply(J, v);
    const Eigen::VectorXd Mv = M.dense() * ve;
    for (std::size_t i = 0; i < N; ++i) EXPECT_NEAR(Jv.values[i].real(), Mv(static_cast<Eigen::Index>(i)), 1e-13);
  }
}

TEST(Operator, Truncate) {
  const auto m2 = truncate(fixtures::laplacian(), 2).dense();
  EXPECT_EQ(m2(0, 0), 0.0);
  EXPECT_EQ(m2(0, 1), 1.0);
  EXPECT_EQ(m2(1, 0), 1.0);

  const auto s3 = truncate(fixtures::ssh(), 3);
  EXPECT_EQ(s3.diag, (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(s3.off, (std::vector<double>{1.0, 2.0}));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(truncate(fixtures::laplacian(), 3).dense());
  EXPECT_NEAR(es.eigenvalues()(0), -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(2), std::sqrt(2.0), 1e-14);
}

TEST(Operator, NormBound) {
  EXPECT_EQ(norm_bound(fixtures::laplacian()), 2.0);
  EXPECT_EQ(norm_bound(fixtures::ssh()), 4.0);
  EXPECT_EQ(norm_bound(JacobiOperator({1.0}, {5.0})), 7.0);

  std::mt19937_64 rng(13);
  for (std::size_t q : {1u, 2u, 3u, 4u}) {
    const auto J = fixtures::random_operator(q, rng);
    for (std::size_t N : {1u, 7u, 50u, 200u}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(truncate(J, N).dense());
      EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), norm_bound(J));
    }
  }
}
