#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace compactseg;

namespace {

struct Edge {
  int i, j;
  double cap, rev;
};

struct SmallGraph {
  int n;
  std::vector<double> src, snk;
  std::vector<Edge> edges;

  /// Cut value when bit i of `source_side` puts node i on the source side.
  [[nodiscard]] double cut(unsigned source_side) const {
    auto in_s = [&](int i) { return (source_side >> i) & 1u; };
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += in_s(i) ? snk[static_cast<std::size_t>(i)] : src[static_cast<std::size_t>(i)];
    for (const Edge& e : edges) {
      if (in_s(e.i) && !in_s(e.j)) c += e.cap;
      if (in_s(e.j) && !in_s(e.i)) c += e.rev;
    }
    return c;
  }
};

SmallGraph random_graph(std::mt19937_64& rng, int n, double density) {
  std::uniform_real_distribution<double> cap(0.0, 5.0);
  std::bernoulli_distribution keep(density), zero(0.2);
  SmallGraph g{n, {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    g.src.push_back(zero(rng) ? 0.0 : cap(rng));
    g.snk.push_back(zero(rng) ? 0.0 : cap(rng));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (keep(rng)) g.edges.push_back({i, j, zero(rng) ? 0.0 : cap(rng), zero(rng) ? 0.0 : cap(rng)});
    }
  }
  return g;
}

}  // namespace

TEST(MaxFlow, MatchesExhaustiveMinCut) {
  std::mt19937_64 rng(81);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + t % 10;
    const SmallGraph sg = random_graph(rng, n, 0.4);
    MaxFlowGraph g(n);
    for (int i = 0; i < n; ++i) g.add_terminal_weights(i, sg.src[static_cast<std::size_t>(i)], sg.snk[static_cast<std::size_t>(i)]);
    for (const Edge& e : sg.edges) g.add_edge(e.i, e.j, e.cap, e.rev);
    const double flow = g.maxflow();

    double best = std::numeric_limits<double>::infinity();
    for (unsigned s = 0; s < (1u << n); ++s) best = std::min(best, sg.cut(s));
    unsigned found = 0;
    for (int i = 0; i < n; ++i) found |= (g.in_source_set(i) ? 1u : 0u) << i;

    EXPECT_NEAR(flow, best, 1e-9) << "trial " << t;
    EXPECT_NEAR(sg.cut(found), best, 1e-9) << "trial " << t;
  }
}

TEST(MaxFlow, RejectsBadInput) {
  MaxFlowGraph g(3);
  EXPECT_THROW(g.add_edge(0, 0, 1, 1), ConfigError);
  EXPECT_THROW(g.add_edge(0, 1, -1, 1), ConfigError);
  EXPECT_THROW(g.add_terminal_weights(0, -1, 0), ConfigError);
}

TEST(MaxFlow, GridChainCut) {
  // source -> 0 -> 1 -> 2 -> sink with a bottleneck in the middle
  MaxFlowGraph g(3);
  g.add_terminal_weights(0, 10, 0);
  g.add_terminal_weights(2, 0, 10);
  g.add_edge(0, 1, 5, 0);
  g.add_edge(1, 2, 2, 0);
  EXPECT_DOUBLE_EQ(g.maxflow(), 2.0);
  EXPECT_TRUE(g.in_source_set(0));
  EXPECT_TRUE(g.in_source_set(1));
  EXPECT_FALSE(g.in_source_set(2));
}

namespace {

/// Dense SPD solve by Cholesky, the oracle for CG and the z-update.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    a[j * n + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / a[j * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    b[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k * n + i] * b[k];
    b[i] /= a[i * n + i];
  }
  return b;
}

std::vector<double> random_spd(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> m(n * n), a(n * n, 0.0);
  for (double& v : m) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) a[i * n + j] += m[k * n + i] * m[k * n + j];
    }
    a[i * n + i] += 0.5;
  }
  return a;
}

}  // namespace

TEST(ConjugateGradient, SolvesDenseSpdSystem) {
  std::mt19937_64 rng(82);
  const std::size_t n = 16;
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> a = random_spd(rng, n);
    ScalarField b = testutil::random_field(4, 4, rng, -1, 1);
    auto apply = [&](const ScalarField& in, ScalarField& out) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * in[j];
        out[i] = s;
      }
    };
    ScalarField x(4, 4);
    const CgResult r = conjugate_gradient(apply, b, x, 1e-12, 200);
    EXPECT_TRUE(r.converged);
    const std::vector<double> ref = dense_solve(a, {b.begin(), b.end()}, n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-8);
  }
}

TEST(ConjugateGradient, EnergyNormErrorDecreases) {
  std::mt19937_64 rng(83);
  const std::size_t n = 16;
  const std::vector<double> a = random_spd(rng, n);
  const ScalarField b = testutil::random_field(4, 4, rng, -1, 1);
  auto apply = [&](const ScalarField& in, ScalarField& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * in[j];
      out[i] = s;
    }
  };
  const std::vector<double> ref = dense_solve(a, {b.begin(), b.end()}, n);
  double prev = std::numeric_limits<double>::infinity();
  int seen = 0;
  ScalarField x(4, 4);
  conjugate_gradient(apply, b, x, 0.0, 12, [&](int, const ScalarField& xi) {
    ScalarField e(4, 4), ae(4, 4);
    for (std::size_t i = 0; i < n; ++i) e[i] = xi[i] - ref[i];
    apply(e, ae);
    const double err = inner_product(e, ae);
    EXPECT_LE(err, prev * (1 + 1e-12) + 1e-20);
    prev = err;
    ++seen;
  });
  EXPECT_GT(seen, 5);
}

TEST(ConjugateGradient, ZeroRightHandSide) {
  auto apply = [](const ScalarField& in, ScalarField& out) { out = in; };
  ScalarField x(3, 3);
  const CgResult r = conjugate_gradient(apply, ScalarField(3, 3), x, 1e-10, 10);
  EXPECT_TRUE(r.converged);
  for (double v : x) EXPECT_EQ(v, 0.0);
}
