#include <cmath>

#include <gtest/gtest.h>

#include "sdfem/bench.hpp"
#include "sdfem/diagnostics.hpp"

using namespace sdfem;

namespace {

Mesh unit_mesh(int level) { return generate_structured(example1_domain(), level); }

const ScalarField smooth_ps = [](const Point& p) { return std::sin(3 * p.x()) * std::cos(2 * p.y()) + p.x(); };
const ScalarField smooth_pd = [](const Point& p) { return std::exp(p.x() * p.y()); };

class DiagK : public ::testing::TestWithParam<int> {};

}  // namespace

TEST_P(DiagK, DivergenceFreeMembersReconstructExactly) {
  const Mesh m = unit_mesh(1);
  const auto sp = build_spaces(m, GetParam());
  const auto r = check_reconstruction_invariants(sp, 10, 42);
  EXPECT_EQ(r.samples, 10);
  EXPECT_LT(r.membership_residual, 1e-12);
  EXPECT_LT(r.worst.divergence, 1e-9);
  EXPECT_LT(r.worst.interface_jump, 1e-9);
  EXPECT_LT(r.worst.boundary_normal, 1e-9);
  EXPECT_GT(r.worst.scale, 0.0);
}

TEST_P(DiagK, GeneralMembersKeepNormalContinuityOnly) {
  const Mesh m = unit_mesh(1);
  const auto sp = build_spaces(m, GetParam());
  const auto r = check_reconstruction_invariants(sp, 5, 42, false);
  EXPECT_GT(r.worst.divergence, 1e-3);
  EXPECT_LT(r.worst.interface_jump, 1e-9);
  EXPECT_LT(r.worst.boundary_normal, 1e-9);
}

TEST_P(DiagK, MomentDefectVanishes) {
  const Mesh m = unit_mesh(1);
  const auto sp = build_spaces(m, GetParam());
  const ReconstructionCache cache(sp.stokes);
  EXPECT_LT(reconstruction_moment_defect(sp, cache), 1e-12);
}

TEST_P(DiagK, PiecewiseConstantPressureIsInvisible) {
  const Mesh m = unit_mesh(0);
  const auto sp = build_spaces(m, GetParam());
  const auto r = check_theta_functional(sp, [](const Point&) { return 2.0; }, [](const Point&) { return -1.0; }, 5, 3);
  EXPECT_LT(r.theta, 1e-12);
  EXPECT_LT(r.aleph, 1e-12);
}

TEST_P(DiagK, ThetaShrinksUnderRefinementAlephVanishes) {
  const int k = GetParam();
  const int levels = k == 2 ? 3 : 2;
  std::vector<double> theta;
  for (int level = 0; level < levels; ++level) {
    const Mesh m = unit_mesh(level);
    const auto sp = build_spaces(m, k);
    const auto r = check_theta_functional(sp, smooth_ps, smooth_pd, 8, 5);
    EXPECT_LT(r.aleph, 1e-9);
    theta.push_back(r.theta);
  }
  for (std::size_t i = 1; i < theta.size(); ++i) EXPECT_GE(theta[i - 1] / theta[i], std::pow(2.0, k - 1.2));
}

TEST_P(DiagK, GradientForcingIsInvisibleToReconstructedTests) {
  // (grad phi, Pi psi) = 0 for psi in V_h(0) when phi is continuous across the interface.
  const Mesh m = unit_mesh(1);
  const auto sp = build_spaces(m, GetParam());
  const ReconstructionCache cache(sp.stokes);
  const VectorField grad = [](const Point& p) { return Vec2(std::cos(p.x()) * p.y() * p.y(), 2 * std::sin(p.x()) * p.y()); };
  const Eigen::VectorXd fs = reconstructed_load(cache, grad);
  const Eigen::VectorXd fs_plain = load_vector(sp.stokes, grad);
  const Eigen::VectorXd fd = load_vector(sp.darcy, grad);
  const ConstrainedSampler sampler(sp, true);
  std::mt19937_64 rng(9);
  const int ns = sp.stokes.n_dofs;
  double plain_worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd v = sampler.sample(rng);
    const double scale = fs.cwiseAbs().maxCoeff() * v.cwiseAbs().sum();
    EXPECT_LT(std::abs(fs.dot(v.head(ns)) + fd.dot(v.tail(sp.darcy.n_dofs))), 1e-12 * scale);
    plain_worst = std::max(plain_worst, std::abs(fs_plain.dot(v.head(ns)) + fd.dot(v.tail(sp.darcy.n_dofs))) / scale);
  }
  EXPECT_GT(plain_worst, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Degrees, DiagK, ::testing::Values(2, 3));

TEST(Invariants, ZeroFieldGivesZeros) {
  const Mesh m = unit_mesh(0);
  const auto sp = build_spaces(m, 2);
  const ReconstructionCache cache(sp.stokes);
  const auto r = invariant_maxima(sp, cache, Eigen::VectorXd::Zero(sp.stokes.n_dofs + sp.darcy.n_dofs));
  EXPECT_EQ(r.divergence, 0.0);
  EXPECT_EQ(r.interface_jump, 0.0);
  EXPECT_EQ(r.boundary_normal, 0.0);
  EXPECT_EQ(r.scale, 0.0);
}

TEST(Invariants, SeededSamplingIsReproducible) {
  const Mesh m = unit_mesh(0);
  const auto sp = build_spaces(m, 2);
  const ConstrainedSampler sampler(sp, true);
  std::mt19937_64 a(5), b(5);
  EXPECT_EQ((sampler.sample(a) - sampler.sample(b)).norm(), 0.0);
}

TEST(Theta, GenericPressureIsVisibleOnCoarseMesh) {
  const Mesh m = unit_mesh(0);
  const auto sp = build_spaces(m, 2);
  const auto r = check_theta_functional(sp, smooth_ps, smooth_pd, 8, 5);
  EXPECT_GT(r.theta, 1e-4);
  EXPECT_LT(r.aleph, 1e-9);
}

TEST(InfSup, StableAcrossLevels) {
  std::vector<double> beta;
  for (int level = 0; level < 3; ++level) {
    const Mesh m = unit_mesh(level);
    beta.push_back(infsup_probe(build_spaces(m, 2)).beta);
  }
  EXPECT_GT(beta.front(), 0.1);
  EXPECT_GE(beta.back() / beta.front(), 0.5);
}

TEST(InfSup, P1P1DiscontinuousControlDegenerates) {
  for (int level = 0; level < 3; ++level) EXPECT_LT(infsup_probe_p1_p1disc(unit_mesh(level)).beta, 1e-6);
}

TEST(InfSup, SingleStokesElementIsPositive) {
  const Mesh m = Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}, {Subdomain::stokes});
  for (int k : {2, 3}) {
    Spaces sp{k, build_space(m, {FamilyTag::lagrange_bubble_vec, k}), Space{}, build_space(m, {FamilyTag::discontinuous, k}), Space{}};
    const auto r = infsup_probe(sp);
    EXPECT_TRUE(std::isfinite(r.beta));
    EXPECT_GT(r.beta, 1e-3);
  }
}

TEST(Reports, JsonCarriesMaxima) {
  const Mesh m = unit_mesh(0);
  const auto sp = build_spaces(m, 2);
  const auto j = to_json(check_reconstruction_invariants(sp, 2, 1));
  EXPECT_EQ(j.at("samples").get<int>(), 2);
  EXPECT_TRUE(j.at("relative_maxima").contains("divergence"));
  EXPECT_EQ(j.at("subspace").get<std::string>(), "V_h(0)");
}
