#include <gtest/gtest.h>

#include <cmath>

#include "mdlab/eigenstudies.hpp"

using namespace mdlab;

namespace {

std::shared_ptr<const Discretization> disk_disc(double eps, double h, int levels = 0, int degree = 1) {
  return make_discretization(refine_uniform(build_mesh(DomainShape::Disk, {InclusionShape::Circle, eps}, h), levels),
                             degree);
}

BlockSystem trace_system(std::shared_ptr<const Discretization> d) {
  return assemble_trace_lm(std::move(d), [](const Point&) { return 0.0; });
}

SparseMatrix dirichlet_stiffness(const Discretization& d) {
  return apply_dirichlet(stiffness_2d(d.space), Vector::Zero(d.space.num_dofs), d.boundary_dofs,
                         Vector::Zero(static_cast<Eigen::Index>(d.boundary_dofs.size())))
      .a;
}

}  // namespace

TEST(SchurEigs, MatchesFullPencilOracle) {
  for (double eps : {0.3, 0.05}) {
    auto d = disk_disc(eps, 0.25);
    const auto sys = trace_system(d);
    ASSERT_LE(sys.size(), 1500);
    const auto basis = curve_basis(*d);
    const auto rep = schur_eigs(sys, basis);
    const Vector qin = qin_eigs(sys, basis);
    ASSERT_EQ(qin.size(), rep.values.size());
    for (Eigen::Index i = 0; i < qin.size(); ++i) EXPECT_NEAR(qin[i], rep.values[i], 1e-8 * rep.values[i]) << i;
    EXPECT_EQ(rep.min, rep.values[0]);
  }
}

TEST(SchurEigs, RejectsThreeFieldSystems) {
  auto d = disk_disc(0.3, 0.25);
  const auto sys = assemble_2d1d(d, 1.0);
  EXPECT_THROW((void)schur_eigs(sys, curve_basis(*d)), Error);
}

TEST(SchurEigs, DenseAndLanczosPathsAgree) {
  auto d = disk_disc(0.1, 0.2, 2);
  const auto sys = trace_system(d);
  const auto basis = curve_basis(*d);
  EigenOptions lz;
  lz.dense_limit = 0;
  const auto dense = schur_eigs(sys, basis);
  const auto lan = schur_eigs(sys, basis, lz);
  EXPECT_EQ(lan.method, "lanczos");
  EXPECT_NEAR(lan.min, dense.min, 1e-7 * dense.min);
  EXPECT_NEAR(lan.max, dense.max, 1e-7 * dense.max);
}

TEST(SteklovEigs, ReducedMatchesFullSpaceDense) {
  auto d = disk_disc(0.2, 0.3);
  const auto rep = steklov_eigs(*d);
  const SparseMatrix a = dirichlet_stiffness(*d);
  const SparseMatrix m = curve_matrices(*d->curve, 1).mass;
  const DenseMatrix lhs = DenseMatrix(d->trace.transpose() * m * d->trace);
  const Vector ev = dense_geig_values(lhs, DenseMatrix(a));
  EXPECT_NEAR(rep.max, std::sqrt(ev.maxCoeff()), 1e-9 * rep.max);
}

TEST(SteklovEigs, AnnulusConstantModeScaling) {
  // The constant mode gives eps |log eps| exactly in the continuum disk.
  for (double eps : {0.1, 0.01, 0.001}) {
    auto d = disk_disc(eps, 0.2, 1);
    const double g = scaling_model(eps);
    EXPECT_NEAR(steklov_eigs(*d).max, g, 0.02 * g) << eps;
  }
}

TEST(SteklovEigs, AgreesWithSchurMinimum) {
  for (double eps : {0.1, 0.01, 1e-4}) {
    auto d = disk_disc(eps, 0.2, 1);
    const auto b = schur_eigs(trace_system(d), curve_basis(*d));
    const auto s = steklov_eigs(*d);
    EXPECT_LT(std::abs(b.min - s.max) / b.min, 1e-2) << eps;
  }
}

TEST(SteklovEigs, SecondOrderSpaceIsConsistent) {
  auto d1 = disk_disc(0.05, 0.2, 1);
  auto d2 = disk_disc(0.05, 0.2, 1, 2);
  const double s1 = steklov_eigs(*d1).max;
  const double s2 = steklov_eigs(*d2).max;
  EXPECT_LT(std::abs(s1 - s2) / s1, 1e-2);
}

TEST(MeanSteklov, RankOneClosedFormMatchesDense) {
  auto d = disk_disc(0.15, 0.3);
  const double lam = mean_steklov(*d);
  const auto mv = mean_value_vector(d->space, *d->curve);
  const DenseMatrix lhs = mv.m * mv.m.transpose() / mv.length;
  const Vector ev = dense_geig_values(lhs, DenseMatrix(dirichlet_stiffness(*d)));
  EXPECT_NEAR(lam, std::sqrt(ev.maxCoeff()), 1e-10 * lam);
  EXPECT_NEAR(lam, mean_schur(assemble_2d0d(d)), 1e-12 * lam);
}

TEST(MeanSteklov, DecreasesWithRadius) {
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const double lam = mean_steklov(*disk_disc(eps, 0.25));
    EXPECT_LT(lam, prev) << eps;
    prev = lam;
  }
}

TEST(ConditioningEigs, DenseAndLanczosAgree) {
  auto d = make_discretization(build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.05}, 0.2));
  const auto basis = curve_basis(*d);
  for (double kd : {1e-6, 1.0, 1e10}) {
    const auto sys = assemble_2d1d(d, kd);
    const auto pre = build_preconditioner(sys, PrecondSpec::b1(kd), basis);
    EigenOptions lz;
    lz.dense_limit = 0;
    const auto dense = conditioning_eigs(sys, pre);
    const auto lan = conditioning_eigs(sys, pre, lz);
    EXPECT_EQ(dense.method, "dense");
    EXPECT_TRUE(lan.converged);
    for (auto [x, y] : {std::pair{dense.min, lan.min}, std::pair{dense.max, lan.max},
                        std::pair{dense.abs_min, lan.abs_min}, std::pair{dense.abs_max, lan.abs_max}}) {
      EXPECT_NEAR(x, y, 1e-6 * std::abs(x)) << kd;
    }
  }
}

TEST(ConditioningEigs, GoldenRatioForSmallCurveCoefficient) {
  auto d = make_discretization(build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.1}, 0.2));
  const double kd = 1e-8;
  const auto sys = assemble_2d1d(d, kd);
  const auto r = conditioning_eigs(sys, build_preconditioner(sys, PrecondSpec::b1(kd), curve_basis(*d)));
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_NEAR(r.max, phi, 0.01 * phi);
  EXPECT_NEAR(r.min, 1.0 - phi, 0.01 * (phi - 1.0));
}

TEST(FitScaling, ExactModelAndErrors) {
  std::vector<std::pair<double, double>> pts;
  for (double eps : {0.5, 1e-2, 1e-3, 1e-4}) pts.emplace_back(eps, 2.0 * scaling_model(eps));
  pts.emplace_back(0.2, 123.0);  // ignored: eps >= 0.1
  const auto fit = fit_scaling(pts);
  EXPECT_NEAR(fit.c, 2.0, 1e-14);
  EXPECT_NEAR(fit.residual, 0.0, 1e-14);
  EXPECT_EQ(fit.radii.size(), 3u);

  try {
    (void)fit_scaling({{0.1, 1.0}, {0.05, 1.0}, {0.01, 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPoints);
  }
}

TEST(FitScaling, ResidualIsRelativeRms) {
  const std::vector<std::pair<double, double>> pts{
      {1e-2, 1.1 * scaling_model(1e-2)}, {1e-3, 0.9 * scaling_model(1e-3)}, {1e-4, scaling_model(1e-4)}};
  const auto fit = fit_scaling(pts);
  double rss = 0.0;
  for (const auto& [e, l] : pts) rss += std::pow((l - fit.c * scaling_model(e)) / l, 2);
  EXPECT_NEAR(fit.residual, std::sqrt(rss / 3.0), 1e-15);
}

TEST(RefineUntilStable, StopsOnRelativeChange) {
  const auto t = refine_until_stable([](int l) { return 1.0 + std::pow(0.1, l); }, 0, 10, 1e-3);
  EXPECT_TRUE(t.converged);
  EXPECT_EQ(t.values.size(), 5u);  // |1e-3 - 1e-4| / 1.001 < 1e-3
  const auto u = refine_until_stable([](int l) { return static_cast<double>(l + 1); }, 0, 3);
  EXPECT_FALSE(u.converged);
  EXPECT_EQ(u.values.size(), 4u);
}
