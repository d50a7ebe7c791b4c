#include "support.hpp"

using namespace polyplate;
using namespace polyplate::testing;

namespace {

constexpr double step = 1e-4;

Vec2 fd_grad(const ScalarField& f, const Vec2& p) {
  return Vec2((f(p + Vec2(step, 0)) - f(p - Vec2(step, 0))) / (2 * step),
              (f(p + Vec2(0, step)) - f(p - Vec2(0, step))) / (2 * step));
}

std::vector<AnalyticalSolution> solutions(double h) {
  return {nonuniform_square_solution(benchmark_material(h)), clamped_disk_solution(benchmark_material(h)),
          patch_solution(benchmark_material(h))};
}

std::vector<Vec2> sample_points(const AnalyticalSolution& s) {
  std::vector<Vec2> pts;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95), a(0.0, 2 * M_PI);
  for (int k = 0; k < 12; ++k) {
    if (s.name == "circular") {
      const double r = u(rng), t = a(rng);
      pts.emplace_back(r * std::cos(t), r * std::sin(t));
    } else {
      pts.emplace_back(u(rng), u(rng));
    }
  }
  return pts;
}

// Plate equations from differences of the closed-form first derivatives
// (themselves checked against the fields above).
Eigen::Vector3d fd_strong_form(const AnalyticalSolution& s, const Vec2& p, Eigen::Vector3d& scale) {
  const PlateMaterial& m = s.material;
  const double db = m.bending_rigidity(), ds = m.shear_rigidity(), nu = m.nu;
  auto moments = [&](const Vec2& x) {
    const Vec2 gx = s.grad_beta_x(x), gy = s.grad_beta_y(x);
    return Eigen::Vector3d(db * (gx.x() + nu * gy.y()), db * (nu * gx.x() + gy.y()), db * 0.5 * (1 - nu) * (gx.y() + gy.x()));
  };
  auto shears = [&](const Vec2& x) { return Vec2(ds * (s.beta_x(x) + s.grad_w(x).x()), ds * (s.beta_y(x) + s.grad_w(x).y())); };
  const double H = 1e-4;
  const Vec2 ex(H, 0), ey(0, H);
  const Vec2 dqx = (shears(p + ex) - shears(p - ex)) / (2 * H), dqy = (shears(p + ey) - shears(p - ey)) / (2 * H);
  const Eigen::Vector3d dmx = (moments(p + ex) - moments(p - ex)) / (2 * H),
                        dmy = (moments(p + ey) - moments(p - ey)) / (2 * H);
  const Vec2 q = shears(p);
  scale = Eigen::Vector3d(std::abs(dqx.x()) + std::abs(dqy.y()) + std::abs(s.load(p)),
                          std::abs(dmx(0)) + std::abs(dmy(2)) + std::abs(q.x()),
                          std::abs(dmx(2)) + std::abs(dmy(1)) + std::abs(q.y()));
  return {dqx.x() + dqy.y() + s.load(p), dmx(0) + dmy(2) - q.x(), dmx(2) + dmy(1) - q.y()};
}

}  // namespace

TEST(Analytic, DerivativesMatchFiniteDifferences) {
  for (const auto& s : solutions(0.1)) {
    for (const Vec2& p : sample_points(s)) {
      const Eigen::Matrix<double, 6, 1> d = s.derivatives(p);
      const Vec2 gw = fd_grad(s.w, p), gx = fd_grad(s.beta_x, p), gy = fd_grad(s.beta_y, p);
      Eigen::Matrix<double, 6, 1> fd;
      fd << gw.x(), gw.y(), gx.x(), gx.y(), gy.x(), gy.y();
      EXPECT_LT((d - fd).norm(), 1e-6 * std::max(1.0, d.norm())) << s.name;

      const std::pair<std::function<Vec2(const Vec2&)>, std::function<Hessian(const Vec2&)>> pairs[] = {
          {s.grad_w, s.hess_w}, {s.grad_beta_x, s.hess_beta_x}, {s.grad_beta_y, s.hess_beta_y}};
      for (const auto& [grad, hess] : pairs) {
        const Hessian h = hess(p);
        const Vec2 dx = (grad(p + Vec2(step, 0)) - grad(p - Vec2(step, 0))) / (2 * step);
        const Vec2 dy = (grad(p + Vec2(0, step)) - grad(p - Vec2(0, step))) / (2 * step);
        const double tol = 1e-6 * std::max(1.0, h.norm());
        EXPECT_NEAR(h(0), dx.x(), tol) << s.name;
        EXPECT_NEAR(h(1), dx.y(), tol) << s.name;
        EXPECT_NEAR(h(1), dy.x(), tol) << s.name;
        EXPECT_NEAR(h(2), dy.y(), tol) << s.name;
      }
    }
  }
}

TEST(Analytic, SatisfiesPlateEquations) {
  for (double h : {0.2, 0.1}) {
    for (const auto& s : solutions(h)) {
      if (s.name == "patch") continue;
      for (const Vec2& p : sample_points(s)) {
        Eigen::Vector3d scale;
        const Eigen::Vector3d r = fd_strong_form(s, p, scale);
        for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(r(i)), 1e-5 * std::max(scale(i), 1e-300)) << s.name << " eq " << i;
        EXPECT_LT(relative_strong_form_residual(s, p).cwiseAbs().maxCoeff(), 1e-12) << s.name;
      }
    }
  }
  // closed-form residual stays at rounding level for thin plates too
  for (const auto& s : solutions(1e-5))
    for (const Vec2& p : sample_points(s)) EXPECT_LT(relative_strong_form_residual(s, p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Analytic, ClampedBoundaryValues) {
  const AnalyticalSolution sq = nonuniform_square_solution(benchmark_material(0.1));
  for (double t : {0.0, 0.3, 0.8})
    for (const Vec2 p : {Vec2(t, 0), Vec2(1, t), Vec2(t, 1), Vec2(0, t)}) EXPECT_LT(sq.values(p).norm(), 1e-15);
  const AnalyticalSolution disk = clamped_disk_solution(benchmark_material(0.1));
  for (double a : {0.0, 1.0, 2.5}) EXPECT_LT(disk.values(Vec2(std::cos(a), std::sin(a))).norm(), 1e-12);
  // thin-plate center deflection of the clamped disk: q R^4 / (64 D)
  const AnalyticalSolution thin = clamped_disk_solution(benchmark_material(1e-3));
  EXPECT_NEAR(thin.w(Vec2::Zero()) * 64.0 * thin.material.bending_rigidity(), 1.0, 2e-5);
}

TEST(Analytic, WrongSolutionIsDetected) {
  AnalyticalSolution s = clamped_disk_solution(benchmark_material(0.2));
  const double ds = s.material.shear_rigidity(), d = s.material.bending_rigidity();
  const double wrong = 1.0 / (2.0 * ds);
  s.w = [d, wrong](const Vec2& p) {
    const double r2 = p.squaredNorm();
    return r2 * r2 / (64.0 * d) - r2 * (wrong + 1.0 / (32.0 * d)) + wrong + 1.0 / (64.0 * d);
  };
  s.grad_w = [d, wrong](const Vec2& p) {
    const double g = p.squaredNorm() / (16.0 * d) - 2.0 * (wrong + 1.0 / (32.0 * d));
    return Vec2(g * p.x(), g * p.y());
  };
  s.hess_w = [d, wrong](const Vec2& p) {
    const double g = p.squaredNorm() / (16.0 * d) - 2.0 * (wrong + 1.0 / (32.0 * d));
    return Hessian(g + p.x() * p.x() / (8.0 * d), p.x() * p.y() / (8.0 * d), g + p.y() * p.y() / (8.0 * d));
  };
  EXPECT_GT(relative_strong_form_residual(s, Vec2(0.3, 0.4)).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Navier, ThinAndThickCenterDeflection) {
  EXPECT_NEAR(navier_center_coefficient(1.0, 1.0, std::numeric_limits<double>::infinity()), 0.00406235, 5e-9);
  // series value scales as a^4 / D
  EXPECT_NEAR(navier_center_coefficient(2.0, 3.0, std::numeric_limits<double>::infinity()), 0.00406235, 5e-9);
  const PlateMaterial m = benchmark_material(0.1);
  const double thick = navier_center_coefficient(1.0, m.bending_rigidity(), m.shear_rigidity());
  EXPECT_NEAR(100.0 * thick, 0.4273, 5e-4);
}
