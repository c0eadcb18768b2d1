#include "regid/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace regid {

namespace {

Eigen::VectorXd clip(Eigen::VectorXd x, const Eigen::VectorXd& lower,
                     const Eigen::VectorXd& upper) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper, const SimplexOptions& options) {
  const Eigen::Index n = x0.size();
  SimplexResult result;

  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  pts.push_back(clip(x0, lower, upper));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd pt = pts[0];
    const double span = upper[i] - lower[i];
    double step = std::min(options.initial_step, 0.25 * span);
    if (pt[i] + step > upper[i]) step = -step;
    pt[i] += step;
    pts.push_back(clip(pt, lower, upper));
  }
  auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    return f(x);
  };
  vals.reserve(pts.size());
  for (const auto& pt : pts) vals.push_back(eval(pt));

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    sort_simplex();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    if (std::abs(vals[worst] - vals[best]) <=
        options.tolerance * (1.0 + std::abs(vals[best]))) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (k != worst) centroid += pts[k];
    centroid /= static_cast<double>(pts.size() - 1);

    const Eigen::VectorXd reflected = clip(centroid + (centroid - pts[worst]), lower, upper);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded =
          clip(centroid + 2.0 * (centroid - pts[worst]), lower, upper);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const Eigen::VectorXd contracted =
        clip(centroid + 0.5 * (pts[worst] - centroid), lower, upper);
    const double fc = eval(contracted);
    if (fc < vals[worst]) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == best) continue;
      pts[k] = clip(pts[best] + 0.5 * (pts[k] - pts[best]), lower, upper);
      vals[k] = eval(pts[k]);
    }
  }

  sort_simplex();
  result.x = pts[order.front()];
  result.value = vals[order.front()];
  return result;
}

double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol,
                       int max_iterations) {
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iterations && (b - a) > tol; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace regid
