#include "msce/design.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "msce/rng.hpp"

namespace msce {
namespace {

struct MaximinScore {
  double min_sq = 0.0;
  std::size_t ties = 0;

  bool better_than(const MaximinScore& other) const {
    constexpr double kTieTol = 1e-12;
    if (min_sq > other.min_sq + kTieTol) return true;
    if (min_sq < other.min_sq - kTieTol) return false;
    return ties < other.ties;
  }
};

MaximinScore maximin_score(const Eigen::MatrixXd& x) {
  MaximinScore score{std::numeric_limits<double>::infinity(), 0};
  const Eigen::Index n = x.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = (x.row(i) - x.row(j)).squaredNorm();
      if (sq < score.min_sq - 1e-12) {
        score.min_sq = sq;
        score.ties = 1;
      } else if (std::fabs(sq - score.min_sq) <= 1e-12) {
        ++score.ties;
      }
    }
  }
  return score;
}

double pair_inverse_product(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j) {
  double product = 1.0;
  for (Eigen::Index r = 0; r < x.cols(); ++r) {
    const double diff = x(i, r) - x(j, r);
    product *= diff * diff;
  }
  return product > 0.0 ? 1.0 / product : std::numeric_limits<double>::infinity();
}

// Contribution of every pair that involves row a or row b, counting (a,b) once.
double maxpro_rows_term(const Eigen::MatrixXd& x, Eigen::Index a, Eigen::Index b) {
  double sum = 0.0;
  for (Eigen::Index l = 0; l < x.rows(); ++l) {
    if (l != a) sum += pair_inverse_product(x, a, l);
    if (l != a && l != b) sum += pair_inverse_product(x, b, l);
  }
  return sum;
}

}  // namespace

std::string_view to_string(LhdCriterion criterion) {
  switch (criterion) {
    case LhdCriterion::random: return "random";
    case LhdCriterion::maximin: return "maximin";
    case LhdCriterion::maxpro: return "maxpro";
  }
  return "random";
}

LhdCriterion lhd_criterion_from_string(std::string_view name) {
  for (const auto c : {LhdCriterion::random, LhdCriterion::maximin, LhdCriterion::maxpro}) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown design criterion '" + std::string(name) + "'");
}

double maximin_distance(const Eigen::MatrixXd& points) {
  if (points.rows() < 2) return std::numeric_limits<double>::infinity();
  return std::sqrt(maximin_score(points).min_sq);
}

double maxpro_sum(const Eigen::MatrixXd& points) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) sum += pair_inverse_product(points, i, j);
  }
  return sum;
}

Design lhd(std::size_t n, std::size_t d, std::uint64_t seed, LhdCriterion criterion,
           std::size_t effort, bool jitter) {
  if (n < 2) throw std::invalid_argument("Latin hypercube needs n >= 2");
  if (d < 1) throw std::invalid_argument("Latin hypercube needs d >= 1");

  Rng rng(splitmix64(seed));
  Design design;
  design.criterion = criterion;
  design.seed = seed;
  design.effort = effort;
  design.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));

  std::vector<std::size_t> perm(n);
  const double width = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < d; ++r) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double offset = jitter ? rng.uniform() : 0.5;
      design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) =
          (static_cast<double>(perm[i]) + offset) * width;
    }
  }

  Eigen::MatrixXd& x = design.points;
  switch (criterion) {
    case LhdCriterion::random:
      design.initial_score = design.final_score = maximin_distance(x);
      return design;
    case LhdCriterion::maximin: {
      MaximinScore best = maximin_score(x);
      design.initial_score = std::sqrt(best.min_sq);
      for (std::size_t move = 0; move < effort; ++move) {
        const auto col = static_cast<Eigen::Index>(rng.below(d));
        const auto a = static_cast<Eigen::Index>(rng.below(n));
        auto b = static_cast<Eigen::Index>(rng.below(n - 1));
        if (b >= a) ++b;
        std::swap(x(a, col), x(b, col));
        const MaximinScore trial = maximin_score(x);
        if (trial.better_than(best)) {
          best = trial;
          ++design.accepted_moves;
        } else {
          std::swap(x(a, col), x(b, col));
        }
      }
      design.final_score = std::sqrt(best.min_sq);
      return design;
    }
    case LhdCriterion::maxpro: {
      design.initial_score = maxpro_sum(x);
      for (std::size_t move = 0; move < effort; ++move) {
        const auto col = static_cast<Eigen::Index>(rng.below(d));
        const auto a = static_cast<Eigen::Index>(rng.below(n));
        auto b = static_cast<Eigen::Index>(rng.below(n - 1));
        if (b >= a) ++b;
        const double before = maxpro_rows_term(x, a, b);
        std::swap(x(a, col), x(b, col));
        const double after = maxpro_rows_term(x, a, b);
        if (std::isfinite(after) && after < before) {
          ++design.accepted_moves;
        } else {
          std::swap(x(a, col), x(b, col));
        }
      }
      design.final_score = maxpro_sum(x);
      return design;
    }
  }
  return design;
}

void write_design_csv(std::ostream& out, const Eigen::MatrixXd& points) {
  for (Eigen::Index r = 0; r < points.cols(); ++r) out << (r ? "," : "") << 'x' << (r + 1);
  out << '\n';
  const auto old_precision = out.precision(17);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index r = 0; r < points.cols(); ++r) out << (r ? "," : "") << points(i, r);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace msce
