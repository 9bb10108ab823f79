#include "slsmpc/polytope.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "slsmpc/conic.hpp"
#include "slsmpc/lqr.hpp"

namespace slsmpc {

namespace {

constexpr double kBigBox = 1e7;

int64_t quantize(double v, double step = 1e-9) {
  return llround(v / step);
}

std::vector<VectorXd> dedupe_points(const std::vector<VectorXd>& pts,
                                    double tol = 1e-9) {
  std::vector<VectorXd> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      if ((p - q).cwiseAbs().maxCoeff() <= tol * (1 + p.cwiseAbs().maxCoeff())) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

double cross2(const VectorXd& o, const VectorXd& a, const VectorXd& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

// Andrew's monotone chain; returns the hull in counter-clockwise order with
// collinear points dropped.
std::vector<VectorXd> hull2d(std::vector<VectorXd> pts) {
  std::sort(pts.begin(), pts.end(), [](const VectorXd& a, const VectorXd& b) {
    return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
  });
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-10 * scale * scale;
  const int k = static_cast<int>(pts.size());
  if (k < 3) return pts;
  std::vector<VectorXd> hull(2 * k);
  int h = 0;
  for (int i = 0; i < k; ++i) {
    while (h >= 2 && cross2(hull[h - 2], hull[h - 1], pts[i]) <= eps) --h;
    hull[h++] = pts[i];
  }
  for (int i = k - 2, lower = h + 1; i >= 0; --i) {
    while (h >= lower && cross2(hull[h - 2], hull[h - 1], pts[i]) <= eps) --h;
    hull[h++] = pts[i];
  }
  hull.resize(h - 1);
  return hull;
}

// Extreme-point filter via membership LPs; used where no specialized hull
// applies (3D point sets).
std::vector<VectorXd> extreme_filter_lp(const std::vector<VectorXd>& pts) {
  const int k = static_cast<int>(pts.size());
  if (k <= 2) return pts;
  const int d = static_cast<int>(pts[0].size());
  std::vector<VectorXd> out;
  for (int i = 0; i < k; ++i) {
    ProgramBuilder pb;
    pb.add_vars(k - 1);
    std::vector<ProgramBuilder::Term> sum1;
    for (int j = 0; j < k - 1; ++j) {
      sum1.emplace_back(j, 1.0);
      pb.add_ineq({{j, -1.0}}, 0.0);  // lambda_j >= 0
    }
    pb.add_eq(sum1, 1.0);
    for (int c = 0; c < d; ++c) {
      std::vector<ProgramBuilder::Term> row;
      int col = 0;
      for (int j = 0; j < k; ++j) {
        if (j == i) continue;
        row.emplace_back(col++, pts[j](c));
      }
      pb.add_eq(row, pts[i](c));
    }
    if (check_feasible(pb.build()) != FeasOutcome::Feasible) {
      out.push_back(pts[i]);
    }
  }
  return out;
}

struct AffineFrame {
  VectorXd center;
  MatrixXd basis;       // n x r, orthonormal columns spanning the point set
  MatrixXd complement;  // n x (n - r)
  int rank = 0;
};

AffineFrame affine_frame(const std::vector<VectorXd>& pts) {
  const int n = static_cast<int>(pts[0].size());
  AffineFrame fr;
  fr.center = VectorXd::Zero(n);
  for (const auto& p : pts) fr.center += p;
  fr.center /= static_cast<double>(pts.size());
  MatrixXd Y(n, pts.size());
  for (size_t i = 0; i < pts.size(); ++i) Y.col(i) = pts[i] - fr.center;
  Eigen::JacobiSVD<MatrixXd> svd(Y, Eigen::ComputeFullU);
  const double smax = svd.singularValues().size()
                          ? svd.singularValues()(0)
                          : 0.0;
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-9 * std::max(1.0, smax)) ++r;
  }
  fr.rank = r;
  fr.basis = svd.matrixU().leftCols(r);
  fr.complement = svd.matrixU().rightCols(n - r);
  return fr;
}

std::vector<VectorXd> reduce_to_extreme(std::vector<VectorXd> pts) {
  pts = dedupe_points(pts);
  if (pts.size() <= 1) return pts;
  const AffineFrame fr = affine_frame(pts);
  if (fr.rank == 0) return {pts[0]};
  if (fr.rank == 1) {
    const VectorXd dir = fr.basis.col(0);
    auto cmp = [&](const VectorXd& a, const VectorXd& b) {
      return dir.dot(a) < dir.dot(b);
    };
    VectorXd lo = *std::min_element(pts.begin(), pts.end(), cmp);
    VectorXd hi = *std::max_element(pts.begin(), pts.end(), cmp);
    return {lo, hi};
  }
  if (fr.rank == 2) {
    std::vector<VectorXd> planar;
    planar.reserve(pts.size());
    for (const auto& p : pts) planar.push_back(fr.basis.transpose() *
                                               (p - fr.center));
    std::vector<VectorXd> hull = hull2d(planar);
    std::vector<VectorXd> out;
    out.reserve(hull.size());
    for (const auto& y : hull) out.push_back(fr.center + fr.basis * y);
    return out;
  }
  return extreme_filter_lp(pts);
}

// H-representation of the convex hull of a point set, handling flat sets by
// working in their affine frame and pinning the complement directions.
std::pair<MatrixXd, VectorXd> hrep_from_points(
    const std::vector<VectorXd>& pts_in) {
  std::vector<VectorXd> pts = dedupe_points(pts_in);
  const int n = static_cast<int>(pts[0].size());
  std::vector<std::pair<VectorXd, double>> rows;

  const AffineFrame fr = affine_frame(pts);
  // complement directions are fixed: c'x = c'center
  for (int j = 0; j < fr.complement.cols(); ++j) {
    const VectorXd c = fr.complement.col(j);
    rows.emplace_back(c, c.dot(fr.center));
    rows.emplace_back(-c, -c.dot(fr.center));
  }
  if (fr.rank >= 1) {
    std::vector<VectorXd> reduced;
    reduced.reserve(pts.size());
    for (const auto& p : pts) {
      reduced.push_back(fr.basis.transpose() * (p - fr.center));
    }
    if (fr.rank == 1) {
      double lo = reduced[0](0), hi = reduced[0](0);
      for (const auto& y : reduced) {
        lo = std::min(lo, y(0));
        hi = std::max(hi, y(0));
      }
      const VectorXd d = fr.basis.col(0);
      rows.emplace_back(d, hi + d.dot(fr.center));
      rows.emplace_back(-d, -lo - d.dot(fr.center));
    } else if (fr.rank == 2) {
      std::vector<VectorXd> hull = hull2d(reduced);
      const int h = static_cast<int>(hull.size());
      for (int i = 0; i < h; ++i) {
        const VectorXd& a = hull[i];
        const VectorXd& bb = hull[(i + 1) % h];
        Eigen::Vector2d e(bb(0) - a(0), bb(1) - a(1));
        Eigen::Vector2d nrm(e(1), -e(0));
        const double len = nrm.norm();
        if (len < 1e-14) continue;
        nrm /= len;
        const VectorXd lifted = fr.basis * VectorXd(nrm);
        rows.emplace_back(lifted,
                          nrm.dot(Eigen::Vector2d(a(0), a(1))) +
                              lifted.dot(fr.center));
      }
    } else {
      // rank 3: supporting planes through point triples
      const int k = static_cast<int>(pts.size());
      std::map<std::pair<std::array<int64_t, 3>, int64_t>, bool> seen;
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          for (int l = j + 1; l < k; ++l) {
            Eigen::Vector3d u = pts[j].head<3>() - pts[i].head<3>();
            Eigen::Vector3d v = pts[l].head<3>() - pts[i].head<3>();
            Eigen::Vector3d nr = u.cross(v);
            if (nr.norm() < 1e-12) continue;
            nr.normalize();
            double off = nr.dot(pts[i].head<3>());
            double lo = 0, hi = 0;
            for (const auto& p : pts) {
              const double s = nr.dot(p.head<3>()) - off;
              lo = std::min(lo, s);
              hi = std::max(hi, s);
            }
            const double tol = 1e-9 * (1 + std::abs(off));
            auto push = [&](const Eigen::Vector3d& nn, double oo) {
              std::array<int64_t, 3> key{quantize(nn(0)), quantize(nn(1)),
                                         quantize(nn(2))};
              auto full = std::make_pair(key, quantize(oo));
              if (seen.emplace(full, true).second) {
                rows.emplace_back(VectorXd(nn), oo);
              }
            };
            if (hi <= tol) push(nr, off);
            if (lo >= -tol) push(-nr, -off);
          }
        }
      }
    }
  }

  MatrixXd F(rows.size(), n);
  VectorXd b(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    F.row(i) = rows[i].first.transpose();
    b(i) = rows[i].second;
  }
  return {F, b};
}

// Deduplicate H-rep rows by direction (unit l2 normalization), keeping the
// tightest offset.
std::pair<MatrixXd, VectorXd> dedupe_rows(const MatrixXd& F,
                                          const VectorXd& b) {
  std::map<std::vector<int64_t>, std::pair<int, double>> best;
  std::vector<std::pair<VectorXd, double>> rows;
  for (int i = 0; i < F.rows(); ++i) {
    const double norm = F.row(i).norm();
    if (norm < 1e-13) continue;
    VectorXd dir = F.row(i).transpose() / norm;
    const double rhs = b(i) / norm;
    std::vector<int64_t> key(dir.size());
    for (int c = 0; c < dir.size(); ++c) key[c] = quantize(dir(c));
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, std::make_pair(static_cast<int>(rows.size()), rhs));
      rows.emplace_back(dir, rhs);
    } else if (rhs < it->second.second) {
      it->second.second = rhs;
      rows[it->second.first].second = rhs;
    }
  }
  MatrixXd Fo(rows.size(), F.cols());
  VectorXd bo(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    Fo.row(i) = rows[i].first.transpose();
    bo(i) = rows[i].second;
  }
  return {Fo, bo};
}

// Chebyshev center of {Fx <= b} (rows assumed l2-normalized); returns the
// radius (negative reported as empty by callers).
std::pair<VectorXd, double> chebyshev_center(const MatrixXd& F,
                                             const VectorXd& b) {
  const int n = static_cast<int>(F.cols());
  ProgramBuilder pb;
  pb.add_vars(n + 1);
  for (int i = 0; i < F.rows(); ++i) {
    std::vector<ProgramBuilder::Term> row;
    for (int c = 0; c < n; ++c) row.emplace_back(c, F(i, c));
    row.emplace_back(n, 1.0);
    pb.add_ineq(row, b(i));
  }
  pb.add_ineq({{static_cast<int>(n), -1.0}}, kBigBox);  // r bounded below
  pb.add_ineq({{static_cast<int>(n), 1.0}}, kBigBox);   // and above
  for (int c = 0; c < n; ++c) {
    pb.add_ineq({{c, 1.0}}, kBigBox);
    pb.add_ineq({{c, -1.0}}, kBigBox);
  }
  pb.add_linear_cost(n, -1.0);
  InteriorPointSolver solver;
  SolveResult res = solver.solve(pb.build());
  if (res.status != SolveStatus::Optimal) {
    return {VectorXd::Zero(n), -1.0};
  }
  return {res.x.head(n), res.x(n)};
}

}  // namespace

Polytope Polytope::from_hrep(MatrixXd F, VectorXd b) {
  if (F.rows() != b.size()) {
    throw std::invalid_argument("Polytope: F/b row mismatch");
  }
  Polytope p;
  p.dim_ = static_cast<int>(F.cols());
  p.F_ = std::move(F);
  p.b_ = std::move(b);
  p.hrep_set_ = true;
  return p;
}

Polytope Polytope::from_vrep(std::vector<VectorXd> vertices) {
  if (vertices.empty()) {
    throw std::invalid_argument("Polytope: empty vertex list");
  }
  Polytope p;
  p.dim_ = static_cast<int>(vertices[0].size());
  p.vertices_ = reduce_to_extreme(std::move(vertices));
  p.vrep_set_ = true;
  return p;
}

Polytope Polytope::inf_ball(int dim, double radius) {
  MatrixXd F(2 * dim, dim);
  VectorXd b = VectorXd::Constant(2 * dim, radius);
  F << MatrixXd::Identity(dim, dim), -MatrixXd::Identity(dim, dim);
  Polytope p = from_hrep(F, b);
  if (radius == 0.0) {
    p.vertices_ = {VectorXd::Zero(dim)};
  } else {
    p.vertices_.clear();
    for (int mask = 0; mask < (1 << dim); ++mask) {
      VectorXd v(dim);
      for (int c = 0; c < dim; ++c) v(c) = (mask >> c) & 1 ? radius : -radius;
      p.vertices_.push_back(v);
    }
  }
  p.vrep_set_ = true;
  return p;
}

Polytope Polytope::singleton(const VectorXd& point) {
  return from_vrep({point});
}

Polytope Polytope::empty_set(int dim) {
  Polytope p;
  p.dim_ = dim;
  p.empty_ = true;
  return p;
}

const MatrixXd& Polytope::F() const {
  if (!hrep_set_) throw std::logic_error("Polytope: H-rep not available");
  return F_;
}
const VectorXd& Polytope::b() const {
  if (!hrep_set_) throw std::logic_error("Polytope: H-rep not available");
  return b_;
}
const std::vector<VectorXd>& Polytope::vertices() const {
  if (!vrep_set_) throw std::logic_error("Polytope: V-rep not available");
  return vertices_;
}

void Polytope::ensure_vrep() {
  if (vrep_set_ || empty_) return;
  if (!hrep_set_) throw std::logic_error("Polytope: no representation");
  vertices_ = vertex_enumeration(F_, b_);
  if (vertices_.empty()) {
    empty_ = true;
    hrep_set_ = false;
  }
  vrep_set_ = !empty_;
}

void Polytope::ensure_hrep() {
  if (hrep_set_ || empty_) return;
  if (!vrep_set_) throw std::logic_error("Polytope: no representation");
  auto [F, b] = hrep_from_points(vertices_);
  F_ = std::move(F);
  b_ = std::move(b);
  hrep_set_ = true;
}

double Polytope::support(const VectorXd& dir) const {
  if (empty_) throw std::logic_error("Polytope: support of the empty set");
  if (vrep_set_) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) m = std::max(m, dir.dot(v));
    return m;
  }
  ProgramBuilder pb;
  pb.add_vars(dim_);
  for (int i = 0; i < F_.rows(); ++i) {
    std::vector<ProgramBuilder::Term> row;
    for (int c = 0; c < dim_; ++c) row.emplace_back(c, F_(i, c));
    pb.add_ineq(row, b_(i));
  }
  for (int c = 0; c < dim_; ++c) pb.add_linear_cost(c, -dir(c));
  InteriorPointSolver solver;
  SolveResult res = solver.solve(pb.build());
  if (res.status != SolveStatus::Optimal) {
    throw std::runtime_error("Polytope::support: LP failed");
  }
  return -res.objective;
}

bool Polytope::contains(const VectorXd& x, double tol) const {
  if (empty_) return false;
  if (hrep_set_) {
    for (int i = 0; i < F_.rows(); ++i) {
      if (F_.row(i).dot(x) > b_(i) + tol * (1 + std::abs(b_(i)))) return false;
    }
    return true;
  }
  Polytope copy = *this;
  copy.ensure_hrep();
  return copy.contains(x, tol);
}

bool Polytope::contains_set(const Polytope& other, double tol) const {
  if (other.empty_) return true;
  if (empty_) return false;
  Polytope self = *this;
  self.ensure_hrep();
  Polytope o = other;
  o.ensure_vrep();
  for (int i = 0; i < self.F_.rows(); ++i) {
    double h = o.support(self.F_.row(i).transpose());
    if (h > self.b_(i) + tol * (1 + std::abs(self.b_(i)))) return false;
  }
  return true;
}

double Polytope::support_gap(const Polytope& other) const {
  if (empty_ && other.empty_) return 0.0;
  if (empty_ || other.empty_) {
    return std::numeric_limits<double>::infinity();
  }
  Polytope a = *this, b = other;
  a.ensure_hrep();
  a.ensure_vrep();
  b.ensure_hrep();
  b.ensure_vrep();
  double gap = 0.0;
  auto scan = [&](const MatrixXd& F) {
    for (int i = 0; i < F.rows(); ++i) {
      VectorXd dir = F.row(i).transpose();
      const double norm = dir.norm();
      if (norm < 1e-13) continue;
      dir /= norm;
      gap = std::max(gap, std::abs(a.support(dir) - b.support(dir)));
    }
  };
  scan(a.F_);
  scan(b.F_);
  return gap;
}

void Polytope::check_duality(double tol) const {
  if (!hrep_set_ || !vrep_set_) {
    throw std::logic_error("check_duality: both representations required");
  }
  for (const auto& v : vertices_) {
    for (int i = 0; i < F_.rows(); ++i) {
      if (F_.row(i).dot(v) > b_(i) + 1e-9 * (1 + std::abs(b_(i)))) {
        throw std::runtime_error("check_duality: vertex outside a facet");
      }
    }
  }
  for (int i = 0; i < F_.rows(); ++i) {
    double h = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) h = std::max(h, F_.row(i).dot(v));
    if (h < b_(i) - tol * (1 + std::abs(b_(i)))) {
      throw std::runtime_error("check_duality: facet " + std::to_string(i) +
                               " unsupported");
    }
  }
}

std::string Polytope::to_json() const {
  Polytope copy = *this;
  nlohmann::json j;
  if (empty_) {
    j["empty"] = true;
    j["dim"] = dim_;
    return j.dump(2);
  }
  copy.ensure_hrep();
  copy.ensure_vrep();
  std::vector<std::vector<double>> F, V;
  for (int i = 0; i < copy.F_.rows(); ++i) {
    F.emplace_back(copy.F_.row(i).data(),
                   copy.F_.row(i).data() + copy.F_.cols());
  }
  for (const auto& v : copy.vertices_) {
    V.emplace_back(v.data(), v.data() + v.size());
  }
  j["F"] = F;
  j["b"] = std::vector<double>(copy.b_.data(), copy.b_.data() + copy.b_.size());
  j["vertices"] = V;
  return j.dump(2);
}

Polytope Polytope::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("empty", false)) return empty_set(j.at("dim").get<int>());
  const auto Fj = j.at("F").get<std::vector<std::vector<double>>>();
  const auto bj = j.at("b").get<std::vector<double>>();
  MatrixXd F(Fj.size(), Fj.empty() ? 0 : Fj[0].size());
  for (size_t i = 0; i < Fj.size(); ++i) {
    for (size_t c = 0; c < Fj[i].size(); ++c) F(i, c) = Fj[i][c];
  }
  VectorXd b = Eigen::Map<const VectorXd>(bj.data(), bj.size());
  Polytope p = from_hrep(F, b);
  if (j.contains("vertices")) {
    const auto Vj = j.at("vertices").get<std::vector<std::vector<double>>>();
    for (const auto& row : Vj) {
      p.vertices_.emplace_back(Eigen::Map<const VectorXd>(row.data(),
                                                          row.size()));
    }
    p.vrep_set_ = !p.vertices_.empty();
  }
  return p;
}

std::vector<VectorXd> vertex_enumeration(const MatrixXd& F,
                                         const VectorXd& b) {
  const int n = static_cast<int>(F.cols());
  if (n < 1 || n > 3) {
    throw std::invalid_argument("vertex_enumeration: dimension must be 1..3");
  }
  // Augment with a large box; vertices touching it expose unboundedness.
  const int m0 = static_cast<int>(F.rows());
  MatrixXd Fa(m0 + 2 * n, n);
  VectorXd ba(m0 + 2 * n);
  Fa.topRows(m0) = F;
  ba.head(m0) = b;
  Fa.middleRows(m0, n) = MatrixXd::Identity(n, n);
  Fa.bottomRows(n) = -MatrixXd::Identity(n, n);
  ba.tail(2 * n).setConstant(kBigBox);

  const int m = m0 + 2 * n;
  std::vector<VectorXd> found;
  std::vector<int> idx(n);
  auto consider = [&](const std::vector<int>& rows) {
    MatrixXd Asys(n, n);
    VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      Asys.row(i) = Fa.row(rows[i]);
      rhs(i) = ba(rows[i]);
    }
    Eigen::FullPivLU<MatrixXd> lu(Asys);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) return;
    const VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) return;
    for (int i = 0; i < m; ++i) {
      if (Fa.row(i).dot(x) > ba(i) + 1e-7 * (1 + std::abs(ba(i)))) return;
    }
    found.push_back(x);
  };
  // enumerate n-subsets
  std::vector<int> comb(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      consider(comb);
      return;
    }
    for (int i = start; i <= m - (n - depth); ++i) {
      comb[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);

  found = dedupe_points(found, 1e-7);
  for (const auto& v : found) {
    if (v.cwiseAbs().maxCoeff() >= kBigBox * (1 - 1e-5)) {
      throw std::invalid_argument("vertex_enumeration: polytope is unbounded");
    }
  }
  return found;
}

Polytope minkowski_sum(const Polytope& P, const Polytope& Q) {
  if (P.dim() != Q.dim()) {
    throw std::invalid_argument("minkowski_sum: dimension mismatch");
  }
  if (P.is_empty() || Q.is_empty()) return Polytope::empty_set(P.dim());
  Polytope a = P, b = Q;
  a.ensure_vrep();
  b.ensure_vrep();
  std::vector<VectorXd> sums;
  sums.reserve(a.vertices().size() * b.vertices().size());
  for (const auto& p : a.vertices()) {
    for (const auto& q : b.vertices()) sums.push_back(p + q);
  }
  return Polytope::from_vrep(std::move(sums));
}

Polytope pontryagin_difference(const Polytope& P, const Polytope& Q) {
  if (P.dim() != Q.dim()) {
    throw std::invalid_argument("pontryagin_difference: dimension mismatch");
  }
  if (P.is_empty()) return Polytope::empty_set(P.dim());
  Polytope a = P, q = Q;
  a.ensure_hrep();
  q.ensure_vrep();
  VectorXd shrunk = a.b();
  for (int i = 0; i < a.F().rows(); ++i) {
    shrunk(i) -= q.support(a.F().row(i).transpose());
  }
  ProgramBuilder pb;
  pb.add_vars(P.dim());
  for (int i = 0; i < a.F().rows(); ++i) {
    std::vector<ProgramBuilder::Term> row;
    for (int c = 0; c < P.dim(); ++c) row.emplace_back(c, a.F()(i, c));
    pb.add_ineq(row, shrunk(i));
  }
  if (check_feasible(pb.build()) != FeasOutcome::Feasible) {
    return Polytope::empty_set(P.dim());
  }
  return Polytope::from_hrep(a.F(), shrunk);
}

Polytope intersect(const Polytope& P, const Polytope& Q) {
  if (P.is_empty() || Q.is_empty()) return Polytope::empty_set(P.dim());
  Polytope a = P, b = Q;
  a.ensure_hrep();
  b.ensure_hrep();
  MatrixXd F(a.F().rows() + b.F().rows(), P.dim());
  VectorXd bb(F.rows());
  F << a.F(), b.F();
  bb << a.b(), b.b();
  return minimal_hrep(F, bb);
}

Polytope affine_map(const MatrixXd& M, const Polytope& P) {
  if (P.is_empty()) return Polytope::empty_set(static_cast<int>(M.rows()));
  Polytope a = P;
  a.ensure_vrep();
  std::vector<VectorXd> mapped;
  mapped.reserve(a.vertices().size());
  for (const auto& v : a.vertices()) mapped.push_back(M * v);
  return Polytope::from_vrep(std::move(mapped));
}

Polytope minimal_hrep(const MatrixXd& F_in, const VectorXd& b_in) {
  const int n = static_cast<int>(F_in.cols());
  for (int i = 0; i < F_in.rows(); ++i) {
    if (F_in.row(i).norm() < 1e-13 && b_in(i) < -1e-12) {
      return Polytope::empty_set(n);
    }
  }
  auto [F, b] = dedupe_rows(F_in, b_in);
  if (F.rows() == 0) {
    throw std::invalid_argument("minimal_hrep: no effective constraints");
  }
  auto [center, radius] = chebyshev_center(F, b);
  if (radius < 1e-10) {
    // empty, or degenerate with no interior; both collapse here
    return Polytope::empty_set(n);
  }
  if (n == 2) {
    // polar dual: irredundant rows map to extreme points of conv{F_i / b'_i}
    VectorXd bp = b - F * center;
    std::vector<VectorXd> dual;
    dual.reserve(F.rows());
    for (int i = 0; i < F.rows(); ++i) {
      dual.push_back(F.row(i).transpose() / bp(i));
    }
    std::vector<VectorXd> hull = hull2d(dual);
    std::map<std::pair<int64_t, int64_t>, int> lookup;
    for (int i = 0; i < F.rows(); ++i) {
      lookup.emplace(std::make_pair(quantize(dual[i](0)), quantize(dual[i](1))),
                     i);
    }
    std::vector<int> keep;
    for (const auto& h : hull) {
      auto it = lookup.find({quantize(h(0)), quantize(h(1))});
      if (it != lookup.end()) keep.push_back(it->second);
    }
    std::sort(keep.begin(), keep.end());
    MatrixXd Fo(keep.size(), n);
    VectorXd bo(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
      Fo.row(i) = F.row(keep[i]);
      bo(i) = b(keep[i]);
    }
    return Polytope::from_hrep(Fo, bo);
  }
  // general path: per-row support LPs
  std::vector<int> keep;
  InteriorPointSolver solver;
  for (int i = 0; i < F.rows(); ++i) {
    ProgramBuilder pb;
    pb.add_vars(n);
    for (int r = 0; r < F.rows(); ++r) {
      std::vector<ProgramBuilder::Term> row;
      for (int c = 0; c < n; ++c) row.emplace_back(c, F(r, c));
      pb.add_ineq(row, r == i ? b(r) + 1.0 : b(r));
    }
    for (int c = 0; c < n; ++c) pb.add_linear_cost(c, -F(i, c));
    SolveResult res = solver.solve(pb.build());
    if (res.status != SolveStatus::Optimal || -res.objective > b(i) + 1e-9) {
      keep.push_back(i);
    }
  }
  MatrixXd Fo(keep.size(), n);
  VectorXd bo(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    Fo.row(i) = F.row(keep[i]);
    bo(i) = b(keep[i]);
  }
  return Polytope::from_hrep(Fo, bo);
}

std::pair<MatrixXd, VectorXd> fourier_motzkin(const MatrixXd& F_in,
                                              const VectorXd& b_in,
                                              int n_drop) {
  MatrixXd F = F_in;
  VectorXd b = b_in;
  for (int round = 0; round < n_drop; ++round) {
    const int col = static_cast<int>(F.cols()) - 1;
    std::vector<int> pos, neg, zero;
    for (int i = 0; i < F.rows(); ++i) {
      const double a = F(i, col);
      if (a > 1e-12) {
        pos.push_back(i);
      } else if (a < -1e-12) {
        neg.push_back(i);
      } else {
        zero.push_back(i);
      }
    }
    std::vector<std::pair<VectorXd, double>> rows;
    for (int i : zero) {
      rows.emplace_back(F.row(i).head(col).transpose(), b(i));
    }
    for (int ip : pos) {
      const double ap = F(ip, col);
      for (int in : neg) {
        const double an = -F(in, col);
        VectorXd combined =
            F.row(ip).head(col).transpose() / ap +
            F.row(in).head(col).transpose() / an;
        rows.emplace_back(combined, b(ip) / ap + b(in) / an);
      }
    }
    MatrixXd Fn(rows.size(), col);
    VectorXd bn(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      Fn.row(i) = rows[i].first.transpose();
      bn(i) = rows[i].second;
    }
    std::tie(F, b) = dedupe_rows(Fn, bn);
    if (F.rows() == 0) {
      // no constraints remain on the retained coordinates
      F = MatrixXd::Zero(0, col);
      b = VectorXd::Zero(0);
    }
  }
  return {F, b};
}

UncertaintyVertexSet UncertaintyVertexSet::enumerate(int n, int m,
                                                     double eps_A,
                                                     double eps_B) {
  auto row_choices = [](int dim, double eps) {
    std::vector<VectorXd> rows;
    if (eps == 0.0) {
      rows.push_back(VectorXd::Zero(dim));
      return rows;
    }
    for (int c = 0; c < dim; ++c) {
      for (double s : {eps, -eps}) {
        VectorXd r = VectorXd::Zero(dim);
        r(c) = s;
        rows.push_back(r);
      }
    }
    return rows;
  };
  auto matrices = [&](int rows, int cols, double eps) {
    const auto choices = row_choices(cols, eps);
    std::vector<MatrixXd> out;
    std::vector<int> pick(rows, 0);
    while (true) {
      MatrixXd M(rows, cols);
      for (int r = 0; r < rows; ++r) M.row(r) = choices[pick[r]].transpose();
      out.push_back(M);
      int r = rows - 1;
      while (r >= 0 && ++pick[r] == static_cast<int>(choices.size())) {
        pick[r--] = 0;
      }
      if (r < 0) break;
    }
    return out;
  };
  UncertaintyVertexSet set;
  for (const auto& dA : matrices(n, n, eps_A)) {
    for (const auto& dB : matrices(n, m, eps_B)) {
      set.vertices.emplace_back(dA, dB);
    }
  }
  return set;
}

Polytope robust_pre(const Polytope& target, const Polytope& X,
                    const Polytope& U, const LtvModel& model,
                    const UncertaintyVertexSet& vertices) {
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (target.is_empty() || X.is_empty() || U.is_empty()) {
    return Polytope::empty_set(n);
  }
  Polytope tgt = target, Xc = X, Uc = U;
  tgt.ensure_hrep();
  Xc.ensure_hrep();
  Uc.ensure_hrep();
  Polytope W = Polytope::inf_ball(n, model.sigma_w);

  const MatrixXd& Ft = tgt.F();
  const VectorXd& bt = tgt.b();
  std::vector<std::pair<VectorXd, double>> rows;  // over (x, u)
  const MatrixXd& A0 = model.A[0];
  const MatrixXd& B0 = model.B[0];
  for (const auto& [dA, dB] : vertices.vertices) {
    const MatrixXd Av = A0 + dA;
    const MatrixXd Bv = B0 + dB;
    for (const auto& w : W.vertices()) {
      for (int i = 0; i < Ft.rows(); ++i) {
        VectorXd row(n + m);
        row.head(n) = (Ft.row(i) * Av).transpose();
        row.tail(m) = (Ft.row(i) * Bv).transpose();
        rows.emplace_back(row, bt(i) - Ft.row(i).dot(w));
      }
    }
  }
  for (int i = 0; i < Xc.F().rows(); ++i) {
    VectorXd row = VectorXd::Zero(n + m);
    row.head(n) = Xc.F().row(i).transpose();
    rows.emplace_back(row, Xc.b()(i));
  }
  for (int i = 0; i < Uc.F().rows(); ++i) {
    VectorXd row = VectorXd::Zero(n + m);
    row.tail(m) = Uc.F().row(i).transpose();
    rows.emplace_back(row, Uc.b()(i));
  }
  MatrixXd Fall(rows.size(), n + m);
  VectorXd ball(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    Fall.row(i) = rows[i].first.transpose();
    ball(i) = rows[i].second;
  }
  auto [Fd, bd] = dedupe_rows(Fall, ball);
  auto [Fx, bx] = fourier_motzkin(Fd, bd, m);
  if (Fx.rows() == 0) return Xc;
  return minimal_hrep(Fx, bx);
}

InvariantSetResult max_robust_invariant_set(const Polytope& X,
                                            const Polytope& U,
                                            const LtvModel& model,
                                            int iteration_cap) {
  if (!model.is_lti()) {
    throw std::invalid_argument(
        "max_robust_invariant_set: requires a time-invariant nominal model");
  }
  const UncertaintyVertexSet verts = UncertaintyVertexSet::enumerate(
      model.state_dim(), model.input_dim(), model.eps_A, model.eps_B);
  InvariantSetResult out;
  Polytope current = X;
  current.ensure_hrep();
  for (int k = 0; k < iteration_cap; ++k) {
    Polytope next = robust_pre(current, X, U, model, verts);
    out.iterations = k + 1;
    if (next.is_empty()) {
      out.set = next;
      return out;
    }
    const double gap = next.support_gap(current);
    out.gaps.push_back(gap);
    current = next;
    if (gap <= 1e-6) {
      out.set = current;
      return out;
    }
  }
  throw std::runtime_error(
      "max_robust_invariant_set: no fixed point within iteration cap");
}

DisturbanceInvariantResult disturbance_invariant_set(const LtvModel& model,
                                                     const MatrixXd& K,
                                                     double truncation_tol,
                                                     bool include_zero_term) {
  const int n = model.state_dim();
  const MatrixXd S = model.A[0] + model.B[0] * K;
  if (spectral_radius(S) >= 1.0) {
    throw std::runtime_error(
        "disturbance_invariant_set: closed loop is not strictly stable");
  }
  const Polytope W = Polytope::inf_ball(n, model.sigma_w);
  auto inf_norm = [](const MatrixXd& M) {
    return M.cwiseAbs().rowwise().sum().maxCoeff();
  };
  DisturbanceInvariantResult out;
  MatrixXd Mi = S;  // S^i
  Polytope acc = affine_map(S, W);
  out.terms = 1;
  while (inf_norm(Mi) * model.sigma_w > truncation_tol && out.terms < 500) {
    Mi = S * Mi;
    acc = minkowski_sum(acc, affine_map(Mi, W));
    ++out.terms;
  }
  if (include_zero_term) acc = minkowski_sum(acc, W);
  acc.ensure_hrep();
  out.set = std::move(acc);
  return out;
}

}  // namespace slsmpc
