#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "orbitpose/error.hpp"
#include "orbitpose/pnp.hpp"

namespace orbitpose {
namespace {

constexpr int kMaxControl = 4;
constexpr std::size_t kNearMinimal = 5;

// Up to four null-space directions; products β_k β_l (k <= l) are indexed by product_index.
constexpr int kMaxBetas = 4;
constexpr int kMaxProducts = kMaxBetas * (kMaxBetas + 1) / 2;

constexpr int product_index(int k, int l) {
  // Ordering 11, 12, 22, 13, 23, 33, 14, 24, 34, 44 (column-major upper triangle).
  if (k > l) {
    const int t = k;
    k = l;
    l = t;
  }
  return l * (l + 1) / 2 + k;
}

struct ControlFrame {
  int count = 0;                                   // 3 (planar) or 4
  std::array<Vec3, kMaxControl> world;             // control points, target frame
  std::vector<std::array<double, kMaxControl>> alphas;
};

ControlFrame choose_control_points(std::span<const Correspondence> corrs, const EpnpOptions& opts) {
  const double n = static_cast<double>(corrs.size());
  Vec3 centroid = Vec3::Zero();
  for (const auto& c : corrs) centroid += c.point3d;
  centroid /= n;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& c : corrs) {
    const Vec3 d = c.point3d - centroid;
    cov += d * d.transpose();
  }
  const SymmetricEigen pca = jacobi_eigen(cov);
  const double lmax = pca.values(2);
  if (!(lmax > 0.0) || pca.values(1) <= 1e-10 * lmax) {
    throw Error(ErrorCode::kDegenerateConfiguration, "3-D points are coincident or collinear");
  }

  ControlFrame frame;
  frame.count = pca.values(0) <= opts.planar_ratio * lmax ? 3 : 4;
  frame.world[0] = centroid;
  std::array<Vec3, 3> dirs;
  for (int k = 1; k < frame.count; ++k) {
    const int col = 3 - k;  // largest variance first
    dirs[k - 1] = std::sqrt(pca.values(col) / n) * pca.vectors.col(col);
    frame.world[k] = centroid + dirs[k - 1];
  }

  // Principal directions are orthogonal, so barycentric coordinates are plain projections.
  frame.alphas.resize(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Vec3 d = corrs[i].point3d - centroid;
    double sum = 0.0;
    for (int k = 1; k < frame.count; ++k) {
      const double a = d.dot(dirs[k - 1]) / dirs[k - 1].squaredNorm();
      frame.alphas[i][k] = a;
      sum += a;
    }
    frame.alphas[i][0] = 1.0 - sum;
  }
  return frame;
}

struct Candidate {
  Pose pose;
  double error = std::numeric_limits<double>::infinity();
  bool valid = false;
};

class EpnpProblem {
 public:
  EpnpProblem(std::span<const Correspondence> corrs, const CameraModel& cam, const ControlFrame& frame)
      : corrs_(corrs), cam_(cam), frame_(frame), dim_(3 * frame.count) {
    build_null_space();
    build_distance_constraints();
  }

  /// Cycles the null-space basis so that direction `pivot` leads; the linearized beta
  /// initializations depend on this order.
  void set_pivot(int pivot) {
    const int nb = max_betas();
    Eigen::MatrixXd rotated(dim_, nb);
    for (int k = 0; k < nb; ++k) rotated.col(k) = base_null_.col((k + pivot) % nb);
    null_ = rotated;
    build_distance_constraints();
  }

  int max_betas() const { return frame_.count == 4 ? 4 : 3; }

  std::array<double, kMaxBetas> initial_betas(int case_n) const {
    std::array<double, kMaxBetas> beta{};
    // Linearized products for each hypothesis.
    std::vector<int> cols;
    if (case_n == 1) {
      for (int l = 0; l < max_betas(); ++l) cols.push_back(product_index(0, l));
    } else if (case_n == 2) {
      cols = {product_index(0, 0), product_index(0, 1), product_index(1, 1)};
    } else {
      cols = {product_index(0, 0), product_index(0, 1), product_index(1, 1), product_index(0, 2), product_index(1, 2)};
    }
    Eigen::MatrixXd lsub(pairs_, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) lsub.col(static_cast<Eigen::Index>(k)) = l_.col(cols[k]);
    const Eigen::VectorXd b = lsub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rho_);

    if (case_n == 1) {
      const double s = b(0) < 0.0 ? -1.0 : 1.0;
      beta[0] = std::sqrt(std::abs(b(0)));
      if (beta[0] > 0.0) {
        for (int l = 1; l < max_betas(); ++l) beta[l] = s * b(l) / beta[0];
      }
      return beta;
    }
    if (b(0) < 0.0) {
      beta[0] = std::sqrt(-b(0));
      beta[1] = b(2) < 0.0 ? std::sqrt(-b(2)) : 0.0;
    } else {
      beta[0] = std::sqrt(b(0));
      beta[1] = b(2) > 0.0 ? std::sqrt(b(2)) : 0.0;
    }
    if (b(1) < 0.0) beta[0] = -beta[0];
    if (case_n == 3 && beta[0] != 0.0) beta[2] = b(3) / beta[0];
    return beta;
  }

  void gauss_newton(std::array<double, kMaxBetas>& beta, int steps) const {
    const int nb = max_betas();
    Eigen::MatrixXd jac(pairs_, nb);
    Eigen::VectorXd res(pairs_);
    for (int it = 0; it < steps; ++it) {
      for (int p = 0; p < pairs_; ++p) {
        double value = 0.0;
        for (int k = 0; k < nb; ++k) {
          double d = 0.0;
          for (int l = 0; l < nb; ++l) {
            const double coeff = l_(p, product_index(k, l));
            d += (k == l ? 2.0 : 1.0) * coeff * beta[l];
            if (l >= k) value += coeff * beta[k] * beta[l];
          }
          jac(p, k) = d;
        }
        res(p) = value - rho_(p);
      }
      const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-res);
      if (!step.allFinite()) break;
      for (int k = 0; k < nb; ++k) beta[k] += step(k);
      if (step.norm() <= 1e-15 * (1.0 + Eigen::Map<const Eigen::VectorXd>(beta.data(), nb).norm())) break;
    }
  }

  Candidate pose_from_betas(const std::array<double, kMaxBetas>& beta) const {
    Candidate cand;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim_);
    for (int k = 0; k < max_betas(); ++k) x += beta[k] * null_.col(k);

    std::vector<Vec3> pc(corrs_.size());
    double depth_sum = 0.0;
    for (std::size_t i = 0; i < corrs_.size(); ++i) {
      Vec3 p = Vec3::Zero();
      for (int j = 0; j < frame_.count; ++j) p += frame_.alphas[i][j] * x.segment<3>(3 * j);
      pc[i] = p;
      depth_sum += p.z();
    }
    if (depth_sum < 0.0) {
      for (auto& p : pc) p = -p;
    }

    Vec3 pc_mean = Vec3::Zero(), pw_mean = Vec3::Zero();
    for (std::size_t i = 0; i < corrs_.size(); ++i) {
      pc_mean += pc[i];
      pw_mean += corrs_[i].point3d;
    }
    pc_mean /= static_cast<double>(corrs_.size());
    pw_mean /= static_cast<double>(corrs_.size());
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < corrs_.size(); ++i) {
      h += (pc[i] - pc_mean) * (corrs_[i].point3d - pw_mean).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Mat3 r = svd.matrixU() * d * svd.matrixV().transpose();
    if (!r.allFinite()) return cand;
    const Vec3 t = pc_mean - r * pw_mean;

    for (const auto& c : corrs_) {
      if (!((r * c.point3d + t).z() > kMinDepth)) return cand;
    }
    cand.pose.rotation = Quaternion::from_rotation_matrix(r);
    cand.pose.translation = t;
    cand.error = mean_reprojection_error(cand.pose, corrs_, cam_);
    cand.valid = std::isfinite(cand.error);
    return cand;
  }

 private:
  void build_null_space() {
    Eigen::MatrixXd mtm = Eigen::MatrixXd::Zero(dim_, dim_);
    Eigen::VectorXd rx(dim_), ry(dim_);
    for (std::size_t i = 0; i < corrs_.size(); ++i) {
      const double u = (corrs_[i].point2d.x() - cam_.principal_point.x()) / cam_.focal_px;
      const double v = (corrs_[i].point2d.y() - cam_.principal_point.y()) / cam_.focal_px;
      for (int j = 0; j < frame_.count; ++j) {
        const double a = frame_.alphas[i][j];
        rx.segment<3>(3 * j) << a, 0.0, -a * u;
        ry.segment<3>(3 * j) << 0.0, a, -a * v;
      }
      mtm.noalias() += rx * rx.transpose();
      mtm.noalias() += ry * ry.transpose();
    }
    const SymmetricEigen eig = jacobi_eigen(mtm);
    if (!eig.vectors.allFinite()) {
      throw Error(ErrorCode::kDegenerateConfiguration, "normal matrix eigen-decomposition failed");
    }
    base_null_ = eig.vectors.leftCols(max_betas());
    null_ = base_null_;
  }

  void build_distance_constraints() {
    pairs_ = frame_.count * (frame_.count - 1) / 2;
    l_ = Eigen::MatrixXd::Zero(pairs_, kMaxProducts);
    rho_.resize(pairs_);
    int p = 0;
    for (int a = 0; a < frame_.count; ++a) {
      for (int b = a + 1; b < frame_.count; ++b, ++p) {
        rho_(p) = (frame_.world[a] - frame_.world[b]).squaredNorm();
        std::array<Vec3, kMaxBetas> dv;
        for (int k = 0; k < max_betas(); ++k) {
          dv[k] = null_.col(k).segment<3>(3 * a) - null_.col(k).segment<3>(3 * b);
        }
        for (int k = 0; k < max_betas(); ++k) {
          for (int l = k; l < max_betas(); ++l) {
            l_(p, product_index(k, l)) = (k == l ? 1.0 : 2.0) * dv[k].dot(dv[l]);
          }
        }
      }
    }
  }

  std::span<const Correspondence> corrs_;
  const CameraModel& cam_;
  const ControlFrame& frame_;
  int dim_;
  int pairs_ = 0;
  Eigen::MatrixXd base_null_;
  Eigen::MatrixXd null_;
  Eigen::MatrixXd l_;
  Eigen::VectorXd rho_;
};

}  // namespace

double mean_reprojection_error(const Pose& pose, std::span<const Correspondence> corrs, const CameraModel& cam) {
  if (corrs.empty()) return 0.0;
  const Mat3 r = pose.rotation.to_rotation_matrix();
  double total = 0.0;
  for (const auto& c : corrs) {
    const Vec3 pc = r * c.point3d + pose.translation;
    if (!(pc.z() > kMinDepth)) return std::numeric_limits<double>::infinity();
    const Vec2 uv(cam.focal_px * pc.x() / pc.z() + cam.principal_point.x(),
                  cam.focal_px * pc.y() / pc.z() + cam.principal_point.y());
    total += (uv - c.point2d).norm();
  }
  return total / static_cast<double>(corrs.size());
}

Pose epnp_solve(std::span<const Correspondence> corrs, const CameraModel& cam, const EpnpOptions& opts) {
  if (corrs.size() < 4) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "EPnP needs at least 4 correspondences, got " + std::to_string(corrs.size()));
  }
  for (const auto& c : corrs) {
    if (!c.point3d.allFinite() || !c.point2d.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite correspondence");
    }
  }
  const ControlFrame frame = choose_control_points(corrs, opts);
  EpnpProblem problem(corrs, cam, frame);

  Candidate best;
  const int cases = frame.count == 4 ? 3 : 2;
  // Near-minimal sets leave a null space of full dimension, where no single basis order gives a
  // reliable linearization; try each direction as the lead.
  const int pivots = corrs.size() <= kNearMinimal ? problem.max_betas() : 1;
  for (int pivot = 0; pivot < pivots; ++pivot) {
    if (pivot > 0) problem.set_pivot(pivot);
    for (int case_n = 1; case_n <= cases; ++case_n) {
      auto beta = problem.initial_betas(case_n);
      problem.gauss_newton(beta, opts.gauss_newton_steps);
      const Candidate cand = problem.pose_from_betas(beta);
      if (cand.valid && cand.error < best.error) best = cand;
    }
  }
  if (!best.valid) {
    throw Error(ErrorCode::kSolutionBehindCamera, "no EPnP hypothesis places every point in front of the camera");
  }
  return best.pose;
}

}  // namespace orbitpose
