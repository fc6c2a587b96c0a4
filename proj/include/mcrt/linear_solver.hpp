#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mcrt/network.hpp"

namespace mcrt {

enum class SolverKind { Auto, Dense, SparseDirect, ConjugateGradient };

struct SolverOptions {
  SolverKind kind = SolverKind::Auto;
  /// Auto uses a direct factorization up to this many unknowns, CG above.
  int direct_threshold = 4096;
  double cg_tolerance = 1e-10;
  int cg_max_iter_factor = 20;
};

class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Conductance-weighted Laplacian restricted to a set of free vertices, with
/// diagonal degrees taken from the whole network (the walk is killed when it
/// steps off the free set). Factorized once; solves may be repeated.
class KilledLaplacian {
public:
  KilledLaplacian(const Network& net, std::vector<int> free_vertices, SolverOptions opts = {});
  ~KilledLaplacian();
  KilledLaplacian(KilledLaplacian&&) noexcept;
  KilledLaplacian& operator=(KilledLaplacian&&) noexcept;

  int size() const { return static_cast<int>(vertices_.size()); }
  const std::vector<int>& vertices() const { return vertices_; }
  /// Local index of v, or -1 if v is not free.
  int local(int v) const { return local_[v]; }
  SolverKind kind() const { return kind_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  /// The restricted operator applied to a local vector (for residual checks).
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

private:
  struct Impl;
  const Network* net_;
  std::vector<int> vertices_;
  std::vector<int> local_;
  SolverKind kind_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mcrt
