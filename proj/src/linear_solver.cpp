#include "mcrt/linear_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <sstream>

namespace mcrt {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct KilledLaplacian::Impl {
  SparseMatrix matrix;
  Eigen::LLT<Eigen::MatrixXd> dense;
  Eigen::SimplicialLDLT<SparseMatrix> sparse;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
};

KilledLaplacian::KilledLaplacian(const Network& net, std::vector<int> free_vertices,
                                 SolverOptions opts)
    : net_(&net), vertices_(std::move(free_vertices)), impl_(std::make_unique<Impl>()) {
  local_.assign(static_cast<std::size_t>(net.size()), -1);
  for (int i = 0; i < size(); ++i) {
    const int v = vertices_[i];
    if (v < 0 || v >= net.size()) throw std::invalid_argument("KilledLaplacian: bad vertex");
    if (local_[v] >= 0) throw std::invalid_argument("KilledLaplacian: duplicate vertex");
    local_[v] = i;
  }

  // Every component of the free set must leak to a killed vertex, otherwise
  // the operator is singular (the walk is never killed).
  std::vector<int> comp(vertices_.size(), -1);
  int nc = 0;
  for (int s = 0; s < size(); ++s) {
    if (comp[s] >= 0) continue;
    bool leaks = false;
    std::vector<int> stack{s};
    comp[s] = nc;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (const auto& a : net.arcs(vertices_[i])) {
        const int j = local_[a.to];
        if (j < 0) {
          leaks = true;
        } else if (comp[j] < 0) {
          comp[j] = nc;
          stack.push_back(j);
        }
      }
    }
    if (!leaks)
      throw std::invalid_argument(
          "KilledLaplacian: a component of the free set is never killed (singular system)");
    ++nc;
  }

  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < size(); ++i) {
    const int v = vertices_[i];
    trip.emplace_back(i, i, net.degree(v));
    for (const auto& a : net.arcs(v)) {
      const int j = local_[a.to];
      if (j >= 0) trip.emplace_back(i, j, -a.conductance);
    }
  }
  impl_->matrix.resize(size(), size());
  impl_->matrix.setFromTriplets(trip.begin(), trip.end());
  impl_->matrix.makeCompressed();

  kind_ = opts.kind;
  if (kind_ == SolverKind::Auto)
    kind_ = size() <= opts.direct_threshold ? SolverKind::SparseDirect
                                            : SolverKind::ConjugateGradient;
  switch (kind_) {
    case SolverKind::Dense:
      impl_->dense.compute(Eigen::MatrixXd(impl_->matrix));
      if (impl_->dense.info() != Eigen::Success) throw SolverFailure("dense Cholesky failed");
      break;
    case SolverKind::SparseDirect:
      impl_->sparse.compute(impl_->matrix);
      if (impl_->sparse.info() != Eigen::Success) throw SolverFailure("sparse LDLT failed");
      break;
    case SolverKind::ConjugateGradient:
      impl_->cg.setTolerance(opts.cg_tolerance);
      impl_->cg.setMaxIterations(std::max(1, opts.cg_max_iter_factor * size()));
      impl_->cg.compute(impl_->matrix);
      break;
    case SolverKind::Auto: break;
  }
}

KilledLaplacian::~KilledLaplacian() = default;
KilledLaplacian::KilledLaplacian(KilledLaplacian&&) noexcept = default;
KilledLaplacian& KilledLaplacian::operator=(KilledLaplacian&&) noexcept = default;

Eigen::VectorXd KilledLaplacian::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != size()) throw std::invalid_argument("KilledLaplacian::solve: size mismatch");
  if (size() == 0) return {};
  switch (kind_) {
    case SolverKind::Dense: return impl_->dense.solve(rhs);
    case SolverKind::SparseDirect: return impl_->sparse.solve(rhs);
    default: {
      Eigen::VectorXd x = impl_->cg.solve(rhs);
      if (impl_->cg.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "conjugate gradient did not converge after " << impl_->cg.iterations()
            << " iterations (error " << impl_->cg.error() << ")";
        throw SolverFailure(msg.str());
      }
      return x;
    }
  }
}

Eigen::MatrixXd KilledLaplacian::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd out(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) out.col(c) = solve(Eigen::VectorXd(rhs.col(c)));
  return out;
}

Eigen::VectorXd KilledLaplacian::apply(const Eigen::VectorXd& x) const { return impl_->matrix * x; }

}  // namespace mcrt
