#ifndef CORNERFLOW_TENSOR_HPP_
#define CORNERFLOW_TENSOR_HPP_

#include <vector>

#include "cornerflow/metric.hpp"

namespace cornerflow {

/// Dense covariant tensor of rank 2, 3 or 4 on an (n+1)-dimensional chart.
/// Declared symmetries are enforced by writing the same double into every
/// symmetric slot, so they hold bit-exactly.
class SymTensor {
 public:
  enum class Symmetry {
    kNone,
    kSymmetric,       // rank 2: T_ij = T_ji
    kLowerPair,       // rank 3: T^k_{ij} = T^k_{ji}, stored (k, i, j)
    kRiemann,         // rank 4: antisymmetric pairs + pair interchange
  };

  SymTensor(int rank, int N, Symmetry sym);

  int rank() const { return rank_; }
  int N() const { return N_; }
  Symmetry symmetry() const { return sym_; }

  double& at(int i, int j);
  double at(int i, int j) const;
  double& at(int i, int j, int k);
  double at(int i, int j, int k) const;
  double& at(int i, int j, int k, int l);
  double at(int i, int j, int k, int l) const;

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  static SymTensor from_matrix(const Mat& m);
  Mat to_matrix() const;  // rank 2 only

 private:
  int rank_, N_;
  Symmetry sym_;
  std::vector<double> a_;
};

/// |T|_g: every slot contracted with the inverse metric, square root.
/// Zero iff T vanishes; for T = g the value is sqrt(n+1).
double g_norm(const SymTensor& T, const Mat& g_inv);

/// Convenience overload evaluating g^{-1} at p.
double g_norm(const SymTensor& T, const AdmissibleMetric& m, const PolarPoint& p);

}  // namespace cornerflow

#endif  // CORNERFLOW_TENSOR_HPP_
