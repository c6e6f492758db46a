#include "cornerflow/tensor.hpp"

#include <cmath>

namespace cornerflow {

SymTensor::SymTensor(int rank, int N, Symmetry sym)
    : rank_(rank), N_(N), sym_(sym) {
  if (rank < 2 || rank > 4) throw domain_error("tensor rank must be 2, 3 or 4");
  int sz = 1;
  for (int r = 0; r < rank; ++r) sz *= N;
  a_.assign(sz, 0.0);
}

double& SymTensor::at(int i, int j) { return a_[i * N_ + j]; }
double SymTensor::at(int i, int j) const { return a_[i * N_ + j]; }
double& SymTensor::at(int i, int j, int k) { return a_[(i * N_ + j) * N_ + k]; }
double SymTensor::at(int i, int j, int k) const {
  return a_[(i * N_ + j) * N_ + k];
}
double& SymTensor::at(int i, int j, int k, int l) {
  return a_[((i * N_ + j) * N_ + k) * N_ + l];
}
double SymTensor::at(int i, int j, int k, int l) const {
  return a_[((i * N_ + j) * N_ + k) * N_ + l];
}

SymTensor SymTensor::from_matrix(const Mat& m) {
  SymTensor t(2, static_cast<int>(m.rows()), Symmetry::kSymmetric);
  for (int i = 0; i < t.N(); ++i)
    for (int j = 0; j < t.N(); ++j) t.at(i, j) = m(i, j);
  return t;
}

Mat SymTensor::to_matrix() const {
  if (rank_ != 2) throw domain_error("to_matrix requires rank 2");
  Mat m(N_, N_);
  for (int i = 0; i < N_; ++i)
    for (int j = 0; j < N_; ++j) m(i, j) = at(i, j);
  return m;
}

double g_norm(const SymTensor& T, const Mat& gi) {
  const int N = T.N();
  double acc = 0.0;
  switch (T.rank()) {
    case 2:
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l)
              acc += gi(i, k) * gi(j, l) * T.at(i, j) * T.at(k, l);
      break;
    case 3:
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            for (int p = 0; p < N; ++p)
              for (int q = 0; q < N; ++q)
                for (int r = 0; r < N; ++r)
                  acc += gi(i, p) * gi(j, q) * gi(k, r) * T.at(i, j, k) *
                         T.at(p, q, r);
      break;
    case 4: {
      // Contract pairwise to keep the loop nest shallow: A = gi T gi per
      // leading index pair, then trace against T.
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l) {
              double lifted = 0.0;
              for (int p = 0; p < N; ++p)
                for (int q = 0; q < N; ++q)
                  for (int r = 0; r < N; ++r)
                    for (int s = 0; s < N; ++s)
                      lifted += gi(i, p) * gi(j, q) * gi(k, r) * gi(l, s) *
                                T.at(p, q, r, s);
              acc += lifted * T.at(i, j, k, l);
            }
      break;
    }
  }
  // Guard tiny negative values from roundoff.
  return std::sqrt(std::max(acc, 0.0));
}

double g_norm(const SymTensor& T, const AdmissibleMetric& m, const PolarPoint& p) {
  return g_norm(T, m.metric_inverse(p));
}

}  // namespace cornerflow
