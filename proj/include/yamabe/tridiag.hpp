#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace yamabe {

// Symmetric tridiagonal matrix: diag d[0..m-1], off-diagonal e[0..m-2].
struct SymTridiag {
  std::vector<double> d;
  std::vector<double> e;

  int size() const { return static_cast<int>(d.size()); }

  void matvec(const std::vector<double>& x, std::vector<double>& y) const {
    int m = size();
    y.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
      double s = d[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
      if (i > 0) s += e[static_cast<size_t>(i - 1)] * x[static_cast<size_t>(i - 1)];
      if (i + 1 < m) s += e[static_cast<size_t>(i)] * x[static_cast<size_t>(i + 1)];
      y[static_cast<size_t>(i)] = s;
    }
  }

  double quad_form(const std::vector<double>& x) const {
    int m = size();
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += d[static_cast<size_t>(i)] * x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) s += 2.0 * e[static_cast<size_t>(i)] * x[static_cast<size_t>(i)] * x[static_cast<size_t>(i + 1)];
    return s;
  }
};

// LDL^T factorization of a symmetric tridiagonal matrix. positive_definite
// reports whether all pivots were strictly positive.
struct TridiagLDLT {
  std::vector<double> dfac;  // pivots
  std::vector<double> lfac;  // subdiagonal multipliers
  bool positive_definite = false;

  static TridiagLDLT factor(const SymTridiag& a) {
    int m = a.size();
    TridiagLDLT f;
    f.dfac.resize(static_cast<size_t>(m));
    f.lfac.resize(m > 0 ? static_cast<size_t>(m - 1) : 0);
    f.positive_definite = true;
    double prev = 0.0;
    for (int i = 0; i < m; ++i) {
      double di = a.d[static_cast<size_t>(i)];
      if (i > 0) di -= a.e[static_cast<size_t>(i - 1)] * a.e[static_cast<size_t>(i - 1)] / prev;
      if (!(di > 0.0)) {
        f.positive_definite = false;
        di = (di == 0.0) ? 1e-300 : di;
      }
      f.dfac[static_cast<size_t>(i)] = di;
      if (i + 1 < m) f.lfac[static_cast<size_t>(i)] = a.e[static_cast<size_t>(i)] / di;
      prev = di;
    }
    return f;
  }

  void solve(const std::vector<double>& b, std::vector<double>& x) const {
    int m = static_cast<int>(dfac.size());
    x = b;
    for (int i = 1; i < m; ++i) x[static_cast<size_t>(i)] -= lfac[static_cast<size_t>(i - 1)] * x[static_cast<size_t>(i - 1)];
    for (int i = 0; i < m; ++i) x[static_cast<size_t>(i)] /= dfac[static_cast<size_t>(i)];
    for (int i = m - 2; i >= 0; --i) x[static_cast<size_t>(i)] -= lfac[static_cast<size_t>(i)] * x[static_cast<size_t>(i + 1)];
  }
};

}  // namespace yamabe
