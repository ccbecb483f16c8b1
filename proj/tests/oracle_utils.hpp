#pragma once
// Naive, self-contained reference implementations used to cross-check the
// library: Gaussian elimination with partial pivoting instead of Cholesky,
// Gauss-Jordan inversion, leave-one-out by literal retraining, and greedy
// selection by per-candidate retraining. Deliberately slow and sharing no
// linear-algebra code with the library.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grls/dataset.hpp"
#include "grls/loss.hpp"

namespace oracle {

using grls::Dataset;
using grls::Index;

inline double& at(std::vector<double>& a, std::size_t p, std::size_t r,
                  std::size_t c) {
  return a[r * p + c];
}

// Solves the p x p system A x = b by Gaussian elimination, partial pivoting.
inline std::vector<double> solve_dense(std::vector<double> a,
                                       std::vector<double> b) {
  const std::size_t p = b.size();
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(at(a, p, r, col)) > std::abs(at(a, p, piv, col))) piv = r;
    }
    if (std::abs(at(a, p, piv, col)) < 1e-300) {
      throw std::runtime_error("oracle solve: singular system");
    }
    if (piv != col) {
      for (std::size_t c = 0; c < p; ++c) {
        std::swap(at(a, p, piv, c), at(a, p, col, c));
      }
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = at(a, p, r, col) / at(a, p, col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < p; ++c) {
        at(a, p, r, c) -= f * at(a, p, col, c);
      }
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(p, 0.0);
  for (std::size_t r = p; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < p; ++c) s -= at(a, p, r, c) * x[c];
    x[r] = s / at(a, p, r, r);
  }
  return x;
}

// Inverts the p x p matrix A by Gauss-Jordan elimination, partial pivoting.
inline std::vector<double> invert_dense(std::vector<double> a, std::size_t p) {
  std::vector<double> inv(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) inv[i * p + i] = 1.0;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(at(a, p, r, col)) > std::abs(at(a, p, piv, col))) piv = r;
    }
    if (std::abs(at(a, p, piv, col)) < 1e-300) {
      throw std::runtime_error("oracle invert: singular matrix");
    }
    if (piv != col) {
      for (std::size_t c = 0; c < p; ++c) {
        std::swap(at(a, p, piv, c), at(a, p, col, c));
        std::swap(at(inv, p, piv, c), at(inv, p, col, c));
      }
    }
    const double d = at(a, p, col, col);
    for (std::size_t c = 0; c < p; ++c) {
      at(a, p, col, c) /= d;
      at(inv, p, col, c) /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = at(a, p, r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < p; ++c) {
        at(a, p, r, c) -= f * at(a, p, col, c);
        at(inv, p, r, c) -= f * at(inv, p, col, c);
      }
    }
  }
  return inv;
}

// (X_S X_S^T + lambda I) w = X_S y over the listed examples (primal form).
inline std::vector<double> ridge_weights_subset(
    const Dataset& data, const std::vector<int>& selected, double lambda,
    const std::vector<int>& examples) {
  const std::size_t p = selected.size();
  std::vector<double> a(p * p, 0.0);
  std::vector<double> b(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = r; c < p; ++c) {
      double s = 0.0;
      for (const int j : examples) {
        s += data.features(selected[r], j) * data.features(selected[c], j);
      }
      at(a, p, r, c) = s;
      at(a, p, c, r) = s;
    }
    at(a, p, r, r) += lambda;
    double sb = 0.0;
    for (const int j : examples) {
      sb += data.features(selected[r], j) * data.labels[j];
    }
    b[r] = sb;
  }
  return solve_dense(std::move(a), std::move(b));
}

inline std::vector<int> all_examples(const Dataset& data) {
  std::vector<int> idx(static_cast<std::size_t>(data.n_examples()));
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = static_cast<int>(j);
  return idx;
}

inline std::vector<double> ridge_weights(const Dataset& data,
                                         const std::vector<int>& selected,
                                         double lambda) {
  return ridge_weights_subset(data, selected, lambda, all_examples(data));
}

inline double predict_one(const Dataset& data,
                          const std::vector<int>& selected,
                          const std::vector<double>& w, int j) {
  double s = 0.0;
  for (std::size_t t = 0; t < selected.size(); ++t) {
    s += w[t] * data.features(selected[t], j);
  }
  return s;
}

// Leave-one-out predictions by retraining on the other m-1 examples, one
// full solve per held-out example.
inline std::vector<double> loo_values(const Dataset& data,
                                      const std::vector<int>& selected,
                                      double lambda) {
  const Index m = data.n_examples();
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  std::vector<int> keep;
  for (Index j = 0; j < m; ++j) {
    keep.clear();
    for (Index l = 0; l < m; ++l) {
      if (l != j) keep.push_back(static_cast<int>(l));
    }
    const auto w = ridge_weights_subset(data, selected, lambda, keep);
    out[static_cast<std::size_t>(j)] =
        predict_one(data, selected, w, static_cast<int>(j));
  }
  return out;
}

inline double loo_error(const Dataset& data, const std::vector<int>& selected,
                        double lambda, grls::Loss loss) {
  const auto loo = loo_values(data, selected, lambda);
  double err = 0.0;
  for (Index j = 0; j < data.n_examples(); ++j) {
    const double y = data.labels[j];
    const double p = loo[static_cast<std::size_t>(j)];
    if (loss == grls::Loss::squared) {
      err += (y - p) * (y - p);
    } else {
      err += y * p <= 0.0 ? 1.0 : 0.0;
    }
  }
  return err;
}

struct OracleStep {
  int feature;
  double error;
};

// Greedy forward selection scored by literal retraining; strict-minimum
// argmin, first (lowest-index) minimum wins.
inline std::vector<OracleStep> greedy_steps(const Dataset& data, double lambda,
                                            int k, grls::Loss loss) {
  const int n = static_cast<int>(data.n_features());
  const int k_eff = k < n ? k : n;
  std::vector<OracleStep> steps;
  std::vector<int> selected;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int round = 0; round < k_eff; ++round) {
    std::vector<int> cand = selected;
    cand.push_back(-1);
    bool found = false;
    int best_feature = -1;
    double best_error = 0.0;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      cand.back() = i;
      const double e = loo_error(data, cand, lambda, loss);
      if (!found || e < best_error) {
        found = true;
        best_feature = i;
        best_error = e;
      }
    }
    selected.push_back(best_feature);
    used[static_cast<std::size_t>(best_feature)] = 1;
    steps.push_back({best_feature, best_error});
  }
  return steps;
}

// m x m dual system matrix X_S^T X_S + lambda I as a dense row-major buffer.
inline std::vector<double> dual_system(const Dataset& data,
                                       const std::vector<int>& selected,
                                       double lambda) {
  const std::size_t m = static_cast<std::size_t>(data.n_examples());
  std::vector<double> a(m * m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = r; c < m; ++c) {
      double s = 0.0;
      for (const int i : selected) {
        s += data.features(i, static_cast<Index>(r)) *
             data.features(i, static_cast<Index>(c));
      }
      at(a, m, r, c) = s;
      at(a, m, c, r) = s;
    }
    at(a, m, r, r) += lambda;
  }
  return a;
}

// Random test instance: standard-normal features, labels either +/-1 coin
// flips (both classes forced present) or standard-normal regression targets.
inline Dataset random_instance(Index m, Index n, std::uint64_t seed,
                               bool binary_labels = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset data;
  data.features.resize(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) data.features(i, j) = gauss(rng);
  }
  data.labels.resize(m);
  if (binary_labels) {
    std::bernoulli_distribution coin(0.5);
    for (Index j = 0; j < m; ++j) data.labels[j] = coin(rng) ? 1.0 : -1.0;
    data.labels[0] = 1.0;
    if (m > 1) data.labels[1] = -1.0;
  } else {
    for (Index j = 0; j < m; ++j) data.labels[j] = gauss(rng);
  }
  return data;
}

}  // namespace oracle
