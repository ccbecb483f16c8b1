#include "grls/greedy.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#if defined(__linux__)
#include <sys/mman.h>
#endif

#include "grls/errors.hpp"
#include "validate.hpp"

namespace grls {

using detail::check_lambda;

namespace {

constexpr double kDenomEps = 1e-12;
// 4 KiB of doubles: pass-2 scratch stays in L1 alongside its operands.
constexpr Index kChunk = 64;

inline void prefetch(const double* p) {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_prefetch(p, 0, 0);
#else
  (void)p;
#endif
}

inline void prefetch_write(const double* p) {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_prefetch(p, 1, 0);
#else
  (void)p;
#endif
}

// Best-effort hint to back a large, about-to-be-filled buffer with
// transparent huge pages. A fresh 100 MB-scale allocation otherwise faults in
// as tens of thousands of 4 KiB pages, and those soft faults dominate the
// first pass over the buffer. The hint changes nothing about the values
// computed; failures are ignored.
void advise_huge_pages(const double* data, std::size_t bytes) {
#if defined(__linux__)
  constexpr std::size_t kMinBytes = std::size_t{4} << 20;
  if (bytes < kMinBytes) return;
  constexpr std::uintptr_t kPage = 4096;
  std::uintptr_t begin = reinterpret_cast<std::uintptr_t>(data);
  std::uintptr_t end = begin + bytes;
  begin = (begin + kPage - 1) & ~(kPage - 1);
  end &= ~(kPage - 1);
  if (end > begin) {
    (void)madvise(reinterpret_cast<void*>(begin), end - begin, MADV_HUGEPAGE);
  }
#else
  (void)data;
  (void)bytes;
#endif
}

struct CandidateScore {
  double error = 0.0;
  double denom = 0.0;
  double min_diag = 0.0;
  double va = 0.0;  // v . a for the scored candidate
};

// Chunk-level building blocks. Every path — sequential refresh, public
// scoring, and the pipelined greedy scan — is assembled from these, applied
// to the same kChunk-sized pieces in the same order, so the floating-point
// results are bit-identical no matter which driver or fusion produced them.
inline double chunk_dot(const double* v, const double* c, Index len) {
  Eigen::Map<const Eigen::ArrayXd> vv(v, len);
  Eigen::Map<const Eigen::ArrayXd> cc(c, len);
  return (vv * cc).sum();
}

inline void chunk_axpy(double* c, const double* u, double t, Index len) {
  Eigen::Map<Eigen::ArrayXd> cc(c, len);
  Eigen::Map<const Eigen::ArrayXd> uu(u, len);
  cc -= t * uu;
}

struct ScoreAccum {
  double err = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
};

// One chunk of the scoring pass: d~_j = d_j - c_j^2/denom, track its minimum,
// and accumulate the summed loss of the LOO predictions y_j - a~_j / d~_j
// with a~_j = a_j - c_j (va/denom).
inline void chunk_score(const double* c, const double* a, const double* d,
                        const double* y, Index len, Loss loss, double invden,
                        double beta, double* dbuf, ScoreAccum& acc) {
  Eigen::Map<const Eigen::ArrayXd> cc(c, len);
  Eigen::Map<const Eigen::ArrayXd> aa(a, len);
  Eigen::Map<const Eigen::ArrayXd> dd(d, len);
  Eigen::Map<Eigen::ArrayXd> dt(dbuf, len);
  dt = dd - cc.square() * invden;
  acc.dmin = std::min(acc.dmin, dt.minCoeff());
  if (loss == Loss::squared) {
    acc.err += ((aa - cc * beta) / dt).square().sum();
  } else {
    // With d~ > 0 and y in {-1,+1}, y*(y - a~/d~) <= 0 iff y*a~ >= d~.
    Eigen::Map<const Eigen::ArrayXd> yy(y, len);
    acc.err += static_cast<double>((yy * (aa - cc * beta) >= dt).count());
  }
}

// One chunk of a column's first touch: materialize the pristine cache value
// x/lambda and seed both inner products against it and the initial dual.
inline void chunk_first_touch(double* c, const double* x, const double* a0,
                              Index len, double lambda, double& pc,
                              double& pa) {
  Eigen::Map<const Eigen::ArrayXd> xx(x, len);
  Eigen::Map<Eigen::ArrayXd> cc(c, len);
  Eigen::Map<const Eigen::ArrayXd> aa(a0, len);
  cc = xx / lambda;
  pc += (xx * cc).sum();
  pa += (xx * aa).sum();
}

// Turns the two inner products of a candidate (vc = v.c, va = v.a) into its
// score. Returns early (error/min_diag zero) on a degenerate denominator;
// the caller raises.
CandidateScore finish_score(const double* c, const double* a, const double* d,
                            const double* y, Index m, Loss loss, double vc,
                            double va) {
  CandidateScore s;
  s.denom = 1.0 + vc;
  s.va = va;
  if (s.denom <= kDenomEps) return s;
  const double invden = 1.0 / s.denom;
  const double beta = va * invden;
  ScoreAccum acc;
  alignas(64) std::array<double, kChunk> dbuf;
  for (Index j0 = 0; j0 < m; j0 += kChunk) {
    const Index len = std::min(kChunk, m - j0);
    chunk_score(c + j0, a + j0, d + j0, y + j0, len, loss, invden, beta,
                dbuf.data(), acc);
  }
  s.error = acc.err;
  s.min_diag = acc.dmin;
  return s;
}

// Scores one candidate from scratch: accumulates v.c and v.a in a chunked
// pass with a prefetch two chunks ahead, then hands off to finish_score,
// whose pass re-reads the now-cached chunks.
CandidateScore score_candidate(const double* v, const double* c,
                               const double* a, const double* d,
                               const double* y, Index m, Loss loss) {
  double vc = 0.0;
  double va = 0.0;
  for (Index j0 = 0; j0 < m; j0 += kChunk) {
    const Index len = std::min(kChunk, m - j0);
    if (j0 + 2 * kChunk < m) {
      prefetch(v + j0 + 2 * kChunk);
      prefetch(c + j0 + 2 * kChunk);
    }
    vc += chunk_dot(v + j0, c + j0, len);
    va += chunk_dot(v + j0, a + j0, len);
  }
  return finish_score(c, a, d, y, m, loss, vc, va);
}

[[noreturn]] void raise_degenerate(const CandidateScore& s, int feature) {
  if (s.denom <= kDenomEps) {
    throw NumericalError("candidate evaluation: denominator 1 + v.c <= 1e-12 "
                         "for feature " +
                         std::to_string(feature));
  }
  throw NumericalError(
      "candidate evaluation: updated diagonal entry <= 0 for feature " +
      std::to_string(feature) +
      " (accumulated roundoff; rebuild the selection state)");
}

// Chunked dot v.c in the same fixed summation order as score_candidate; the
// write prefetch readies the column for the axpy that follows it.
double column_dot(const double* v, const double* c, Index m) {
  double vc = 0.0;
  for (Index j0 = 0; j0 < m; j0 += kChunk) {
    const Index len = std::min(kChunk, m - j0);
    if (j0 + 2 * kChunk < m) prefetch_write(c + j0 + 2 * kChunk);
    vc += chunk_dot(v + j0, c + j0, len);
  }
  return vc;
}

// c -= t * u, chunked like column_dot.
void column_axpy(double* c, const double* u, double t, Index m) {
  for (Index j0 = 0; j0 < m; j0 += kChunk) {
    const Index len = std::min(kChunk, m - j0);
    chunk_axpy(c + j0, u + j0, t, len);
  }
}

// One rank-one cache downdate of a single column: c <- c - (v . c) * u. The
// coefficient only involves the column itself, so columns can be downdated
// independently and in any order.
void downdate_column(double* c, const double* v, const double* u, Index m) {
  column_axpy(c, u, column_dot(v, c, m), m);
}

// Book-keeping that lets the selection drivers touch only the cache during a
// round. It defers three things.
//
// First, cache columns are materialized lazily: a column's first touch writes
// the pristine value x_i / lambda in the same pass that seeds its inner
// products, so the drivers never make a separate full-matrix fill before the
// first round.
//
// Second, committed rank-one cache downdates are queued (feature row v,
// update vector u, and the scalars 1/denom and (v.a)/denom of that round)
// and a column only absorbs them when it is next read, folding the downdate
// into the pass the scan already makes over the column. The greedy driver
// reads every live column once per round, so columns there are at most one
// round behind; the forced-order driver reads one column per round and
// replays all of its missed rounds at once. Replays apply the same kernels
// to the same values as an immediate downdate would, so every path yields
// bit-identical columns.
//
// Third, the per-candidate inner products vc_i = x_i . C(:,i) and
// va_i = x_i . a are maintained incrementally instead of recomputed. Since
// the matrix behind the cache is symmetric, x_i . u_r = t_r / denom_r for the
// downdate coefficient t_r = v_r . C(:,i) that the replay computes anyway,
// which gives exact one-multiply recurrences
//   vc_i <- vc_i - t_r^2 / denom_r,   va_i <- va_i - (v_r.a) t_r / denom_r.
// With them, a steady-state round streams each cache column exactly once
// (read + write back); the feature matrix is read only when a column is
// first touched. Versions: -1 = never touched (column not materialized,
// products not yet computed), otherwise the number of queued rounds the
// column has absorbed.
struct DeferredUpdates {
  std::vector<const double*> v;
  std::vector<Eigen::VectorXd> u;
  std::vector<double> inv_denom;
  std::vector<double> scale;  // (v.a) / denom of the committed round
  std::vector<int> version;
  std::vector<double> vc;
  std::vector<double> va;
  Eigen::VectorXd initial_dual;  // dual before any commit, for first touches
  double lambda;

  DeferredUpdates(Index n, const Eigen::VectorXd& dual0, double lambda_in)
      : version(static_cast<std::size_t>(n), -1),
        vc(static_cast<std::size_t>(n), 0.0),
        va(static_cast<std::size_t>(n), 0.0),
        initial_dual(dual0),
        lambda(lambda_in) {}

  void push(const double* feature_row, Eigen::VectorXd update, double inv,
            double va_times_inv) {
    v.push_back(feature_row);
    u.push_back(std::move(update));
    inv_denom.push_back(inv);
    scale.push_back(va_times_inv);
  }

  // Folds the replay coefficient t of queued round r into column i's
  // maintained inner products (the one-multiply recurrences above).
  void apply_scalars(std::size_t i, double t, std::size_t r) {
    va[i] -= scale[r] * t;
    vc[i] -= (t * t) * inv_denom[r];
  }

  // Brings column i (cache column c, feature row x) fully up to date: on
  // first touch materializes the pristine column and seeds vc/va against it
  // and the initial dual, then replays every queued round the column has
  // missed, oldest first, updating the column and both products together.
  void refresh(double* c, const double* x, Index m, int i) {
    int& seen = version[static_cast<std::size_t>(i)];
    const std::size_t idx = static_cast<std::size_t>(i);
    if (seen < 0) {
      double pc = 0.0;
      double pa = 0.0;
      const double* a0 = initial_dual.data();
      for (Index j0 = 0; j0 < m; j0 += kChunk) {
        const Index len = std::min(kChunk, m - j0);
        if (j0 + 2 * kChunk < m) {
          prefetch(x + j0 + 2 * kChunk);
          prefetch_write(c + j0 + 2 * kChunk);
        }
        chunk_first_touch(c + j0, x + j0, a0 + j0, len, lambda, pc, pa);
      }
      vc[idx] = pc;
      va[idx] = pa;
      seen = 0;
    }
    const int total = static_cast<int>(u.size());
    for (; seen < total; ++seen) {
      const std::size_t r = static_cast<std::size_t>(seen);
      const double t = column_dot(v[r], c, m);
      apply_scalars(idx, t, r);
      column_axpy(c, u[r].data(), t, m);
    }
  }
};

// Raw pointers for one scan round inside a selection driver. The cache
// pointer is mutable because the scan writes refreshed columns back; threaded
// scans stay race-free since each column belongs to exactly one index range.
struct ScanContext {
  const double* x;  // feature matrix, rows contiguous, row stride m
  double* cache;    // cache matrix, columns contiguous, column stride m
  const double* a;
  const double* d;
  const double* y;
  Index m;
  DeferredUpdates* pending;
};

ScanContext make_context(SelectionState& state, const Dataset& data,
                         DeferredUpdates& pending) {
  return {data.features.data(), state.cache.data(), state.dual.data(),
          state.diag.data(),    data.labels.data(), data.n_examples(),
          &pending};
}

// Scores one candidate of an externally maintained state (no deferred work).
CandidateScore score_state_column(const SelectionState& state,
                                  const Dataset& data, int i, Loss loss) {
  const std::size_t off = static_cast<std::size_t>(i) *
                          static_cast<std::size_t>(data.n_examples());
  return score_candidate(data.features.data() + off, state.cache.data() + off,
                         state.dual.data(), state.diag.data(),
                         data.labels.data(), data.n_examples(), loss);
}

struct BestCandidate {
  bool found = false;
  int feature = -1;
  double error = 0.0;
  double denom = 0.0;
  double va = 0.0;
};

// Stage-A result for one column of the pipelined scan: whether stage B still
// has to fold the newest queued downdate in, and with what coefficient.
struct StageA {
  double t = 0.0;
  bool fold = false;
};

// Brings column i's bookkeeping inputs current. In the steady greedy state
// (exactly one round behind) this only computes the replay coefficient and
// leaves the fold to stage B; every other state — first touch, already
// current, or an arbitrary backlog — is finished here via the sequential
// refresh.
StageA stage_a(const ScanContext& p, int i) {
  DeferredUpdates& pend = *p.pending;
  const int total = static_cast<int>(pend.u.size());
  const std::size_t idx = static_cast<std::size_t>(i);
  const std::size_t off = idx * static_cast<std::size_t>(p.m);
  StageA a;
  const int ver = pend.version[idx];
  if (ver == total) return a;
  if (ver >= 0 && ver == total - 1) {
    a.t = column_dot(pend.v[static_cast<std::size_t>(ver)], p.cache + off, p.m);
    a.fold = true;
    return a;
  }
  pend.refresh(p.cache + off, p.x + off, p.m, i);
  return a;
}

// Stage B for column cur: fold its outstanding downdate (if stage A left
// one), then score it — and in the same chunked pass run stage A for the
// following column, so the next column's memory stream overlaps with this
// column's arithmetic instead of waiting for it. All work is built from the
// shared chunk primitives in the same order as the sequential path, so the
// values are identical; only the instruction scheduling differs.
CandidateScore stage_b(const ScanContext& p, int cur, const StageA& acur,
                       int nxt, StageA* anxt, Loss loss) {
  DeferredUpdates& pend = *p.pending;
  const Index m = p.m;
  const int total = static_cast<int>(pend.u.size());
  const std::size_t icur = static_cast<std::size_t>(cur);
  double* c = p.cache + icur * static_cast<std::size_t>(m);
  const double* u_last = nullptr;
  if (acur.fold) {
    pend.apply_scalars(icur, acur.t, static_cast<std::size_t>(total - 1));
    pend.version[icur] = total;
    u_last = pend.u[static_cast<std::size_t>(total - 1)].data();
  }
  CandidateScore s;
  s.denom = 1.0 + pend.vc[icur];
  s.va = pend.va[icur];
  if (s.denom <= kDenomEps) return s;  // caller raises; selection aborts
  const double invden = 1.0 / s.denom;
  const double beta = s.va * invden;

  // Classify the next column's stage-A flavor. First touches only happen
  // while no downdates are queued (the greedy first round); later rounds see
  // every live column exactly one behind. Anything else falls back to the
  // sequential refresh after this pass.
  enum class Nxt { none, dot, first, general };
  Nxt mode = Nxt::none;
  double* cn = nullptr;
  const double* xn = nullptr;
  const double* vl = nullptr;
  if (nxt >= 0) {
    const std::size_t inxt = static_cast<std::size_t>(nxt);
    const std::size_t offn = inxt * static_cast<std::size_t>(m);
    cn = p.cache + offn;
    xn = p.x + offn;
    const int vern = pend.version[inxt];
    if (vern >= 0 && vern == total - 1) {
      mode = Nxt::dot;
      vl = pend.v[static_cast<std::size_t>(total - 1)];
    } else if (vern < 0 && total == 0) {
      mode = Nxt::first;
    } else if (vern != total) {
      mode = Nxt::general;
    }
  }

  double tn = 0.0;
  double pc = 0.0;
  double pa = 0.0;
  ScoreAccum acc;
  alignas(64) std::array<double, kChunk> dbuf;
  for (Index j0 = 0; j0 < m; j0 += kChunk) {
    const Index len = std::min(kChunk, m - j0);
    if (acur.fold) chunk_axpy(c + j0, u_last + j0, acur.t, len);
    chunk_score(c + j0, p.a + j0, p.d + j0, p.y + j0, len, loss, invden, beta,
                dbuf.data(), acc);
    if (mode == Nxt::dot) {
      if (j0 + 2 * kChunk < m) prefetch_write(cn + j0 + 2 * kChunk);
      tn += chunk_dot(vl + j0, cn + j0, len);
    } else if (mode == Nxt::first) {
      if (j0 + 2 * kChunk < m) {
        prefetch(xn + j0 + 2 * kChunk);
        prefetch_write(cn + j0 + 2 * kChunk);
      }
      chunk_first_touch(cn + j0, xn + j0, pend.initial_dual.data() + j0, len,
                        pend.lambda, pc, pa);
    }
  }
  s.error = acc.err;
  s.min_diag = acc.dmin;

  if (anxt != nullptr && nxt >= 0) {
    *anxt = StageA{};
    if (mode == Nxt::dot) {
      anxt->t = tn;
      anxt->fold = true;
    } else if (mode == Nxt::first) {
      const std::size_t inxt = static_cast<std::size_t>(nxt);
      pend.vc[inxt] = pc;
      pend.va[inxt] = pa;
      pend.version[inxt] = 0;
    } else if (mode == Nxt::general) {
      *anxt = stage_a(p, nxt);
    }
  }
  return s;
}

// Scans candidate indices [begin, end) and returns the tie-break winner: the
// lowest-indexed candidate with the smallest error. Forward scans keep the
// first strict minimum; reversed scans walk high to low and let equal errors
// replace, which ends on the same lowest index. The greedy driver alternates
// direction each round so that the columns a round touches last — still
// cache-resident — are the ones the next round touches first. Throws on the
// first degenerate candidate encountered in scan order; which degenerate
// candidate raises can depend on direction, but any of them aborts the same
// selection.
BestCandidate scan_range(const ScanContext& p, const std::vector<char>& used,
                         int begin, int end, Loss loss, bool reversed) {
  BestCandidate best;
  const int step = reversed ? -1 : 1;
  const auto next_unused = [&](int i) {
    for (i += step; i >= begin && i < end; i += step) {
      if (!used[static_cast<std::size_t>(i)]) return i;
    }
    return -1;
  };
  int cur = next_unused(reversed ? end : begin - 1);
  if (cur < 0) return best;
  StageA a = stage_a(p, cur);
  while (cur >= 0) {
    const int nxt = next_unused(cur);
    StageA anxt;
    const CandidateScore s = stage_b(p, cur, a, nxt, &anxt, loss);
    if (s.denom <= kDenomEps || s.min_diag <= 0.0) raise_degenerate(s, cur);
    const bool take = !best.found || (reversed ? s.error <= best.error
                                               : s.error < best.error);
    if (take) {
      best.found = true;
      best.feature = cur;
      best.error = s.error;
      best.denom = s.denom;
      best.va = s.va;
    }
    cur = nxt;
    a = anxt;
  }
  return best;
}

// Deterministic parallel argmin: contiguous index ranges, one per thread,
// each scanned in the round's direction and merged in that same direction
// with the matching tie rule, so the result equals the serial scan at any
// thread count. Refreshes and product updates are per-column work, so
// splitting the range does not change them either.
BestCandidate find_best(const ScanContext& p, const std::vector<char>& used,
                        int n, Loss loss, int threads, bool reversed) {
  if (threads <= 1 || n < 2 * threads) {
    return scan_range(p, used, 0, n, loss, reversed);
  }
  const int parts = threads;
  std::vector<BestCandidate> results(static_cast<std::size_t>(parts));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(parts));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(parts));
  for (int t = 0; t < parts; ++t) {
    const int begin = static_cast<int>((static_cast<long>(n) * t) / parts);
    const int end = static_cast<int>((static_cast<long>(n) * (t + 1)) / parts);
    workers.emplace_back([&, begin, end, t] {
      try {
        results[static_cast<std::size_t>(t)] =
            scan_range(p, used, begin, end, loss, reversed);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  BestCandidate best;
  for (int t = 0; t < parts; ++t) {
    const BestCandidate& r =
        results[static_cast<std::size_t>(reversed ? parts - 1 - t : t)];
    if (!r.found) continue;
    const bool take =
        !best.found || (reversed ? r.error <= best.error : r.error < best.error);
    if (take) best = r;
  }
  return best;
}

// O(m) bookkeeping of a commit, shared by every path: the dual and diagonal
// updates read the newly selected feature's cache column, so this must run
// while that column is still up to date and not yet downdated. vta is the
// committed candidate's v.a inner product.
void commit_scalars(SelectionState& state, int b, double vta,
                    const Eigen::VectorXd& u) {
  state.diag -= u.cwiseProduct(state.cache.col(b));
  state.dual -= vta * u;
  state.selected.push_back(b);
}

void check_state_shapes(const SelectionState& state, const Dataset& data) {
  const Index m = data.n_examples();
  const Index n = data.n_features();
  if (state.dual.size() != m || state.diag.size() != m ||
      state.cache.rows() != m || state.cache.cols() != n) {
    throw DataError("selection state does not match the dataset's shape");
  }
}

void check_drift(const SelectionState& state, const Dataset& data) {
  const auto [model, solution] = train_dual(data, state.selected, state.lambda);
  const double dual_gap =
      (state.dual - solution.dual).cwiseAbs().maxCoeff();
  const double diag_gap =
      (state.diag - solution.g_diag).cwiseAbs().maxCoeff();
  if (dual_gap > 1e-6 || diag_gap > 1e-6) {
    throw NumericalError(
        "greedy selection state drifted from the from-scratch solution "
        "(dual gap " +
        std::to_string(dual_gap) + ", diagonal gap " +
        std::to_string(diag_gap) + ")");
  }
}

void notify(const StepObserver& observer, const SelectionState& state,
            const Dataset& data, int step, int feature, double error) {
  if (!observer) return;
  const Eigen::VectorXd weights = state_weights(state, data);
  const Eigen::VectorXd loo = state_loo_values(state, data.labels);
  observer(StepInfo{step, feature, error, state.selected, weights, loo});
}

// Everything of the initial state except the cache contents. The selection
// drivers stop here and let DeferredUpdates materialize columns on first
// touch; init_state fills the cache eagerly for external callers.
SelectionState make_state(const Dataset& data, double lambda) {
  data.validate();
  check_lambda(lambda);
  SelectionState state;
  state.lambda = lambda;
  const Index m = data.n_examples();
  const Index n = data.n_features();
  state.dual = data.labels / lambda;
  state.diag = Eigen::VectorXd::Constant(m, 1.0 / lambda);
  state.cache.resize(m, n);
  advise_huge_pages(state.cache.data(),
                    sizeof(double) * static_cast<std::size_t>(m) *
                        static_cast<std::size_t>(n));
  return state;
}

}  // namespace

SelectionState init_state(const Dataset& data, double lambda) {
  SelectionState state = make_state(data, lambda);
  // The transpose of the row-major n x m feature matrix has the same memory
  // layout as a column-major m x n matrix, so C = X^T / lambda is one
  // elementwise pass.
  state.cache = Eigen::Map<const Eigen::MatrixXd>(
                    data.features.data(), data.n_examples(),
                    data.n_features()) /
                lambda;
  return state;
}

CandidateEval evaluate_candidate(const SelectionState& state,
                                 const Dataset& data, int feature, Loss loss) {
  check_state_shapes(state, data);
  if (feature < 0 || feature >= data.n_features()) {
    throw DataError("evaluate_candidate: feature index " +
                    std::to_string(feature) + " out of range");
  }
  for (const int i : state.selected) {
    if (i == feature) {
      throw DataError("evaluate_candidate: feature " + std::to_string(feature) +
                      " is already selected");
    }
  }
  if (loss == Loss::zero_one) require_binary_labels(data.labels);
  const CandidateScore s = score_state_column(state, data, feature, loss);
  if (s.denom <= kDenomEps || s.min_diag <= 0.0) raise_degenerate(s, feature);
  CandidateEval eval;
  eval.error = s.error;
  eval.u = state.cache.col(feature) / s.denom;
  return eval;
}

void commit_feature(SelectionState& state, const Dataset& data, int b,
                    const Eigen::VectorXd& u) {
  check_state_shapes(state, data);
  if (b < 0 || b >= data.n_features()) {
    throw DataError("commit_feature: feature index " + std::to_string(b) +
                    " out of range");
  }
  for (const int i : state.selected) {
    if (i == b) {
      throw DataError("commit_feature: feature " + std::to_string(b) +
                      " is already selected");
    }
  }
  if (u.size() != state.dual.size()) {
    throw DataError("commit_feature: update vector has wrong length");
  }
  const Index m = data.n_examples();
  const Index n = data.n_features();
  const double* v = data.features.data() +
                    static_cast<std::size_t>(b) * static_cast<std::size_t>(m);
  const Eigen::Map<const Eigen::VectorXd> vmap(v, m);
  // Reads cache column b, so it must precede the downdate below.
  commit_scalars(state, b, vmap.dot(state.dual), u);
  // One fused read+write pass over the cache instead of a separate t = C^T v
  // product followed by the rank-one update C -= u t^T.
  double* cache = state.cache.data();
  for (Index i = 0; i < n; ++i) {
    if (i + 1 < n) {
      prefetch_write(cache + static_cast<std::size_t>(i + 1) *
                                 static_cast<std::size_t>(m));
    }
    downdate_column(
        cache + static_cast<std::size_t>(i) * static_cast<std::size_t>(m), v,
        u.data(), m);
  }
}

Eigen::VectorXd state_weights(const SelectionState& state,
                              const Dataset& data) {
  if (state.selected.empty()) return Eigen::VectorXd();
  return select_feature_rows(data.features, state.selected) * state.dual;
}

Eigen::VectorXd state_loo_values(const SelectionState& state,
                                 const Eigen::VectorXd& labels) {
  if (labels.size() != state.dual.size()) {
    throw DataError("state_loo_values: label length mismatch");
  }
  for (Index j = 0; j < state.diag.size(); ++j) {
    if (state.diag[j] <= 0.0) {
      throw NumericalError(
          "state_loo_values: non-positive diagonal entry at example " +
          std::to_string(j));
    }
  }
  return labels - state.dual.cwiseQuotient(state.diag);
}

SelectionTrace select_greedy(const Dataset& data, double lambda, int k,
                             Loss loss, const GreedyOptions& options,
                             const StepObserver& observer) {
  data.validate();
  check_lambda(lambda);
  if (k < 1) throw DataError("select_greedy: k must be at least 1");
  if (options.threads < 1) {
    throw DataError("select_greedy: thread count must be at least 1");
  }
  if (options.debug_recompute_interval < 0) {
    throw DataError("select_greedy: recompute interval must be >= 0");
  }
  if (loss == Loss::zero_one) require_binary_labels(data.labels);
  const int n = static_cast<int>(data.n_features());
  const int k_eff = std::min(k, n);
  const Index m = data.n_examples();

  SelectionState state = make_state(data, lambda);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  DeferredUpdates pending(data.n_features(), state.dual, lambda);
  SelectionTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(k_eff));
  for (int step = 0; step < k_eff; ++step) {
    const ScanContext ctx = make_context(state, data, pending);
    const BestCandidate best =
        find_best(ctx, used, n, loss, options.threads, (step & 1) != 0);
    // k_eff <= n guarantees an unselected candidate exists. The scan just
    // refreshed the winner's column, so u and the O(m) commit read current
    // values; the cache-wide downdate is deferred into the next round's scan.
    Eigen::VectorXd u = state.cache.col(best.feature) / best.denom;
    commit_scalars(state, best.feature, best.va, u);
    const double inv = 1.0 / best.denom;
    pending.push(data.features.data() + static_cast<std::size_t>(best.feature) *
                                            static_cast<std::size_t>(m),
                 std::move(u), inv, best.va * inv);
    used[static_cast<std::size_t>(best.feature)] = 1;
    trace.steps.push_back({best.feature, best.error});
    if (options.debug_recompute_interval > 0 &&
        (step + 1) % options.debug_recompute_interval == 0) {
      check_drift(state, data);
    }
    notify(observer, state, data, step, best.feature, best.error);
  }
  trace.model.selected = state.selected;
  trace.model.weights = state_weights(state, data);
  trace.model.lambda = lambda;
  return trace;
}

SelectionTrace select_forced_order(const Dataset& data, double lambda,
                                   const std::vector<int>& order, Loss loss,
                                   const StepObserver& observer) {
  data.validate();
  check_lambda(lambda);
  detail::check_selected(data, order, /*allow_empty=*/true);
  if (loss == Loss::zero_one) require_binary_labels(data.labels);
  const Index m = data.n_examples();

  SelectionState state = make_state(data, lambda);
  DeferredUpdates pending(data.n_features(), state.dual, lambda);
  SelectionTrace trace;
  trace.steps.reserve(order.size());
  for (std::size_t step = 0; step < order.size(); ++step) {
    const int i = order[step];
    const std::size_t off = static_cast<std::size_t>(i) *
                            static_cast<std::size_t>(m);
    double* c = state.cache.data() + off;
    const double* x = data.features.data() + off;
    pending.refresh(c, x, m, i);
    const CandidateScore s =
        finish_score(c, state.dual.data(), state.diag.data(),
                     data.labels.data(), m, loss,
                     pending.vc[static_cast<std::size_t>(i)],
                     pending.va[static_cast<std::size_t>(i)]);
    if (s.denom <= kDenomEps || s.min_diag <= 0.0) raise_degenerate(s, i);
    Eigen::VectorXd u = state.cache.col(i) / s.denom;
    commit_scalars(state, i, s.va, u);
    const double inv = 1.0 / s.denom;
    pending.push(x, std::move(u), inv, s.va * inv);
    trace.steps.push_back({i, s.error});
    notify(observer, state, data, static_cast<int>(step), i, s.error);
  }
  trace.model.selected = state.selected;
  trace.model.weights = state_weights(state, data);
  trace.model.lambda = lambda;
  return trace;
}

}  // namespace grls
