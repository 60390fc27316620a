#pragma once

#include <string>
#include <vector>

#include "retrieveall/adapter.hpp"
#include "retrieveall/linalg.hpp"
#include "retrieveall/router.hpp"

namespace retrieveall {

/// Frozen weights of one adapted sub-module.
struct BaseModel {
  MatrixF W0;  // d x d
  int dim = 0;
};

BaseModel make_base_model(MatrixF W0);

/// b sequences of l positions with d features, stored as a (b*l) x d row-major
/// matrix; row(i, t) is sample i, position t.
struct BatchTensor {
  int batch = 0;
  int seq_len = 0;
  int dim = 0;
  MatrixF data;

  static BatchTensor zeros(int batch, int seq_len, int dim);

  Eigen::Ref<MatrixF> sample_rows(int i) { return data.middleRows(i * seq_len, seq_len); }
  Eigen::Ref<const MatrixF> sample_rows(int i) const {
    return data.middleRows(i * seq_len, seq_len);
  }
  float& at(int i, int t, int j) { return data(i * seq_len + t, j); }
  float at(int i, int t, int j) const { return data(i * seq_len + t, j); }
};

/// Deduplicated adapter set plus the one-hot sample->adapter mapping.
struct BatchPlan {
  int batch_size = 0;                 // b
  std::vector<LoraAdapter> adapters;  // p unique adapters, first-appearance order
  std::vector<int> assignment;        // size b; assignment[i] indexes adapters
  MatrixF mapping;                    // b x p, one-hot rows

  int unique_count() const noexcept { return static_cast<int>(adapters.size()); }
};

/// Merges the decisions' adapters into a unique set (p <= b) and builds the
/// mapping matrix. Throws PlanError on an empty batch, AdapterMissing when a
/// decision does not resolve, DimensionMismatch on inconsistent adapter dims.
BatchPlan plan_batch(const std::vector<RoutingDecision>& decisions, const AdapterPool& pool);

/// The batched delta term: for each sample i and position t,
/// (scale/rank) * B_{m(i)} (A_{m(i)} x[i][t]), executed as one GEMM pair per
/// adapter group rather than a per-sample loop.
BatchTensor batched_delta(const BatchPlan& plan, const BatchTensor& x);

/// Full adapted forward: Y[i][t] = W0 x[i][t] + delta[i][t].
BatchTensor forward(const BaseModel& base, const BatchPlan& plan, const BatchTensor& x);

/// Reference path: loops samples, swaps in one adapter at a time, applies the
/// single-input formula per position. Used for equivalence tests and as the
/// benchmark baseline.
BatchTensor sequential_oracle(const BaseModel& base, const std::vector<RoutingDecision>& decisions,
                              const AdapterPool& pool, const BatchTensor& x);

}  // namespace retrieveall
