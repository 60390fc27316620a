#include "retrieveall/batch.hpp"

#include <map>
#include <string>

#include "retrieveall/errors.hpp"

namespace retrieveall {

namespace {

const LoraAdapter& resolve_decision(const RoutingDecision& decision, const AdapterPool& pool) {
  if (!decision.adapter_id.empty()) {
    if (const LoraAdapter* a = pool.find_id(decision.adapter_id)) {
      return *a;
    }
    throw AdapterMissing(decision.language,
                         "decision names adapter '" + decision.adapter_id + "' not in pool");
  }
  return pool.lookup(decision.language);
}

void check_batch_shape(const BatchTensor& x, int batch, int dim, const char* what) {
  if (x.batch != batch) {
    throw ShapeMismatch(std::string(what) + ": batch " + std::to_string(x.batch) + " != plan b " +
                        std::to_string(batch));
  }
  if (x.dim != dim) {
    throw ShapeMismatch(std::string(what) + ": feature dim " + std::to_string(x.dim) + " != " +
                        std::to_string(dim));
  }
  if (x.seq_len < 1) {
    throw ShapeMismatch(std::string(what) + ": seq_len must be >= 1");
  }
  if (x.data.rows() != static_cast<Eigen::Index>(x.batch) * x.seq_len ||
      x.data.cols() != x.dim) {
    throw ShapeMismatch(std::string(what) + ": tensor storage inconsistent with shape");
  }
}

// Shared double-precision delta so batched_delta and forward round to float
// exactly once.
MatrixD delta_f64(const BatchPlan& plan, const MatrixD& xd, int seq_len, int dim) {
  MatrixD out = MatrixD::Zero(xd.rows(), dim);
  for (int g = 0; g < plan.unique_count(); ++g) {
    std::vector<int> members;
    for (int i = 0; i < plan.batch_size; ++i) {
      if (plan.assignment[static_cast<std::size_t>(i)] == g) members.push_back(i);
    }
    if (members.empty()) continue;
    const LoraAdapter& adapter = plan.adapters[static_cast<std::size_t>(g)];
    const Eigen::Index rows = static_cast<Eigen::Index>(members.size()) * seq_len;
    MatrixD gathered(rows, dim);
    for (std::size_t m = 0; m < members.size(); ++m) {
      gathered.middleRows(static_cast<Eigen::Index>(m) * seq_len, seq_len) =
          xd.middleRows(static_cast<Eigen::Index>(members[m]) * seq_len, seq_len);
    }
    const MatrixD a = adapter.A.cast<double>();
    const MatrixD b = adapter.B.cast<double>();
    const double s = static_cast<double>(adapter.scale) / adapter.rank;
    const MatrixD delta = ((gathered * a.transpose()) * b.transpose()) * s;
    for (std::size_t m = 0; m < members.size(); ++m) {
      out.middleRows(static_cast<Eigen::Index>(members[m]) * seq_len, seq_len) =
          delta.middleRows(static_cast<Eigen::Index>(m) * seq_len, seq_len);
    }
  }
  return out;
}

}  // namespace

BaseModel make_base_model(MatrixF W0) {
  if (W0.rows() != W0.cols() || W0.rows() < 1) {
    throw DimensionMismatch("base model W0 must be square and non-empty");
  }
  require_finite(W0, "base model W0");
  BaseModel base;
  base.dim = static_cast<int>(W0.rows());
  base.W0 = std::move(W0);
  return base;
}

BatchTensor BatchTensor::zeros(int batch, int seq_len, int dim) {
  if (batch < 1 || seq_len < 1 || dim < 1) {
    throw ShapeMismatch("batch tensor dimensions must be >= 1");
  }
  BatchTensor t;
  t.batch = batch;
  t.seq_len = seq_len;
  t.dim = dim;
  t.data = MatrixF::Zero(static_cast<Eigen::Index>(batch) * seq_len, dim);
  return t;
}

BatchPlan plan_batch(const std::vector<RoutingDecision>& decisions, const AdapterPool& pool) {
  if (decisions.empty()) {
    throw PlanError("empty batch");
  }
  BatchPlan plan;
  plan.batch_size = static_cast<int>(decisions.size());
  std::map<std::string, int> slot_by_id;
  for (const auto& decision : decisions) {
    const LoraAdapter& adapter = resolve_decision(decision, pool);
    auto [it, inserted] = slot_by_id.emplace(adapter.id, plan.unique_count());
    if (inserted) {
      if (!plan.adapters.empty() && adapter.dim != plan.adapters.front().dim) {
        throw DimensionMismatch("adapter '" + adapter.id + "' dim " + std::to_string(adapter.dim) +
                                " differs from batch dim " +
                                std::to_string(plan.adapters.front().dim));
      }
      plan.adapters.push_back(adapter);
    }
    plan.assignment.push_back(it->second);
  }
  plan.mapping = MatrixF::Zero(plan.batch_size, plan.unique_count());
  for (int i = 0; i < plan.batch_size; ++i) {
    plan.mapping(i, plan.assignment[static_cast<std::size_t>(i)]) = 1.0f;
  }
  return plan;
}

BatchTensor batched_delta(const BatchPlan& plan, const BatchTensor& x) {
  if (plan.adapters.empty()) {
    throw PlanError("plan has no adapters");
  }
  check_batch_shape(x, plan.batch_size, plan.adapters.front().dim, "batched_delta");
  const MatrixD xd = x.data.cast<double>();
  BatchTensor out = BatchTensor::zeros(x.batch, x.seq_len, x.dim);
  out.data = delta_f64(plan, xd, x.seq_len, x.dim).cast<float>();
  return out;
}

BatchTensor forward(const BaseModel& base, const BatchPlan& plan, const BatchTensor& x) {
  if (plan.adapters.empty()) {
    throw PlanError("plan has no adapters");
  }
  if (base.dim != x.dim) {
    throw ShapeMismatch("base model dim " + std::to_string(base.dim) + " != input dim " +
                        std::to_string(x.dim));
  }
  check_batch_shape(x, plan.batch_size, plan.adapters.front().dim, "forward");
  const MatrixD xd = x.data.cast<double>();
  const MatrixD w0d = base.W0.cast<double>();
  BatchTensor out = BatchTensor::zeros(x.batch, x.seq_len, x.dim);
  out.data = (xd * w0d.transpose() + delta_f64(plan, xd, x.seq_len, x.dim)).cast<float>();
  return out;
}

BatchTensor sequential_oracle(const BaseModel& base, const std::vector<RoutingDecision>& decisions,
                              const AdapterPool& pool, const BatchTensor& x) {
  if (decisions.empty()) {
    throw PlanError("empty batch");
  }
  if (base.dim != x.dim) {
    throw ShapeMismatch("base model dim " + std::to_string(base.dim) + " != input dim " +
                        std::to_string(x.dim));
  }
  check_batch_shape(x, static_cast<int>(decisions.size()), base.dim, "sequential_oracle");
  const MatrixD w0d = base.W0.cast<double>();
  BatchTensor out = BatchTensor::zeros(x.batch, x.seq_len, x.dim);
  for (int i = 0; i < x.batch; ++i) {
    // Swap in this sample's adapter.
    const LoraAdapter& adapter = resolve_decision(decisions[static_cast<std::size_t>(i)], pool);
    if (adapter.dim != x.dim) {
      throw ShapeMismatch("adapter '" + adapter.id + "' dim " + std::to_string(adapter.dim) +
                          " != input dim " + std::to_string(x.dim));
    }
    const MatrixD ad = adapter.A.cast<double>();
    const MatrixD bd = adapter.B.cast<double>();
    const double s = static_cast<double>(adapter.scale) / adapter.rank;
    for (int t = 0; t < x.seq_len; ++t) {
      const Eigen::Index row = static_cast<Eigen::Index>(i) * x.seq_len + t;
      const Eigen::VectorXd xv = x.data.row(row).transpose().cast<double>();
      const Eigen::VectorXd yv = w0d * xv + (bd * (ad * xv)) * s;
      out.data.row(row) = yv.cast<float>().transpose();
    }
  }
  return out;
}

}  // namespace retrieveall
