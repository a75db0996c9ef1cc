#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "formation/config.hpp"

namespace formation {

using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

// Shape of a stacked position vector: agent j occupies entries
// [j*dim, (j+1)*dim). Agent indices are zero-based throughout the library.
struct Layout {
  int agents = 0;
  int dim = 0;

  int size() const { return agents * dim; }
  bool operator==(const Layout&) const = default;
};

enum class Sense { Inside, Outside };

struct FixedPoint {
  Vector point;
  bool operator==(const FixedPoint& o) const { return point == o.point; }
};

struct AgentRef {
  int agent = 0;
  bool operator==(const AgentRef&) const = default;
};

using Anchor = std::variant<FixedPoint, AgentRef>;

// Gradient that is nonzero on a few agent blocks only.
struct SparseGradient {
  struct Block {
    int agent;
    Vector value;
  };
  std::vector<Block> blocks;

  void add_to(Eigen::Ref<Vector> dense, int dim, double scale = 1.0) const;
  Vector to_dense(const Layout& layout) const;
};

// Extension point for differentiable constraints that are not quadratic
// ball/separation atoms. Implementations must be pure and supply an analytic
// gradient; no concavity is assumed for them.
class AtomFunction {
 public:
  virtual ~AtomFunction() = default;

  // Agents other than the owner whose positions enter the function.
  virtual std::vector<int> dependencies() const = 0;
  virtual double value(const VectorRef& x, const Layout& layout) const = 0;
  virtual SparseGradient gradient(const VectorRef& x, const Layout& layout) const = 0;
  virtual std::string describe() const { return "custom"; }
};

// One differentiable inequality psi(x) > 0.
//   Inside : psi = r^2 - |x_owner - a|^2   (concave)
//   Outside: psi = |x_owner - a|^2 - r^2
// where a is a fixed point or the position of another agent.
class ConstraintAtom {
 public:
  ConstraintAtom(int owner, Sense sense, double radius, Anchor anchor);

  static ConstraintAtom inside(int owner, double radius, Anchor anchor) {
    return {owner, Sense::Inside, radius, std::move(anchor)};
  }
  static ConstraintAtom outside(int owner, double radius, Anchor anchor) {
    return {owner, Sense::Outside, radius, std::move(anchor)};
  }
  static ConstraintAtom custom(int owner, std::shared_ptr<const AtomFunction> fn);

  int owner() const { return owner_; }
  // The agent whose position enters first; always the owner.
  int subject() const { return owner_; }
  Sense sense() const { return sense_; }
  double radius() const { return radius_; }
  const Anchor& anchor() const { return anchor_; }
  bool is_custom() const { return custom_ != nullptr; }
  const AtomFunction* custom_function() const { return custom_.get(); }

  // Agents other than the owner the atom depends on.
  std::vector<int> referenced_agents() const;
  bool is_individual() const { return referenced_agents().empty(); }

  // Syntactic classification used for the log-convexity checks.
  bool is_concave() const { return !is_custom() && sense_ == Sense::Inside; }
  bool is_strictly_concave_in_owner() const {
    return is_concave() && std::holds_alternative<FixedPoint>(anchor_);
  }

  std::string describe() const;

  bool operator==(const ConstraintAtom& o) const;

 private:
  ConstraintAtom() = default;

  int owner_ = 0;
  Sense sense_ = Sense::Inside;
  double radius_ = 0.0;
  Anchor anchor_ = AgentRef{};
  std::shared_ptr<const AtomFunction> custom_;
};

// All constraints owned by one agent.
class AgentConstraintSet {
 public:
  AgentConstraintSet(int owner, std::vector<ConstraintAtom> atoms);

  int owner() const { return owner_; }
  const std::vector<ConstraintAtom>& atoms() const { return atoms_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  // Sorted, unique agents referenced by any atom (excludes the owner).
  const std::vector<int>& dependencies() const { return dependencies_; }

  bool operator==(const AgentConstraintSet&) const = default;

 private:
  int owner_;
  std::vector<ConstraintAtom> atoms_;
  std::vector<int> dependencies_;
};

using ConstraintSets = std::span<const AgentConstraintSet>;

struct SmoothingParams {
  double nu_alpha = 5.0;
  double nu_beta = 5.0;

  void validate() const;
};

// Stable ln(sum exp(v_k)). Returns -inf for an empty input.
double log_sum_exp(std::span<const double> values);

// Atom evaluation. Throws ConfigError on index or dimension mismatch.
double eval_atom(const ConstraintAtom& atom, const VectorRef& x, const Layout& layout);
SparseGradient grad_atom(const ConstraintAtom& atom, const VectorRef& x, const Layout& layout);

std::vector<double> atom_values(const AgentConstraintSet& set, const VectorRef& x,
                                const Layout& layout);

// min_k psi_{i,k}(x)
double consolidated_alpha_bar(const AgentConstraintSet& set, const VectorRef& x,
                              const Layout& layout);
// min_i alpha_bar_i(x); positive iff every constraint holds.
double global_beta_bar(ConstraintSets sets, const VectorRef& x, const Layout& layout);

// -(1/nu_alpha) ln sum_k exp(-nu_alpha psi_k), a lower bound on alpha_bar_i
// within ln(m_i)/nu_alpha.
double smooth_alpha(const AgentConstraintSet& set, const VectorRef& x, const Layout& layout,
                    double nu_alpha);
// -(1/nu_beta) ln sum_i exp(-nu_beta alpha_i).
double smooth_beta(ConstraintSets sets, const VectorRef& x, const Layout& layout,
                   const SmoothingParams& params);

// ln h_i = ln sum_k exp(-nu_alpha psi_k) = -nu_alpha * alpha_i
double log_h(const AgentConstraintSet& set, const VectorRef& x, const Layout& layout,
             double nu_alpha);
// ln f_i = (nu_beta / nu_alpha) ln h_i
double local_objective_log(const AgentConstraintSet& set, const VectorRef& x,
                           const Layout& layout, const SmoothingParams& params);
// ln f = ln sum_i f_i
double global_objective_log(ConstraintSets sets, const VectorRef& x, const Layout& layout,
                            const SmoothingParams& params);

struct GuardedValue {
  double value;
  bool saturated;  // value clamped to exp(threshold)
};

// exp(log_value), saturating at exp(threshold).
GuardedValue guarded_exp(double log_value, double threshold);

// f_i = h_i^(nu_beta/nu_alpha), exponentiated through guarded_exp.
GuardedValue local_objective(const AgentConstraintSet& set, const VectorRef& x,
                             const Layout& layout, const SmoothingParams& params,
                             const Tolerances& tol = kDefaultTolerances);

// grad f_i = -nu_beta * f_i * sum_k softmax_k(-nu_alpha psi) * grad psi_k.
// The softmax weights are max-shifted; f_i is the only raw exponential and is
// guarded: throws SaturationError when ln f_i exceeds the overflow threshold.
// Nonzero only on the owner's block and its dependencies.
Vector grad_local_objective(const AgentConstraintSet& set, const VectorRef& x,
                            const Layout& layout, const SmoothingParams& params,
                            const Tolerances& tol = kDefaultTolerances);

// grad ln f_i; never overflows.
Vector grad_log_local_objective(const AgentConstraintSet& set, const VectorRef& x,
                                const Layout& layout, const SmoothingParams& params);

// grad beta = sum_i softmax_i(-nu_beta alpha_i) grad alpha_i, fully in the
// log domain. Equals -grad f / (nu_beta f).
Vector grad_smooth_beta(ConstraintSets sets, const VectorRef& x, const Layout& layout,
                        const SmoothingParams& params);

// max_i m_i
int max_atom_count(ConstraintSets sets);

}  // namespace formation
