#include "formation/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "formation/errors.hpp"

namespace formation {

namespace {

void check_layout(const VectorRef& x, const Layout& layout) {
  if (layout.agents < 1 || layout.dim < 1) {
    throw ConfigError(fmt::format("invalid layout {}x{}", layout.agents, layout.dim));
  }
  if (x.size() != layout.size()) {
    throw ConfigError(fmt::format("position vector has {} entries, expected {} ({} agents x {})",
                                  x.size(), layout.size(), layout.agents, layout.dim));
  }
}

void check_agent(int agent, const Layout& layout) {
  if (agent < 0 || agent >= layout.agents) {
    throw ConfigError(fmt::format("agent index {} out of range [1, {}]", agent + 1,
                                  layout.agents));
  }
}

auto block(const VectorRef& x, int agent, int dim) { return x.segment(agent * dim, dim); }

// Displacement x_owner - anchor, validating indices and dimensions.
Vector displacement(const ConstraintAtom& atom, const VectorRef& x, const Layout& layout) {
  check_layout(x, layout);
  check_agent(atom.owner(), layout);
  const auto own = block(x, atom.owner(), layout.dim);
  if (const auto* fixed = std::get_if<FixedPoint>(&atom.anchor())) {
    if (fixed->point.size() != layout.dim) {
      throw ConfigError(fmt::format("anchor of {} has dimension {}, expected {}",
                                    atom.describe(), fixed->point.size(), layout.dim));
    }
    return own - fixed->point;
  }
  const int other = std::get<AgentRef>(atom.anchor()).agent;
  check_agent(other, layout);
  return own - block(x, other, layout.dim);
}

// Softmax of -nu * psi with the usual max shift; also returns the log of the
// normalizer, ln sum_k exp(-nu psi_k).
std::vector<double> softmin_weights(std::span<const double> psi, double nu, double* log_norm) {
  std::vector<double> scaled(psi.size());
  for (std::size_t k = 0; k < psi.size(); ++k) scaled[k] = -nu * psi[k];
  const double lse = log_sum_exp(scaled);
  for (auto& s : scaled) s = std::exp(s - lse);
  if (log_norm != nullptr) *log_norm = lse;
  return scaled;
}

// sum_k w_k grad psi_k, dense.
Vector weighted_atom_gradient(const AgentConstraintSet& set, const VectorRef& x,
                              const Layout& layout, std::span<const double> weights) {
  Vector g = Vector::Zero(layout.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    grad_atom(set.atoms()[k], x, layout).add_to(g, layout.dim, weights[k]);
  }
  return g;
}

}  // namespace

void SparseGradient::add_to(Eigen::Ref<Vector> dense, int dim, double scale) const {
  for (const auto& b : blocks) dense.segment(b.agent * dim, dim) += scale * b.value;
}

Vector SparseGradient::to_dense(const Layout& layout) const {
  Vector out = Vector::Zero(layout.size());
  add_to(out, layout.dim);
  return out;
}

ConstraintAtom::ConstraintAtom(int owner, Sense sense, double radius, Anchor anchor)
    : owner_(owner), sense_(sense), radius_(radius), anchor_(std::move(anchor)) {
  if (owner < 0) throw ConfigError(fmt::format("negative owner index {}", owner));
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ConfigError(fmt::format("radius must be finite and nonnegative, got {}", radius));
  }
  if (const auto* ref = std::get_if<AgentRef>(&anchor_)) {
    if (ref->agent == owner) {
      throw ConfigError(fmt::format("agent {} cannot anchor a constraint on itself", owner + 1));
    }
    if (ref->agent < 0) throw ConfigError(fmt::format("negative anchor agent {}", ref->agent));
  }
}

ConstraintAtom ConstraintAtom::custom(int owner, std::shared_ptr<const AtomFunction> fn) {
  if (!fn) throw ConfigError("custom atom without a function");
  if (owner < 0) throw ConfigError(fmt::format("negative owner index {}", owner));
  for (int dep : fn->dependencies()) {
    if (dep == owner || dep < 0) {
      throw ConfigError(fmt::format("custom atom of agent {} has invalid dependency {}",
                                    owner + 1, dep + 1));
    }
  }
  ConstraintAtom atom;
  atom.owner_ = owner;
  atom.custom_ = std::move(fn);
  return atom;
}

std::vector<int> ConstraintAtom::referenced_agents() const {
  if (custom_) return custom_->dependencies();
  if (const auto* ref = std::get_if<AgentRef>(&anchor_)) return {ref->agent};
  return {};
}

std::string ConstraintAtom::describe() const {
  if (custom_) return fmt::format("agent {} {}", owner_ + 1, custom_->describe());
  const char* kind = sense_ == Sense::Inside ? "inside" : "outside";
  if (const auto* ref = std::get_if<AgentRef>(&anchor_)) {
    return fmt::format("agent {} {} r={} of agent {}", owner_ + 1, kind, radius_, ref->agent + 1);
  }
  const auto& p = std::get<FixedPoint>(anchor_).point;
  return fmt::format("agent {} {} r={} of [{}]", owner_ + 1, kind, radius_,
                     fmt::join(p.data(), p.data() + p.size(), ", "));
}

bool ConstraintAtom::operator==(const ConstraintAtom& o) const {
  if (custom_ || o.custom_) return owner_ == o.owner_ && custom_ == o.custom_;
  return owner_ == o.owner_ && sense_ == o.sense_ && radius_ == o.radius_ &&
         anchor_ == o.anchor_;
}

AgentConstraintSet::AgentConstraintSet(int owner, std::vector<ConstraintAtom> atoms)
    : owner_(owner), atoms_(std::move(atoms)) {
  if (atoms_.empty()) {
    throw ConfigError(fmt::format("agent {} has no constraints", owner + 1));
  }
  for (const auto& atom : atoms_) {
    if (atom.owner() != owner) {
      throw ConfigError(fmt::format("constraint '{}' placed in the set of agent {}",
                                    atom.describe(), owner + 1));
    }
    for (int dep : atom.referenced_agents()) dependencies_.push_back(dep);
  }
  std::sort(dependencies_.begin(), dependencies_.end());
  dependencies_.erase(std::unique(dependencies_.begin(), dependencies_.end()),
                      dependencies_.end());
}

void SmoothingParams::validate() const {
  if (!(nu_alpha > 0.0) || !std::isfinite(nu_alpha)) {
    throw ConfigError(fmt::format("nu_alpha must be positive, got {}", nu_alpha));
  }
  if (!(nu_beta > 0.0) || !std::isfinite(nu_beta)) {
    throw ConfigError(fmt::format("nu_beta must be positive, got {}", nu_beta));
  }
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

double eval_atom(const ConstraintAtom& atom, const VectorRef& x, const Layout& layout) {
  if (const auto* fn = atom.custom_function()) {
    check_layout(x, layout);
    check_agent(atom.owner(), layout);
    for (int dep : fn->dependencies()) check_agent(dep, layout);
    return fn->value(x, layout);
  }
  const double r2 = atom.radius() * atom.radius();
  const double dist2 = displacement(atom, x, layout).squaredNorm();
  return atom.sense() == Sense::Inside ? r2 - dist2 : dist2 - r2;
}

SparseGradient grad_atom(const ConstraintAtom& atom, const VectorRef& x, const Layout& layout) {
  if (const auto* fn = atom.custom_function()) {
    check_layout(x, layout);
    check_agent(atom.owner(), layout);
    for (int dep : fn->dependencies()) check_agent(dep, layout);
    return fn->gradient(x, layout);
  }
  const double sign = atom.sense() == Sense::Inside ? -2.0 : 2.0;
  Vector own = sign * displacement(atom, x, layout);
  SparseGradient g;
  if (const auto* ref = std::get_if<AgentRef>(&atom.anchor())) {
    g.blocks.push_back({atom.owner(), own});
    g.blocks.push_back({ref->agent, -own});
  } else {
    g.blocks.push_back({atom.owner(), std::move(own)});
  }
  return g;
}

std::vector<double> atom_values(const AgentConstraintSet& set, const VectorRef& x,
                                const Layout& layout) {
  std::vector<double> out;
  out.reserve(set.atoms().size());
  for (const auto& atom : set.atoms()) out.push_back(eval_atom(atom, x, layout));
  return out;
}

double consolidated_alpha_bar(const AgentConstraintSet& set, const VectorRef& x,
                              const Layout& layout) {
  const auto psi = atom_values(set, x, layout);
  return *std::min_element(psi.begin(), psi.end());
}

double global_beta_bar(ConstraintSets sets, const VectorRef& x, const Layout& layout) {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& set : sets) out = std::min(out, consolidated_alpha_bar(set, x, layout));
  return out;
}

double log_h(const AgentConstraintSet& set, const VectorRef& x, const Layout& layout,
             double nu_alpha) {
  auto psi = atom_values(set, x, layout);
  for (auto& p : psi) p *= -nu_alpha;
  return log_sum_exp(psi);
}

double smooth_alpha(const AgentConstraintSet& set, const VectorRef& x, const Layout& layout,
                    double nu_alpha) {
  if (!(nu_alpha > 0.0)) throw ConfigError("nu_alpha must be positive");
  // A single atom is returned as-is so that alpha_i == psi exactly.
  if (set.size() == 1) return eval_atom(set.atoms().front(), x, layout);
  return -log_h(set, x, layout, nu_alpha) / nu_alpha;
}

double smooth_beta(ConstraintSets sets, const VectorRef& x, const Layout& layout,
                   const SmoothingParams& params) {
  params.validate();
  if (sets.size() == 1) return smooth_alpha(sets.front(), x, layout, params.nu_alpha);
  std::vector<double> scaled;
  scaled.reserve(sets.size());
  for (const auto& set : sets) {
    scaled.push_back(-params.nu_beta * smooth_alpha(set, x, layout, params.nu_alpha));
  }
  return -log_sum_exp(scaled) / params.nu_beta;
}

double local_objective_log(const AgentConstraintSet& set, const VectorRef& x,
                           const Layout& layout, const SmoothingParams& params) {
  params.validate();
  const double lh = log_h(set, x, layout, params.nu_alpha);
  if (params.nu_beta == params.nu_alpha) return lh;
  return (params.nu_beta / params.nu_alpha) * lh;
}

double global_objective_log(ConstraintSets sets, const VectorRef& x, const Layout& layout,
                            const SmoothingParams& params) {
  std::vector<double> logs;
  logs.reserve(sets.size());
  for (const auto& set : sets) logs.push_back(local_objective_log(set, x, layout, params));
  return log_sum_exp(logs);
}

GuardedValue guarded_exp(double log_value, double threshold) {
  if (log_value > threshold) return {std::exp(threshold), true};
  return {std::exp(log_value), false};
}

GuardedValue local_objective(const AgentConstraintSet& set, const VectorRef& x,
                             const Layout& layout, const SmoothingParams& params,
                             const Tolerances& tol) {
  return guarded_exp(local_objective_log(set, x, layout, params), tol.overflow_log_threshold);
}

Vector grad_local_objective(const AgentConstraintSet& set, const VectorRef& x,
                            const Layout& layout, const SmoothingParams& params,
                            const Tolerances& tol) {
  params.validate();
  const auto psi = atom_values(set, x, layout);
  double lh = 0.0;
  const auto weights = softmin_weights(psi, params.nu_alpha, &lh);
  // Each summand weight is exp((nu_b/nu_a - 1) ln h - nu_a psi_k)
  //   = exp(ln f_i) * softmax_k, with ln f_i the only unshifted exponent.
  const double log_f = (params.nu_beta / params.nu_alpha) * lh;
  if (!(log_f <= tol.overflow_log_threshold)) throw SaturationError(set.owner(), log_f);
  return weighted_atom_gradient(set, x, layout, weights) * (-params.nu_beta * std::exp(log_f));
}

Vector grad_log_local_objective(const AgentConstraintSet& set, const VectorRef& x,
                                const Layout& layout, const SmoothingParams& params) {
  params.validate();
  const auto psi = atom_values(set, x, layout);
  const auto weights = softmin_weights(psi, params.nu_alpha, nullptr);
  return weighted_atom_gradient(set, x, layout, weights) * -params.nu_beta;
}

Vector grad_smooth_beta(ConstraintSets sets, const VectorRef& x, const Layout& layout,
                        const SmoothingParams& params) {
  params.validate();
  std::vector<double> alphas;
  alphas.reserve(sets.size());
  for (const auto& set : sets) alphas.push_back(smooth_alpha(set, x, layout, params.nu_alpha));
  const auto outer = softmin_weights(alphas, params.nu_beta, nullptr);

  Vector g = Vector::Zero(layout.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto psi = atom_values(sets[i], x, layout);
    const auto inner = softmin_weights(psi, params.nu_alpha, nullptr);
    for (std::size_t k = 0; k < inner.size(); ++k) {
      grad_atom(sets[i].atoms()[k], x, layout).add_to(g, layout.dim, outer[i] * inner[k]);
    }
  }
  return g;
}

int max_atom_count(ConstraintSets sets) {
  int m = 0;
  for (const auto& set : sets) m = std::max(m, set.size());
  return m;
}

}  // namespace formation
