#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pwax/approx.hpp"
#include "pwax/expr.hpp"
#include "pwax/interval.hpp"
#include "pwax/pwa.hpp"

namespace pwax {

struct UnsupportedNode : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotSos : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingBounds : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Input, Affine, Unary };

/// How unary nodes are approximated when fitting a graph.
enum class FitMethod {
    /// single secant per node (nodes whose inputs are exact still get a
    /// bisection fit at their assigned tolerance)
    Secant,
    /// bisection placement on the measured secant error
    Bisect,
    /// curvature-bound placement
    Curvature,
};

/// Which per-node amplification factor propagates upstream error:
///   Secant     - |slope| of the single secant fit
///   SlopeBound - max |slope| over the fitted PWA segments
///   DerivBound - certified max |f'| over the fit domain
enum class ErrorMode { Secant, SlopeBound, DerivBound };

/// One node of a decomposition graph. Unary nodes hold their scalar
/// function as an expression in the variable "u".
struct DecompNode {
    int id = -1;
    NodeKind kind = NodeKind::Input;

    std::string input_name;        // Input
    std::vector<int> parents;      // Affine (Unary uses parents[0])
    std::vector<double> coeffs;    // Affine
    double offset = 0.0;           // Affine
    Expr fn;                       // Unary

    Interval domain{0.0, 0.0};
    Interval inflated_domain{0.0, 0.0};
    double tau = 0.0;
    double eps = 0.0;
    double d_bound = 0.0;
    double d_pwa = 0.0;
    std::optional<PwaFunction1D> pwa;
};

/// Topologically ordered DAG of input, affine, and unary nodes whose
/// exact evaluation reproduces the decomposed expression on the input
/// box. Node ids equal their position; parents always precede children.
class DecompGraph {
  public:
    DecompGraph(std::vector<DecompNode> nodes, int output,
                std::map<std::string, Interval> input_box);

    const std::vector<DecompNode>& nodes() const { return nodes_; }
    const DecompNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    int output() const { return output_; }
    const std::map<std::string, Interval>& input_box() const { return input_box_; }

    std::vector<int> unary_ids() const;
    int count_kind(NodeKind kind) const;

    /// Recompute every node's exact-range enclosure in topological order.
    void propagate_domains();

    /// Fit every unary node over its parent's exact domain at the given
    /// tolerance, record slope and derivative bounds, and set each
    /// node's propagated eps (DerivBound flavor) and inflated domain.
    void fit_tolerances(const std::map<int, double>& taus, FitMethod method,
                        const BisectConfig& base_cfg = {});

    /// Fit each unary node with a uniform on-graph breakpoint grid of
    /// the given size; each node's tolerance is set to its measured
    /// worst segment error.
    void fit_uniform(const std::map<int, int>& counts, const BisectConfig& base_cfg = {});

    /// Per-node propagated error bounds for the chosen amplification.
    std::map<int, double> propagate_error(ErrorMode mode) const;

    /// Coefficient of each node's tolerance in the output DerivBound
    /// error: sum over paths to the output of the product of d_bound
    /// and |affine coefficient| factors.
    std::map<int, double> sensitivity() const;

    /// Exact node-function evaluation at a point (no fits required).
    double eval_exact(const std::map<std::string, double>& point) const;

    /// (exact, approximate) output values at a point; the approximate
    /// path evaluates the fitted PWA chain, clamping each node input
    /// into its parent's inflated domain.
    std::pair<double, double> eval_composed(const std::map<std::string, double>& point) const;

    nlohmann::json to_json() const;

  private:
    std::vector<DecompNode> nodes_;
    int output_ = -1;
    std::map<std::string, Interval> input_box_;
    std::vector<CompiledUnary> compiled_; // per node; valid for Unary kind
    bool domains_ready_ = false;
    bool fits_ready_ = false;
    friend DecompGraph decompose(const Expr&, const std::map<std::string, Interval>&);
};

/// Rewrite an expression into a graph of affine and unary nodes:
/// additive structure folds into affine nodes, products of nonconstant
/// factors use the quarter-square identity, division goes through a
/// reciprocal node, and powers and elementary functions become unary
/// nodes. Consecutive affine combinations are merged and identical
/// subexpressions share one node.
DecompGraph decompose(const Expr& e, const std::map<std::string, Interval>& input_box);

} // namespace pwax
