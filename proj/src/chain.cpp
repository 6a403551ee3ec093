#include "pwax/chain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace pwax {

namespace {

const std::string kUnaryVar = "u";

std::string key_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// affine combination of node outputs plus a constant offset; the
// working currency of the decomposition builder
struct AffForm {
    std::map<int, double> coeffs;
    double offset = 0.0;

    bool is_constant() const { return coeffs.empty(); }
};

AffForm aff_add(const AffForm& a, const AffForm& b) {
    AffForm out = a;
    out.offset += b.offset;
    for (const auto& [id, c] : b.coeffs) {
        const double v = (out.coeffs[id] += c);
        if (v == 0.0)
            out.coeffs.erase(id);
    }
    return out;
}

AffForm aff_scale(const AffForm& a, double s) {
    AffForm out;
    out.offset = a.offset * s;
    if (s == 0.0)
        return out;
    for (const auto& [id, c] : a.coeffs)
        out.coeffs.emplace(id, c * s);
    return out;
}

AffForm aff_sub(const AffForm& a, const AffForm& b) { return aff_add(a, aff_scale(b, -1.0)); }

class Decomposer {
  public:
    Decomposer(const std::map<std::string, Interval>& box) : box_(box) {}

    int run(const Expr& e) { return materialize(build(e)); }

    std::vector<DecompNode> take_nodes() { return std::move(nodes_); }

  private:
    const std::map<std::string, Interval>& box_;
    std::vector<DecompNode> nodes_;
    std::map<std::string, AffForm> expr_memo_;
    std::map<std::string, int> node_memo_;
    std::map<std::string, int> input_ids_;

    int add_node(DecompNode node) {
        node.id = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(node));
        return nodes_.back().id;
    }

    int input_id(const std::string& name) {
        auto it = input_ids_.find(name);
        if (it != input_ids_.end())
            return it->second;
        if (box_.find(name) == box_.end())
            throw UnboundVariable("no input box for variable: " + name);
        DecompNode node;
        node.kind = NodeKind::Input;
        node.input_name = name;
        const int id = add_node(std::move(node));
        input_ids_.emplace(name, id);
        return id;
    }

    int materialize(const AffForm& form) {
        if (form.coeffs.size() == 1 && form.offset == 0.0 &&
            form.coeffs.begin()->second == 1.0)
            return form.coeffs.begin()->first;
        std::string key = "aff:" + key_double(form.offset);
        for (const auto& [id, c] : form.coeffs)
            key += "|" + std::to_string(id) + ":" + key_double(c);
        auto it = node_memo_.find(key);
        if (it != node_memo_.end())
            return it->second;
        DecompNode node;
        node.kind = NodeKind::Affine;
        node.offset = form.offset;
        for (const auto& [id, c] : form.coeffs) {
            node.parents.push_back(id);
            node.coeffs.push_back(c);
        }
        const int id = add_node(std::move(node));
        node_memo_.emplace(std::move(key), id);
        return id;
    }

    AffForm unary(const Expr& fn, const AffForm& input) {
        const int parent = materialize(input);
        const std::string key = "un:" + fn.str() + "@" + std::to_string(parent);
        auto it = node_memo_.find(key);
        int id;
        if (it != node_memo_.end()) {
            id = it->second;
        } else {
            DecompNode node;
            node.kind = NodeKind::Unary;
            node.fn = fn;
            node.parents.push_back(parent);
            id = add_node(std::move(node));
            node_memo_.emplace(key, id);
        }
        AffForm out;
        out.coeffs.emplace(id, 1.0);
        return out;
    }

    AffForm square(const AffForm& a) { return unary(pow_int(Expr::variable(kUnaryVar), 2), a); }

    AffForm mul_forms(const AffForm& a, const AffForm& b) {
        if (a.is_constant())
            return aff_scale(b, a.offset);
        if (b.is_constant())
            return aff_scale(a, b.offset);
        const AffForm diff = aff_sub(a, b);
        if (diff.is_constant()) // b = a - c, so a*b = a^2 - c*a
            return aff_add(square(a), aff_scale(a, -diff.offset));
        const AffForm sum = aff_add(a, b);
        if (sum.is_constant()) // b = c - a, so a*b = c*a - a^2
            return aff_sub(aff_scale(a, sum.offset), square(a));
        // quarter-square identity: a*b = ((a+b)^2 - (a-b)^2) / 4
        return aff_add(aff_scale(square(sum), 0.25), aff_scale(square(diff), -0.25));
    }

    AffForm fold_or_unary(const Expr& node_fn, ExprKind kind, const AffForm& input) {
        if (input.is_constant()) {
            Expr folded;
            const Expr c = Expr::constant(input.offset);
            switch (kind) {
            case ExprKind::Sin: folded = sin(c); break;
            case ExprKind::Cos: folded = cos(c); break;
            case ExprKind::Sqrt: folded = sqrt(c); break;
            case ExprKind::Exp: folded = exp(c); break;
            case ExprKind::Log: folded = log(c); break;
            default: throw std::logic_error("unreachable fold kind");
            }
            AffForm out;
            out.offset = folded.eval(std::map<std::string, double>{});
            return out;
        }
        return unary(node_fn, input);
    }

    AffForm build(const Expr& e) {
        const std::string key = e.str();
        auto memo = expr_memo_.find(key);
        if (memo != expr_memo_.end())
            return memo->second;
        AffForm out = build_impl(e);
        expr_memo_.emplace(key, std::move(out));
        return expr_memo_.at(key);
    }

    AffForm build_impl(const Expr& e) {
        switch (e.kind()) {
        case ExprKind::Constant: {
            AffForm out;
            out.offset = e.constant_value();
            return out;
        }
        case ExprKind::Variable: {
            AffForm out;
            out.coeffs.emplace(input_id(e.variable_name()), 1.0);
            return out;
        }
        case ExprKind::Add:
            return aff_add(build(e.child(0)), build(e.child(1)));
        case ExprKind::Sub:
            return aff_sub(build(e.child(0)), build(e.child(1)));
        case ExprKind::Neg:
            return aff_scale(build(e.child(0)), -1.0);
        case ExprKind::Mul:
            return mul_forms(build(e.child(0)), build(e.child(1)));
        case ExprKind::Div: {
            const AffForm den = build(e.child(1));
            if (den.is_constant()) {
                if (den.offset == 0.0)
                    throw EvalDomainError("division by constant zero");
                return aff_scale(build(e.child(0)), 1.0 / den.offset);
            }
            const AffForm recip_form =
                unary(Expr::constant(1.0) / Expr::variable(kUnaryVar), den);
            return mul_forms(build(e.child(0)), recip_form);
        }
        case ExprKind::PowInt: {
            const AffForm base = build(e.child(0));
            const int n = e.exponent();
            if (base.is_constant()) {
                AffForm out;
                out.offset = pow_int(Expr::constant(base.offset), n)
                                 .eval(std::map<std::string, double>{});
                return out;
            }
            if (n == 1)
                return base;
            return unary(pow_int(Expr::variable(kUnaryVar), n), base);
        }
        case ExprKind::Sin:
            return fold_or_unary(sin(Expr::variable(kUnaryVar)), ExprKind::Sin,
                                 build(e.child(0)));
        case ExprKind::Cos:
            return fold_or_unary(cos(Expr::variable(kUnaryVar)), ExprKind::Cos,
                                 build(e.child(0)));
        case ExprKind::Sqrt:
            return fold_or_unary(sqrt(Expr::variable(kUnaryVar)), ExprKind::Sqrt,
                                 build(e.child(0)));
        case ExprKind::Exp:
            return fold_or_unary(exp(Expr::variable(kUnaryVar)), ExprKind::Exp,
                                 build(e.child(0)));
        case ExprKind::Log:
            return fold_or_unary(log(Expr::variable(kUnaryVar)), ExprKind::Log,
                                 build(e.child(0)));
        case ExprKind::Abs:
            throw UnsupportedNode("abs cannot be decomposed (not differentiable)");
        }
        throw std::logic_error("unreachable expression kind");
    }
};

} // namespace

DecompGraph::DecompGraph(std::vector<DecompNode> nodes, int output,
                         std::map<std::string, Interval> input_box)
    : nodes_(std::move(nodes)), output_(output), input_box_(std::move(input_box)) {
    if (nodes_.empty() || output_ < 0 || output_ >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("graph needs a valid output node");
    compiled_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        DecompNode& n = nodes_[i];
        n.id = static_cast<int>(i);
        for (int p : n.parents)
            if (p < 0 || p >= n.id)
                throw std::invalid_argument("graph nodes must be topologically ordered");
        if (n.kind == NodeKind::Affine && n.parents.size() != n.coeffs.size())
            throw std::invalid_argument("affine node parent/coefficient mismatch");
        if (n.kind == NodeKind::Unary) {
            if (n.parents.size() != 1)
                throw std::invalid_argument("unary node needs exactly one parent");
            compiled_[i] = CompiledUnary(n.fn, kUnaryVar);
        }
    }
}

DecompGraph decompose(const Expr& e, const std::map<std::string, Interval>& input_box) {
    Decomposer dec(input_box);
    const int output = dec.run(e);
    return DecompGraph(dec.take_nodes(), output, input_box);
}

std::vector<int> DecompGraph::unary_ids() const {
    std::vector<int> out;
    for (const DecompNode& n : nodes_)
        if (n.kind == NodeKind::Unary)
            out.push_back(n.id);
    return out;
}

int DecompGraph::count_kind(NodeKind kind) const {
    int count = 0;
    for (const DecompNode& n : nodes_)
        if (n.kind == kind)
            ++count;
    return count;
}

void DecompGraph::propagate_domains() {
    for (DecompNode& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Input:
            n.domain = input_box_.at(n.input_name);
            break;
        case NodeKind::Affine: {
            Interval dom(n.offset);
            for (std::size_t i = 0; i < n.parents.size(); ++i)
                dom = add(dom, scale(nodes_[static_cast<std::size_t>(n.parents[i])].domain,
                                     n.coeffs[i]));
            n.domain = dom;
            break;
        }
        case NodeKind::Unary: {
            const Interval& in = nodes_[static_cast<std::size_t>(n.parents[0])].domain;
            n.domain = n.fn.eval(std::map<std::string, Interval>{{kUnaryVar, in}});
            n.d_bound = n.fn.derivative(kUnaryVar)
                            .eval(std::map<std::string, Interval>{{kUnaryVar, in}})
                            .max_abs();
            break;
        }
        }
        n.inflated_domain = n.domain;
    }
    domains_ready_ = true;
}

void DecompGraph::fit_tolerances(const std::map<int, double>& taus, FitMethod method,
                                 const BisectConfig& base_cfg) {
    propagate_domains();
    for (DecompNode& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Input:
            n.tau = 0.0;
            n.eps = 0.0;
            n.pwa.reset();
            break;
        case NodeKind::Affine: {
            n.tau = 0.0;
            double eps = 0.0;
            for (std::size_t i = 0; i < n.parents.size(); ++i)
                eps += std::abs(n.coeffs[i]) *
                       nodes_[static_cast<std::size_t>(n.parents[i])].eps;
            n.eps = eps;
            n.pwa.reset();
            break;
        }
        case NodeKind::Unary: {
            auto it = taus.find(n.id);
            if (it == taus.end() || !(it->second > 0.0))
                throw std::invalid_argument(
                    "a positive tolerance is required for every unary node");
            const DecompNode& parent = nodes_[static_cast<std::size_t>(n.parents[0])];
            const Interval fit_dom = parent.domain;
            const CompiledUnary& fn = compiled_[static_cast<std::size_t>(n.id)];
            n.tau = it->second;

            BisectConfig cfg = base_cfg;
            cfg.tolerance = n.tau;
            switch (method) {
            case FitMethod::Secant:
                if (parent.eps == 0.0) {
                    n.pwa = bisect_breakpoints(
                        [&fn](double x) { return fn(x); }, fit_dom, cfg);
                } else {
                    // a single secant; its tolerance is its measured
                    // worst-case error (the given value if larger)
                    n.pwa = PwaFunction1D::interpolate(fn, {fit_dom.lo, fit_dom.hi});
                    const double measured = max_secant_error(
                        [&fn](double x) { return fn(x); }, fit_dom.lo, fit_dom.hi, cfg);
                    n.tau = std::max(n.tau, measured);
                }
                break;
            case FitMethod::Bisect:
                n.pwa =
                    bisect_breakpoints([&fn](double x) { return fn(x); }, fit_dom, cfg);
                break;
            case FitMethod::Curvature: {
                CurvatureConfig ccfg = make_curvature_config(n.fn, fit_dom, n.tau);
                n.pwa = curvature_breakpoints(n.fn, fit_dom, ccfg);
                break;
            }
            }
            n.d_pwa = n.pwa->max_abs_slope();
            n.eps = n.tau + n.d_bound * parent.eps;
            break;
        }
        }
        n.inflated_domain = inflate(n.domain, n.eps);
    }
    fits_ready_ = true;
}

void DecompGraph::fit_uniform(const std::map<int, int>& counts, const BisectConfig& base_cfg) {
    propagate_domains();
    for (DecompNode& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Input:
            n.tau = 0.0;
            n.eps = 0.0;
            n.pwa.reset();
            break;
        case NodeKind::Affine: {
            n.tau = 0.0;
            double eps = 0.0;
            for (std::size_t i = 0; i < n.parents.size(); ++i)
                eps += std::abs(n.coeffs[i]) *
                       nodes_[static_cast<std::size_t>(n.parents[i])].eps;
            n.eps = eps;
            n.pwa.reset();
            break;
        }
        case NodeKind::Unary: {
            auto it = counts.find(n.id);
            if (it == counts.end())
                throw std::invalid_argument("a breakpoint count is required for every "
                                            "unary node");
            const DecompNode& parent = nodes_[static_cast<std::size_t>(n.parents[0])];
            n.pwa = uniform_breakpoints(n.fn, parent.domain, it->second);
            const CompiledUnary& fn = compiled_[static_cast<std::size_t>(n.id)];
            double tau = 0.0;
            const auto& bps = n.pwa->breakpoints();
            for (std::size_t i = 0; i + 1 < bps.size(); ++i)
                tau = std::max(tau, max_secant_error([&fn](double x) { return fn(x); },
                                                     bps[i], bps[i + 1], base_cfg));
            n.tau = tau;
            n.d_pwa = n.pwa->max_abs_slope();
            n.eps = n.tau + n.d_bound * parent.eps;
            break;
        }
        }
        n.inflated_domain = inflate(n.domain, n.eps);
    }
    fits_ready_ = true;
}

std::map<int, double> DecompGraph::propagate_error(ErrorMode mode) const {
    std::map<int, double> eps;
    for (const DecompNode& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Input:
            eps[n.id] = 0.0;
            break;
        case NodeKind::Affine: {
            double e = 0.0;
            for (std::size_t i = 0; i < n.parents.size(); ++i)
                e += std::abs(n.coeffs[i]) * eps.at(n.parents[i]);
            eps[n.id] = e;
            break;
        }
        case NodeKind::Unary: {
            if (!n.pwa)
                throw MissingFit("node " + std::to_string(n.id) + " has no fitted PWA");
            double d = 0.0;
            switch (mode) {
            case ErrorMode::Secant:
                if (n.pwa->segment_count() != 1 &&
                    nodes_[static_cast<std::size_t>(n.parents[0])].eps > 0.0)
                    throw NotSos("secant propagation requires one-segment fits");
                d = n.d_pwa;
                break;
            case ErrorMode::SlopeBound:
                d = n.d_pwa;
                break;
            case ErrorMode::DerivBound:
                d = n.d_bound;
                break;
            }
            eps[n.id] = n.tau + d * eps.at(n.parents[0]);
            break;
        }
        }
    }
    return eps;
}

std::map<int, double> DecompGraph::sensitivity() const {
    if (!domains_ready_)
        throw MissingBounds("propagate_domains must run before sensitivity");
    std::vector<double> lambda(nodes_.size(), 0.0);
    lambda[static_cast<std::size_t>(output_)] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        const DecompNode& n = *it;
        const double l = lambda[static_cast<std::size_t>(n.id)];
        if (l == 0.0)
            continue;
        if (n.kind == NodeKind::Affine) {
            for (std::size_t i = 0; i < n.parents.size(); ++i)
                lambda[static_cast<std::size_t>(n.parents[i])] += std::abs(n.coeffs[i]) * l;
        } else if (n.kind == NodeKind::Unary) {
            lambda[static_cast<std::size_t>(n.parents[0])] += n.d_bound * l;
        }
    }
    std::map<int, double> out;
    for (const DecompNode& n : nodes_)
        out[n.id] = lambda[static_cast<std::size_t>(n.id)];
    return out;
}

double DecompGraph::eval_exact(const std::map<std::string, double>& point) const {
    std::vector<double> vals(nodes_.size());
    for (const DecompNode& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Input: {
            auto it = point.find(n.input_name);
            if (it == point.end())
                throw UnboundVariable("no value for input: " + n.input_name);
            vals[static_cast<std::size_t>(n.id)] = it->second;
            break;
        }
        case NodeKind::Affine: {
            double v = n.offset;
            for (std::size_t i = 0; i < n.parents.size(); ++i)
                v += n.coeffs[i] * vals[static_cast<std::size_t>(n.parents[i])];
            vals[static_cast<std::size_t>(n.id)] = v;
            break;
        }
        case NodeKind::Unary:
            vals[static_cast<std::size_t>(n.id)] =
                compiled_[static_cast<std::size_t>(n.id)](
                    vals[static_cast<std::size_t>(n.parents[0])]);
            break;
        }
    }
    return vals[static_cast<std::size_t>(output_)];
}

std::pair<double, double> DecompGraph::eval_composed(
    const std::map<std::string, double>& point) const {
    std::vector<double> exact(nodes_.size());
    std::vector<double> approx(nodes_.size());
    for (const DecompNode& n : nodes_) {
        const auto idx = static_cast<std::size_t>(n.id);
        switch (n.kind) {
        case NodeKind::Input: {
            auto it = point.find(n.input_name);
            if (it == point.end())
                throw UnboundVariable("no value for input: " + n.input_name);
            const Interval& box = input_box_.at(n.input_name);
            if (it->second < box.lo || it->second > box.hi)
                throw OutOfDomain("input outside its box: " + n.input_name);
            exact[idx] = approx[idx] = it->second;
            break;
        }
        case NodeKind::Affine: {
            double ve = n.offset;
            double va = n.offset;
            for (std::size_t i = 0; i < n.parents.size(); ++i) {
                ve += n.coeffs[i] * exact[static_cast<std::size_t>(n.parents[i])];
                va += n.coeffs[i] * approx[static_cast<std::size_t>(n.parents[i])];
            }
            exact[idx] = ve;
            approx[idx] = va;
            break;
        }
        case NodeKind::Unary: {
            if (!n.pwa)
                throw MissingFit("node " + std::to_string(n.id) + " has no fitted PWA");
            const DecompNode& parent = nodes_[static_cast<std::size_t>(n.parents[0])];
            exact[idx] = compiled_[idx](exact[static_cast<std::size_t>(n.parents[0])]);
            double v = approx[static_cast<std::size_t>(n.parents[0])];
            const Interval& region = parent.inflated_domain;
            const double slack = 1e-9 * std::max(1.0, region.max_abs());
            if (v < region.lo - slack || v > region.hi + slack)
                throw OutOfDomain("approximate value escaped its certified region");
            approx[idx] = n.pwa->eval_extended(region.clamp(v));
            break;
        }
        }
    }
    return {exact[static_cast<std::size_t>(output_)], approx[static_cast<std::size_t>(output_)]};
}

nlohmann::json DecompGraph::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const DecompNode& n : nodes_) {
        nlohmann::json j;
        j["id"] = n.id;
        switch (n.kind) {
        case NodeKind::Input:
            j["kind"] = "input";
            j["name"] = n.input_name;
            break;
        case NodeKind::Affine:
            j["kind"] = "affine";
            j["parents"] = n.parents;
            j["coeffs"] = n.coeffs;
            j["offset"] = n.offset;
            break;
        case NodeKind::Unary:
            j["kind"] = "unary";
            j["parents"] = n.parents;
            j["fn"] = n.fn.str();
            break;
        }
        j["domain"] = {n.domain.lo, n.domain.hi};
        j["inflated_domain"] = {n.inflated_domain.lo, n.inflated_domain.hi};
        j["tau"] = n.tau;
        j["eps"] = n.eps;
        j["d_bound"] = n.d_bound;
        j["d_pwa"] = n.d_pwa;
        j["pwa"] = n.pwa ? n.pwa->to_json() : nlohmann::json(nullptr);
        nodes.push_back(std::move(j));
    }
    nlohmann::json box;
    for (const auto& [name, iv] : input_box_)
        box[name] = {iv.lo, iv.hi};
    return nlohmann::json{{"nodes", std::move(nodes)}, {"output", output_}, {"inputs", box}};
}

} // namespace pwax
