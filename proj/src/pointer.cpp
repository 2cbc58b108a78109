#include "tsvf/pointer.hpp"

#include "tsvf/rng.hpp"

#include <algorithm>
#include <cmath>

namespace tsvf {

PointerConfig::Grid PointerConfig::effective_grid() const {
    if (grid) return *grid;
    Grid g;
    g.x_min = std::min(-8.0 * sigma, -8.0 * sigma + this->g);
    g.x_max = std::max(8.0 * sigma, 8.0 * sigma + this->g);
    g.n_points = std::size_t{1} << 14;
    return g;
}

namespace {

struct Coefficients {
    Amplitude c0;
    Amplitude c1;
};

Coefficients pointer_coefficients(const TwoState& ts, const Operator& projector) {
    if (!projector.is_flagged_projector()) {
        throw structural_error("pointer measurement requires a flagged projector");
    }
    Amplitude c1 = inner(ts.bra, apply(projector, ts.ket));
    Amplitude c0 = ts.overlap - c1;
    return {c0, c1};
}

void check_config(const PointerConfig& cfg) {
    if (!(cfg.sigma > 0.0)) throw structural_error("pointer sigma must be positive");
    if (!std::isfinite(cfg.g)) throw structural_error("pointer coupling must be finite");
    if (cfg.grid) {
        double lo_required = -6.0 * cfg.sigma + std::min(cfg.g, 0.0);
        double hi_required = 6.0 * cfg.sigma + std::max(cfg.g, 0.0);
        if (cfg.grid->n_points < 2 || cfg.grid->x_min > lo_required ||
            cfg.grid->x_max < hi_required) {
            throw structural_error("pointer grid must span at least [-6σ, 6σ+g]");
        }
    }
}

} // namespace

PointerOutcome weak_pointer_state(const TwoState& ts, const Operator& projector,
                                  const PointerConfig& cfg) {
    check_config(cfg);
    auto [c0, c1] = pointer_coefficients(ts, projector);

    double g = cfg.g;
    double s2 = cfg.sigma * cfg.sigma;
    double a0 = std::norm(c0);
    double a1 = std::norm(c1);
    double cross = (std::conj(c0) * c1).real();
    // Overlap of unit-norm Gaussians with variance sigma^2 displaced by g.
    double eta = std::exp(-g * g / (8.0 * s2));

    double weight = a0 + a1 + 2.0 * cross * eta;
    if (weight <= kOverlapEpsilon && std::abs(c0) <= kOverlapEpsilon &&
        std::abs(c1) <= kOverlapEpsilon) {
        throw impossible_history_error("post-selected pointer state has zero amplitude");
    }
    if (weight <= 0.0) {
        throw structural_error("post-selected pointer density has vanishing norm");
    }

    PointerOutcome out;
    out.c0 = c0;
    out.c1 = c1;
    out.success_probability = weight;
    out.mean = (a1 * g + cross * g * eta) / weight;
    double second = (a0 * s2 + a1 * (s2 + g * g) + 2.0 * cross * eta * (s2 + g * g / 4.0)) / weight;
    out.variance = second - out.mean * out.mean;
    return out;
}

double analytic_weak_limit(const TwoState& ts, const Operator& projector) {
    if (!projector.is_flagged_projector()) {
        throw structural_error("analytic weak limit requires a flagged projector");
    }
    return weak_value(ts, projector).value.real();
}

namespace {

// Post-selected pointer density |c0 G(x) + c1 G(x-g)|^2 with G the
// unit-norm Gaussian of variance sigma^2.
struct Density {
    Amplitude c0, c1;
    double g, sigma;

    double operator()(double x) const {
        double norm_const = std::pow(2.0 * M_PI * sigma * sigma, -0.25);
        double g0 = norm_const * std::exp(-x * x / (4.0 * sigma * sigma));
        double g1 = norm_const * std::exp(-(x - g) * (x - g) / (4.0 * sigma * sigma));
        return std::norm(c0 * g0 + c1 * g1);
    }
};

} // namespace

MonteCarloReport sample_trials(const TwoState& ts, const Operator& projector,
                               const PointerConfig& cfg, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) throw structural_error("trial count must be at least 1");
    PointerOutcome outcome = weak_pointer_state(ts, projector, cfg);

    PointerConfig::Grid grid = cfg.effective_grid();
    Density density{outcome.c0, outcome.c1, cfg.g, cfg.sigma};

    std::vector<double> xs(grid.n_points);
    std::vector<double> cdf(grid.n_points);
    double dx = (grid.x_max - grid.x_min) / static_cast<double>(grid.n_points - 1);
    double prev = density(grid.x_min);
    xs[0] = grid.x_min;
    cdf[0] = 0.0;
    for (std::size_t i = 1; i < grid.n_points; ++i) {
        xs[i] = grid.x_min + static_cast<double>(i) * dx;
        double cur = density(xs[i]);
        cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * dx;
        prev = cur;
    }
    double total = cdf.back();
    if (total <= 0.0) throw structural_error("pointer density integrates to zero on the grid");

    MonteCarloReport report;
    report.n_attempted = n;
    report.trials.reserve(n);

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        TrialRecord rec;
        rec.trial = i;
        double u_select = stream_unit(seed, 2 * i);
        rec.postselected = u_select < outcome.success_probability;
        if (rec.postselected) {
            double target = stream_unit(seed, 2 * i + 1) * total;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            std::size_t hi = std::min<std::size_t>(
                static_cast<std::size_t>(std::distance(cdf.begin(), it)), cdf.size() - 1);
            if (hi == 0) hi = 1;
            std::size_t lo = hi - 1;
            double seg = cdf[hi] - cdf[lo];
            double frac = seg > 0.0 ? (target - cdf[lo]) / seg : 0.0;
            rec.reading = xs[lo] + frac * dx;
            ++report.n_postselected;
            sum += rec.reading;
            sum_sq += rec.reading * rec.reading;
        }
        report.trials.push_back(rec);
    }

    if (report.n_postselected > 0) {
        double m = static_cast<double>(report.n_postselected);
        report.sample_mean = sum / m;
        if (report.n_postselected > 1) {
            double var = (sum_sq - m * report.sample_mean * report.sample_mean) / (m - 1.0);
            report.std_error = std::sqrt(std::max(var, 0.0) / m);
        }
    }
    return report;
}

StrongMeasureResult strong_measure(const EvolutionTrace& trace, std::size_t k,
                                   const Operator& projector) {
    if (trace.forward.empty() || k >= trace.forward.size()) {
        throw structural_error("slice " + std::to_string(k) + " out of range");
    }
    if (!projector.is_flagged_projector()) {
        throw structural_error("strong_measure requires a flagged projector");
    }
    const Circuit& c = *trace.circuit;
    const StateVector& psi = trace.forward[k];
    double total = psi.norm_squared();
    if (total < kTol) throw structural_error("no amplitude reaches slice " + std::to_string(k));

    StateVector found = apply(projector, psi);
    std::vector<Amplitude> rest(psi.amplitudes());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= found[i];
    StateVector not_found(psi.basis(), std::move(rest));

    StrongMeasureResult out;
    out.p_found = found.norm_squared() / total;

    auto run_branch =
        [&](const StateVector& branch) -> std::pair<double, std::optional<EvolutionTrace>> {
        if (branch.norm_squared() < 1e-280) return {0.0, std::nullopt};
        StateVector cursor = branch.normalized();
        EvolutionTrace bt;
        bt.circuit = trace.circuit;
        bt.forward.assign(trace.forward.begin(), trace.forward.begin() + k);
        bt.forward.push_back(cursor);
        for (std::size_t i = k; i < c.steps.size(); ++i) {
            cursor = advance_one_step(c, i, cursor);
            bt.forward.push_back(cursor);
        }
        bt.backward = trace.backward;
        double p_post = std::norm(inner(c.postselect, bt.forward.back()));
        return {p_post, std::move(bt)};
    };

    auto [q1, found_trace] = run_branch(found);
    auto [q0, not_found_trace] = run_branch(not_found);

    out.p_post_given_found = q1;
    out.p_post_given_not_found = q0;
    out.found_branch = std::move(found_trace);
    out.not_found_branch = std::move(not_found_trace);

    double w1 = out.p_found;
    double w0 = not_found.norm_squared() / total;
    double den = w1 * q1 + w0 * q0;
    if (den <= kOverlapEpsilon) {
        throw impossible_history_error(
            "both measurement branches have vanishing post-selection probability");
    }
    out.p_found_given_post = w1 * q1 / den;
    return out;
}

} // namespace tsvf
