#include "fieldnet/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <limits>
#include <numeric>
#include <cmath>
#include <thread>

#include "fieldnet/errors.hpp"

namespace fieldnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<std::vector<int>> block_unit_lists(const FieldLayout& layout) {
    std::vector<std::vector<int>> blocks(layout.n_blocks());
    for (int v = 1; v <= layout.n(); ++v)
        blocks[unit_factors(layout, v).block - 1].push_back(v - 1);
    return blocks;
}

struct DrawResult {
    Design design;
    double phi = kInestimable;
    long long evaluations = 0;
};

Design draw_structure(const FieldLayout& layout, int m, OptimizerMode mode, Rng& rng) {
    const int n = layout.n();
    Design design;
    design.m = m;
    design.assignment.assign(n, 0);

    auto shuffle_tail = [&rng](std::vector<int>& values) {
        for (int i = static_cast<int>(values.size()) - 1; i > 0; --i)
            std::swap(values[i], values[uniform_below(rng, i + 1)]);
    };

    switch (mode) {
        case OptimizerMode::resolved: {
            std::vector<int> perm(m);
            for (const auto& units : block_unit_lists(layout)) {
                std::iota(perm.begin(), perm.end(), 1);
                shuffle_tail(perm);
                for (std::size_t i = 0; i < units.size(); ++i)
                    design.assignment[units[i]] = perm[i];
            }
            break;
        }
        case OptimizerMode::equal_replicated: {
            const int r = n / m;
            std::vector<int> pool;
            pool.reserve(n);
            for (int t = 1; t <= m; ++t) pool.insert(pool.end(), r, t);
            shuffle_tail(pool);
            design.assignment = pool;
            break;
        }
        case OptimizerMode::unrestricted: {
            // Near-equal replication with all treatments present guards
            // against singular starts; later exchanges are free to unbalance.
            std::vector<int> pool;
            pool.reserve(n);
            const int r = n / m;
            for (int t = 1; t <= m; ++t) pool.insert(pool.end(), r, t);
            for (int t = 1; static_cast<int>(pool.size()) < n; ++t) pool.push_back(t);
            shuffle_tail(pool);
            design.assignment = pool;
            break;
        }
    }
    return design;
}

void check_mode_feasible(const FieldLayout& layout, int m, OptimizerMode mode) {
    const int n = layout.n();
    if (m < 1) throw ConfigError("treatment count must be at least 1");
    if (m > n)
        throw ConfigError("cannot place " + std::to_string(m) + " treatments on " +
                          std::to_string(n) + " units");
    switch (mode) {
        case OptimizerMode::resolved:
            for (const auto& units : block_unit_lists(layout))
                if (static_cast<int>(units.size()) != m)
                    throw ConfigError("resolved mode needs every block size equal to the "
                                      "treatment count; a block has " +
                                      std::to_string(units.size()) + " units but m is " +
                                      std::to_string(m));
            break;
        case OptimizerMode::equal_replicated:
            if (n % m != 0)
                throw ConfigError("equal replication needs the treatment count to divide " +
                                  std::to_string(n));
            break;
        case OptimizerMode::unrestricted:
            break;
    }
}

DrawResult draw_estimable(const PhiEvaluator& evaluator, const FieldLayout& layout,
                          OptimizerMode mode, Rng& rng) {
    check_mode_feasible(layout, evaluator.m(), mode);
    DrawResult out;
    for (int attempt = 0; attempt < 100; ++attempt) {
        out.design = draw_structure(layout, evaluator.m(), mode, rng);
        out.phi = evaluator.phi(out.design.assignment);
        ++out.evaluations;
        if (std::isfinite(out.phi)) return out;
    }
    throw RunError("no estimable starting design after 100 draws for model " +
                   model_name(evaluator.spec()) + " in mode " + mode_name(mode));
}

}  // namespace

OptimizerMode mode_from_name(std::string_view name) {
    std::string l(name);
    std::transform(l.begin(), l.end(), l.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (l == "resolved") return OptimizerMode::resolved;
    if (l == "equal_replicated" || l == "equal-replicated") return OptimizerMode::equal_replicated;
    if (l == "unrestricted") return OptimizerMode::unrestricted;
    throw ConfigError("unknown mode '" + std::string(name) +
                      "' (valid: resolved, equal_replicated, unrestricted)");
}

std::string mode_name(OptimizerMode mode) {
    switch (mode) {
        case OptimizerMode::resolved: return "resolved";
        case OptimizerMode::equal_replicated: return "equal_replicated";
        case OptimizerMode::unrestricted: return "unrestricted";
    }
    return "?";
}

Rng make_restart_rng(std::uint64_t seed, int restart_index) {
    const std::uint64_t stream =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(restart_index) + 1));
    return Rng(stream);
}

int uniform_below(Rng& rng, int bound) {
    if (bound <= 0) throw std::invalid_argument("uniform_below needs a positive bound");
    const std::uint64_t span = static_cast<std::uint64_t>(bound);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return static_cast<int>(draw % span);
}

Design random_design(const PhiEvaluator& evaluator, const FieldLayout& layout,
                     OptimizerMode mode, Rng& rng) {
    return draw_estimable(evaluator, layout, mode, rng).design;
}

PassOutcome interchange_pass(Design& design, const PhiEvaluator& evaluator,
                             const FieldLayout& layout, InterchangeScope scope,
                             double current_phi, double improvement_tol) {
    if (!std::isfinite(current_phi))
        throw std::invalid_argument("interchange_pass needs a finite starting criterion value");

    PassOutcome outcome;
    outcome.phi = current_phi;
    auto& t = design.assignment;

    auto try_swap = [&](int u, int v) {
        if (t[u] == t[v]) return;
        std::swap(t[u], t[v]);
        const double candidate = evaluator.phi(t);
        ++outcome.evaluations;
        if (candidate < outcome.phi * (1.0 - improvement_tol)) {
            outcome.phi = candidate;
            outcome.improved = true;
        } else {
            std::swap(t[u], t[v]);
        }
    };

    if (scope == InterchangeScope::within_block) {
        for (const auto& units : block_unit_lists(layout))
            for (std::size_t i = 0; i < units.size(); ++i)
                for (std::size_t j = i + 1; j < units.size(); ++j)
                    try_swap(units[i], units[j]);
    } else {
        const int n = static_cast<int>(t.size());
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                try_swap(u, v);
    }
    return outcome;
}

PassOutcome exchange_pass(Design& design, const PhiEvaluator& evaluator,
                          double current_phi, double improvement_tol) {
    if (!std::isfinite(current_phi))
        throw std::invalid_argument("exchange_pass needs a finite starting criterion value");

    PassOutcome outcome;
    outcome.phi = current_phi;
    auto& t = design.assignment;
    const int n = static_cast<int>(t.size());

    for (int u = 0; u < n; ++u) {
        const int original = t[u];
        double best_phi = outcome.phi * (1.0 - improvement_tol);
        int best_treatment = 0;
        for (int candidate = 1; candidate <= design.m; ++candidate) {
            if (candidate == original) continue;
            t[u] = candidate;
            const double phi = evaluator.phi(t);
            ++outcome.evaluations;
            if (phi < best_phi) {  // strict: ties keep the lowest label
                best_phi = phi;
                best_treatment = candidate;
            }
        }
        if (best_treatment != 0) {
            t[u] = best_treatment;
            outcome.phi = best_phi;
            outcome.improved = true;
        } else {
            t[u] = original;
        }
    }
    return outcome;
}

namespace {

struct RestartResult {
    Design design;
    double phi = kInestimable;
    int passes = 0;
    long long evaluations = 0;
    bool init_failed = false;
};

RestartResult run_restart(const PhiEvaluator& evaluator, const FieldLayout& layout,
                          const OptimizerConfig& config, int restart_index) {
    RestartResult result;
    Rng rng = make_restart_rng(config.seed, restart_index);

    DrawResult draw;
    try {
        draw = draw_estimable(evaluator, layout, config.mode, rng);
    } catch (const RunError&) {
        result.init_failed = true;
        result.evaluations = 100;
        return result;
    }
    result.design = std::move(draw.design);
    result.phi = draw.phi;
    result.evaluations = draw.evaluations;

    while (result.passes < config.max_passes) {
        bool improved = false;
        if (config.mode == OptimizerMode::unrestricted) {
            const PassOutcome ex = exchange_pass(result.design, evaluator, result.phi,
                                                 config.improvement_tol);
            result.phi = ex.phi;
            result.evaluations += ex.evaluations;
            ++result.passes;
            improved = ex.improved;
            if (result.passes >= config.max_passes) break;
            const PassOutcome ic = interchange_pass(result.design, evaluator, layout,
                                                    InterchangeScope::global, result.phi,
                                                    config.improvement_tol);
            result.phi = ic.phi;
            result.evaluations += ic.evaluations;
            ++result.passes;
            improved = improved || ic.improved;
        } else {
            const InterchangeScope scope = config.mode == OptimizerMode::resolved
                                               ? InterchangeScope::within_block
                                               : InterchangeScope::global;
            const PassOutcome ic = interchange_pass(result.design, evaluator, layout, scope,
                                                    result.phi, config.improvement_tol);
            result.phi = ic.phi;
            result.evaluations += ic.evaluations;
            ++result.passes;
            improved = ic.improved;
        }
        if (!improved) break;
    }
    return result;
}

}  // namespace

OptimizerResult optimize(const ModelSpec& spec, const FieldLayout& layout,
                         const NetworkGraph* graph, int m, const OptimizerConfig& config) {
    if (config.n_restarts < 1) throw ConfigError("n_restarts must be at least 1");
    if (config.max_passes < 1) throw ConfigError("max_passes must be at least 1");
    check_mode_feasible(layout, m, config.mode);

    const PhiEvaluator evaluator(spec, layout, graph, m);

    std::vector<RestartResult> restarts(config.n_restarts);
    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min(config.n_restarts,
                                 config.threads > 0 ? config.threads : static_cast<int>(hardware));

    if (workers <= 1) {
        for (int i = 0; i < config.n_restarts; ++i)
            restarts[i] = run_restart(evaluator, layout, config, i);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (int i = next.fetch_add(1); i < config.n_restarts; i = next.fetch_add(1))
                restarts[i] = run_restart(evaluator, layout, config, i);
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Ordered reduction by restart index keeps the result independent of scheduling.
    OptimizerResult result;
    result.per_restart_phi.reserve(config.n_restarts);
    result.passes_used.reserve(config.n_restarts);
    int best_index = -1;
    for (int i = 0; i < config.n_restarts; ++i) {
        result.per_restart_phi.push_back(restarts[i].phi);
        result.passes_used.push_back(restarts[i].passes);
        result.evaluations += restarts[i].evaluations;
        if (!restarts[i].init_failed &&
            (best_index < 0 || restarts[i].phi < result.best_phi)) {
            best_index = i;
            result.best_phi = restarts[i].phi;
        }
    }
    if (best_index < 0 || !std::isfinite(result.best_phi))
        throw RunError("every restart failed to find an estimable design for model " +
                       model_name(spec) + " in mode " + mode_name(config.mode));
    result.best_design = restarts[best_index].design;
    return result;
}

namespace {

double candidate_count(const FieldLayout& layout, int m, OptimizerMode mode) {
    const int n = layout.n();
    auto factorial = [](int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    switch (mode) {
        case OptimizerMode::resolved:
            return std::pow(factorial(m), layout.n_blocks());
        case OptimizerMode::equal_replicated: {
            double count = factorial(n);
            for (int t = 0; t < m; ++t) count /= factorial(n / m);
            return count;
        }
        case OptimizerMode::unrestricted:
            return std::pow(static_cast<double>(m), n - 1);
    }
    return std::numeric_limits<double>::infinity();
}

template <typename Visit>
void enumerate_resolved(const std::vector<std::vector<int>>& blocks, std::vector<int>& t,
                        std::size_t block_index, Visit&& visit) {
    if (block_index == blocks.size()) {
        visit();
        return;
    }
    const auto& units = blocks[block_index];
    std::vector<int> perm(units.size());
    std::iota(perm.begin(), perm.end(), 1);
    do {
        for (std::size_t i = 0; i < units.size(); ++i) t[units[i]] = perm[i];
        enumerate_resolved(blocks, t, block_index + 1, visit);
    } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace

OptimizerResult brute_force_optimum(const ModelSpec& spec, const FieldLayout& layout,
                                    const NetworkGraph* graph, int m, OptimizerMode mode,
                                    std::uint64_t guard) {
    check_mode_feasible(layout, m, mode);
    const double count = candidate_count(layout, m, mode);
    if (!(count <= static_cast<double>(guard)))
        throw ConfigError("brute force would enumerate about " + std::to_string(count) +
                          " candidates, above the guard of " + std::to_string(guard));

    const PhiEvaluator evaluator(spec, layout, graph, m);
    const int n = layout.n();

    OptimizerResult result;
    result.best_design.m = m;
    auto consider = [&](const std::vector<int>& t) {
        const double phi = evaluator.phi(t);
        ++result.evaluations;
        if (phi < result.best_phi) {
            result.best_phi = phi;
            result.best_design.assignment = t;
        }
    };

    std::vector<int> t(n, 1);
    switch (mode) {
        case OptimizerMode::resolved:
            enumerate_resolved(block_unit_lists(layout), t, 0, [&] { consider(t); });
            break;
        case OptimizerMode::equal_replicated: {
            const int r = n / m;
            t.clear();
            for (int treatment = 1; treatment <= m; ++treatment) t.insert(t.end(), r, treatment);
            do {
                consider(t);
            } while (std::next_permutation(t.begin(), t.end()));
            break;
        }
        case OptimizerMode::unrestricted: {
            // First unit pinned to treatment 1; phi is invariant to relabelling.
            std::fill(t.begin(), t.end(), 1);
            while (true) {
                consider(t);
                int pos = n - 1;
                while (pos >= 1 && t[pos] == m) t[pos--] = 1;
                if (pos < 1) break;
                ++t[pos];
            }
            break;
        }
    }
    if (!std::isfinite(result.best_phi))
        throw RunError("no estimable design exists for model " + model_name(spec) +
                       " in mode " + mode_name(mode));
    result.per_restart_phi = {result.best_phi};
    result.passes_used = {1};
    return result;
}

}  // namespace fieldnet
