#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "fieldnet/criterion.hpp"

namespace fieldnet {

/// Search-space restriction for the interchange/exchange search.
///
///   resolved          every block holds each treatment exactly once;
///                     interchanges stay within blocks
///   equal_replicated  every treatment replicated n/m times; interchanges
///                     range over the whole design
///   unrestricted      replication free to vary; alternates per-unit
///                     exchanges with global interchanges
enum class OptimizerMode { resolved, equal_replicated, unrestricted };

OptimizerMode mode_from_name(std::string_view name);
std::string mode_name(OptimizerMode mode);

struct OptimizerConfig {
    OptimizerMode mode = OptimizerMode::resolved;
    int n_restarts = 10;
    int max_passes = 50;
    std::uint64_t seed = 0;
    double improvement_tol = 1e-10;  ///< accept swaps with phi' < phi * (1 - tol)
    int threads = 0;                 ///< workers for restarts; 0 = hardware threads
};

struct OptimizerResult {
    Design best_design;
    double best_phi = kInestimable;
    std::vector<double> per_restart_phi;
    std::vector<int> passes_used;
    long long evaluations = 0;  ///< total criterion evaluations
};

using Rng = std::mt19937_64;

/// Restart RNG stream derived from (seed, restart index); restarts therefore
/// give identical results whether run serially or concurrently.
Rng make_restart_rng(std::uint64_t seed, int restart_index);

/// Uniform draw from {0, ..., bound-1} by rejection; stdlib-independent so
/// results are reproducible across standard library implementations.
int uniform_below(Rng& rng, int bound);

/// Draws a random design satisfying the mode structure and redraws (at most
/// 100 attempts) until all treatment contrasts are estimable under the
/// evaluator's model. Throws RunError naming the model and mode after 100
/// failures, or ConfigError when the mode constraints are unsatisfiable
/// (resolved needs every block size equal to m; m must not exceed n).
Design random_design(const PhiEvaluator& evaluator, const FieldLayout& layout,
                     OptimizerMode mode, Rng& rng);

enum class InterchangeScope { within_block, global };

struct PassOutcome {
    bool improved = false;
    double phi = kInestimable;
    long long evaluations = 0;
};

/// One systematic sweep of pairwise treatment interchanges: block by block
/// for within_block scope, all unit pairs for global scope. Pairs carrying
/// the same treatment are skipped; a swap is kept exactly when it improves
/// phi beyond the relative tolerance, otherwise undone. Preserves replication
/// counts, and the resolved structure under within_block scope.
PassOutcome interchange_pass(Design& design, const PhiEvaluator& evaluator,
                             const FieldLayout& layout, InterchangeScope scope,
                             double current_phi, double improvement_tol = 1e-10);

/// One sweep of treatment exchanges: visits each unit in order and replaces
/// its treatment with the best strictly improving alternative (ties broken
/// by lowest label); candidates that lose estimability evaluate to +infinity
/// and are never kept.
PassOutcome exchange_pass(Design& design, const PhiEvaluator& evaluator,
                          double current_phi, double improvement_tol = 1e-10);

/// Multi-start local search. Per restart: draw a random design for the mode,
/// then repeat passes until one full pass yields no improvement or max_passes
/// is reached (resolved: within-block interchanges; equal_replicated: global
/// interchanges; unrestricted: alternate an exchange sweep with a global
/// interchange sweep until a joint fixed point). Deterministic given the
/// seed, including with concurrent restarts.
OptimizerResult optimize(const ModelSpec& spec, const FieldLayout& layout,
                         const NetworkGraph* graph, int m, const OptimizerConfig& config);

/// Exhaustively enumerates every assignment valid for the mode and returns
/// the global minimum. Unrestricted enumeration fixes the first unit's
/// treatment, which phi's relabelling invariance justifies. Refuses with
/// ConfigError when the candidate count exceeds the guard.
OptimizerResult brute_force_optimum(const ModelSpec& spec, const FieldLayout& layout,
                                    const NetworkGraph* graph, int m, OptimizerMode mode,
                                    std::uint64_t guard = 10'000'000);

}  // namespace fieldnet
