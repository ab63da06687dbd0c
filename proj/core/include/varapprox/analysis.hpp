#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "varapprox/tensor.hpp"

namespace varapprox {

// ---------------------------------------------------------------------------
// Separateness and contextual mapping
// ---------------------------------------------------------------------------

enum class SeparationClass { kTokenwise, kGammaDelta, kDeltaOnly, kNone };

std::string_view to_string(SeparationClass c) noexcept;

/// Target constants for the three separateness conditions.
struct SeparationThresholds {
  double gamma_min = 0.0;
  double gamma_max = std::numeric_limits<double>::infinity();
  double delta = 0.0;
};

struct SeparationReport {
  double gamma_min_measured = 0.0;
  double gamma_max_measured = 0.0;
  /// Minimum distance between unequal tokens; +infinity when no such pair exists.
  double delta_measured = std::numeric_limits<double>::infinity();
  double kappa = 0.0;
  SeparationClass cls = SeparationClass::kNone;
  std::size_t tokens = 0;
  std::size_t vocabulary_size = 0;
  /// Pairs with different labels whose vectors coincide.
  std::vector<std::string> collisions;
};

/// Measures norms and the minimum distinct-pair distance over all tokens of all
/// sequences (brute force over every pair) and classifies the collection.
///
/// Without thresholds the measured values themselves are used: the collection
/// is tokenwise separated when no token is zero, and (gamma, delta)-separated
/// otherwise. With thresholds each condition is tested strictly.
/// `labels[i][k]`, when given, names token k of sequence i; equal vectors with
/// different labels are reported as collisions and excluded from delta.
SeparationReport check_separateness(std::span<const Matrix> embeddings,
                                    const std::optional<SeparationThresholds>& thresholds = {},
                                    const std::vector<std::vector<int>>* labels = nullptr);

/// log of exp(-5 eps^-1 |V|^4 d kappa gamma_max log L), kept in log space.
double log_contextual_delta(double eps, std::size_t vocabulary_size, std::size_t d, double kappa,
                            double gamma_max, std::size_t seq_len);

using SeqFn = std::function<Matrix(const Matrix&)>;

struct ContextualReport {
  double gamma_measured = 0.0;
  double delta_measured = std::numeric_limits<double>::infinity();
  double guaranteed_gamma = 0.0;      // gamma_max + eps / 4
  double log_guaranteed_delta = 0.0;  // log of the guaranteed separation
  double eps = 0.0;
  double kappa = 0.0;
  double gamma_max = 0.0;
  std::size_t vocabulary_size = 0;
  std::size_t d = 0;
  std::size_t seq_len = 0;
  std::size_t pairs_compared = 0;
  bool distinct_ok = false;
  /// log(delta_measured) >= log_guaranteed_delta.
  bool delta_bound_ok = false;
};

/// Evaluates q on every sequence and measures output separation over pairs of
/// positions whose vocabularies differ or whose tokens differ.
///
/// `eps` defaults to the measured token separation of the embeddings.
/// Throws PreconditionError if a sequence repeats a token.
ContextualReport contextual_mapping_check(const SeqFn& q, std::span<const Matrix> embeddings,
                                          std::optional<double> eps = {});

// ---------------------------------------------------------------------------
// Function norms and Lipschitz estimates
// ---------------------------------------------------------------------------

using MatFn = std::function<Matrix(const Matrix&)>;

/// Function norm used for distances: root-mean-square over the uniform measure
/// (kL2, the normalized alpha = 2 integral) or the maximum over samples (kSup).
/// The pointwise norm is always the Frobenius norm.
enum class FnNorm { kL2, kSup };

std::string_view to_string(FnNorm n) noexcept;
FnNorm fn_norm_from_string(std::string_view name);

/// Uniform cube [lo, hi]^(rows x cols).
struct Domain {
  std::size_t rows = 1;
  std::size_t cols = 1;
  double lo = -1.0;
  double hi = 1.0;
};

/// Draws `count` points; the first k points are the same for every count >= k.
std::vector<Matrix> sample_domain(const Domain& domain, std::size_t count, std::uint64_t seed);

/// Aggregates pointwise values with the chosen function norm.
double aggregate(std::span<const double> pointwise, FnNorm norm);

/// ||f - g|| over the given points.
double fn_distance_on(const MatFn& f, const MatFn& g, std::span<const Matrix> points, FnNorm norm);

/// Monte Carlo estimate of ||f - g|| on the cube.
double estimate_fn_distance(const MatFn& f, const MatFn& g, const Domain& domain, FnNorm norm,
                            std::size_t samples, std::uint64_t seed);

/// max ||f(x) - f(y)|| / ||x - y|| over sampled pairs; a lower bound on the Lipschitz constant.
double estimate_lipschitz(const MatFn& f, const Domain& domain, std::size_t pairs,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bound checks
// ---------------------------------------------------------------------------

struct BoundReport {
  std::string name;
  double lhs_measured = 0.0;
  double rhs_theoretical = 0.0;
  double slack = 0.0;
  bool pass = false;
  bool hypotheses_met = true;
  std::size_t samples = 0;
  std::string norm_kind;
  std::vector<std::uint64_t> seeds;
  double tolerance = 1e-7;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, double>> extras;

  void add(std::string key, double value) { extras.emplace_back(std::move(key), value); }
  std::optional<double> extra(std::string_view key) const;
  /// Flags a failed hypothesis; the report can no longer pass.
  void violate(std::string what);
  /// slack = rhs - lhs; pass = hypotheses_met && lhs <= rhs + tolerance.
  void finalize();
};

struct Sampling {
  Domain domain;
  FnNorm norm = FnNorm::kL2;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  double tol = 1e-7;
};

/// ||f o g - tau o phi|| <= K1 eps1 + eps2.
///
/// eps1 is checked against ||g - phi|| on the sampled inputs and eps2 against
/// ||(f - tau) o phi|| on the same inputs. K1, when absent, is the largest
/// ratio ||f(g x) - f(phi x)|| / ||g x - phi x|| seen on those inputs;
/// when given it is checked against that ratio.
BoundReport two_layer_bound_check(const MatFn& f, const MatFn& g, const MatFn& tau,
                                  const MatFn& phi, std::optional<double> k1, double eps1,
                                  double eps2, const Sampling& sampling);

/// Regime of the single-substitution bound: kLinear assumes every v_i is linear
/// (checked on samples); kLipschitz only needs each v_i to be K2-Lipschitz.
enum class SubstitutionRegime { kLinear, kLipschitz };

std::string_view to_string(SubstitutionRegime r) noexcept;

/// Replacing u_j by v_j inside v_n o ... o v_{j+1} o u_j o ... o u_1 moves the
/// output by at most K2^(n-j) eps. `j` is 1-based.
BoundReport one_layer_substitution_check(std::span<const MatFn> us, std::span<const MatFn> vs,
                                         std::size_t j, double eps, double k2,
                                         const Sampling& sampling,
                                         SubstitutionRegime regime = SubstitutionRegime::kLinear);

/// ||U - V|| <= sum_j ||H_j - H_{j-1}||, H_j = v_n o ... o v_{j+1} o u_j o ... o u_1.
BoundReport telescoping_check(std::span<const MatFn> us, std::span<const MatFn> vs,
                              const Sampling& sampling);

/// One layer f_i o g_i of a target stack, or tau_i o phi_i of a model stack.
struct LayerPair {
  MatFn outer;  // f_i or tau_i
  MatFn inner;  // g_i or phi_i
};

enum class ResampleMode { kUp, kDown };

std::string_view to_string(ResampleMode m) noexcept;

/// Global bound for a stack of n layers:
///   lhs <= (K2^n - 1)/(K2 - 1) max_i(K1_i eps1_i + eps2_i) <= K2^n max_i(...).
///
/// Throws HypothesisError("Assume K2 > 2") when k2 <= 2. Every per-layer
/// constant is checked on the points the target stack actually visits; the
/// K2 check covers every model layer along every hybrid pair.
BoundReport universality_bound_check(std::span<const LayerPair> target,
                                     std::span<const LayerPair> model, double k2,
                                     std::span<const double> k1s, std::span<const double> eps1s,
                                     std::span<const double> eps2s, ResampleMode mode,
                                     const Sampling& sampling);

/// Per-layer constants measured on the points the target stack visits:
/// eps1_i = ||g_i - phi_i||, eps2_i = ||(f_i - tau_i) o phi_i||, K1_i the largest
/// ratio of f_i over the (g_i x, phi_i x) pairs, K2 the largest model-layer
/// ratio over every hybrid pair.
struct UniversalityConstants {
  std::vector<double> k1s;
  std::vector<double> eps1s;
  std::vector<double> eps2s;
  double k2 = 0.0;
};

UniversalityConstants measure_universality_constants(std::span<const LayerPair> target,
                                                     std::span<const LayerPair> model,
                                                     const Sampling& sampling);

}  // namespace varapprox
