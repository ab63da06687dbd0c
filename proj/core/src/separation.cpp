#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "varapprox/analysis.hpp"
#include "varapprox/error.hpp"

namespace varapprox {

namespace {

struct TokenRef {
  std::size_t seq;
  std::size_t pos;
  std::span<const double> v;
};

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

bool same_vector(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

using Vocabulary = std::set<std::vector<double>>;

Vocabulary vocabulary_of(const Matrix& seq) {
  Vocabulary v;
  for (std::size_t k = 0; k < seq.rows(); ++k) v.emplace(seq.row(k).begin(), seq.row(k).end());
  return v;
}

std::vector<TokenRef> flatten(std::span<const Matrix> embeddings) {
  if (embeddings.empty()) throw PreconditionError("separateness: no sequences");
  const std::size_t d = embeddings.front().cols();
  std::vector<TokenRef> tokens;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].cols() != d) throw ShapeError("separateness: sequences differ in width");
    if (!all_finite(embeddings[i])) throw DomainError("separateness: non-finite token");
    for (std::size_t k = 0; k < embeddings[i].rows(); ++k) {
      tokens.push_back({i, k, embeddings[i].row(k)});
    }
  }
  if (tokens.empty()) throw PreconditionError("separateness: no tokens");
  return tokens;
}

}  // namespace

std::string_view to_string(SeparationClass c) noexcept {
  switch (c) {
    case SeparationClass::kTokenwise:
      return "tokenwise";
    case SeparationClass::kGammaDelta:
      return "gamma_delta";
    case SeparationClass::kDeltaOnly:
      return "delta_only";
    case SeparationClass::kNone:
      return "none";
  }
  return "none";
}

SeparationReport check_separateness(std::span<const Matrix> embeddings,
                                    const std::optional<SeparationThresholds>& thresholds,
                                    const std::vector<std::vector<int>>* labels) {
  const auto tokens = flatten(embeddings);
  SeparationReport r;
  r.tokens = tokens.size();
  r.gamma_min_measured = std::numeric_limits<double>::infinity();
  for (const auto& t : tokens) {
    const double n = vector_norm(t.v, VectorNorm::kL2);
    r.gamma_min_measured = std::min(r.gamma_min_measured, n);
    r.gamma_max_measured = std::max(r.gamma_max_measured, n);
  }
  Vocabulary vocab;
  for (const auto& t : tokens) vocab.emplace(t.v.begin(), t.v.end());
  r.vocabulary_size = vocab.size();

  auto label_of = [&](const TokenRef& t) -> std::optional<int> {
    if (labels == nullptr || t.seq >= labels->size() || t.pos >= (*labels)[t.seq].size()) {
      return std::nullopt;
    }
    return (*labels)[t.seq][t.pos];
  };

  for (std::size_t a = 0; a < tokens.size(); ++a) {
    for (std::size_t b = a + 1; b < tokens.size(); ++b) {
      if (same_vector(tokens[a].v, tokens[b].v)) {
        const auto la = label_of(tokens[a]);
        const auto lb = label_of(tokens[b]);
        if (la && lb && *la != *lb) {
          std::ostringstream os;
          os << "X[" << tokens[a].seq << "][" << tokens[a].pos << "] == X[" << tokens[b].seq
             << "][" << tokens[b].pos << "] with labels " << *la << " != " << *lb;
          r.collisions.push_back(os.str());
        }
        continue;
      }
      r.delta_measured = std::min(r.delta_measured, distance(tokens[a].v, tokens[b].v));
    }
  }
  r.kappa = r.gamma_min_measured > 0.0 ? r.gamma_max_measured / r.gamma_min_measured
                                       : std::numeric_limits<double>::infinity();

  if (!thresholds) {
    r.cls = r.gamma_min_measured > 0.0 ? SeparationClass::kTokenwise : SeparationClass::kGammaDelta;
    return r;
  }
  bool cond_i = true;
  bool cond_ii = true;
  for (const auto& t : tokens) {
    const double n = vector_norm(t.v, VectorNorm::kL2);
    cond_i = cond_i && n > thresholds->gamma_min;
    cond_ii = cond_ii && n < thresholds->gamma_max;
  }
  const bool cond_iii = r.delta_measured > thresholds->delta;
  if (cond_i && cond_ii && cond_iii) {
    r.cls = SeparationClass::kTokenwise;
  } else if (cond_ii && cond_iii) {
    r.cls = SeparationClass::kGammaDelta;
  } else if (cond_iii) {
    r.cls = SeparationClass::kDeltaOnly;
  } else {
    r.cls = SeparationClass::kNone;
  }
  return r;
}

double log_contextual_delta(double eps, std::size_t vocabulary_size, std::size_t d, double kappa,
                            double gamma_max, std::size_t seq_len) {
  if (eps <= 0.0) throw DomainError("contextual delta: eps must be positive");
  const double v = static_cast<double>(vocabulary_size);
  return -5.0 / eps * v * v * v * v * static_cast<double>(d) * kappa * gamma_max *
         std::log(static_cast<double>(seq_len));
}

ContextualReport contextual_mapping_check(const SeqFn& q, std::span<const Matrix> embeddings,
                                          std::optional<double> eps) {
  const SeparationReport sep = check_separateness(embeddings);
  std::vector<Vocabulary> vocabs;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    vocabs.push_back(vocabulary_of(embeddings[i]));
    if (vocabs.back().size() != embeddings[i].rows()) {
      throw PreconditionError("contextual mapping: sequence " + std::to_string(i) +
                              " repeats a token");
    }
  }

  ContextualReport r;
  r.d = embeddings.front().cols();
  for (const auto& e : embeddings) r.seq_len = std::max(r.seq_len, e.rows());
  r.vocabulary_size = sep.vocabulary_size;
  r.kappa = sep.kappa;
  r.gamma_max = sep.gamma_max_measured;
  r.eps = eps.value_or(std::isfinite(sep.delta_measured) ? sep.delta_measured : 1.0);
  r.guaranteed_gamma = r.gamma_max + r.eps / 4.0;
  r.log_guaranteed_delta =
      log_contextual_delta(r.eps, r.vocabulary_size, r.d, r.kappa, r.gamma_max, r.seq_len);

  std::vector<Matrix> outputs;
  outputs.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    outputs.push_back(q(e));
    if (outputs.back().rows() != e.rows()) {
      throw ShapeError("contextual mapping: q changed the sequence length");
    }
  }
  for (const auto& o : outputs)
    for (std::size_t k = 0; k < o.rows(); ++k)
      r.gamma_measured = std::max(r.gamma_measured, vector_norm(o.row(k), VectorNorm::kL2));

  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i; j < embeddings.size(); ++j) {
      const bool vocab_differs = vocabs[i] != vocabs[j];
      for (std::size_t k = 0; k < embeddings[i].rows(); ++k) {
        for (std::size_t l = (i == j ? k + 1 : 0); l < embeddings[j].rows(); ++l) {
          if (!vocab_differs && same_vector(embeddings[i].row(k), embeddings[j].row(l))) continue;
          ++r.pairs_compared;
          r.delta_measured = std::min(r.delta_measured, distance(outputs[i].row(k), outputs[j].row(l)));
        }
      }
    }
  }
  r.distinct_ok = r.delta_measured > 0.0;
  r.delta_bound_ok = r.distinct_ok && std::log(r.delta_measured) >= r.log_guaranteed_delta;
  return r;
}

}  // namespace varapprox
