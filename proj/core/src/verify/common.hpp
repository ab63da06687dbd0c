#pragma once

#include <string>
#include <vector>

#include "varapprox/analysis.hpp"
#include "varapprox/json_io.hpp"
#include "varapprox/rng.hpp"
#include "varapprox/verify.hpp"

namespace varapprox::suites {

std::vector<CheckResult> interp(const VerifyOptions& opts);
std::vector<CheckResult> attention(const VerifyOptions& opts);
std::vector<CheckResult> contextual(const VerifyOptions& opts);
std::vector<CheckResult> perturbation(const VerifyOptions& opts);
std::vector<CheckResult> universality(const VerifyOptions& opts);
std::vector<CheckResult> flowar(const VerifyOptions& opts);

std::string num_str(double x);

/// Root generator of a check, keyed by its name.
inline Rng check_rng(const VerifyOptions& opts, const std::string& name) {
  return Rng(opts.seed, name);
}

/// Property check over a family of trials, tracking the worst observed error.
class PropertyCheck {
 public:
  PropertyCheck(std::string name, double threshold) : name_(std::move(name)), threshold_(threshold) {}

  /// Records one trial; it passes when error <= threshold.
  void trial(double error, const std::string& what = {});
  /// Records a boolean trial.
  void expect(bool ok, const std::string& what);
  void metric(const std::string& key, Json value) { metrics_[key] = std::move(value); }

  CheckResult finish() const;

 private:
  std::string name_;
  double threshold_;
  std::size_t trials_ = 0;
  std::size_t passed_ = 0;
  double worst_ = 0.0;
  std::string first_failure_;
  Json metrics_ = Json::object();
};

/// Family of BoundReports folded into one result that keeps the tightest trial.
class BoundFamily {
 public:
  explicit BoundFamily(std::string name) : name_(std::move(name)) {}

  void add(const BoundReport& r);
  /// A trial that must be rejected with a named hypothesis.
  void expect_rejection(bool rejected, const std::string& what);
  void metric(const std::string& key, Json value) { metrics_[key] = std::move(value); }

  CheckResult finish() const;

 private:
  std::string name_;
  std::size_t trials_ = 0;
  std::size_t passed_ = 0;
  bool have_tightest_ = false;
  BoundReport tightest_;
  std::string first_failure_;
  double max_lhs_ = 0.0;
  double max_ratio_ = 0.0;
  Json metrics_ = Json::object();
};

Sampling sampling_for(const VerifyOptions& opts, const Domain& domain, const Rng& trial_rng);

}  // namespace varapprox::suites
