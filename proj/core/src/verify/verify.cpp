#include <algorithm>
#include <cmath>
#include <sstream>

#include "common.hpp"
#include "varapprox/error.hpp"

#ifndef VARAPPROX_VERSION
#define VARAPPROX_VERSION "0.0.0"
#endif

namespace varapprox {

namespace suites {

std::string num_str(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void PropertyCheck::trial(double error, const std::string& what) {
  ++trials_;
  if (std::isnan(error)) error = std::numeric_limits<double>::infinity();
  worst_ = std::max(worst_, error);
  if (error <= threshold_) {
    ++passed_;
  } else if (first_failure_.empty()) {
    first_failure_ = (what.empty() ? "trial " + std::to_string(trials_) : what) + ": error " +
                     num_str(error) + " exceeds " + num_str(threshold_);
  }
}

void PropertyCheck::expect(bool ok, const std::string& what) {
  ++trials_;
  if (ok) {
    ++passed_;
  } else if (first_failure_.empty()) {
    first_failure_ = what;
  }
}

CheckResult PropertyCheck::finish() const {
  CheckResult r;
  r.name = name_;
  r.pass = trials_ > 0 && passed_ == trials_;
  if (trials_ == 0) {
    r.failure = "no trials ran";
  } else {
    r.failure = first_failure_;
  }
  r.body = Json{{"kind", "property"},
                {"name", name_},
                {"pass", r.pass},
                {"trials", trials_},
                {"trials_passed", passed_},
                {"threshold", json_number(threshold_)},
                {"worst_error", json_number(worst_)},
                {"metrics", metrics_}};
  if (!r.pass) r.body["failure"] = r.failure;
  return r;
}

void BoundFamily::add(const BoundReport& r) {
  ++trials_;
  if (r.pass) {
    ++passed_;
  } else if (first_failure_.empty()) {
    std::string why = r.notes.empty() ? "lhs " + num_str(r.lhs_measured) + " > rhs " +
                                            num_str(r.rhs_theoretical)
                                      : r.notes.back();
    first_failure_ = "trial " + std::to_string(trials_) + ": " + why;
  }
  max_lhs_ = std::max(max_lhs_, r.lhs_measured);
  if (r.rhs_theoretical > 0.0) max_ratio_ = std::max(max_ratio_, r.lhs_measured / r.rhs_theoretical);
  if (!have_tightest_ || r.slack < tightest_.slack) {
    tightest_ = r;
    have_tightest_ = true;
  }
}

void BoundFamily::expect_rejection(bool rejected, const std::string& what) {
  ++trials_;
  if (rejected) {
    ++passed_;
  } else if (first_failure_.empty()) {
    first_failure_ = what;
  }
}

CheckResult BoundFamily::finish() const {
  CheckResult r;
  r.name = name_;
  r.pass = trials_ > 0 && passed_ == trials_;
  r.failure = trials_ == 0 ? "no trials ran" : first_failure_;
  r.body = Json{{"kind", "bound_family"},
                {"name", name_},
                {"pass", r.pass},
                {"trials", trials_},
                {"trials_passed", passed_},
                {"max_lhs", json_number(max_lhs_)},
                {"max_lhs_over_rhs", json_number(max_ratio_)},
                {"metrics", metrics_}};
  if (have_tightest_) r.body["tightest"] = to_json(tightest_);
  if (!r.pass) r.body["failure"] = r.failure;
  return r;
}

Sampling sampling_for(const VerifyOptions& opts, const Domain& domain, const Rng& trial_rng) {
  Sampling s;
  s.domain = domain;
  s.norm = opts.norm;
  s.samples = opts.samples;
  s.seed = trial_rng.seed();
  s.tol = opts.tol;
  return s;
}

}  // namespace suites

namespace {

using SuiteFn = std::vector<CheckResult> (*)(const VerifyOptions&);

struct SuiteEntry {
  const char* name;
  SuiteFn run;
};

constexpr SuiteEntry kSuites[] = {
    {"interp", suites::interp},
    {"attention", suites::attention},
    {"contextual", suites::contextual},
    {"perturbation", suites::perturbation},
    {"universality", suites::universality},
    {"flowar", suites::flowar},
};

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kSuites) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

bool is_suite(std::string_view name) {
  if (name == "all") return true;
  return std::any_of(std::begin(kSuites), std::end(kSuites),
                     [&](const SuiteEntry& e) { return name == e.name; });
}

std::vector<CheckResult> run_suite(std::string_view suite, const VerifyOptions& opts) {
  if (!is_suite(suite)) throw DomainError("unknown suite '" + std::string(suite) + "'");
  std::vector<CheckResult> out;
  for (const auto& e : kSuites) {
    if (suite != "all" && suite != e.name) continue;
    auto part = e.run(opts);
    for (auto& c : part) out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
  return out;
}

Json report_body(const std::vector<CheckResult>& checks) {
  Json reports = Json::array();
  for (const auto& c : checks) reports.push_back(c.body);
  return reports;
}

Json report_document(const RunManifest& m, const std::vector<CheckResult>& checks) {
  std::size_t passed = 0;
  Json failed = Json::array();
  for (const auto& c : checks) {
    if (c.pass) {
      ++passed;
    } else {
      failed.push_back(c.name);
    }
  }
  Json suites_run = Json::array();
  for (const auto& name : suite_names()) {
    if (m.suite == "all" || m.suite == name) suites_run.push_back(name);
  }
  Json manifest{{"command_line", m.command_line},
                {"seed", m.options.seed},
                {"samples", m.options.samples},
                {"alpha", std::string(to_string(m.options.norm))},
                {"tolerances", {{"bound_rhs", m.options.tol}}},
                {"suites", suites_run},
                {"timestamp", m.timestamp},
                {"version", m.version.empty() ? std::string(version()) : m.version},
                {"summary", {{"checks", checks.size()}, {"passed", passed}, {"failed", failed}}}};
  return Json{{"manifest", manifest}, {"reports", report_body(checks)}};
}

std::string_view version() noexcept { return VARAPPROX_VERSION; }

}  // namespace varapprox
