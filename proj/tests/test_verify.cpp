#include <algorithm>
#include <string>

#include <gtest/gtest.h>

#include "varapprox/error.hpp"
#include "varapprox/verify.hpp"

using namespace varapprox;

namespace {

std::string failures(const std::vector<CheckResult>& checks) {
  std::string out;
  for (const auto& c : checks)
    if (!c.pass) out += c.name + ": " + c.failure + "\n";
  return out;
}

}  // namespace

class SuiteSeeds : public ::testing::TestWithParam<std::tuple<std::string, std::uint64_t>> {};

TEST_P(SuiteSeeds, AllChecksPass) {
  const auto& [suite, seed] = GetParam();
  VerifyOptions opts;
  opts.seed = seed;
  opts.samples = 500;
  const auto checks = run_suite(suite, opts);
  EXPECT_FALSE(checks.empty());
  EXPECT_EQ(failures(checks), "");
  for (const auto& c : checks) EXPECT_EQ(c.name.rfind(suite + "/", 0), 0u) << c.name;
}

INSTANTIATE_TEST_SUITE_P(Seeds, SuiteSeeds,
                         ::testing::Combine(::testing::Values("interp", "attention", "contextual",
                                                              "perturbation", "universality", "flowar"),
                                            ::testing::Values(1u, 2u, 3u)));

TEST(Verify, SupNormPasses) {
  VerifyOptions opts;
  opts.seed = 5;
  opts.samples = 500;
  opts.norm = FnNorm::kSup;
  for (const char* s : {"perturbation", "universality"}) EXPECT_EQ(failures(run_suite(s, opts)), "") << s;
}

TEST(Verify, ResultsSortedAndNamed) {
  VerifyOptions opts;
  opts.seed = 7;
  const auto checks = run_suite("interp", opts);
  EXPECT_TRUE(std::is_sorted(checks.begin(), checks.end(),
                             [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; }));
  const auto has = [&](const std::string& n) {
    return std::any_of(checks.begin(), checks.end(), [&](const CheckResult& c) { return c.name == n; });
  };
  EXPECT_TRUE(has("interp/operator_equivalence"));
  EXPECT_TRUE(has("interp/pyramid_base_identity"));
}

TEST(Verify, UnknownSuite) {
  EXPECT_FALSE(is_suite("nosuch"));
  EXPECT_TRUE(is_suite("all"));
  EXPECT_THROW(run_suite("nosuch", {}), DomainError);
}

TEST(Verify, ReportDocumentShape) {
  VerifyOptions opts;
  opts.seed = 7;
  const auto checks = run_suite("universality", opts);
  RunManifest m;
  m.command_line = {"varapprox", "verify", "universality"};
  m.suite = "universality";
  m.options = opts;
  m.timestamp = "2000-01-01T00:00:00Z";
  m.version = std::string(version());
  const Json doc = report_document(m, checks);
  EXPECT_EQ(doc.at("manifest").at("seed"), 7);
  EXPECT_EQ(doc.at("manifest").at("alpha"), "l2");
  EXPECT_EQ(doc.at("manifest").at("summary").at("checks"), checks.size());
  EXPECT_EQ(doc.at("reports"), report_body(checks));
  bool saw_geometric = false;
  for (const auto& r : doc.at("reports")) {
    if (r.at("kind") != "bound_family" || !r.contains("tightest")) continue;
    const Json& t = r.at("tightest");
    if (t.contains("extras") && t.at("extras").contains("geometric_sum_bound")) saw_geometric = true;
  }
  EXPECT_TRUE(saw_geometric);
}

TEST(Verify, SameSeedSameBody) {
  VerifyOptions opts;
  opts.seed = 11;
  opts.samples = 300;
  for (const char* s : {"contextual", "perturbation", "flowar"}) {
    EXPECT_EQ(report_body(run_suite(s, opts)).dump(), report_body(run_suite(s, opts)).dump()) << s;
  }
}
