#pragma once

// The acceptance checks, shared by `qmoments verify` and the acceptance test
// binary.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qmoments/arith_sieves.hpp"
#include "qmoments_app/report.hpp"

namespace qmoments::app {

class CriterionContext {
 public:
  explicit CriterionContext(unsigned workers = 1, std::uint64_t seed = 1);

  unsigned workers() const { return workers_; }
  std::uint64_t seed() const { return seed_; }
  /// Tables covering at least `limit`; built once and grown on demand.
  const SieveTables& tables(std::uint64_t limit);

 private:
  unsigned workers_;
  std::uint64_t seed_;
  std::unique_ptr<SieveTables> tables_;
};

struct Criterion {
  int id = 0;
  std::string name;
  std::string anchor;
  double budget_seconds = 0.0;  // wall-clock limit for a pass
  bool quick = false;           // part of the quick suite
  std::function<Check(CriterionContext&)> body;
};

const std::vector<Criterion>& acceptance_criteria();

/// Runs one criterion: fills name and anchor, appends the runtime to
/// `observed`, turns exceptions and budget overruns into failures.
Check run_criterion(const Criterion& criterion, CriterionContext& context);

/// "quick" runs the exact-identity criteria, "full" runs all of them.
/// InvalidArgument for other names.
VerificationReport verify_suite(const std::string& suite, CriterionContext& context);

}  // namespace qmoments::app
