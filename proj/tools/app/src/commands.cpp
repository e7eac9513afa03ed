#include "qmoments_app/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmoments/arith_sieves.hpp"
#include "qmoments/asymptotics.hpp"
#include "qmoments/char_engine.hpp"
#include "qmoments/diagonal_sums.hpp"
#include "qmoments/errors.hpp"
#include "qmoments/euler_series.hpp"
#include "qmoments/moment_engine.hpp"
#include "qmoments/numeric.hpp"
#include "qmoments_app/criteria.hpp"
#include "qmoments_app/ledger.hpp"
#include "qmoments_app/table.hpp"

namespace qmoments::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using qmoments::to_string;

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
constexpr std::uint64_t kCacheWorthyLimit = std::uint64_t{1} << 16;

struct Globals {
  bool json = false;
  std::string csv;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string sieve_limit = "0";
  int precision = 30;
  std::string cache_dir;
  std::string ledger;
  bool no_ledger = false;
};

struct Outcome {
  Table table;
  json extra = json::object();
  int exit_code = kExitOk;
};

std::string num(double v) { return format_double(v); }

std::vector<std::uint64_t> parse_counts(const std::vector<std::string>& items) {
  std::vector<std::uint64_t> out;
  for (const auto& s : items) out.push_back(parse_count(s));
  return out;
}

class Session {
 public:
  Session(const Globals& g, std::ostream& err) : g_(g), err_(err) {}

  unsigned workers() const {
    if (g_.workers > 0) return g_.workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }
  std::uint64_t seed() const { return g_.seed; }
  int precision() const { return std::clamp(g_.precision, 1, kHighFloatDigits); }

  fs::path cache_dir() const { return g_.cache_dir.empty() ? default_cache_dir() : fs::path(g_.cache_dir); }

  fs::path ledger_path() const {
    if (g_.no_ledger) return {};
    if (!g_.ledger.empty()) return g_.ledger;
    const auto dir = cache_dir();
    return dir.empty() ? fs::path{} : dir / "runs.ndjson";
  }

  const SieveTables& tables(std::uint64_t required) {
    const std::uint64_t limit = std::max({required, parse_count(g_.sieve_limit), std::uint64_t{100}});
    if (tables_ && tables_->limit() >= limit) return *tables_;
    const auto dir = cache_dir();
    const fs::path path = dir.empty() ? fs::path{} : dir / ("sieve-" + std::to_string(limit) + ".qmsv");
    if (limit >= kCacheWorthyLimit && !path.empty() && fs::exists(path)) {
      try {
        tables_ = std::make_unique<SieveTables>(SieveTables::load(path));
        return *tables_;
      } catch (const std::exception& e) {
        err_ << "warning: ignoring sieve cache " << path << ": " << e.what() << '\n';
      }
    }
    tables_ = std::make_unique<SieveTables>(SieveTables::build(limit));
    if (limit >= kCacheWorthyLimit && !path.empty()) {
      try {
        fs::create_directories(dir);
        tables_->save(path);
      } catch (const std::exception& e) {
        err_ << "warning: could not write sieve cache " << path << ": " << e.what() << '\n';
      }
    }
    return *tables_;
  }

 private:
  const Globals& g_;
  std::ostream& err_;
  std::unique_ptr<SieveTables> tables_;
};

using Runner = std::function<Outcome(Session&)>;

// ---- moment ----------------------------------------------------------------

struct MomentArgs {
  unsigned k = 2;
  std::string x = "1000";
  std::string y = "auto";
  std::vector<std::string> x_list;
  std::string block = "4194304";
  bool rearrangement = false;
};

Outcome run_moment(const MomentArgs& a, Session& s) {
  auto y_of = [&](std::uint64_t x) { return a.y == "auto" ? default_y_rule(x) : parse_count(a.y); };
  const MomentOptions opts{s.workers(), parse_count(a.block)};
  Outcome out;
  if (a.x_list.empty()) {
    const std::uint64_t x = parse_count(a.x);
    const std::uint64_t y = y_of(x);
    const auto& tables = s.tables(y);
    const auto r = moment(a.k, x, y, tables, opts);
    out.table.columns = {"k", "X", "Y", "S_k", "d_count", "runtime_ms"};
    std::vector<std::string> row{std::to_string(r.k), std::to_string(r.x), std::to_string(r.y),
                                 to_string(r.value), std::to_string(r.d_count), num(r.runtime_ms)};
    if (a.rearrangement) {
      const auto other = moment_via_rearrangement(a.k, x, y, tables, s.workers());
      out.table.columns.push_back("rearranged");
      out.table.columns.push_back("identity_holds");
      row.push_back(to_string(other));
      row.push_back(other == r.value ? "true" : "false");
      if (other != r.value) out.exit_code = kExitFailedChecks;
    }
    out.table.add_row(std::move(row));
    return out;
  }

  const auto xs = parse_counts(a.x_list);
  std::uint64_t ymax = 1;
  for (const auto x : xs) ymax = std::max(ymax, y_of(x));
  std::vector<CandidateConstant> cands;
  if (a.k == 2) {
    const double z2 = static_cast<double>(euler_constant("z2", 2, FactorVariant::definition, 1'000'000).value);
    cands = {{"4/pi^2*Z_2", 4.0 / kPi2 * z2}, {"3/pi^2*Z_2", 3.0 / kPi2 * z2}};
  } else if (a.k == 3) {
    for (const auto v : {FactorVariant::definition, FactorVariant::closed_form}) {
      const double z3 = static_cast<double>(euler_constant("z3", 3, v, 1'000'000).value);
      cands.push_back({"4/pi^2*Z_3(" + to_string(v) + ")", 4.0 / kPi2 * z3});
    }
  }
  const auto rows = convergence_experiment(a.k, xs, y_of, cands, s.tables(ymax), opts);
  out.table.columns = {"k", "X", "Y", "S_k", "d_count", "runtime_ms"};
  for (const auto& c : cands) out.table.columns.push_back("ratio_" + c.name);
  for (const auto& r : rows) {
    std::vector<std::string> row{std::to_string(a.k), std::to_string(r.x), std::to_string(r.y),
                                 to_string(r.s_k), std::to_string(r.d_count), num(r.runtime_ms)};
    for (const double ratio : r.ratios) row.push_back(num(ratio));
    out.table.add_row(std::move(row));
  }
  if (a.k >= 3) out.extra["caveat"] = "leading order only; lower coefficients of Q are not predicted";
  return out;
}

// ---- diag ------------------------------------------------------------------

struct DiagArgs {
  unsigned k = 2;
  std::string y = "100";
  std::string parity = "all";
  std::string method = "structured";
  std::vector<std::string> y_list;
};

Outcome run_diag(const DiagArgs& a, Session& s) {
  const Parity parity = parse_parity(a.parity);
  Outcome out;
  if (a.y_list.empty()) {
    const std::uint64_t y = parse_count(a.y);
    const auto r = diagonal_sum(a.k, y, parity, parse_diagonal_method(a.method), s.tables(y));
    out.table.columns = {"k", "y", "parity", "method", "value", "decimal"};
    out.table.add_row({std::to_string(r.k), std::to_string(r.y), to_string(r.parity), to_string(r.method),
                       to_string(r.value), num(to_double(r.value))});
    return out;
  }
  const auto ys = parse_counts(a.y_list);
  std::vector<CandidateConstant> cands;
  for (const auto v : {FactorVariant::definition, FactorVariant::closed_form}) {
    cands.push_back({to_string(v), static_cast<double>(euler_constant("z3", 3, v, 1'000'000).value)});
  }
  const std::uint64_t ymax = *std::max_element(ys.begin(), ys.end());
  const auto rows = diagonal_ratio_trend(a.k, ys, parity, cands, s.tables(ymax), s.workers());
  out.table.columns = {"y", "exact", "value", "normalized"};
  for (const auto& c : cands) out.table.columns.push_back("ratio_" + c.name);
  for (const auto& r : rows) {
    std::vector<std::string> row{std::to_string(r.y), r.exact ? "true" : "false", r.value_text, num(r.normalized)};
    for (const double ratio : r.ratios) row.push_back(num(ratio));
    out.table.add_row(std::move(row));
  }
  return out;
}

// ---- charsum / lemma31 -----------------------------------------------------

struct CharSumArgs {
  std::string z = "1000";
  std::vector<std::string> n{"1"};
};

std::uint64_t char_table_need(std::uint64_t z, std::uint64_t n) {
  return std::max(integer_root(z, 2), integer_root(n, 2)) + 1;
}

Outcome run_charsum(const CharSumArgs& a, Session& s) {
  const std::uint64_t z = parse_count(a.z);
  const auto ns = parse_counts(a.n);
  Outcome out;
  out.table.columns = {"z", "n", "value", "main", "residual", "normalized_residual"};
  for (const auto n : ns) {
    const auto r = char_sum(z, n, s.tables(char_table_need(z, n)), s.workers());
    const bool sq = r.predicted_main.has_value();
    const double norm = r.residual / std::pow(static_cast<double>(z), kSquareResidualExponent);
    out.table.add_row({std::to_string(z), std::to_string(n), std::to_string(r.value),
                       sq ? num(r.main_term()) : "", sq ? num(r.residual) : "", sq ? num(norm) : ""});
  }
  return out;
}

struct Lemma31Args {
  std::vector<std::string> z;
  std::string m_max = "15";
  std::string n_max = "225";
  std::string which = "both";
};

Outcome run_lemma31(const Lemma31Args& a, Session& s) {
  if (a.which != "square" && a.which != "nonsquare" && a.which != "both") {
    throw InvalidArgument("--case must be square, nonsquare or both");
  }
  const auto zs = a.z.empty() ? default_z_grid() : parse_counts(a.z);
  const std::uint64_t zmax = *std::max_element(zs.begin(), zs.end());
  const std::uint64_t m_max = parse_count(a.m_max);
  const std::uint64_t n_max = parse_count(a.n_max);
  const auto& tables = s.tables(std::max<std::uint64_t>(integer_root(zmax, 2), m_max) + 1);
  Outcome out;
  out.table.columns = {"case", "z", "n", "value", "main", "residual", "normalized"};
  if (a.which != "nonsquare") {
    double worst = 0.0;
    for (const auto z : zs) {
      const auto rep = square_case_report(z, m_max, tables, s.workers());
      worst = std::max(worst, rep.max_abs_normalized);
      for (const auto& r : rep.rows) {
        out.table.add_row({"square", std::to_string(r.z), std::to_string(r.n), std::to_string(r.value),
                           num(r.main), num(r.residual), num(r.normalized_residual)});
      }
    }
    out.extra["square_max_abs_normalized"] = num(worst);
  }
  if (a.which != "square") {
    std::vector<std::uint64_t> ns;
    for (const auto n : default_nonsquare_n_grid()) {
      if (n <= n_max) ns.push_back(n);
    }
    const auto rep = nonsquare_case_report(zs, ns, tables, s.workers());
    for (const auto& r : rep.rows) {
      out.table.add_row({"nonsquare", std::to_string(r.z), std::to_string(r.n), std::to_string(r.value), "", "",
                         num(r.ratio)});
    }
    json by_z = json::object();
    for (const auto& [z, m] : rep.max_ratio_by_z) by_z[std::to_string(z)] = num(m);
    out.extra["nonsquare_max_ratio_by_z"] = by_z;
  }
  return out;
}

// ---- constants / localcheck ------------------------------------------------

struct ConstantsArgs {
  std::string name = "z2";
  unsigned k = 2;
  std::string variant = "definition";
  std::string reading = "unordered";
  std::string prime_limit = "1000000";
};

Outcome run_constants(const ConstantsArgs& a, Session& s) {
  const auto c = euler_constant(a.name, a.k, parse_factor_variant(a.variant), parse_count(a.prime_limit),
                                s.workers(), parse_pair_reading(a.reading));
  const int digits = s.precision();
  Outcome out;
  out.table.columns = {"name",  "k",          "variant",        "reading",       "prime_limit",
                       "prime_count", "value", "tail_bound", "rounding_bound", "tail_constant"};
  out.table.add_row({c.name, std::to_string(c.k), to_string(c.variant), to_string(c.reading),
                     std::to_string(c.prime_cutoff), std::to_string(c.prime_count), format_high(c.value, digits),
                     format_high(c.tail_bound, 6), format_high(c.rounding_bound, 6), num(c.tail_constant)});
  return out;
}

struct LocalCheckArgs {
  std::vector<std::string> p{"2", "3", "5"};
  unsigned k = 3;
  unsigned degree = 8;
  std::string report;
};

inline constexpr unsigned kMaxLocalCheckDegree = 12;

Outcome run_localcheck(const LocalCheckArgs& a, Session&) {
  if (a.degree > kMaxLocalCheckDegree) throw InvalidArgument("--degree is capped at 12");
  const unsigned q = pair_count(a.k);
  if (a.k >= 2 && a.degree >= 4) {
    const double ordered_walks = std::pow(static_cast<double>(q), (a.degree - 2) / 2);
    if (ordered_walks > 1e6) throw ResourceLimit("ordered pair expansion too large at this k and degree");
  }
  Outcome out;
  out.table.columns = {"p", "k", "variant", "value", "decimal"};
  json diffs = json::array();
  const std::vector<std::pair<std::string, std::pair<FactorVariant, PairReading>>> variants = {
      {"definition", {FactorVariant::definition, PairReading::unordered}},
      {"closed-form", {FactorVariant::closed_form, PairReading::unordered}},
      {"middle-expansion/unordered", {FactorVariant::middle_expansion, PairReading::unordered}},
      {"middle-expansion/ordered", {FactorVariant::middle_expansion, PairReading::ordered}},
  };
  for (const auto p : parse_counts(a.p)) {
    json entry{{"p", p}, {"k", a.k}, {"degree", a.degree}};
    json values = json::object();
    for (const auto& [label, v] : variants) {
      const Rational value = local_factor_exact(p, a.k, v.first, v.second);
      values[label] = to_string(value);
      out.table.add_row({std::to_string(p), std::to_string(a.k), label, to_string(value), num(to_double(value))});
    }
    entry["values"] = values;

    const auto def = local_factor_E_definition(p, a.k, a.degree);
    entry["identity_holds"] = def * pair_geometric_inverse(a.k, a.degree) == local_factor_F(p, a.k, a.degree);
    const std::vector<std::pair<std::string, TruncatedSeries>> series = {
        {"definition", def},
        {"middle-expansion/unordered", local_factor_E_expansion(p, a.k, a.degree, PairReading::unordered)},
        {"middle-expansion/ordered", local_factor_E_expansion(p, a.k, a.degree, PairReading::ordered)},
    };
    std::map<TruncatedSeries::Exponents, bool> monomials;
    for (const auto& [label, ser] : series) {
      for (const auto& [e, c] : ser.terms()) monomials[e] = true;
    }
    json coeffs = json::array();
    for (const auto& [e, unused] : monomials) {
      std::vector<Rational> cs;
      for (const auto& [label, ser] : series) cs.push_back(ser.coefficient(e));
      if (cs[0] == cs[1] && cs[0] == cs[2]) continue;
      json row{{"monomial", std::vector<int>(e.begin(), e.begin() + a.k)}};
      for (std::size_t i = 0; i < series.size(); ++i) row[series[i].first] = to_string(cs[i]);
      coeffs.push_back(std::move(row));
    }
    entry["coefficient_differences"] = std::move(coeffs);
    diffs.push_back(std::move(entry));
  }
  out.extra["localcheck"] = diffs;
  if (!a.report.empty()) {
    std::ofstream f(a.report);
    if (!f) throw InvalidArgument("cannot write report " + a.report);
    f << diffs.dump(2) << '\n';
  }
  return out;
}

// ---- polytope / predict / perron -------------------------------------------

struct PolytopeArgs {
  unsigned k = 3;
  std::string x = "100";
  std::string method = "exact3";
  std::string samples = "1000000";
  std::vector<std::string> x_list;
};

std::vector<std::string> polytope_row(const PolytopeEstimate& e) {
  return {std::to_string(e.k),
          num(e.x),
          to_string(e.method),
          num(e.volume),
          e.exact_volume ? to_string(*e.exact_volume) : "",
          e.method == PolytopeMethod::montecarlo ? num(e.std_error) : "",
          num(e.normalized),
          std::to_string(e.samples),
          std::to_string(e.accepted),
          std::to_string(e.seed),
          e.k == 3 ? num(polytope_volume_k3_integrated(e.x)) : ""};
}

Outcome run_polytope(const PolytopeArgs& a, Session& s) {
  Outcome out;
  out.table.columns = {"k",       "x",        "method", "volume", "exact", "std_error", "normalized",
                       "samples", "accepted", "seed",   "integrated_k3"};
  auto parse_x = [](const std::string& t) {
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw InvalidArgument("bad x '" + t + "'");
      return v;
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad x '" + t + "'");
    }
  };
  const std::uint64_t samples = parse_count(a.samples);
  if (a.x_list.empty()) {
    const auto e = polytope_volume(a.k, parse_x(a.x), parse_polytope_method(a.method), samples, s.seed(),
                                   s.workers());
    out.table.add_row(polytope_row(e));
    return out;
  }
  std::vector<double> xs;
  for (const auto& t : a.x_list) xs.push_back(parse_x(t));
  const auto est = estimate_I(a.k, xs, samples, s.seed(), s.workers());
  for (const auto& e : est.trend) out.table.add_row(polytope_row(e));
  out.extra["I"] = {{"value", num(est.value)},
                    {"std_error", num(est.std_error)},
                    {"ci_low", num(est.ci_low)},
                    {"ci_high", num(est.ci_high)},
                    {"x", num(est.x)}};
  return out;
}

struct PredictArgs {
  unsigned k = 2;
  std::string x = "1000000";
  std::string y = "auto";
  std::string constants = "definition";
  std::string reading = "unordered";
  std::string prime_limit = "1000000";
  std::string samples = "4000000";
  bool compare = false;
};

Outcome run_predict(const PredictArgs& a, Session& s) {
  const std::uint64_t x = parse_count(a.x);
  const std::uint64_t y = a.y == "auto" ? default_y_rule(x) : parse_count(a.y);
  ConstantSource src;
  src.variant = parse_factor_variant(a.constants);
  src.reading = parse_pair_reading(a.reading);
  src.prime_cutoff = parse_count(a.prime_limit);
  src.samples = parse_count(a.samples);
  src.seed = s.seed();
  const auto c = main_term_constant(a.k, src, s.workers());
  const double pred = predict_main_term(c, static_cast<double>(x), static_cast<double>(y));
  Outcome out;
  out.table.columns = {"k", "X", "Y", "constants", "Z", "euler", "geometric", "degQ", "prediction"};
  std::vector<std::string> row{std::to_string(a.k), std::to_string(x), std::to_string(y), to_string(src.variant),
                               num(c.z), num(c.euler), num(c.geometric), std::to_string(c.deg_q), num(pred)};
  if (a.compare) {
    const auto r = moment(a.k, x, y, s.tables(y), {s.workers()});
    out.table.columns.push_back("S_k");
    out.table.columns.push_back("ratio");
    row.push_back(to_string(r.value));
    row.push_back(num(static_cast<double>(r.value) / pred));
  }
  out.table.add_row(std::move(row));
  if (c.leading_order_only) out.extra["caveat"] = "leading order only; lower coefficients of Q are not predicted";
  return out;
}

struct PerronArgs {
  std::string ymin = "1000";
  std::string ymax = "10000000";
  std::string parity = "all";
  std::string prime_limit = "10000000";
};

Outcome run_perron(const PerronArgs& a, Session& s) {
  const Parity parity = parse_parity(a.parity);
  const auto grid = decade_grid(parse_count(a.ymin), parse_count(a.ymax));
  if (grid.size() < 2) throw InvalidArgument("the Y range must contain at least two powers of ten");
  const auto z2 = euler_constant("z2", 2, FactorVariant::definition, parse_count(a.prime_limit), s.workers());
  const double c = static_cast<double>(z2.value) * (parity == Parity::odd ? 0.75 : 1.0);
  const auto fit = perron_residual_fit(grid, parity, c, s.tables(grid.back()));
  Outcome out;
  out.table.columns = {"y", "D_2", "constant", "residual", "normalized_residual", "slope"};
  for (const auto& r : fit.rows) {
    out.table.add_row({std::to_string(r.y), num(r.d2), num(c), num(r.residual), num(r.normalized), num(fit.slope)});
  }
  out.extra["slope"] = num(fit.slope);
  out.extra["slope_limit"] = num(kPerronSlopeLimit);
  out.extra["within_limit"] = fit.slope <= kPerronSlopeLimit;
  return out;
}

// ---- verify / sieve --------------------------------------------------------

struct VerifyArgs {
  std::string suite = "quick";
  std::string report;
};

Outcome run_verify(const VerifyArgs& a, Session& s) {
  CriterionContext ctx(s.workers(), s.seed());
  const auto rep = verify_suite(a.suite, ctx);
  Outcome out;
  out.table.columns = {"name", "status", "observed", "expected", "tolerance"};
  for (const auto& c : rep.checks) out.table.add_row({c.name, to_string(c.status), c.observed, c.expected, c.tolerance});
  out.extra["report"] = rep.to_json();
  if (!a.report.empty()) {
    std::ofstream f(a.report);
    if (!f) throw InvalidArgument("cannot write report " + a.report);
    f << rep.to_json().dump(2) << '\n';
  }
  out.exit_code = rep.passed() ? kExitOk : kExitFailedChecks;
  return out;
}

struct SieveArgs {
  std::string limit = "1000000";
  std::string out_path;
  std::string in_path;
};

Outcome sieve_summary(const SieveTables& t, const std::string& path) {
  Outcome out;
  out.table.columns = {"limit", "prime_count", "mobius_prefix", "path"};
  std::string prefix;
  for (std::uint64_t n = 1; n <= std::min<std::uint64_t>(t.limit(), 10); ++n) {
    prefix += (n > 1 ? " " : "") + std::to_string(t.mobius(n));
  }
  out.table.add_row({std::to_string(t.limit()), std::to_string(t.primes().size()), prefix, path});
  return out;
}

Outcome run_sieve_build(const SieveArgs& a, Session& s) {
  const std::uint64_t limit = parse_count(a.limit);
  const auto t = SieveTables::build(limit);
  fs::path path = a.out_path;
  if (path.empty()) {
    const auto dir = s.cache_dir();
    if (dir.empty()) throw InvalidArgument("no --out given and no cache directory configured");
    fs::create_directories(dir);
    path = dir / ("sieve-" + std::to_string(limit) + ".qmsv");
  }
  t.save(path);
  return sieve_summary(t, path.string());
}

Outcome run_sieve_load(const SieveArgs& a, Session&) {
  return sieve_summary(SieveTables::load(fs::path(a.in_path)), a.in_path);
}

// ---- plumbing --------------------------------------------------------------

std::map<std::string, std::string> collect_parameters(const CLI::App& app) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : app.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "config" || names.front() == "version") {
      continue;
    }
    std::string value;
    const auto& res = opt->results();
    if (!res.empty()) {
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    out[(app.get_parent() ? app.get_name() + "." : "") + names.front()] = value;
  }
  return out;
}

std::map<std::string, std::string> flatten_outputs(const Outcome& o) {
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < o.table.rows.size(); ++r) {
    for (std::size_t c = 0; c < o.table.columns.size(); ++c) {
      const auto& col = o.table.columns[c];
      if (col.find("runtime") != std::string::npos) continue;
      if (col == "observed") continue;  // carries wall-clock timings
      out[col + "[" + std::to_string(r) + "]"] = o.table.rows[r][c];
    }
  }
  return out;
}

void add_count(CLI::App* sub, const std::string& name, std::string& target, const std::string& help,
               bool required = false) {
  auto* opt = sub->add_option(name, target, help)->capture_default_str();
  if (required) opt->required();
}

}  // namespace

std::uint64_t parse_count(const std::string& text) {
  if (text.empty()) throw InvalidArgument("empty count");
  const bool plain = text.find_first_not_of("0123456789") == std::string::npos;
  if (plain) {
    if (text.size() > 19) throw InvalidArgument("count '" + text + "' too large");
    return std::stoull(text);
  }
  std::size_t used = 0;
  long double v = 0;
  try {
    v = std::stold(text, &used);
  } catch (const std::logic_error&) {
    throw InvalidArgument("not a count: '" + text + "'");
  }
  if (used != text.size() || !(v >= 0) || v != std::floor(v) || v > 1.8e19L) {
    throw InvalidArgument("not a non-negative integer count: '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

fs::path default_cache_dir() {
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "qmoments";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "qmoments";
  return {};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto started_wall = std::chrono::system_clock::now();
  const auto started = std::chrono::steady_clock::now();

  CLI::App app{"Exact moments of quadratic twists of the Moebius function, their constants and checks",
               "qmoments"};
  app.set_version_flag("--version", QMOMENTS_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Configuration file with key = value lines");

  Globals g;
  app.add_flag("--json", g.json, "Print results as JSON instead of CSV");
  app.add_option("--csv", g.csv, "Also write the result table to this CSV file");
  app.add_option("--seed", g.seed, "Seed for Monte Carlo runs")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--sieve-limit", g.sieve_limit, "Minimum sieve limit to build")->capture_default_str();
  app.add_option("--precision", g.precision, "Significant digits printed for high-precision constants")
      ->check(CLI::Range(1, kHighFloatDigits))
      ->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "Directory for sieve caches and the run ledger")
      ->envname("QML_CACHE_DIR");
  app.add_option("--ledger", g.ledger, "Run ledger path (default: <cache-dir>/runs.ndjson)");
  app.add_flag("--no-ledger", g.no_ledger, "Do not append to the run ledger");

  Runner runner;
  CLI::App* selected = nullptr;
  auto bind = [&](CLI::App* sub, auto args, auto fn) {
    sub->final_callback([&runner, &selected, sub, args, fn] {
      selected = sub;
      runner = [args, fn](Session& s) { return fn(*args, s); };
    });
  };

  auto moment_args = std::make_shared<MomentArgs>();
  {
    auto* sub = app.add_subcommand("moment", "Exact S_k(X, Y)");
    sub->add_option("--k", moment_args->k, "Moment order")->required()->check(CLI::Range(2u, 8u));
    add_count(sub, "--x", moment_args->x, "Range of d");
    add_count(sub, "--y", moment_args->y, "Length of the inner sum, or auto for floor(X^(1/4))");
    sub->add_option("--x-list", moment_args->x_list, "Convergence run over these X")->delimiter(',');
    add_count(sub, "--block", moment_args->block, "Width of d-blocks");
    sub->add_flag("--rearrangement", moment_args->rearrangement, "Also evaluate the rearranged sum");
    bind(sub, moment_args, run_moment);
  }
  auto diag_args = std::make_shared<DiagArgs>();
  {
    auto* sub = app.add_subcommand("diag", "Diagonal sums D_k(Y) of f");
    sub->add_option("--k", diag_args->k, "Number of variables")->required()->check(CLI::Range(2u, 6u));
    add_count(sub, "--y", diag_args->y, "Upper bound of each variable");
    sub->add_option("--parity", diag_args->parity, "all or odd")->capture_default_str();
    sub->add_option("--method", diag_args->method, "structured or bruteforce")->capture_default_str();
    sub->add_option("--y-list", diag_args->y_list, "D_3(Y)/Y^{3/2} trend over these Y")->delimiter(',');
    bind(sub, diag_args, run_diag);
  }
  auto charsum_args = std::make_shared<CharSumArgs>();
  {
    auto* sub = app.add_subcommand("charsum", "T(z, n) = sum over odd square-free d <= z of (8d/n)");
    add_count(sub, "--z", charsum_args->z, "Range of d");
    sub->add_option("--n", charsum_args->n, "Modulus or comma-separated list")->delimiter(',')->capture_default_str();
    bind(sub, charsum_args, run_charsum);
  }
  auto lemma_args = std::make_shared<Lemma31Args>();
  {
    auto* sub = app.add_subcommand("lemma31", "Square and non-square character-sum reports");
    sub->add_option("--z", lemma_args->z, "z values (default 1e3,1e4,1e5,1e6)")->delimiter(',');
    add_count(sub, "--m-max", lemma_args->m_max, "Largest odd square-free m for n = m^2");
    add_count(sub, "--n-max", lemma_args->n_max, "Largest odd non-square n");
    sub->add_option("--case", lemma_args->which, "square, nonsquare or both")->capture_default_str();
    bind(sub, lemma_args, run_lemma31);
  }
  auto const_args = std::make_shared<ConstantsArgs>();
  {
    auto* sub = app.add_subcommand("constants", "Euler-product constants with tail bounds");
    sub->add_option("--name", const_args->name, "z2, z3, hk0 or e1")->capture_default_str();
    sub->add_option("--k", const_args->k, "k for hk0")->capture_default_str();
    sub->add_option("--variant", const_args->variant, "definition, closed-form or middle-expansion")
        ->capture_default_str();
    sub->add_option("--reading", const_args->reading, "unordered or ordered pair sets")->capture_default_str();
    add_count(sub, "--prime-limit", const_args->prime_limit, "Product over p <= P");
    bind(sub, const_args, run_constants);
  }
  auto local_args = std::make_shared<LocalCheckArgs>();
  {
    auto* sub = app.add_subcommand("localcheck", "Compare local factor variants coefficient by coefficient");
    sub->add_option("--p", local_args->p, "Primes, comma-separated")->delimiter(',')->capture_default_str();
    sub->add_option("--k", local_args->k, "Number of variables")->check(CLI::Range(2u, 6u))->capture_default_str();
    sub->add_option("--degree", local_args->degree, "Truncation degree")->capture_default_str();
    sub->add_option("--report", local_args->report, "Write the JSON diff here");
    bind(sub, local_args, run_localcheck);
  }
  auto poly_args = std::make_shared<PolytopeArgs>();
  {
    auto* sub = app.add_subcommand("polytope", "Volume of A(x) and the constant I");
    sub->add_option("--k", poly_args->k, "Number of variables")->capture_default_str();
    sub->add_option("--x", poly_args->x, "Evaluation point")->capture_default_str();
    sub->add_option("--method", poly_args->method, "exact3 or mc")->capture_default_str();
    add_count(sub, "--samples", poly_args->samples, "Monte Carlo samples");
    sub->add_option("--x-list", poly_args->x_list, "Estimate I along these x")->delimiter(',');
    bind(sub, poly_args, run_polytope);
  }
  auto predict_args = std::make_shared<PredictArgs>();
  {
    auto* sub = app.add_subcommand("predict", "Main-term prediction (4/pi^2) Z X Y^{k/2} (log Y)^degQ");
    sub->add_option("--k", predict_args->k, "Moment order")->check(CLI::Range(2u, 6u))->capture_default_str();
    add_count(sub, "--x", predict_args->x, "X");
    add_count(sub, "--y", predict_args->y, "Y, or auto");
    sub->add_option("--constants", predict_args->constants, "Local factor variant")->capture_default_str();
    sub->add_option("--reading", predict_args->reading, "unordered or ordered pair sets")->capture_default_str();
    add_count(sub, "--prime-limit", predict_args->prime_limit, "Euler product cutoff");
    add_count(sub, "--samples", predict_args->samples, "Monte Carlo samples for I when k >= 4");
    sub->add_flag("--compare", predict_args->compare, "Also compute S_k exactly and report the ratio");
    bind(sub, predict_args, run_predict);
  }
  auto perron_args = std::make_shared<PerronArgs>();
  {
    auto* sub = app.add_subcommand("perron", "Residual exponent of D_2(Y) - c Y");
    add_count(sub, "--ymin", perron_args->ymin, "Smallest power of ten");
    add_count(sub, "--ymax", perron_args->ymax, "Largest Y");
    sub->add_option("--parity", perron_args->parity, "all or odd")->capture_default_str();
    add_count(sub, "--prime-limit", perron_args->prime_limit, "Euler product cutoff for Z_2");
    bind(sub, perron_args, run_perron);
  }
  auto verify_args = std::make_shared<VerifyArgs>();
  {
    auto* sub = app.add_subcommand("verify", "Run the verification suite");
    sub->add_option("--suite", verify_args->suite, "quick or full")->capture_default_str();
    sub->add_option("--report", verify_args->report, "Write the JSON report here");
    bind(sub, verify_args, run_verify);
  }
  auto sieve_args = std::make_shared<SieveArgs>();
  {
    auto* sub = app.add_subcommand("sieve", "Build or inspect sieve cache files");
    sub->require_subcommand(1);
    auto* build = sub->add_subcommand("build", "Build tables and write a cache file");
    add_count(build, "--limit", sieve_args->limit, "Sieve limit");
    build->add_option("--out", sieve_args->out_path, "Output file (default: cache directory)");
    bind(build, sieve_args, run_sieve_build);
    auto* load = sub->add_subcommand("load", "Load a cache file and print a summary");
    load->add_option("path,--path", sieve_args->in_path, "Cache file")->required();
    bind(load, sieve_args, run_sieve_load);
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << QMOMENTS_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalidArgument;
  }
  if (!runner) {
    err << app.help();
    return kExitInvalidArgument;
  }

  Session session(g, err);
  Outcome outcome;
  try {
    outcome = runner(session);
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitInvalidArgument;
  } catch (const Unsupported& e) {
    err << "unsupported: " << e.what() << '\n';
    return kExitInvalidArgument;
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << '\n';
    return kExitResourceLimit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailedChecks;
  }
  const double runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

  if (g.json) {
    json doc{{"command", selected->get_name()}, {"rows", outcome.table.to_json()}};
    for (const auto& [key, value] : outcome.extra.items()) doc[key] = value;
    out << doc.dump(2) << '\n';
  } else {
    outcome.table.write_csv(out);
  }
  if (!g.csv.empty()) {
    std::ofstream f(g.csv);
    if (!f) {
      err << "cannot write CSV " << g.csv << '\n';
      return kExitInvalidArgument;
    }
    outcome.table.write_csv(f);
  }

  if (const auto ledger = session.ledger_path(); !ledger.empty()) {
    RunRecord rec;
    rec.timestamp = rfc3339_utc(started_wall);
    rec.command_line = args;
    rec.command_line.insert(rec.command_line.begin(), "qmoments");
    rec.parameters = collect_parameters(app);
    for (const CLI::App* cur = selected; cur && cur != &app; cur = cur->get_parent()) {
      rec.parameters.merge(collect_parameters(*cur));
    }
    rec.outputs = flatten_outputs(outcome);
    rec.runtime_ms = runtime_ms;
    rec.version = QMOMENTS_VERSION;
    try {
      static std::mutex writers_mutex;
      static std::map<fs::path, std::unique_ptr<LedgerWriter>> writers;
      LedgerWriter* writer = nullptr;
      {
        std::lock_guard lock(writers_mutex);
        auto& slot = writers[ledger];
        if (!slot) slot = std::make_unique<LedgerWriter>(ledger);
        writer = slot.get();
      }
      writer->append(rec);
    } catch (const std::exception& e) {
      err << "warning: ledger not written: " << e.what() << '\n';
    }
  }
  return outcome.exit_code;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace qmoments::app
