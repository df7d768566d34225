#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include "dnahm/dnahm.hpp"
#include "dnahm/io.hpp"

using namespace dnahm;
using io::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kInput = 2, kBreakdown = 3 };

int diagnose(int code, json j) {
  std::cerr << j.dump() << "\n";
  return code;
}

int input_error(const std::string& what, std::optional<double> value = std::nullopt,
                const std::string& code = "InputError") {
  json j{{"status", "input_error"}, {"error", code}, {"message", what}};
  if (value) j["value"] = *value;
  return diagnose(kInput, j);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidStepList, "cannot parse '" + item + "' as a number");
    }
    if (used != item.size()) throw Error(ErrorCode::InvalidStepList, "cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ExampleOpts {
  double p = 1.0;
  std::string out;
};

int run_example(const ExampleOpts& o) {
  const auto t = fixtures::trig_solution(o.p);
  auto doc = io::make_dn_document(t.chain, t.metric);
  const auto ranks = fixtures::boundary_rank_check(t.chain);
  doc.metadata = {{"generator", "trig"},
                  {"p", o.p},
                  {"phi", t.params.phi},
                  {"boundary_ranks", {{"left", ranks.left}, {"right", ranks.right}}}};
  io::write_json_file(o.out, io::to_json(doc));
  std::cout << "wrote " << t.chain.size() << " sites to " << o.out << "\n";
  return kPass;
}

// ---------------------------------------------------------------------------

struct EvolveOpts {
  std::string in;
  std::string out;
  std::size_t steps = 10;
  bool backward = false;
  std::optional<std::uint64_t> seed;
  std::size_t k = 2;
  double spread = 0.05;
  double tol = kBreakdownTol;
};

int run_evolve(const EvolveOpts& o) {
  Seed seed;
  json meta = json::object();
  if (!o.in.empty()) {
    const auto doc = io::read_document(o.in);
    if (doc.seed) {
      seed = *doc.seed;
    } else if (doc.triple) {
      seed = seed_from_triple(doc.triple->A, doc.triple->B, doc.triple->D);
    } else {
      return input_error("evolve expects a document of form 'seed' or 'triple', got '" + doc.form + "'");
    }
    meta["input"] = o.in;
  } else if (o.seed) {
    seed = fixtures::random_reality_seed(o.k, *o.seed, o.spread);
    meta["seed"] = *o.seed;
    meta["spread"] = o.spread;
  } else {
    return input_error("evolve needs --in or --seed");
  }
  if (o.steps == 0) return input_error("--steps must be positive");
  const Direction dir = o.backward ? Direction::Backward : Direction::Forward;
  const EvolveResult r = evolve(seed, o.steps, o.tol, dir);
  auto doc = io::make_ba_document(r.chain);
  meta["steps"] = o.steps;
  meta["direction"] = o.backward ? "backward" : "forward";
  if (r.breakdown_at) {
    meta["breakdown_at"] = *r.breakdown_at;
    meta["lambda_min"] = r.lambda_min;
  }
  doc.metadata = meta;
  io::write_json_file(o.out, io::to_json(doc));
  if (r.breakdown_at) {
    return diagnose(kBreakdown, {{"status", "breakdown"},
                                 {"breakdown_at", *r.breakdown_at},
                                 {"lambda_min", r.lambda_min},
                                 {"sites_written", r.chain.betas.size()}});
  }
  std::cout << "wrote " << r.chain.betas.size() << " sites to " << o.out << "\n";
  return kPass;
}

// ---------------------------------------------------------------------------

struct VerifyOpts {
  std::string in;
  std::string metric;
  std::string report;
  double tol = 1e-9;
  cplx zeta{0.5, 0.0};
};

MetricSequence load_metric(const std::string& path, std::size_t k) {
  const json j = io::read_json_file(path);
  try {
    if (j.is_array()) return io::metric_from_json(j, k);
    if (j.is_object() && j.contains("metric")) return io::metric_from_json(j.at("metric"), k);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  throw Error(ErrorCode::ParseError, path + ": expected a metric array or an object with 'metric'");
}

int run_verify(const VerifyOpts& o) {
  const auto doc = io::read_document(o.in);
  const DNChain chain = io::as_dn_chain(doc);
  std::optional<MetricSequence> metric = doc.metric;
  if (!o.metric.empty()) metric = load_metric(o.metric, chain.k);
  if (metric) validate_metric(*metric, chain.size());

  const double base = std::max(1.0, chain_scale(chain));
  const double threshold = o.tol * base * base;
  json checks = json::array();
  json failed = json::array();
  auto check = [&](const std::string& name, double value) {
    const bool ok = value <= threshold;
    checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", ok}});
    if (!ok) failed.push_back(name);
  };

  json links = json::array();
  double dn = 0.0;
  for (const auto& l : dn_residuals(chain)) {
    links.push_back({{"from", l.from}, {"commA", l.commA}, {"commD", l.commD}, {"bLeft", l.bLeft}, {"bRight", l.bRight}});
    dn = std::max(dn, l.max());
  }
  check("dn_residual", dn);
  if (doc.ba) {
    const auto ba = max_ba_residuals(*doc.ba);
    check("ba_eq11", ba.eq11);
    check("ba_eq12", ba.eq12);
  }
  if (metric) check("reality_residual", reality_residual(chain, *metric));

  json lax = json::array();
  if (chain.size() >= 3) {
    const std::vector<cplx> etas{{0.7, 0.3}, std::polar(1.0, std::numbers::pi / 3.0), {-1.3, 0.2}};
    double comm = 0.0, fact = 0.0;
    for (const cplx eta : etas) {
      const double c = commutator_residual(chain, eta, o.zeta);
      comm = std::max(comm, c);
      lax.push_back({{"eta", io::complex_to_json(eta)}, {"commutator", c}});
      for (int r = chain.first_index() + 1; r < chain.last_index(); ++r) {
        fact = std::max({fact, m_factorization_residual(chain, r, eta, o.zeta),
                         m_factorization_residual(chain, r, eta, o.zeta, Ordering::MinusPlus)});
      }
    }
    check("lax_commutator", comm);
    check("m_factorization", fact);
  }

  const auto ranks = fixtures::boundary_rank_check(chain);
  const bool pass = failed.empty();
  const json report{{"format_version", io::kFormatVersion},
                    {"input", o.in},
                    {"k", chain.k},
                    {"sites", chain.size()},
                    {"tol", o.tol},
                    {"scale", base},
                    {"pass", pass},
                    {"failed", failed},
                    {"checks", checks},
                    {"links", links},
                    {"lax_samples", lax},
                    {"boundary_ranks", {{"left", ranks.left}, {"right", ranks.right}}}};
  if (!o.report.empty()) io::write_json_file(o.report, report);
  if (!pass) return diagnose(kFail, {{"status", "fail"}, {"failed", failed}});
  std::cout << "pass: " << checks.size() << " checks within " << fmt(threshold) << "\n";
  return kPass;
}

// ---------------------------------------------------------------------------

struct SpectralOpts {
  std::string in;
  std::string out;
  std::string drift;
  std::size_t samples = 8;
  std::size_t antidiagonal = 16;
  double radius = 1.0;
};

int run_spectral(const SpectralOpts& o) {
  const DNChain chain = io::as_dn_chain(io::read_document(o.in));
  const auto surfaces = surface_series(chain);
  const auto drift = drift_series(chain);
  json sites = json::array();
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    sites.push_back({{"r", chain.sites[i].r}, {"surface", io::surface_to_json(surfaces[i])}});
  }
  const SpectralSurface& s0 = surfaces.front();
  json out{{"format_version", io::kFormatVersion},
           {"k", chain.k},
           {"sites", sites},
           {"max_abs_drift", *std::max_element(drift.begin(), drift.end())}};
  if (o.samples > 0) {
    const auto cs = curve_samples(s0, o.samples, o.radius);
    const auto sm = smoothness_report(s0, cs.points);
    json pts = json::array(), flagged = json::array(), degenerate = json::array();
    for (const auto& p : cs.points) pts.push_back({io::complex_to_json(p.eta), io::complex_to_json(p.zeta)});
    for (const auto& p : sm.flagged) flagged.push_back({io::complex_to_json(p.eta), io::complex_to_json(p.zeta)});
    for (const auto& e : cs.degenerate_etas) degenerate.push_back(io::complex_to_json(e));
    out["curve_samples"] = pts;
    out["degenerate_etas"] = degenerate;
    out["smoothness"] = {{"min_gradient", sm.min_gradient}, {"flagged", flagged}};
  }
  if (o.antidiagonal > 0) out["antidiagonal_clearance"] = antidiagonal_clearance(s0, o.antidiagonal);
  io::write_json_file(o.out, out);
  if (!o.drift.empty()) {
    std::ostringstream csv;
    csv << "site,max_abs_drift\n";
    for (std::size_t i = 0; i < drift.size(); ++i) csv << chain.sites[i].r << "," << fmt(drift[i]) << "\n";
    io::write_text_file(o.drift, csv.str());
  }
  std::cout << "wrote " << surfaces.size() << " surfaces to " << o.out << "\n";
  return kPass;
}

// ---------------------------------------------------------------------------

struct ContinuumOpts {
  std::size_t k = 2;
  std::string h = "0.04,0.02,0.01";
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  std::string init = "random";
  double scale = 0.15;
  std::vector<double> f{0.3, 0.4, 0.5};
  double z_max = 1.0;
  std::size_t jobs = 1;
  std::string out;
};

int run_continuum(const ContinuumOpts& o) {
  const std::vector<double> hs = parse_list(o.h);
  NahmTriple initial;
  if (o.init == "random") {
    initial = random_nahm_triple(o.k, o.seed, o.scale);
  } else if (o.init == "euler") {
    if (o.k != 2) return input_error("--init euler needs --k 2");
    initial = euler_top(o.f[0], o.f[1], o.f[2]);
  } else if (o.init == "zero") {
    initial = {CMatrix(o.k, o.k), CMatrix(o.k, o.k), CMatrix(o.k, o.k)};
  } else {
    return input_error("--init must be random, euler or zero");
  }
  const auto rows = residual_scaling(initial, hs, o.steps, o.z_max, o.jobs);
  std::ostringstream csv;
  csv << "h,R11,R12,ratio11,ratio12\n";
  for (const auto& r : rows) {
    csv << fmt(r.h) << "," << fmt(r.R11) << "," << fmt(r.R12) << "," << (r.ratio11 ? fmt(*r.ratio11) : "") << ","
        << (r.ratio12 ? fmt(*r.ratio12) : "") << "\n";
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    io::write_text_file(o.out, csv.str());
  }
  const ScalingRow& last = rows.back();
  json bad = json::array();
  auto in_band = [](const std::optional<double>& x) { return !x || (*x >= 0.4 && *x <= 0.6); };
  if (!in_band(last.ratio11)) bad.push_back({{"family", "R11"}, {"ratio", *last.ratio11}});
  if (!in_band(last.ratio12)) bad.push_back({{"family", "R12"}, {"ratio", *last.ratio12}});
  if (!bad.empty()) return diagnose(kFail, {{"status", "fail"}, {"band", {0.4, 0.6}}, {"ratios", bad}});
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Nahm chains: generate, evolve, verify, analyze"};
  app.require_subcommand(1);

  ExampleOpts ex;
  auto* c_ex = app.add_subcommand("example", "write the trigonometric solution with its metric");
  c_ex->add_option("--p", ex.p, "mass (2p a positive integer)")->required();
  c_ex->add_option("--out", ex.out, "output chain file")->required();

  EvolveOpts ev;
  auto* c_ev = app.add_subcommand("evolve", "evolve a seed in discrete time");
  c_ev->add_option("--in", ev.in, "seed or triple document");
  c_ev->add_option("--seed", ev.seed, "random reality-class seed instead of --in");
  c_ev->add_option("--k", ev.k, "matrix size for --seed")->check(CLI::PositiveNumber);
  c_ev->add_option("--spread", ev.spread, "spread for --seed")->check(CLI::NonNegativeNumber);
  c_ev->add_option("--steps", ev.steps, "number of steps")->required();
  c_ev->add_flag("--backward", ev.backward, "evolve towards negative sites");
  c_ev->add_option("--tol", ev.tol, "relative breakdown threshold");
  c_ev->add_option("--out", ev.out, "output chain file")->required();

  VerifyOpts ve;
  auto* c_ve = app.add_subcommand("verify", "check a chain against the equations");
  c_ve->add_option("--in", ve.in, "chain document")->required();
  c_ve->add_option("--metric", ve.metric, "metric file (array or object with 'metric')");
  c_ve->add_option("--report", ve.report, "JSON report path");
  c_ve->add_option("--tol", ve.tol, "tolerance, scaled by max(1, max entry)^2");

  SpectralOpts sp;
  auto* c_sp = app.add_subcommand("spectral", "spectral surfaces and curve diagnostics");
  c_sp->add_option("--in", sp.in, "chain document")->required();
  c_sp->add_option("--out", sp.out, "surface JSON")->required();
  c_sp->add_option("--drift", sp.drift, "drift CSV");
  c_sp->add_option("--samples", sp.samples, "eta samples on the curve");
  c_sp->add_option("--radius", sp.radius, "|eta| for curve samples")->check(CLI::PositiveNumber);
  c_sp->add_option("--antidiagonal", sp.antidiagonal, "samples per radius for anti-diagonal clearance");

  ContinuumOpts co;
  auto* c_co = app.add_subcommand("continuum", "residual scaling of embedded Nahm data");
  c_co->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  c_co->add_option("--k", co.k, "matrix size")->check(CLI::PositiveNumber);
  c_co->add_option("--h", co.h, "comma-separated decreasing step sizes");
  c_co->add_option("--steps", co.steps, "RK4 steps over the z range")->check(CLI::PositiveNumber);
  c_co->add_option("--seed", co.seed, "seed for random data");
  c_co->add_option("--init", co.init, "random | euler | zero");
  c_co->add_option("--scale", co.scale, "entry size of random data");
  c_co->add_option("--f", co.f, "Euler-top amplitudes f1 f2 f3")->expected(3);
  c_co->add_option("--zmax", co.z_max, "length of the z range")->check(CLI::PositiveNumber);
  c_co->add_option("--jobs", co.jobs, "worker threads")->check(CLI::PositiveNumber);
  c_co->add_option("--out", co.out, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return input_error(e.what(), std::nullopt, "UsageError");
  }

  try {
    if (c_ex->parsed()) return run_example(ex);
    if (c_ev->parsed()) return run_evolve(ev);
    if (c_ve->parsed()) return run_verify(ve);
    if (c_sp->parsed()) return run_spectral(sp);
    if (c_co->parsed()) return run_continuum(co);
  } catch (const Error& e) {
    json j{{"status", "input_error"}, {"error", to_string(e.code())}, {"message", e.what()}};
    if (std::isfinite(e.value())) j["value"] = e.value();
    return diagnose(kInput, j);
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
  return kInput;
}
